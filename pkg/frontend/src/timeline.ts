import type { IntervalPair, Verdict } from './types';

/**
 * Editable working copy of a clip's candidate intervals.
 *
 * All edits snap to the 1/fps frame grid and preserve ordering and
 * disjointness by clamping, so the model can never hold an invalid set.
 * The verdict is derived from the relationship between the (normalized)
 * working set and the candidates, mirroring the server's decision
 * invariants: untouched -> accept, cleared -> reject_no_visibility,
 * anything else -> adjust.
 */
export class TimelineModel {
  readonly candidates: IntervalPair[];
  working: IntervalPair[];
  playheadFrame = 0;

  constructor(
    candidates: IntervalPair[],
    readonly fps: number = 30,
    readonly durationSec: number = 2.0,
  ) {
    this.candidates = candidates.map(([s, e]) => [s, e]);
    this.working = candidates.map(([s, e]) => [s, e]);
  }

  get nFrames(): number {
    return Math.round(this.durationSec * this.fps);
  }

  get minLength(): number {
    return 1 / this.fps;
  }

  /** Snap a time to the nearest frame boundary, clamped to the clip. */
  snap(time: number): number {
    const frame = Math.round(time * this.fps);
    const clamped = Math.min(Math.max(frame, 0), this.nFrames);
    return clamped / this.fps;
  }

  setPlayhead(frame: number): number {
    this.playheadFrame = Math.min(Math.max(Math.round(frame), 0), this.nFrames - 1);
    return this.playheadFrame;
  }

  stepPlayhead(delta: number): number {
    return this.setPlayhead(this.playheadFrame + delta);
  }

  /**
   * Drag one boundary of working[index] to a new time. The time snaps to
   * the frame grid and is clamped so the interval keeps at least one frame
   * of length and never crosses its neighbors (dragging past a neighbor
   * abuts it instead).
   */
  dragBoundary(index: number, edge: 'start' | 'end', newTime: number): IntervalPair {
    const interval = this.working[index];
    if (!interval) throw new Error(`no interval at index ${index}`);
    let time = this.snap(newTime);
    if (edge === 'start') {
      const lowerBound = index > 0 ? this.working[index - 1][1] : 0;
      const upperBound = interval[1] - this.minLength;
      time = Math.min(Math.max(time, lowerBound), upperBound);
      interval[0] = time;
    } else {
      const upperBound =
        index < this.working.length - 1 ? this.working[index + 1][0] : this.durationSec;
      const lowerBound = interval[0] + this.minLength;
      time = Math.min(Math.max(time, lowerBound), upperBound);
      interval[1] = time;
    }
    return [interval[0], interval[1]];
  }

  /**
   * Split the interval under the playhead into two, leaving a one-frame gap
   * at the split point so the halves stay disjoint after normalization.
   * Returns false when the playhead is not strictly inside an interval or
   * either half would be shorter than one frame.
   */
  splitAtPlayhead(): boolean {
    const t = this.playheadFrame / this.fps;
    for (let i = 0; i < this.working.length; i++) {
      const [start, end] = this.working[i];
      if (t > start && t < end) {
        const left: IntervalPair = [start, t];
        const right: IntervalPair = [t + this.minLength, end];
        if (left[1] - left[0] < this.minLength - 1e-9) return false;
        if (right[1] - right[0] < this.minLength - 1e-9) return false;
        this.working.splice(i, 1, left, right);
        return true;
      }
    }
    return false;
  }

  /** Insert a five-frame interval at the playhead if there is room. */
  addAtPlayhead(): boolean {
    const start = this.snap(this.playheadFrame / this.fps);
    const end = Math.min(start + 5 * this.minLength, this.durationSec);
    if (end - start < this.minLength - 1e-9) return false;
    const candidate: IntervalPair = [start, end];
    for (const [s, e] of this.working) {
      if (candidate[0] < e && s < candidate[1]) return false; // would overlap
    }
    this.working.push(candidate);
    this.working.sort((a, b) => a[0] - b[0]);
    return true;
  }

  removeInterval(index: number): void {
    this.working.splice(index, 1);
  }

  clearAll(): void {
    this.working = [];
  }

  reset(): void {
    this.working = this.candidates.map(([s, e]) => [s, e]);
  }

  /** Sorted working set with touching/overlapping intervals merged, exactly
   * like the server normalizes submitted intervals. */
  normalizedWorking(): IntervalPair[] {
    const sorted = this.working.map(([s, e]): IntervalPair => [s, e]).sort((a, b) => a[0] - b[0]);
    const merged: IntervalPair[] = [];
    for (const [start, end] of sorted) {
      const last = merged[merged.length - 1];
      if (last && start <= last[1]) {
        last[1] = Math.max(last[1], end);
      } else {
        merged.push([start, end]);
      }
    }
    return merged;
  }

  get dirty(): boolean {
    return !pairsEqual(this.normalizedWorking(), this.candidates);
  }

  /** Verdict implied by the current working state. */
  verdict(): Verdict {
    const normalized = this.normalizedWorking();
    if (pairsEqual(normalized, this.candidates)) return 'accept';
    if (normalized.length === 0) return 'reject_no_visibility';
    return 'adjust';
  }
}

export function pairsEqual(a: IntervalPair[], b: IntervalPair[]): boolean {
  if (a.length !== b.length) return false;
  return a.every(([s, e], i) => s === b[i][0] && e === b[i][1]);
}
