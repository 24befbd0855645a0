import { ApiError, ReviewApi } from './api';
import { bindShortcuts } from './keyboard';
import { TimelineModel } from './timeline';
import type { ClipDetail, ClipSummary, Verdict } from './types';

const TIMELINE_WIDTH_FALLBACK = 600; // px, when no layout is available (tests)

interface DragState {
  index: number;
  edge: 'start' | 'end';
}

/**
 * Single-clip review screen with a pending-queue sidebar.
 *
 * The app intentionally keeps all mutable review state in the
 * TimelineModel; submitting posts the derived verdict and, on success,
 * advances to the next pending clip. Failed submissions leave local state
 * untouched so nothing is lost.
 */
export class ReviewApp {
  api: ReviewApi;
  root: HTMLElement;
  reviewerId = 'reviewer';
  clip: ClipDetail | null = null;
  timeline: TimelineModel | null = null;
  queue: ClipSummary[] = [];
  private drag: DragState | null = null;
  private unbindShortcuts: (() => void) | null = null;

  constructor(root: HTMLElement, api: ReviewApi = new ReviewApi()) {
    this.root = root;
    this.api = api;
    this.renderSkeleton();
  }

  async start(): Promise<void> {
    this.unbindShortcuts = bindShortcuts(this.root.ownerDocument, {
      stepFrame: (d) => this.stepFrame(d),
      accept: () => void this.submitWith('accept'),
      reject: () => void this.rejectAndSubmit(),
      submit: () => void this.submit(),
      split: () => this.split(),
      reset: () => this.resetTimeline(),
    });
    await this.refreshQueue();
    const next = this.queue.find((c) => c.status === 'pending') ?? this.queue[0];
    if (next) {
      await this.loadClip(next.clip_id);
    } else {
      this.status('no clips to review');
    }
  }

  dispose(): void {
    this.unbindShortcuts?.();
  }

  // ---- data loading -------------------------------------------------

  async refreshQueue(): Promise<void> {
    const page = await this.api.listClips({ page_size: 500 });
    this.queue = page.clips;
    this.renderQueue(page.pending, page.done);
  }

  async loadClip(clipId: string): Promise<void> {
    this.clip = await this.api.clipDetail(clipId);
    this.timeline = new TimelineModel(
      this.clip.candidates,
      this.clip.fps,
      this.clip.duration_sec,
    );
    this.renderClipHeader();
    this.scrub(0);
    this.renderTimeline();
    this.status(`loaded ${clipId}`);
  }

  async advanceQueue(): Promise<void> {
    await this.refreshQueue();
    const next = this.queue.find(
      (c) => c.status === 'pending' && c.clip_id !== this.clip?.clip_id,
    );
    if (next) {
      await this.loadClip(next.clip_id);
    } else {
      this.clip = null;
      this.timeline = null;
      this.status('queue drained: all clips reviewed');
    }
  }

  // ---- scrubbing ----------------------------------------------------

  /** Move the playhead; both panes always show the same frame index. */
  scrub(frame: number): void {
    if (!this.clip || !this.timeline) return;
    const clamped = this.timeline.setPlayhead(frame);
    const unmarked = this.el<HTMLImageElement>('#pane-unmarked');
    const marked = this.el<HTMLImageElement>('#pane-marked');
    unmarked.src = this.api.frameUrl(this.clip.clip_id, 'unmarked', clamped);
    marked.src = this.api.frameUrl(this.clip.clip_id, 'marked', clamped);
    this.el<HTMLInputElement>('#scrubber').value = String(clamped);
    this.el('#frame-label').textContent =
      `frame ${clamped} / ${this.clip.n_frames - 1}  (${(clamped / this.clip.fps).toFixed(3)}s)`;
    this.renderPlayhead();
  }

  stepFrame(delta: number): void {
    if (!this.timeline) return;
    this.scrub(this.timeline.playheadFrame + delta);
  }

  // ---- timeline editing ----------------------------------------------

  split(): void {
    if (!this.timeline) return;
    if (this.timeline.splitAtPlayhead()) {
      this.renderTimeline();
      this.status('interval split at playhead');
    } else {
      this.status('playhead is not inside an interval');
    }
  }

  clearAll(): void {
    if (!this.timeline) return;
    this.timeline.clearAll();
    this.renderTimeline();
  }

  resetTimeline(): void {
    if (!this.timeline) return;
    this.timeline.reset();
    this.renderTimeline();
    this.status('working intervals reset to candidates');
  }

  beginDrag(index: number, edge: 'start' | 'end'): void {
    this.drag = { index, edge };
  }

  dragTo(clientX: number): void {
    if (!this.drag || !this.timeline) return;
    const track = this.el('#timeline-track');
    const rect = track.getBoundingClientRect();
    const width = rect.width || TIMELINE_WIDTH_FALLBACK;
    const time = ((clientX - rect.left) / width) * this.timeline.durationSec;
    this.timeline.dragBoundary(this.drag.index, this.drag.edge, time);
    this.renderTimeline();
  }

  endDrag(): void {
    this.drag = null;
  }

  // ---- submission ----------------------------------------------------

  currentVerdict(): Verdict | null {
    return this.timeline ? this.timeline.verdict() : null;
  }

  async submit(): Promise<void> {
    const verdict = this.currentVerdict();
    if (verdict) await this.submitWith(verdict);
  }

  /** Accept shortcut resets edits first; reject clears the timeline. */
  async rejectAndSubmit(): Promise<void> {
    if (!this.timeline) return;
    this.clearAll();
    await this.submitWith(this.timeline.verdict());
  }

  async submitWith(verdict: Verdict): Promise<void> {
    if (!this.clip || !this.timeline) return;
    if (verdict === 'accept' && this.timeline.dirty) {
      // The dirty timeline makes this an adjust; mirror the server rule
      // instead of sending an inconsistent accept.
      verdict = this.timeline.verdict();
    }
    const note = this.el<HTMLTextAreaElement>('#note').value;
    try {
      await this.api.submitDecision(this.clip.clip_id, {
        reviewer_id: this.reviewerId,
        verdict,
        final_intervals: this.timeline.normalizedWorking(),
        note,
      });
    } catch (error) {
      const message = error instanceof ApiError ? error.detail : String(error);
      this.status(`submit failed: ${message}`);
      return;
    }
    this.el<HTMLTextAreaElement>('#note').value = '';
    this.status(`submitted ${verdict} for ${this.clip.clip_id}`);
    await this.advanceQueue();
  }

  // ---- rendering -----------------------------------------------------

  private renderSkeleton(): void {
    this.root.innerHTML = `
      <div class="layout">
        <aside id="queue">
          <h2>Queue</h2>
          <div id="queue-counts"></div>
          <ul id="queue-list"></ul>
        </aside>
        <main>
          <header id="clip-header"><h1>visible-time review</h1></header>
          <section class="panes">
            <figure><img id="pane-unmarked" alt="unmarked frame" /><figcaption>unmarked</figcaption></figure>
            <figure><img id="pane-marked" alt="marked frame" /><figcaption>marked</figcaption></figure>
          </section>
          <section class="scrub">
            <input id="scrubber" type="range" min="0" max="59" value="0" step="1" />
            <span id="frame-label"></span>
          </section>
          <section class="timeline">
            <div id="timeline-track"></div>
            <div id="timeline-readout"></div>
          </section>
          <section class="controls">
            <button id="btn-accept">accept (a)</button>
            <button id="btn-reject">reject: no visibility (r)</button>
            <button id="btn-split">split (s)</button>
            <button id="btn-add">add interval</button>
            <button id="btn-reset">reset (u)</button>
            <button id="btn-submit">submit (enter)</button>
            <textarea id="note" placeholder="note (optional)"></textarea>
          </section>
          <div id="status" role="status"></div>
        </main>
      </div>`;
    this.el('#scrubber').addEventListener('input', (event) => {
      this.scrub(Number((event.target as HTMLInputElement).value));
    });
    this.el('#btn-accept').addEventListener('click', () => void this.submitWith('accept'));
    this.el('#btn-reject').addEventListener('click', () => void this.rejectAndSubmit());
    this.el('#btn-split').addEventListener('click', () => this.split());
    this.el('#btn-add').addEventListener('click', () => {
      if (this.timeline?.addAtPlayhead()) this.renderTimeline();
    });
    this.el('#btn-reset').addEventListener('click', () => this.resetTimeline());
    this.el('#btn-submit').addEventListener('click', () => void this.submit());
    const doc = this.root.ownerDocument;
    doc.addEventListener('mousemove', (event) => this.dragTo((event as MouseEvent).clientX));
    doc.addEventListener('mouseup', () => this.endDrag());
  }

  private renderClipHeader(): void {
    if (!this.clip) return;
    this.el('#clip-header').innerHTML = `
      <h1>${this.clip.clip_id}</h1>
      <p>${this.clip.object_category} (${this.clip.semantic_group}) —
         ${this.clip.anomaly_status}, defect: ${this.clip.defect_type},
         status: ${this.clip.status}</p>`;
    const scrubber = this.el<HTMLInputElement>('#scrubber');
    scrubber.max = String(this.clip.n_frames - 1);
  }

  private renderQueue(pending: number, done: number): void {
    this.el('#queue-counts').textContent = `${pending} pending / ${done} done`;
    const list = this.el('#queue-list');
    list.innerHTML = '';
    for (const clip of this.queue.slice(0, 100)) {
      const item = this.root.ownerDocument.createElement('li');
      item.textContent = `${clip.clip_id} [${clip.status}]`;
      item.className = clip.status;
      item.addEventListener('click', () => void this.loadClip(clip.clip_id));
      list.appendChild(item);
    }
  }

  renderTimeline(): void {
    if (!this.timeline) return;
    const track = this.el('#timeline-track');
    track.innerHTML = '';
    const doc = this.root.ownerDocument;
    this.timeline.working.forEach(([start, end], index) => {
      const bar = doc.createElement('div');
      bar.className = 'interval';
      bar.dataset.index = String(index);
      bar.style.left = `${(start / this.timeline!.durationSec) * 100}%`;
      bar.style.width = `${((end - start) / this.timeline!.durationSec) * 100}%`;
      for (const edge of ['start', 'end'] as const) {
        const handle = doc.createElement('div');
        handle.className = `handle handle-${edge}`;
        handle.dataset.index = String(index);
        handle.dataset.edge = edge;
        handle.addEventListener('mousedown', (event) => {
          event.preventDefault();
          this.beginDrag(index, edge);
        });
        bar.appendChild(handle);
      }
      const remove = doc.createElement('button');
      remove.className = 'remove';
      remove.textContent = 'x';
      remove.addEventListener('click', () => {
        this.timeline!.removeInterval(index);
        this.renderTimeline();
      });
      bar.appendChild(remove);
      track.appendChild(bar);
    });
    this.renderPlayhead();
    const verdict = this.timeline.verdict();
    const pairs = this.timeline
      .normalizedWorking()
      .map(([s, e]) => `[${s.toFixed(3)}, ${e.toFixed(3)}]`)
      .join(' ');
    this.el('#timeline-readout').textContent =
      `working: ${pairs || '(empty)'} — verdict if submitted: ${verdict}` +
      (this.timeline.dirty ? ' (edited)' : '');
  }

  private renderPlayhead(): void {
    if (!this.timeline) return;
    const track = this.el('#timeline-track');
    let playhead = track.querySelector<HTMLElement>('.playhead');
    if (!playhead) {
      playhead = this.root.ownerDocument.createElement('div');
      playhead.className = 'playhead';
      track.appendChild(playhead);
    }
    const t = this.timeline.playheadFrame / this.timeline.fps;
    playhead.style.left = `${(t / this.timeline.durationSec) * 100}%`;
  }

  status(message: string): void {
    this.el('#status').textContent = message;
  }

  el<T extends HTMLElement = HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  }
}
