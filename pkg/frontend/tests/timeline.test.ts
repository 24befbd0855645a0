import { describe, expect, it } from 'vitest';

import { TimelineModel, pairsEqual } from '../src/timeline';
import type { IntervalPair } from '../src/types';

const CANDIDATES: IntervalPair[] = [
  [0.5, 1.0],
  [1.2, 1.8],
];

describe('TimelineModel snapping', () => {
  it('snaps times to the 1/30 grid', () => {
    const model = new TimelineModel(CANDIDATES);
    expect(model.snap(0.516)).toBeCloseTo(0.5, 12);
    expect(model.snap(0.52)).toBeCloseTo(16 / 30, 12);
    expect(model.snap(-0.4)).toBe(0);
    expect(model.snap(5.0)).toBe(2.0);
  });

  it('clamps the playhead to [0, 59]', () => {
    const model = new TimelineModel(CANDIDATES);
    expect(model.setPlayhead(70)).toBe(59);
    expect(model.setPlayhead(-3)).toBe(0);
    expect(model.stepPlayhead(5)).toBe(5);
  });
});

describe('TimelineModel dragging', () => {
  it('drags a start boundary onto the grid', () => {
    const model = new TimelineModel(CANDIDATES);
    const [start] = model.dragBoundary(0, 'start', 0.607);
    expect(start).toBeCloseTo(18 / 30, 12);
  });

  it('clamps an inverted drag to one frame of length', () => {
    const model = new TimelineModel(CANDIDATES);
    const [start, end] = model.dragBoundary(0, 'start', 1.9);
    expect(end).toBe(1.0);
    expect(start).toBeCloseTo(1.0 - 1 / 30, 12);
  });

  it('clamps an end drag at the next interval start (abut)', () => {
    const model = new TimelineModel(CANDIDATES);
    const [, end] = model.dragBoundary(0, 'end', 1.6);
    expect(end).toBe(1.2);
  });

  it('clamps a start drag at the previous interval end', () => {
    const model = new TimelineModel(CANDIDATES);
    const [start] = model.dragBoundary(1, 'start', 0.2);
    expect(start).toBe(1.0);
  });

  it('keeps the working set valid under random drags', () => {
    const model = new TimelineModel(CANDIDATES);
    let seed = 12345;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2 ** 31;
      return seed / 2 ** 31;
    };
    for (let i = 0; i < 500; i++) {
      const index = Math.floor(rand() * model.working.length);
      const edge = rand() < 0.5 ? 'start' : 'end';
      model.dragBoundary(index, edge, rand() * 3 - 0.5);
      for (const [s, e] of model.working) {
        expect(s).toBeGreaterThanOrEqual(0);
        expect(e).toBeLessThanOrEqual(2.0);
        expect(e - s).toBeGreaterThanOrEqual(1 / 30 - 1e-9);
      }
      for (let k = 1; k < model.working.length; k++) {
        expect(model.working[k][0]).toBeGreaterThanOrEqual(model.working[k - 1][1]);
      }
    }
  });
});

describe('TimelineModel split/add/remove', () => {
  it('splits under the playhead with a one-frame gap', () => {
    const model = new TimelineModel([[0.5, 1.5]]);
    model.setPlayhead(30); // 1.0s
    expect(model.splitAtPlayhead()).toBe(true);
    expect(model.working.length).toBe(2);
    expect(model.working[0][1]).toBeCloseTo(1.0, 12);
    expect(model.working[1][0]).toBeCloseTo(1.0 + 1 / 30, 12);
    // Halves stay disjoint even after merge-normalization.
    expect(model.normalizedWorking().length).toBe(2);
  });

  it('refuses to split outside an interval or too near an edge', () => {
    const model = new TimelineModel([[0.5, 1.5]]);
    model.setPlayhead(0);
    expect(model.splitAtPlayhead()).toBe(false);
    model.setPlayhead(45); // exactly the end boundary
    expect(model.splitAtPlayhead()).toBe(false);
  });

  it('adds an interval at the playhead only when there is room', () => {
    const model = new TimelineModel([[0.5, 1.0]]);
    model.setPlayhead(45);
    expect(model.addAtPlayhead()).toBe(true);
    expect(model.working.length).toBe(2);
    model.setPlayhead(20); // inside the existing interval
    expect(model.addAtPlayhead()).toBe(false);
  });

  it('removes and clears intervals', () => {
    const model = new TimelineModel(CANDIDATES);
    model.removeInterval(0);
    expect(model.working.length).toBe(1);
    model.clearAll();
    expect(model.working.length).toBe(0);
  });
});

describe('verdict derivation', () => {
  it('untouched timeline implies accept', () => {
    const model = new TimelineModel(CANDIDATES);
    expect(model.dirty).toBe(false);
    expect(model.verdict()).toBe('accept');
  });

  it('edited timeline implies adjust', () => {
    const model = new TimelineModel(CANDIDATES);
    model.dragBoundary(0, 'start', 0.6);
    expect(model.dirty).toBe(true);
    expect(model.verdict()).toBe('adjust');
  });

  it('cleared timeline implies reject_no_visibility', () => {
    const model = new TimelineModel(CANDIDATES);
    model.clearAll();
    expect(model.verdict()).toBe('reject_no_visibility');
  });

  it('empty candidates untouched still accepts', () => {
    const model = new TimelineModel([]);
    expect(model.verdict()).toBe('accept');
  });

  it('reset restores accept', () => {
    const model = new TimelineModel(CANDIDATES);
    model.dragBoundary(0, 'end', 0.9);
    model.reset();
    expect(model.verdict()).toBe('accept');
  });

  it('edits that normalize back to the candidates imply accept', () => {
    // Split then undo by dragging the halves back together would merge on
    // the server; the model mirrors that by comparing normalized sets.
    const model = new TimelineModel([[0.5, 1.5]]);
    model.setPlayhead(30);
    model.splitAtPlayhead();
    model.dragBoundary(1, 'start', 1.0); // abut: [0.5,1.0][1.0,1.5]
    expect(model.normalizedWorking()).toEqual([[0.5, 1.5]]);
    expect(model.verdict()).toBe('accept');
  });
});

describe('pairsEqual', () => {
  it('compares by value', () => {
    expect(pairsEqual([[0.1, 0.2]], [[0.1, 0.2]])).toBe(true);
    expect(pairsEqual([[0.1, 0.2]], [[0.1, 0.3]])).toBe(false);
    expect(pairsEqual([], [[0.1, 0.2]])).toBe(false);
  });
});
