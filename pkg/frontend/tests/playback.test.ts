import { beforeEach, describe, expect, it } from 'vitest';

import { frameLayers, PlaybackView } from '../src/playback.js';
import { UiSessionState } from '../src/state.js';

describe('frameLayers composition', () => {
  it('cached frame renders exactly', () => {
    expect(frameLayers(5, new Set([0, 5, 9]), 0, 9)).toEqual([{ frame: 5, opacity: 1 }]);
  });

  it('endpoints-only cache degrades to a pure crossfade', () => {
    const cached = new Set([0, 9]);
    for (let t = 1; t < 9; t += 1) {
      const layers = frameLayers(t, cached, 0, 9);
      expect(layers).toEqual([
        { frame: 0, opacity: 1 },
        { frame: 9, opacity: t / 9 },
      ]);
    }
  });

  it('fidelity improves as more frames arrive', () => {
    const sparse = frameLayers(4, new Set([0, 9]), 0, 9);
    const dense = frameLayers(4, new Set([0, 3, 5, 9]), 0, 9);
    expect(sparse[1].frame).toBe(9);
    expect(dense).toEqual([
      { frame: 3, opacity: 1 },
      { frame: 5, opacity: 0.5 },
    ]);
  });

  it('one-sided cache clamps to the nearest frame', () => {
    expect(frameLayers(2, new Set([6]), 0, 9)).toEqual([{ frame: 6, opacity: 1 }]);
    expect(frameLayers(8, new Set([6]), 0, 9)).toEqual([{ frame: 6, opacity: 1 }]);
  });

  it('empty cache renders nothing', () => {
    expect(frameLayers(3, new Set(), 0, 9)).toEqual([]);
  });
});

describe('PlaybackView', () => {
  let state: UiSessionState;

  beforeEach(() => {
    state = new UiSessionState();
    state.setDataset({
      id: 'd', variable: 'v', width: 4, height: 4, t: 10,
      extent: [0, 0, 1, 1], timespan: ['a', 'b'],
    });
  });

  it('renders a crossfade pair with only endpoints cached', () => {
    state.frameCache.set(0, 'blob:frame0');
    state.frameCache.set(9, 'blob:frame9');
    const view = new PlaybackView(state, document);
    const layers = view.renderFrame(3);
    expect(layers.length).toBe(2);
    const top = view.element.querySelector('.playback-top') as HTMLImageElement;
    const bottom = view.element.querySelector('.playback-bottom') as HTMLImageElement;
    expect(bottom.dataset.frame).toBe('0');
    expect(top.dataset.frame).toBe('9');
    expect(Number(top.style.opacity)).toBeCloseTo(3 / 9, 4);
  });

  it('renders exact frames once everything is cached', () => {
    for (let t = 0; t <= 9; t += 1) state.frameCache.set(t, `blob:frame${t}`);
    const view = new PlaybackView(state, document);
    for (let t = 0; t <= 9; t += 1) {
      const layers = view.renderFrame(t);
      expect(layers).toEqual([{ frame: t, opacity: 1 }]);
    }
    const top = view.element.querySelector('.playback-top') as HTMLImageElement;
    expect(top.style.opacity).toBe('0');
  });

  it('cycles within the focus range and honors pause and speed', () => {
    state.setFocusRange(2, 5);
    state.frameCache.set(2, 'blob:a');
    state.frameCache.set(5, 'blob:b');
    const view = new PlaybackView(state, document, 100);
    view.play();
    expect(view.playing).toBe(true);
    for (let i = 0; i < 6; i += 1) view.tick();
    expect(view.currentPosition).toBeGreaterThanOrEqual(2);
    expect(view.currentPosition).toBeLessThanOrEqual(5);
    view.setSpeed(4);
    expect(view.playing).toBe(true);
    view.pause();
    expect(view.playing).toBe(false);
  });
});
