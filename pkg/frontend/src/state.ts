import type { DatasetDescriptor, LoadState, SelectionResponse, TrendKind } from './types.js';

export interface SessionParams {
  k: number;
  alpha: number;
  beta: number;
  aggregation: string;
  gamma: number;
  sigma: number;
}

export type Listener = (event: StateEvent) => void;

export type StateEvent =
  | { type: 'selection'; response: SelectionResponse }
  | { type: 'navigate'; frame: number }
  | { type: 'focus-range'; start: number; end: number }
  | { type: 'params'; params: SessionParams }
  | { type: 'labels' }
  | { type: 'frame-state'; frame: number; state: LoadState }
  | { type: 'error'; message: string };

/**
 * Client-side session state. The salient set is only ever replaced by a
 * server selection response; the UI never derives one locally.
 */
export class UiSessionState {
  dataset: DatasetDescriptor | null = null;
  focusStart = 0;
  focusEnd = 0;
  currentFrame = 0;
  params: SessionParams = {
    k: 5,
    alpha: 1.0,
    beta: 0.0,
    aggregation: 'avg',
    gamma: 0.3,
    sigma: 1.0,
  };
  region: { x0: number; y0: number; x1: number; y1: number } | null = null;
  pinned = new Set<number>();
  excluded = new Set<number>();
  salient: number[] = [];
  preloadOrder: number[] = [];
  /** mirror of per-frame load state within the focus range */
  frameState = new Map<number, LoadState>();
  /** object URLs of frames already downloaded this session */
  frameCache = new Map<number, string>();
  trendKind: TrendKind = 'structural';
  lastSelection: SelectionResponse | null = null;

  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  emit(event: StateEvent): void {
    for (const listener of [...this.listeners]) listener(event);
  }

  setDataset(dataset: DatasetDescriptor): void {
    this.dataset = dataset;
    this.focusStart = 0;
    this.focusEnd = dataset.t - 1;
    this.currentFrame = 0;
    this.pinned.clear();
    this.excluded.clear();
    this.salient = [];
    this.frameState.clear();
    this.frameCache.clear();
  }

  setFocusRange(start: number, end: number): void {
    if (!this.dataset) return;
    const lo = Math.max(0, Math.min(start, end));
    const hi = Math.min(this.dataset.t - 1, Math.max(start, end));
    if (hi - lo < 1) return; // a focus range spans at least two frames
    this.focusStart = lo;
    this.focusEnd = hi;
    this.currentFrame = Math.min(Math.max(this.currentFrame, lo), hi);
    this.emit({ type: 'focus-range', start: lo, end: hi });
  }

  /** alpha and beta move together: one slider, beta = 1 - alpha. */
  setAlpha(alpha: number): void {
    const a = Math.min(1, Math.max(0, alpha));
    this.params = { ...this.params, alpha: a, beta: 1 - a };
    this.emit({ type: 'params', params: this.params });
  }

  setK(k: number): void {
    this.params = { ...this.params, k };
    this.emit({ type: 'params', params: this.params });
  }

  setAggregation(aggregation: string): void {
    this.params = { ...this.params, aggregation };
    this.emit({ type: 'params', params: this.params });
  }

  navigate(frame: number): void {
    const clamped = Math.min(Math.max(frame, this.focusStart), this.focusEnd);
    this.currentFrame = clamped;
    this.emit({ type: 'navigate', frame: clamped });
  }

  pin(frame: number): void {
    this.excluded.delete(frame);
    this.pinned.add(frame);
    this.emit({ type: 'labels' });
  }

  unpin(frame: number): void {
    this.pinned.delete(frame);
    this.emit({ type: 'labels' });
  }

  exclude(frame: number): void {
    this.pinned.delete(frame);
    this.excluded.add(frame);
    this.emit({ type: 'labels' });
  }

  applySelection(response: SelectionResponse): void {
    this.salient = [...response.steps];
    this.preloadOrder = [...response.preload_order];
    this.lastSelection = response;
    for (const entry of response.frame_status) {
      // frames the client already holds stay loaded; fresh salient marks win
      const cached = this.frameCache.has(entry.index);
      if (entry.state === 'salient') {
        this.frameState.set(entry.index, 'salient');
      } else if (cached) {
        this.frameState.set(entry.index, 'loaded');
      } else {
        this.frameState.set(entry.index, 'unloaded');
      }
    }
    this.emit({ type: 'selection', response });
  }

  markFrame(frame: number, state: LoadState): void {
    this.frameState.set(frame, state);
    this.emit({ type: 'frame-state', frame, state });
  }

  cacheFrame(frame: number, url: string): void {
    this.frameCache.set(frame, url);
    const current = this.frameState.get(frame);
    this.frameState.set(frame, current === 'salient' ? 'salient' : 'loaded');
    this.emit({ type: 'frame-state', frame, state: this.frameState.get(frame)! });
  }
}
