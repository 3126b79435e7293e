import type { UiSessionState } from './state.js';

export interface FrameLayer {
  frame: number;
  opacity: number;
}

/**
 * Compose the layers to draw for time step t from the cached frames only:
 * a cached frame renders exactly; anything else cross-fades between its
 * nearest cached neighbors, so fidelity improves as preloads arrive.
 */
export function frameLayers(t: number, cached: Set<number>, start: number, end: number): FrameLayer[] {
  if (cached.has(t)) return [{ frame: t, opacity: 1 }];
  let below: number | null = null;
  let above: number | null = null;
  for (let i = t - 1; i >= start; i -= 1) {
    if (cached.has(i)) {
      below = i;
      break;
    }
  }
  for (let i = t + 1; i <= end; i += 1) {
    if (cached.has(i)) {
      above = i;
      break;
    }
  }
  if (below === null && above === null) return [];
  if (below === null) return [{ frame: above as number, opacity: 1 }];
  if (above === null) return [{ frame: below, opacity: 1 }];
  const weight = (t - below) / (above - below);
  return [
    { frame: below, opacity: 1 },
    { frame: above, opacity: weight },
  ];
}

/**
 * Cyclic playback across the focus range rendered as two stacked images;
 * the top image's opacity carries the cross-fade weight.
 */
export class PlaybackView {
  readonly element: HTMLDivElement;
  private readonly bottomImg: HTMLImageElement;
  private readonly topImg: HTMLImageElement;
  private timer: ReturnType<typeof setInterval> | null = null;
  private speed = 1;
  private position: number;

  constructor(
    private readonly state: UiSessionState,
    document: Document,
    private readonly intervalMs = 250,
  ) {
    this.element = document.createElement('div');
    this.element.className = 'playback';
    this.bottomImg = document.createElement('img');
    this.bottomImg.className = 'playback-bottom';
    this.topImg = document.createElement('img');
    this.topImg.className = 'playback-top';
    this.element.appendChild(this.bottomImg);
    this.element.appendChild(this.topImg);
    this.position = state.focusStart;
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  get currentPosition(): number {
    return this.position;
  }

  play(): void {
    if (this.timer) return;
    this.timer = setInterval(() => this.tick(), this.intervalMs / this.speed);
  }

  pause(): void {
    if (this.timer) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  setSpeed(speed: number): void {
    this.speed = Math.min(8, Math.max(0.25, speed));
    if (this.timer) {
      this.pause();
      this.play();
    }
  }

  tick(): void {
    this.position += 1;
    if (this.position > this.state.focusEnd) this.position = this.state.focusStart;
    this.renderFrame(this.position);
  }

  renderFrame(t: number): FrameLayer[] {
    const cached = new Set(this.state.frameCache.keys());
    const layers = frameLayers(t, cached, this.state.focusStart, this.state.focusEnd);
    if (layers.length === 0) {
      this.bottomImg.removeAttribute('src');
      this.topImg.removeAttribute('src');
      this.topImg.style.opacity = '0';
      return layers;
    }
    this.bottomImg.src = this.state.frameCache.get(layers[0].frame) ?? '';
    this.bottomImg.dataset.frame = String(layers[0].frame);
    if (layers.length === 2) {
      this.topImg.src = this.state.frameCache.get(layers[1].frame) ?? '';
      this.topImg.dataset.frame = String(layers[1].frame);
      this.topImg.style.opacity = layers[1].opacity.toFixed(4);
    } else {
      this.topImg.removeAttribute('src');
      delete this.topImg.dataset.frame;
      this.topImg.style.opacity = '0';
    }
    return layers;
  }
}
