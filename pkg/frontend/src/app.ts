import { ApiClient, ApiRequestError } from './api.js';
import { ControlPanel } from './controls.js';
import { PlaybackView } from './playback.js';
import { LatentScatter } from './scatter.js';
import { UiSessionState } from './state.js';
import { Timeline } from './timeline.js';
import { TrendCharts } from './trends.js';

const STATUS_POLL_MS = 500;

/**
 * Wires the views to the selection service. Every salient set shown comes
 * from a POST /select response; preloading follows the server's order and
 * marks frames loading/loaded on the shared state.
 */
export class RasterStepsApp {
  readonly state = new UiSessionState();
  readonly timeline: Timeline;
  readonly trends: TrendCharts;
  readonly scatter: LatentScatter;
  readonly playback: PlaybackView;
  readonly controls: ControlPanel;
  readonly root: HTMLElement;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private preloading = false;

  constructor(
    readonly api: ApiClient,
    root: HTMLElement,
    private readonly document: Document,
  ) {
    this.root = root;
    this.timeline = new Timeline(this.state, document);
    this.trends = new TrendCharts(this.state, this.api, document);
    this.scatter = new LatentScatter(this.state, this.api, document);
    this.playback = new PlaybackView(this.state, document);
    this.controls = new ControlPanel(this.state, document);
    this.controls.setChangeHandler(() => void this.requestSelection());
    this.timeline.setRangeHandler(() => void this.requestSelection());
    root.appendChild(this.controls.element);
    root.appendChild(this.timeline.element);
    root.appendChild(this.trends.element);
    root.appendChild(this.scatter.element as unknown as Node);
    root.appendChild(this.playback.element);
  }

  async start(datasetId?: string): Promise<void> {
    const datasets = await this.api.listDatasets();
    if (datasets.length === 0) throw new Error('no datasets registered');
    const chosen = datasetId
      ? datasets.find((d) => d.id === datasetId)
      : datasets[0];
    if (!chosen) throw new Error(`dataset ${datasetId} not found`);
    this.state.setDataset(chosen);
    await this.requestSelection();
    await this.trends.refreshTemporal();
    await this.trends.refreshRelative();
    await this.scatter.refresh();
    this.pollTimer = setInterval(() => this.timeline.render(), STATUS_POLL_MS);
  }

  stop(): void {
    if (this.pollTimer) clearInterval(this.pollTimer);
    this.playback.pause();
  }

  async requestSelection(): Promise<void> {
    const { dataset, params } = this.state;
    if (!dataset) return;
    try {
      const response = await this.api.select(dataset.id, {
        range: { start: this.state.focusStart, end: this.state.focusEnd },
        k: params.k,
        alpha: params.alpha,
        beta: params.beta,
        aggregation: params.aggregation,
        region: this.state.region,
        pinned: [...this.state.pinned].sort((a, b) => a - b),
        excluded: [...this.state.excluded].sort((a, b) => a - b),
        gamma: params.gamma,
        sigma: params.sigma,
      });
      this.state.applySelection(response);
      void this.preload();
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.state.emit({ type: 'error', message: error.body.message });
        return;
      }
      throw error;
    }
  }

  /** Download frames in the server's salient-first order. */
  async preload(): Promise<void> {
    const { dataset } = this.state;
    if (!dataset || this.preloading) return;
    this.preloading = true;
    try {
      for (const frame of [...this.state.preloadOrder]) {
        if (this.state.frameCache.has(frame)) continue;
        const wasSalient = this.state.frameState.get(frame) === 'salient';
        if (!wasSalient) this.state.markFrame(frame, 'loading');
        const blob = await this.api.fetchFrameBlob(dataset.id, frame);
        this.state.cacheFrame(frame, this.toObjectUrl(blob));
      }
    } finally {
      this.preloading = false;
    }
  }

  /** Sequentially fetch every frame between two consecutive salient steps. */
  async loadSegment(fromSalient: number): Promise<void> {
    const { dataset, salient } = this.state;
    if (!dataset) return;
    const sorted = [...salient].sort((a, b) => a - b);
    const idx = sorted.indexOf(fromSalient);
    if (idx < 0 || idx + 1 >= sorted.length) return;
    for (let t = sorted[idx]; t <= sorted[idx + 1]; t += 1) {
      if (this.state.frameCache.has(t)) continue;
      this.state.markFrame(t, 'loading');
      const blob = await this.api.fetchFrameBlob(dataset.id, t);
      this.state.cacheFrame(t, this.toObjectUrl(blob));
    }
  }

  /** Sequentially fetch the whole focus range. */
  async loadAll(): Promise<void> {
    const { dataset } = this.state;
    if (!dataset) return;
    for (let t = this.state.focusStart; t <= this.state.focusEnd; t += 1) {
      if (this.state.frameCache.has(t)) continue;
      this.state.markFrame(t, 'loading');
      const blob = await this.api.fetchFrameBlob(dataset.id, t);
      this.state.cacheFrame(t, this.toObjectUrl(blob));
    }
  }

  private toObjectUrl(blob: Blob): string {
    const url = this.document.defaultView?.URL ?? URL;
    return typeof url.createObjectURL === 'function'
      ? url.createObjectURL(blob)
      : `blob:${Math.random().toString(36).slice(2)}`;
  }
}

export async function mount(baseUrl: string, root: HTMLElement, document: Document): Promise<RasterStepsApp> {
  const app = new RasterStepsApp(new ApiClient(baseUrl), root, document);
  await app.start();
  return app;
}
