import type {
  DatasetDescriptor,
  EmbeddingResponse,
  SelectionResponse,
  SelectRequest,
  TrendKind,
  TrendResponse,
} from './types.js';

/** Error body shared by all 4xx responses. */
export interface ApiError {
  code: string;
  message: string;
  field?: string;
}

export class ApiRequestError extends Error {
  constructor(readonly status: number, readonly body: ApiError) {
    super(body.message);
  }
}

type FetchLike = typeof fetch;

/**
 * Thin client for /api/v1 with two behaviors the views rely on:
 * identical in-flight GETs are coalesced into one request, and responses
 * that were superseded by a newer call on the same logical channel are
 * reported as stale so the caller can drop them.
 */
export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();
  private channelSeq = new Map<string, number>();

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async listDatasets(): Promise<DatasetDescriptor[]> {
    return this.getJson<DatasetDescriptor[]>('/datasets');
  }

  async select(datasetId: string, body: SelectRequest): Promise<SelectionResponse> {
    const url = `${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/select`;
    const response = await this.fetchImpl(url, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    return this.decode<SelectionResponse>(response);
  }

  /**
   * Channelled trend fetch: one channel per chart, newest request wins.
   * Returns null for responses that arrived after a newer request started.
   */
  async trend(
    datasetId: string,
    opts: { kind: TrendKind; start: number; end: number; ref?: number; region?: string },
    channel = 'trend',
  ): Promise<TrendResponse | null> {
    const params = new URLSearchParams({
      kind: opts.kind,
      range: `${opts.start}:${opts.end}`,
    });
    if (opts.ref !== undefined) params.set('ref', String(opts.ref));
    if (opts.region) params.set('region', opts.region);
    const seq = (this.channelSeq.get(channel) ?? 0) + 1;
    this.channelSeq.set(channel, seq);
    const result = await this.getJson<TrendResponse>(
      `/datasets/${encodeURIComponent(datasetId)}/trend?${params}`,
    );
    if (this.channelSeq.get(channel) !== seq) return null;
    return result;
  }

  async embedding(
    datasetId: string,
    opts: { start: number; end: number; region?: string; salient?: number[] },
  ): Promise<EmbeddingResponse> {
    const params = new URLSearchParams({ range: `${opts.start}:${opts.end}` });
    if (opts.region) params.set('region', opts.region);
    if (opts.salient && opts.salient.length > 0) params.set('salient', opts.salient.join(','));
    return this.getJson<EmbeddingResponse>(
      `/datasets/${encodeURIComponent(datasetId)}/embedding?${params}`,
    );
  }

  /** URL of the colormapped PNG for one frame. */
  frameUrl(
    datasetId: string,
    t: number,
    opts: { vmin?: number; vmax?: number; cmap?: string; region?: string } = {},
  ): string {
    const params = new URLSearchParams({ format: 'png' });
    if (opts.cmap) params.set('cmap', opts.cmap);
    if (opts.vmin !== undefined) params.set('vmin', String(opts.vmin));
    if (opts.vmax !== undefined) params.set('vmax', String(opts.vmax));
    if (opts.region) params.set('region', opts.region);
    return `${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/frames/${t}?${params}`;
  }

  async fetchFrameBlob(datasetId: string, t: number): Promise<Blob> {
    const response = await this.fetchImpl(this.frameUrl(datasetId, t));
    if (!response.ok) {
      throw new ApiRequestError(response.status, await response.json());
    }
    return response.blob();
  }

  private async getJson<T>(path: string): Promise<T> {
    const url = `${this.baseUrl}${path}`;
    const existing = this.inflight.get(url);
    if (existing) return existing as Promise<T>;
    const promise = (async () => {
      try {
        const response = await this.fetchImpl(url);
        return await this.decode<T>(response);
      } finally {
        this.inflight.delete(url);
      }
    })();
    this.inflight.set(url, promise);
    return promise;
  }

  private async decode<T>(response: Response): Promise<T> {
    if (!response.ok) {
      const body = (await response.json()) as ApiError;
      throw new ApiRequestError(response.status, body);
    }
    return (await response.json()) as T;
  }
}
