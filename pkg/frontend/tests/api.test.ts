import { describe, expect, it } from 'vitest';

import { ApiClient, ApiRequestError } from '../src/api.js';
import { FakeService } from './fake-service.js';

describe('ApiClient', () => {
  it('coalesces identical in-flight GETs into one request', async () => {
    const service = new FakeService();
    const api = new ApiClient('/api/v1', service.fetch);
    const [a, b] = await Promise.all([api.listDatasets(), api.listDatasets()]);
    expect(a).toEqual(b);
    expect(service.requests.filter((r) => r.url.endsWith('/datasets')).length).toBe(1);
  });

  it('maps structured errors onto ApiRequestError', async () => {
    const service = new FakeService();
    const api = new ApiClient('/api/v1', service.fetch);
    await expect(
      api.select(service.datasetId, {
        range: { start: 0, end: 39 },
        k: 5,
        alpha: 0.7,
        beta: 0.5,
        aggregation: 'avg',
      }),
    ).rejects.toSatisfy((err: unknown) => {
      return err instanceof ApiRequestError && err.status === 400 && err.body.code === 'constraint';
    });
  });

  it('builds frame urls with vmin/vmax overrides', () => {
    const api = new ApiClient('/api/v1', new FakeService().fetch);
    const url = api.frameUrl('ds', 7, { vmin: 0.5, vmax: 2, cmap: 'gray' });
    expect(url).toContain('/datasets/ds/frames/7');
    expect(url).toContain('format=png');
    expect(url).toContain('vmin=0.5');
    expect(url).toContain('cmap=gray');
  });

  it('marks superseded trend responses as stale', async () => {
    const service = new FakeService();
    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const gatedFetch = async (input: string | URL | Request, init?: RequestInit) => {
      const url = String(input);
      if (url.includes('ref=1')) await gate;
      return service.fetch(input, init);
    };
    const api = new ApiClient('/api/v1', gatedFetch as typeof fetch);
    const first = api.trend(service.datasetId, { kind: 'avg', start: 0, end: 39, ref: 1 }, 'relative');
    const second = api.trend(service.datasetId, { kind: 'avg', start: 0, end: 39, ref: 2 }, 'relative');
    const fresh = await second;
    expect(fresh?.ref).toBe(2);
    release!();
    expect(await first).toBeNull();
  });
});
