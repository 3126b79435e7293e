/**
 * End-to-end contract check against a live service. Skipped unless
 * RASTERSTEPS_URL points at a running instance registered with the burst
 * dataset, e.g.:
 *
 *   rastersteps synth --family burst --t 40 --size 16x16 --bursts 20 --out /tmp/stacks/burst
 *   rastersteps serve --data-root /tmp/stacks --port 8077
 *   RASTERSTEPS_URL=http://127.0.0.1:8077/api/v1 npm test
 */

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { RasterStepsApp } from '../src/app.js';

const baseUrl = process.env.RASTERSTEPS_URL;

async function settle(rounds = 40): Promise<void> {
  for (let i = 0; i < rounds; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}

describe.skipIf(!baseUrl)('live service contract', () => {
  it('drives the full selection loop against the real API', async () => {
    const api = new ApiClient(baseUrl!, fetch);
    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = new RasterStepsApp(api, root, document);
    await app.start();
    await settle();

    // changing k re-renders exactly k salient marks
    for (const k of [7, 4]) {
      app.controls.kInput.value = String(k);
      app.controls.kInput.dispatchEvent(new Event('change'));
      await settle();
      expect(app.timeline.salientMarkCount()).toBe(k);
    }

    // pinning the current frame forces it into the next server selection
    app.state.navigate(13);
    (app.controls.element.querySelector('.action-pin') as HTMLElement).dispatchEvent(
      new Event('click'),
    );
    await settle();
    expect(app.state.salient).toContain(13);

    // relative trend follows navigation
    app.state.navigate(22);
    await settle();
    expect(app.trends.relativeRef()).toBe(22);

    // playback degrades to a crossfade when only the endpoints are cached
    app.state.frameCache.clear();
    app.state.frameCache.set(app.state.focusStart, 'blob:start');
    app.state.frameCache.set(app.state.focusEnd, 'blob:end');
    const mid = Math.floor((app.state.focusStart + app.state.focusEnd) / 2);
    const layers = app.playback.renderFrame(mid);
    expect(layers.length).toBe(2);
    expect(layers[0].frame).toBe(app.state.focusStart);
    expect(layers[1].frame).toBe(app.state.focusEnd);

    app.stop();
  }, 30000);
});
