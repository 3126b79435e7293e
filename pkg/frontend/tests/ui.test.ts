import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { RasterStepsApp } from '../src/app.js';
import { FakeService } from './fake-service.js';

async function settle(rounds = 25): Promise<void> {
  // let queued fetch handlers, response decoding and preload chains finish
  for (let i = 0; i < rounds; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function lastSelectBody(service: FakeService): Record<string, unknown> {
  const call = [...service.requests].reverse().find((r) => r.url.endsWith('/select'));
  if (!call) throw new Error('no select request recorded');
  return call.body as Record<string, unknown>;
}

async function makeApp(service = new FakeService()): Promise<{ app: RasterStepsApp; service: FakeService }> {
  const api = new ApiClient('/api/v1', service.fetch);
  const root = document.createElement('div');
  document.body.appendChild(root);
  const app = new RasterStepsApp(api, root, document);
  await app.start();
  await settle();
  return { app, service };
}

describe('timeline salient marks', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('renders exactly k salient marks after a selection', async () => {
    const { app } = await makeApp();
    expect(app.state.salient.length).toBe(5);
    expect(app.timeline.salientMarkCount()).toBe(5);
  });

  it('changing k re-renders exactly k salient marks', async () => {
    const { app } = await makeApp();
    for (const k of [7, 3, 9]) {
      app.controls.kInput.value = String(k);
      app.controls.kInput.dispatchEvent(new Event('change'));
      await settle();
      expect(app.timeline.salientMarkCount()).toBe(k);
      expect(app.state.salient.length).toBe(k);
    }
  });

  it('salient marks equal the latest server response, never a local guess', async () => {
    const { app, service } = await makeApp();
    const lastSelect = [...service.requests]
      .reverse()
      .find((r) => r.url.endsWith('/select'));
    expect(lastSelect).toBeDefined();
    expect(app.state.salient).toEqual(app.state.lastSelection!.steps);
  });

  it('clicking a mark navigates to that frame', async () => {
    const { app } = await makeApp();
    const mark = app.timeline.element.querySelector('[data-frame="12"]') as HTMLElement;
    mark.dispatchEvent(new Event('click'));
    expect(app.state.currentFrame).toBe(12);
  });

  it('dragging across marks selects a focus range and re-selects', async () => {
    const { app, service } = await makeApp();
    const before = service.requests.filter((r) => r.url.endsWith('/select')).length;
    const start = app.timeline.element.querySelector('[data-frame="10"]') as HTMLElement;
    const end = app.timeline.element.querySelector('[data-frame="30"]') as HTMLElement;
    start.dispatchEvent(new MouseEvent('mousedown', { bubbles: true }));
    end.dispatchEvent(new MouseEvent('mouseup', { bubbles: true }));
    await settle();
    expect(app.state.focusStart).toBe(10);
    expect(app.state.focusEnd).toBe(30);
    const after = service.requests.filter((r) => r.url.endsWith('/select')).length;
    expect(after).toBe(before + 1);
    expect(lastSelectBody(service).range).toEqual({ start: 10, end: 30 });
  });
});

describe('pinning and excluding', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('pinning a frame yields a selection containing it', async () => {
    const { app } = await makeApp();
    app.state.navigate(7);
    (app.controls.element.querySelector('.action-pin') as HTMLElement).dispatchEvent(new Event('click'));
    await settle();
    expect(app.state.pinned.has(7)).toBe(true);
    expect(app.state.salient).toContain(7);
    expect(app.timeline.element.querySelector('[data-frame="7"]')!.classList.contains('salient')).toBe(true);
  });

  it('excluding a salient frame removes it from the next selection', async () => {
    const { app } = await makeApp();
    const victim = app.state.salient[2];
    app.state.navigate(victim);
    (app.controls.element.querySelector('.action-exclude') as HTMLElement).dispatchEvent(new Event('click'));
    await settle();
    expect(app.state.salient).not.toContain(victim);
  });

  it('pinning beyond k shows an inline error and sends no request', async () => {
    const { app, service } = await makeApp();
    app.controls.kInput.value = '3';
    app.controls.kInput.dispatchEvent(new Event('change'));
    await settle();
    app.state.navigate(15);
    (app.controls.element.querySelector('.action-pin') as HTMLElement).dispatchEvent(new Event('click'));
    await settle();
    const before = service.requests.filter((r) => r.url.endsWith('/select')).length;
    app.state.navigate(25);
    (app.controls.element.querySelector('.action-pin') as HTMLElement).dispatchEvent(new Event('click'));
    await settle();
    const after = service.requests.filter((r) => r.url.endsWith('/select')).length;
    expect(after).toBe(before);
    expect(app.controls.errorBox.textContent).toMatch(/exceed k=3/);
  });
});

describe('weight slider', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('keeps alpha + beta = 1 through one paired control', async () => {
    const { app, service } = await makeApp();
    app.controls.alphaSlider.value = '0.3';
    app.controls.alphaSlider.dispatchEvent(new Event('change'));
    await settle();
    expect(app.state.params.alpha).toBeCloseTo(0.3);
    expect(app.state.params.beta).toBeCloseTo(0.7);
    const body = lastSelectBody(service) as { alpha: number; beta: number };
    expect(body.alpha).toBeCloseTo(0.3);
    expect(body.alpha + body.beta).toBeCloseTo(1.0);
  });
});

describe('relative trend', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('refetches with ref equal to the newly navigated frame', async () => {
    const { app, service } = await makeApp();
    app.state.navigate(17);
    await settle();
    const trendCalls = service.requests.filter((r) => r.url.includes('/trend'));
    const last = trendCalls[trendCalls.length - 1];
    expect(last.url).toContain('ref=17');
    expect(app.trends.relativeRef()).toBe(17);
  });

  it('stale relative responses are discarded by sequence number', async () => {
    const service = new FakeService();
    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const slowFetch = async (input: string | URL | Request, init?: RequestInit) => {
      const url = String(input);
      if (url.includes('ref=5')) await gate;
      return service.fetch(input, init);
    };
    const api = new ApiClient('/api/v1', slowFetch as typeof fetch);
    const root = document.createElement('div');
    document.body.appendChild(root);
    const app = new RasterStepsApp(api, root, document);
    await app.start();
    await settle();

    app.state.navigate(5); // will hang until released
    app.state.navigate(9); // newer request supersedes it
    await settle();
    expect(app.trends.relativeRef()).toBe(9);
    release!();
    await settle();
    expect(app.trends.relativeRef()).toBe(9); // stale ref=5 result dropped
  });
});

describe('latent scatter', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('renders salient points with a red ring and navigates on click', async () => {
    const { app } = await makeApp();
    const salientCircle = app.scatter.element.querySelector('circle.salient') as SVGCircleElement;
    expect(salientCircle).not.toBeNull();
    expect(salientCircle.getAttribute('stroke')).toBe('red');
    const frame = Number(salientCircle.dataset.frame);
    salientCircle.dispatchEvent(new Event('click'));
    expect(app.state.currentFrame).toBe(frame);
  });

  it('skips sampled-out points but keeps salient ones', async () => {
    const service = new FakeService('burst-fixture', 1200, 600);
    const { app } = await makeApp(service);
    const circles = app.scatter.element.querySelectorAll('circle');
    expect(circles.length).toBeLessThanOrEqual(501 + app.state.salient.length);
    for (const s of app.state.salient) {
      expect(app.scatter.element.querySelector(`circle[data-frame="${s}"]`)).not.toBeNull();
    }
  });
});
