import type { ApiClient } from './api.js';
import type { UiSessionState } from './state.js';
import type { TrendKind, TrendResponse } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const WIDTH = 600;
const HEIGHT = 80;

function polylinePoints(values: (number | null)[]): string {
  const finite = values.filter((v): v is number => v !== null);
  if (finite.length === 0) return '';
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const span = hi - lo || 1;
  const step = values.length > 1 ? WIDTH / (values.length - 1) : 0;
  const pts: string[] = [];
  values.forEach((v, i) => {
    if (v === null) return;
    const y = HEIGHT - ((v - lo) / span) * HEIGHT;
    pts.push(`${(i * step).toFixed(2)},${y.toFixed(2)}`);
  });
  return pts.join(' ');
}

/**
 * Temporal and relative trend charts. The temporal chart covers the focus
 * range for the selected kind; the relative chart re-fetches against the
 * current frame every time the user navigates.
 */
export class TrendCharts {
  readonly element: HTMLDivElement;
  private readonly temporalLine: SVGPolylineElement;
  private readonly relativeLine: SVGPolylineElement;
  private readonly kindSelect: HTMLSelectElement;

  constructor(
    private readonly state: UiSessionState,
    private readonly api: ApiClient,
    document: Document,
  ) {
    this.element = document.createElement('div');
    this.element.className = 'trends';

    this.kindSelect = document.createElement('select');
    this.kindSelect.className = 'trend-kind';
    for (const kind of ['structural', 'max', 'min', 'avg']) {
      const option = document.createElement('option');
      option.value = kind;
      option.textContent = kind;
      this.kindSelect.appendChild(option);
    }
    this.kindSelect.addEventListener('change', () => {
      this.state.trendKind = this.kindSelect.value as TrendKind;
      void this.refreshTemporal();
      void this.refreshRelative();
    });
    this.element.appendChild(this.kindSelect);

    this.temporalLine = this.makeChart(document, 'temporal');
    this.relativeLine = this.makeChart(document, 'relative');

    state.subscribe((event) => {
      if (event.type === 'navigate') void this.refreshRelative();
      if (event.type === 'focus-range') {
        void this.refreshTemporal();
        void this.refreshRelative();
      }
    });
  }

  private makeChart(document: Document, name: string): SVGPolylineElement {
    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('class', `trend-chart ${name}`);
    svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
    const line = document.createElementNS(SVG_NS, 'polyline');
    line.setAttribute('fill', 'none');
    svg.appendChild(line);
    this.element.appendChild(svg);
    return line as SVGPolylineElement;
  }

  async refreshTemporal(): Promise<TrendResponse | null> {
    if (!this.state.dataset) return null;
    const response = await this.api.trend(
      this.state.dataset.id,
      {
        kind: this.state.trendKind,
        start: this.state.focusStart,
        end: this.state.focusEnd,
      },
      'temporal',
    );
    if (response) {
      this.temporalLine.setAttribute('points', polylinePoints(response.values));
      this.temporalLine.dataset.kind = response.kind;
    }
    return response;
  }

  async refreshRelative(): Promise<TrendResponse | null> {
    if (!this.state.dataset) return null;
    const response = await this.api.trend(
      this.state.dataset.id,
      {
        kind: this.state.trendKind,
        start: this.state.focusStart,
        end: this.state.focusEnd,
        ref: this.state.currentFrame,
      },
      'relative',
    );
    if (response) {
      this.relativeLine.setAttribute('points', polylinePoints(response.values));
      this.relativeLine.dataset.ref = String(response.ref);
    }
    return response;
  }

  relativeRef(): number | null {
    const ref = this.relativeLine.dataset.ref;
    return ref === undefined ? null : Number(ref);
  }
}
