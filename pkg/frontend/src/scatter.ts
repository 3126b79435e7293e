import type { ApiClient } from './api.js';
import type { UiSessionState } from './state.js';
import type { EmbeddingResponse } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const SIZE = 300;

/** Hue ramp over chronological position (early = blue, late = warm). */
export function chronologicalColor(fraction: number): string {
  const hue = 240 - 200 * Math.min(1, Math.max(0, fraction));
  return `hsl(${hue.toFixed(0)}, 70%, 50%)`;
}

/**
 * Latent-space scatter: chronological color ramp, red ring around salient
 * points, click-to-navigate. Points the service sampled out are skipped.
 */
export class LatentScatter {
  readonly element: SVGSVGElement;

  constructor(
    private readonly state: UiSessionState,
    private readonly api: ApiClient,
    document: Document,
  ) {
    this.element = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
    this.element.setAttribute('class', 'latent-scatter');
    this.element.setAttribute('viewBox', `0 0 ${SIZE} ${SIZE}`);
    state.subscribe((event) => {
      if (event.type === 'selection' || event.type === 'focus-range') void this.refresh();
    });
  }

  async refresh(): Promise<EmbeddingResponse | null> {
    if (!this.state.dataset) return null;
    const response = await this.api.embedding(this.state.dataset.id, {
      start: this.state.focusStart,
      end: this.state.focusEnd,
      salient: this.state.salient,
    });
    this.render(response);
    return response;
  }

  render(response: EmbeddingResponse): void {
    const doc = this.element.ownerDocument;
    this.element.textContent = '';
    const span = this.state.focusEnd - this.state.focusStart || 1;
    for (const point of response.points) {
      if (point.sampled_out) continue;
      const circle = doc.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('cx', ((point.x + 1) / 2 * SIZE).toFixed(1));
      circle.setAttribute('cy', ((1 - (point.y + 1) / 2) * SIZE).toFixed(1));
      circle.setAttribute('r', point.salient ? '5' : '3');
      const fraction = (point.index - this.state.focusStart) / span;
      circle.setAttribute('fill', chronologicalColor(fraction));
      circle.dataset.frame = String(point.index);
      if (point.salient) {
        circle.classList.add('salient');
        circle.setAttribute('stroke', 'red');
        circle.setAttribute('stroke-width', '2');
      }
      circle.addEventListener('click', () => this.state.navigate(point.index));
      this.element.appendChild(circle);
    }
  }
}
