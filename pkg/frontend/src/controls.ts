import type { UiSessionState } from './state.js';

/**
 * Parameter panel: k, the paired alpha/beta slider with a circular
 * indicator, aggregation choice, and the pin / exclude / load actions.
 * Pin and exclude changes call back so the app can re-request a selection.
 */
export class ControlPanel {
  readonly element: HTMLDivElement;
  readonly kInput: HTMLInputElement;
  readonly alphaSlider: HTMLInputElement;
  readonly aggregationSelect: HTMLSelectElement;
  readonly errorBox: HTMLDivElement;
  private readonly indicatorArc: SVGCircleElement;
  private onChange: (() => void) | null = null;

  constructor(private readonly state: UiSessionState, document: Document) {
    this.element = document.createElement('div');
    this.element.className = 'controls';

    this.kInput = document.createElement('input');
    this.kInput.type = 'number';
    this.kInput.min = '2';
    this.kInput.value = String(state.params.k);
    this.kInput.className = 'k-input';
    this.kInput.addEventListener('change', () => {
      state.setK(Number(this.kInput.value));
      this.requestSelection();
    });
    this.element.appendChild(this.kInput);

    this.alphaSlider = document.createElement('input');
    this.alphaSlider.type = 'range';
    this.alphaSlider.min = '0';
    this.alphaSlider.max = '1';
    this.alphaSlider.step = '0.05';
    this.alphaSlider.value = String(state.params.alpha);
    this.alphaSlider.className = 'alpha-slider';
    this.alphaSlider.addEventListener('change', () => {
      state.setAlpha(Number(this.alphaSlider.value));
      this.updateIndicator();
      this.requestSelection();
    });
    this.element.appendChild(this.alphaSlider);

    const svgNs = 'http://www.w3.org/2000/svg';
    const indicator = document.createElementNS(svgNs, 'svg');
    indicator.setAttribute('class', 'weight-indicator');
    indicator.setAttribute('viewBox', '0 0 40 40');
    this.indicatorArc = document.createElementNS(svgNs, 'circle') as SVGCircleElement;
    this.indicatorArc.setAttribute('cx', '20');
    this.indicatorArc.setAttribute('cy', '20');
    this.indicatorArc.setAttribute('r', '16');
    this.indicatorArc.setAttribute('fill', 'none');
    this.indicatorArc.setAttribute('stroke', 'green');
    this.indicatorArc.setAttribute('stroke-width', '6');
    indicator.appendChild(this.indicatorArc);
    this.element.appendChild(indicator);
    this.updateIndicator();

    this.aggregationSelect = document.createElement('select');
    this.aggregationSelect.className = 'aggregation';
    for (const kind of ['avg', 'max', 'min']) {
      const option = document.createElement('option');
      option.value = kind;
      option.textContent = kind.toUpperCase();
      this.aggregationSelect.appendChild(option);
    }
    this.aggregationSelect.addEventListener('change', () => {
      state.setAggregation(this.aggregationSelect.value);
      this.requestSelection();
    });
    this.element.appendChild(this.aggregationSelect);

    for (const [label, handler] of [
      ['pin', () => this.pinCurrent()],
      ['unpin', () => { state.unpin(state.currentFrame); this.requestSelection(); }],
      ['exclude', () => { state.exclude(state.currentFrame); this.requestSelection(); }],
    ] as const) {
      const button = document.createElement('button');
      button.className = `action-${label}`;
      button.textContent = label;
      button.addEventListener('click', handler);
      this.element.appendChild(button);
    }

    this.errorBox = document.createElement('div');
    this.errorBox.className = 'inline-error';
    this.element.appendChild(this.errorBox);

    state.subscribe((event) => {
      if (event.type === 'error') this.errorBox.textContent = event.message;
      if (event.type === 'selection') this.errorBox.textContent = '';
      if (event.type === 'params') this.updateIndicator();
    });
  }

  setChangeHandler(handler: () => void): void {
    this.onChange = handler;
  }

  /** Arc length of the ring encodes alpha (full circle = all structural). */
  private updateIndicator(): void {
    const circumference = 2 * Math.PI * 16;
    const arc = this.state.params.alpha * circumference;
    this.indicatorArc.setAttribute('stroke-dasharray', `${arc.toFixed(2)} ${circumference.toFixed(2)}`);
    this.indicatorArc.dataset.alpha = this.state.params.alpha.toFixed(2);
  }

  private pinCurrent(): void {
    const next = new Set(this.state.pinned);
    next.add(this.state.currentFrame);
    const mandatory = new Set([...next, this.state.focusStart, this.state.focusEnd]);
    if (mandatory.size > this.state.params.k) {
      this.state.emit({
        type: 'error',
        message: `cannot pin: ${mandatory.size} mandatory frames exceed k=${this.state.params.k}`,
      });
      return;
    }
    this.state.pin(this.state.currentFrame);
    this.requestSelection();
  }

  private requestSelection(): void {
    this.onChange?.();
  }
}
