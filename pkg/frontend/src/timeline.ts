import type { UiSessionState } from './state.js';

/**
 * Timeline strip: one mark per frame of the focus range, encoding the frame
 * status (salient / loaded / loading / unloaded) plus pin and exclude
 * badges. Clicking a mark navigates; dragging across marks selects a new
 * focus range.
 */
export class Timeline {
  readonly element: HTMLDivElement;
  private dragAnchor: number | null = null;
  private onRangeChange: ((start: number, end: number) => void) | null = null;

  constructor(private readonly state: UiSessionState, document: Document) {
    this.element = document.createElement('div');
    this.element.className = 'timeline';
    this.element.addEventListener('mousedown', (ev) => this.beginDrag(ev));
    this.element.addEventListener('mouseup', (ev) => this.endDrag(ev));
    state.subscribe((event) => {
      if (
        event.type === 'selection' ||
        event.type === 'focus-range' ||
        event.type === 'labels' ||
        event.type === 'frame-state' ||
        event.type === 'navigate'
      ) {
        this.render();
      }
    });
    this.render();
  }

  setRangeHandler(handler: (start: number, end: number) => void): void {
    this.onRangeChange = handler;
  }

  render(): void {
    const doc = this.element.ownerDocument;
    this.element.textContent = '';
    const salient = new Set(this.state.salient);
    for (let t = this.state.focusStart; t <= this.state.focusEnd; t += 1) {
      const mark = doc.createElement('span');
      const status = salient.has(t) ? 'salient' : this.state.frameState.get(t) ?? 'unloaded';
      mark.className = `mark ${status}`;
      if (status === 'loading') mark.classList.add('blinking');
      if (this.state.pinned.has(t)) mark.classList.add('pinned');
      if (this.state.excluded.has(t)) mark.classList.add('excluded');
      if (t === this.state.currentFrame) mark.classList.add('current');
      mark.dataset.frame = String(t);
      mark.title = `frame ${t}`;
      mark.addEventListener('click', () => this.state.navigate(t));
      this.element.appendChild(mark);
    }
  }

  private frameOf(ev: MouseEvent): number | null {
    const target = ev.target as HTMLElement | null;
    const frame = target?.dataset?.frame;
    return frame === undefined ? null : Number(frame);
  }

  private beginDrag(ev: MouseEvent): void {
    this.dragAnchor = this.frameOf(ev);
  }

  private endDrag(ev: MouseEvent): void {
    const end = this.frameOf(ev);
    if (this.dragAnchor !== null && end !== null && end !== this.dragAnchor) {
      const lo = Math.min(this.dragAnchor, end);
      const hi = Math.max(this.dragAnchor, end);
      this.state.setFocusRange(lo, hi);
      this.onRangeChange?.(lo, hi);
    }
    this.dragAnchor = null;
  }

  salientMarkCount(): number {
    return this.element.querySelectorAll('.mark.salient').length;
  }
}
