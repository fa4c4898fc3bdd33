/** Fixed side panel showing the hovered structure's name and state. */

import { stateText } from './palette.js';

export function renderDetail(
  panel: HTMLElement,
  name: string | null,
  state: string | null,
): void {
  const nameEl = panel.querySelector('.detail-name') as HTMLElement;
  const stateEl = panel.querySelector('.detail-state') as HTMLElement;
  if (!name) {
    nameEl.textContent = '';
    stateEl.textContent = '';
    return;
  }
  nameEl.textContent = name;
  stateEl.textContent = state ? stateText(state) : '';
}
