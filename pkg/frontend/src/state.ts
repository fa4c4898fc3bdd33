/** Session state and its pure transition function. */

import type { Kind, MetaDoc, Mode } from './api.js';

export interface SessionState {
  stage: number;
  mode: Mode;
  kind: Kind;
  selected: string[]; // ordered, duplicate-free gene symbols
  filter: string | null; // structure restricting the cloud
  hovered: string | null;
  zoomRoot: string | null; // subtree root to request from the service
}

export type NavAction =
  | { type: 'next-stage' }
  | { type: 'prev-stage' }
  | { type: 'toggle-mode' }
  | { type: 'toggle-kind' }
  | { type: 'zoom'; node: string }
  | { type: 'filter'; structure: string | null }
  | { type: 'toggle-gene'; gene: string };

export const STAGE_MIN = 1;
export const STAGE_MAX = 26;

export function initialState(meta: MetaDoc): SessionState {
  return {
    stage: meta.populated_stages.length ? meta.populated_stages[0] : STAGE_MIN,
    mode: 'abstract',
    kind: 'sunburst',
    selected: [],
    filter: null,
    hovered: null,
    zoomRoot: null,
  };
}

/** Apply one navigation action; ``parents`` maps node id to parent id and
 * backs the zoom rule: clicking a node re-roots at the node's parent. */
export function navigate(
  state: SessionState,
  action: NavAction,
  parents: Record<string, string | null>,
): SessionState {
  switch (action.type) {
    case 'next-stage':
      return { ...state, stage: Math.min(STAGE_MAX, state.stage + 1) };
    case 'prev-stage':
      return { ...state, stage: Math.max(STAGE_MIN, state.stage - 1) };
    case 'toggle-mode':
      return { ...state, mode: state.mode === 'abstract' ? 'staged' : 'abstract' };
    case 'toggle-kind':
      return { ...state, kind: state.kind === 'sunburst' ? 'icicle' : 'sunburst' };
    case 'zoom': {
      // The clicked node's parent becomes the diagram root; clicking the
      // anatomy root (parent null) restores the full view.
      if (!(action.node in parents)) return state;
      return { ...state, zoomRoot: parents[action.node] };
    }
    case 'filter':
      return { ...state, filter: action.structure };
    case 'toggle-gene': {
      const selected = state.selected.includes(action.gene)
        ? state.selected.filter((g) => g !== action.gene)
        : [...state.selected, action.gene];
      return { ...state, selected };
    }
  }
}
