/** Default state colors, mirroring the service defaults. */

export const STATE_COLORS: Record<string, string> = {
  strong: '#d62728',
  moderate: '#ffd700',
  weak: '#9467bd',
  present: '#ff7f0e',
  not_detected: '#17becf',
  propagated: '#f7b6d2',
  no_info: '#9e9e9e',
  not_present: '#e0e0e0',
};

export const SELECTED_GENE_COLOR = '#d62728';
export const CLOUD_NODE_COLOR = '#4682b4';

/** Text shown in the detail panel for each state class. */
export function stateText(state: string): string {
  if (state === 'propagated') return 'propagated';
  if (state === 'no_info') return 'no data';
  if (state === 'not_present') return 'not present at this stage';
  return state; // direct levels read as themselves
}
