/** Gene cloud panel: one circle per gene, alphabetically packed server-side.
 * Clicking a node toggles it into the query; selected nodes turn red. */

import type { CloudDoc } from './api.js';
import { CLOUD_NODE_COLOR, SELECTED_GENE_COLOR } from './palette.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export function buildCloud(
  cloud: CloudDoc,
  selected: string[],
  size = 360,
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
  svg.setAttribute('viewBox', `0 0 ${size} ${size}`);
  svg.setAttribute('width', String(size));
  svg.setAttribute('height', String(size));
  svg.classList.add('cloud');
  for (const node of cloud.nodes) {
    const group = document.createElementNS(SVG_NS, 'g');
    group.setAttribute('data-gene', node.gene);
    group.classList.add('gene');
    const isSelected = selected.includes(node.gene);
    if (isSelected) group.classList.add('selected');

    const circle = document.createElementNS(SVG_NS, 'circle');
    circle.setAttribute('cx', (node.x * size).toFixed(3));
    circle.setAttribute('cy', (node.y * size).toFixed(3));
    circle.setAttribute('r', Math.max(2, node.r * size).toFixed(3));
    circle.setAttribute('fill', isSelected ? SELECTED_GENE_COLOR : CLOUD_NODE_COLOR);

    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = `${node.gene}: ${node.count} annotation${node.count === 1 ? '' : 's'}`;
    circle.appendChild(title);
    group.appendChild(circle);

    const label = document.createElementNS(SVG_NS, 'text');
    label.setAttribute('x', (node.x * size).toFixed(3));
    label.setAttribute('y', (node.y * size).toFixed(3));
    label.setAttribute('text-anchor', 'middle');
    label.setAttribute('dy', '0.35em');
    label.setAttribute('font-size', '10');
    label.textContent = node.gene;
    group.appendChild(label);

    svg.appendChild(group);
  }
  return svg;
}
