/** Build SVG diagrams from server geometry and expression documents.
 *
 * Path data is a fixed-precision function of the document numbers, so two
 * renders of the same layout document produce identical geometry attributes
 * and DOM diffs isolate fill changes.
 */

import type { ArcNode, GeometryDoc, GeometryNode, RectNode } from './api.js';
import { STATE_COLORS } from './palette.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const FULL_TURN = 2 * Math.PI;
const FULL_EPS = 1e-9;

function n(value: number): string {
  const s = value.toFixed(3);
  return s === '-0.000' ? '0.000' : s;
}

function isArc(node: GeometryNode): node is ArcNode {
  return 'a0' in node;
}

/** Angle 0 points up and grows clockwise on screen. */
function polar(c: number, radius: number, angle: number): [number, number] {
  return [c + radius * Math.sin(angle), c - radius * Math.cos(angle)];
}

function arcTo(r: number, sweep: number, large: number, x: number, y: number): string {
  return `A ${n(r)} ${n(r)} 0 ${large} ${sweep} ${n(x)} ${n(y)}`;
}

export function sectorPath(arc: ArcNode, c: number, scale: number): string {
  const extent = arc.a1 - arc.a0;
  const r0 = arc.r0 * scale;
  const r1 = arc.r1 * scale;
  const full = extent >= FULL_TURN - FULL_EPS;
  const mid = arc.a0 + extent / 2;
  const large = (full ? extent / 2 : extent) >= Math.PI ? 1 : 0;

  const parts: string[] = [];
  const [sx, sy] = polar(c, r1, arc.a0);
  parts.push(`M ${n(sx)} ${n(sy)}`);
  if (full) {
    const [mx, my] = polar(c, r1, mid);
    const [ex, ey] = polar(c, r1, arc.a1);
    parts.push(arcTo(r1, 1, 0, mx, my), arcTo(r1, 1, 0, ex, ey));
  } else {
    const [ex, ey] = polar(c, r1, arc.a1);
    parts.push(arcTo(r1, 1, large, ex, ey));
  }
  const [ix, iy] = polar(c, r0, arc.a1);
  parts.push(`L ${n(ix)} ${n(iy)}`);
  if (full) {
    const [mx, my] = polar(c, r0, mid);
    const [bx, by] = polar(c, r0, arc.a0);
    parts.push(arcTo(r0, 0, 0, mx, my), arcTo(r0, 0, 0, bx, by));
  } else {
    const [bx, by] = polar(c, r0, arc.a0);
    parts.push(arcTo(r0, 0, large, bx, by));
  }
  parts.push('Z');
  return parts.join(' ');
}

function shapeFor(doc: Document, geom: GeometryNode, size: number): SVGElement {
  if (isArc(geom)) {
    const c = size / 2;
    if (geom.r0 === 0 && geom.a1 - geom.a0 >= FULL_TURN - FULL_EPS) {
      const circle = doc.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('cx', n(c));
      circle.setAttribute('cy', n(c));
      circle.setAttribute('r', n(geom.r1 * c));
      return circle;
    }
    const path = doc.createElementNS(SVG_NS, 'path');
    path.setAttribute('d', sectorPath(geom, c, c));
    return path;
  }
  const rect = geom as RectNode;
  const el = doc.createElementNS(SVG_NS, 'rect');
  el.setAttribute('x', n(rect.x0 * size));
  el.setAttribute('y', n(rect.y0 * size));
  el.setAttribute('width', n((rect.x1 - rect.x0) * size));
  el.setAttribute('height', n((rect.y1 - rect.y0) * size));
  return el;
}

/** One diagram: a shape per geometry node, filled from the state map. */
export function buildDiagram(
  geometry: GeometryDoc,
  states: Record<string, string>,
  names: Record<string, string>,
  size = 420,
): SVGSVGElement {
  const doc = document;
  const svg = doc.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
  svg.setAttribute('viewBox', `0 0 ${size} ${size}`);
  svg.setAttribute('width', String(size));
  svg.setAttribute('height', String(size));
  svg.classList.add('diagram');
  for (const geom of geometry.nodes) {
    const shape = shapeFor(doc, geom, size);
    const state = states[geom.id] ?? 'no_info';
    shape.setAttribute('fill', STATE_COLORS[state] ?? STATE_COLORS.no_info);
    shape.setAttribute('stroke', '#ffffff');
    shape.setAttribute('stroke-width', '0.5');
    shape.setAttribute('data-id', geom.id);
    shape.setAttribute('data-state', state);
    shape.setAttribute('data-name', names[geom.id] ?? geom.id);
    shape.classList.add('node');
    svg.appendChild(shape);
  }
  return svg;
}
