/** coappearance_network: deterministic circular layout, so identical specs
 * always render identical SVG (snapshot-stable without any RNG). */

import { fmtNumber } from '../format.js';
import { ChartSpec, GraphEdge } from '../types.js';
import { HEIGHT, WIDTH, chartTitle, colorFor, el, esc, svgRoot } from '../svg.js';

export function visibleEdges(edges: GraphEdge[], minWeight: number): GraphEdge[] {
  return edges.filter((e) => e.weight >= minWeight);
}

export function renderNetwork(spec: ChartSpec, selected: string[], minWeight?: number): string {
  const g = spec.graph;
  if (!g) return svgRoot(chartTitle(spec.title), 'network');
  const keep = (id: string) => !selected.length || selected.includes(id);
  const nodes = g.nodes.filter((n) => keep(n.id));
  const threshold = minWeight ?? Number(spec.meta['min_edge_weight'] ?? 1);
  const edges = visibleEdges(g.edges, threshold).filter((e) => keep(e.a) && keep(e.b));

  const cx = WIDTH / 2;
  const cy = HEIGHT / 2 + 10;
  const radius = Math.min(WIDTH, HEIGHT) / 2 - 70;
  const pos = new Map<string, [number, number]>();
  nodes.forEach((n, i) => {
    const angle = (2 * Math.PI * i) / Math.max(1, nodes.length) - Math.PI / 2;
    pos.set(n.id, [cx + radius * Math.cos(angle), cy + radius * Math.sin(angle)]);
  });
  const maxW = Math.max(1, ...nodes.map((n) => n.weight));
  const maxE = Math.max(1, ...edges.map((e) => e.weight));

  const parts: string[] = [chartTitle(spec.title)];
  for (const e of edges) {
    const a = pos.get(e.a);
    const b = pos.get(e.b);
    if (!a || !b) continue;
    parts.push(el('line', {
      x1: a[0].toFixed(1), y1: a[1].toFixed(1), x2: b[0].toFixed(1), y2: b[1].toFixed(1),
      stroke: '#8899aa', 'stroke-opacity': 0.7,
      'stroke-width': (0.8 + 3.2 * (e.weight / maxE)).toFixed(2),
      class: 'network-edge', 'data-weight': e.weight,
    }, el('title', {}, esc(`${e.a} — ${e.b}: ${fmtNumber(e.weight)}`))));
  }
  nodes.forEach((n, i) => {
    const [x, y] = pos.get(n.id)!;
    const r = 6 + 14 * Math.sqrt(n.weight / maxW);
    parts.push(el('circle', {
      cx: x.toFixed(1), cy: y.toFixed(1), r: r.toFixed(1),
      fill: colorFor(i), 'data-celebrity': n.id, class: 'network-node',
    }, el('title', {}, esc(`${n.id}: total co-appearances ${fmtNumber(n.weight)}`))));
    const lx = cx + (radius + 34) * Math.cos((2 * Math.PI * i) / Math.max(1, nodes.length) - Math.PI / 2);
    const ly = cy + (radius + 22) * Math.sin((2 * Math.PI * i) / Math.max(1, nodes.length) - Math.PI / 2);
    parts.push(el('text', {
      x: lx.toFixed(1), y: ly.toFixed(1), 'text-anchor': 'middle', 'font-size': 11,
      fill: '#333', 'data-celebrity': n.id,
    }, esc(n.id)));
  });
  return svgRoot(parts.join(''), 'coappearance-network');
}
