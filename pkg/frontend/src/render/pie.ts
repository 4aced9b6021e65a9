/** distribution_pie: shares rendered to 0.1% precision. */

import { fmtShare } from '../format.js';
import { ChartSpec } from '../types.js';
import { HEIGHT, chartTitle, colorFor, el, esc, svgRoot } from '../svg.js';

export function renderPie(spec: ChartSpec, selected: string[]): string {
  const points = (spec.series?.[0]?.points ?? []).filter(
    ([cid]) => !selected.length || selected.includes(String(cid)),
  );
  const total = points.reduce((acc, [, v]) => acc + Number(v), 0) || 1;
  const cx = 300;
  const cy = HEIGHT / 2 + 14;
  const r = 130;
  let angle = -Math.PI / 2;

  const parts: string[] = [chartTitle(spec.title)];
  points.forEach(([cid, share], si) => {
    const frac = Number(share) / total;
    const sweep = frac * 2 * Math.PI;
    const x0 = cx + r * Math.cos(angle);
    const y0 = cy + r * Math.sin(angle);
    const x1 = cx + r * Math.cos(angle + sweep);
    const y1 = cy + r * Math.sin(angle + sweep);
    const large = sweep > Math.PI ? 1 : 0;
    const d =
      frac >= 0.999999
        ? `M ${cx - r} ${cy} A ${r} ${r} 0 1 1 ${cx + r} ${cy} A ${r} ${r} 0 1 1 ${cx - r} ${cy}`
        : `M ${cx} ${cy} L ${x0.toFixed(2)} ${y0.toFixed(2)} ` +
          `A ${r} ${r} 0 ${large} 1 ${x1.toFixed(2)} ${y1.toFixed(2)} Z`;
    parts.push(el(
      'path',
      { d, fill: colorFor(si), stroke: '#fff', 'stroke-width': 1, 'data-celebrity': String(cid) },
      el('title', {}, esc(`${cid}: ${fmtShare(Number(share))}`)),
    ));
    const mid = angle + sweep / 2;
    const lx = cx + (r + 46) * Math.cos(mid);
    const ly = cy + (r + 16) * Math.sin(mid);
    parts.push(el('text', {
      x: lx, y: ly, 'text-anchor': 'middle', 'font-size': 11, fill: '#333',
      'data-celebrity': String(cid),
    }, esc(`${cid} ${fmtShare(Number(share))}`)));
    angle += sweep;
  });
  return svgRoot(parts.join(''), 'distribution-pie');
}
