/** Heatmap grids: coappearance_matrix (celebrity x celebrity, cells
 * clickable for the pair drill-down) and segment_heatmap (segment rows). */

import { fmtNumber } from '../format.js';
import { ChartSpec } from '../types.js';
import { HEIGHT, MARGIN, WIDTH, chartTitle, el, esc, svgRoot } from '../svg.js';

function heatColor(v: number, max: number): string {
  if (v <= 0) return '#f4f5f7';
  const t = Math.min(1, v / (max || 1));
  const light = 94 - Math.round(t * 58); // darker = more frequent
  return `hsl(216, 74%, ${light}%)`;
}

export function renderMatrix(spec: ChartSpec, selected: string[]): string {
  const m = spec.matrix;
  if (!m) return svgRoot(chartTitle(spec.title), 'matrix');
  const isPairMatrix = spec.chart_type === 'coappearance_matrix';
  const rowKeep = m.row_labels.map(
    (label) => !selected.length || !isPairMatrix || selected.includes(label),
  );
  const colKeep = m.col_labels.map((label) => !selected.length || selected.includes(label));
  const rows = m.row_labels.filter((_, i) => rowKeep[i]);
  const cols = m.col_labels.filter((_, j) => colKeep[j]);
  const cells = m.cells
    .filter((_, i) => rowKeep[i])
    .map((row) => row.filter((_, j) => colKeep[j]));

  const gridLeft = MARGIN.left + 40;
  const gridTop = MARGIN.top + 14;
  const gridW = WIDTH - gridLeft - MARGIN.right;
  const gridH = HEIGHT - gridTop - MARGIN.bottom;
  const cw = cols.length ? gridW / cols.length : 0;
  const ch = rows.length ? gridH / rows.length : 0;
  const maxV = Math.max(1, ...cells.flat());

  const parts: string[] = [chartTitle(spec.title)];
  rows.forEach((rowLabel, i) => {
    parts.push(el('text', {
      x: gridLeft - 6, y: gridTop + i * ch + ch / 2 + 4,
      'text-anchor': 'end', 'font-size': 10, fill: '#333',
      ...(isPairMatrix ? { 'data-celebrity': rowLabel } : {}),
    }, esc(rowLabel)));
    cols.forEach((colLabel, j) => {
      const v = cells[i][j];
      const attrs: Record<string, string | number> = {
        x: gridLeft + j * cw + 0.5, y: gridTop + i * ch + 0.5,
        width: Math.max(cw - 1, 0.5), height: Math.max(ch - 1, 0.5),
        fill: heatColor(v, maxV),
      };
      if (isPairMatrix) {
        attrs['data-pair-a'] = rowLabel;
        attrs['data-pair-b'] = colLabel;
        attrs['class'] = 'matrix-cell';
      }
      const what = isPairMatrix
        ? `${rowLabel} & ${colLabel}: ${fmtNumber(v)}`
        : `segment ${rowLabel}, ${colLabel}: ${fmtNumber(v)}`;
      parts.push(el('rect', attrs, el('title', {}, esc(what))));
      if (cols.length <= 12 && rows.length <= 14) {
        parts.push(el('text', {
          x: gridLeft + j * cw + cw / 2, y: gridTop + i * ch + ch / 2 + 4,
          'text-anchor': 'middle', 'font-size': 10,
          fill: v / maxV > 0.55 ? '#fff' : '#333',
          'pointer-events': 'none',
        }, esc(fmtNumber(v))));
      }
    });
  });
  cols.forEach((colLabel, j) => {
    parts.push(el('text', {
      x: gridLeft + j * cw + cw / 2, y: HEIGHT - MARGIN.bottom + 16,
      'text-anchor': 'middle', 'font-size': 10, fill: '#333', 'data-celebrity': colLabel,
    }, esc(colLabel)));
  });
  return svgRoot(parts.join(''), spec.chart_type.replace(/_/g, '-'));
}
