/** Line charts over time buckets: trend_lines and stacked_area. */

import { fmtBucketTime, fmtNumber } from '../format.js';
import { ChartSpec, Series } from '../types.js';
import {
  MARGIN, PLOT_H, PLOT_W, chartTitle, colorFor, el, esc, linearScale, svgRoot, yAxis,
} from '../svg.js';

function filterSeries(series: Series[], selected: string[]): Series[] {
  if (!selected.length) return series;
  return series.filter((s) => selected.includes(s.name));
}

function xPos(b: number, nBuckets: number): number {
  return MARGIN.left + (nBuckets <= 1 ? PLOT_W / 2 : (b * PLOT_W) / (nBuckets - 1));
}

function legend(series: Series[]): string {
  return series
    .map((s, si) => {
      const x = MARGIN.left + (si % 4) * 160;
      const y = MARGIN.top + PLOT_H + 24 + Math.floor(si / 4) * 14;
      return (
        el('rect', { x, y, width: 10, height: 10, fill: colorFor(si), 'data-celebrity': s.name }) +
        el('text', { x: x + 14, y: y + 9, 'font-size': 11, fill: '#333', 'data-celebrity': s.name }, esc(s.name))
      );
    })
    .join('');
}

export function renderTrendLines(spec: ChartSpec, selected: string[]): string {
  const series = filterSeries(spec.series ?? [], selected);
  const bucketMs = Number(spec.meta['bucket_ms'] ?? 60_000);
  const nBuckets = series.length ? series[0].points.length : 0;
  const maxV = Math.max(1, ...series.flatMap((s) => s.points.map(([, v]) => Number(v))));
  const yScale = linearScale(maxV, PLOT_H);

  const parts: string[] = [chartTitle(spec.title), yAxis(maxV, fmtNumber)];
  series.forEach((s, si) => {
    const coords = s.points.map(([b, v]) => {
      const x = xPos(Number(b), nBuckets);
      const y = MARGIN.top + PLOT_H - yScale(Number(v));
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    });
    parts.push(el('polyline', {
      points: coords.join(' '),
      fill: 'none', stroke: colorFor(si), 'stroke-width': 1.5, 'data-celebrity': s.name,
    }, el('title', {}, esc(`${s.name}: max ${fmtNumber(Math.max(...s.points.map(([, v]) => Number(v))))}`))));
    for (const [b, v] of s.points) {
      if (Number(v) === 0) continue;
      parts.push(el('circle', {
        cx: xPos(Number(b), nBuckets), cy: MARGIN.top + PLOT_H - yScale(Number(v)), r: 2,
        fill: colorFor(si), 'data-celebrity': s.name,
      }, el('title', {}, esc(`${s.name}: ${fmtNumber(Number(v))} @ ${fmtBucketTime(Number(b), bucketMs)}`))));
    }
  });
  parts.push(legend(series));
  return svgRoot(parts.join(''), 'trend-lines');
}

export function renderStackedArea(spec: ChartSpec, selected: string[]): string {
  const series = filterSeries(spec.series ?? [], selected);
  const bucketMs = Number(spec.meta['bucket_ms'] ?? 60_000);
  const nBuckets = series.length ? series[0].points.length : 0;
  const totals = Array.from({ length: nBuckets }, (_, b) =>
    series.reduce((acc, s) => acc + Number(s.points[b][1]), 0),
  );
  const maxV = Math.max(1, ...totals);
  const yScale = linearScale(maxV, PLOT_H);
  const baseline = new Array(nBuckets).fill(0);

  const parts: string[] = [chartTitle(spec.title), yAxis(maxV, fmtNumber)];
  series.forEach((s, si) => {
    const upper: string[] = [];
    const lower: string[] = [];
    for (let b = 0; b < nBuckets; b++) {
      const v = Number(s.points[b][1]);
      const x = xPos(b, nBuckets);
      const y0 = MARGIN.top + PLOT_H - yScale(baseline[b]);
      const y1 = MARGIN.top + PLOT_H - yScale(baseline[b] + v);
      upper.push(`${x.toFixed(1)},${y1.toFixed(1)}`);
      lower.unshift(`${x.toFixed(1)},${y0.toFixed(1)}`);
      baseline[b] += v;
    }
    parts.push(el('polygon', {
      points: [...upper, ...lower].join(' '),
      fill: colorFor(si), 'fill-opacity': 0.75, stroke: 'none', 'data-celebrity': s.name,
    }, el('title', {}, esc(`${s.name} (fractional presence per ${fmtBucketTime(1, bucketMs)} bucket)`))));
  });
  parts.push(legend(series));
  return svgRoot(parts.join(''), 'stacked-area');
}
