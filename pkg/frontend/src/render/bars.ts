/** Stacked per-bucket bars (per_minute_bars) and grouped category bars
 * (total_counts, total_durations, seasonal_comparison). */

import { fmtBucketTime, fmtDuration, fmtMinutes, fmtNumber } from '../format.js';
import { ChartSpec, Series } from '../types.js';
import {
  MARGIN, PLOT_H, PLOT_W, chartTitle, colorFor, el, esc, linearScale, svgRoot, yAxis,
} from '../svg.js';

function filterSeries(series: Series[], selected: string[]): Series[] {
  if (!selected.length) return series;
  return series.filter((s) => selected.includes(s.name));
}

export function renderStackedBars(spec: ChartSpec, selected: string[]): string {
  const series = filterSeries(spec.series ?? [], selected);
  const bucketMs = Number(spec.meta['bucket_ms'] ?? 60_000);
  const nBuckets = series.length ? series[0].points.length : 0;
  const totals: number[] = Array.from({ length: nBuckets }, (_, b) =>
    series.reduce((acc, s) => acc + Number(s.points[b][1]), 0),
  );
  const maxTotal = Math.max(1, ...totals);
  const yScale = linearScale(maxTotal, PLOT_H);
  const barW = nBuckets ? Math.max(1, PLOT_W / nBuckets - 1) : 0;

  const parts: string[] = [chartTitle(spec.title), yAxis(maxTotal, fmtNumber)];
  for (let b = 0; b < nBuckets; b++) {
    let yCursor = MARGIN.top + PLOT_H;
    const x = MARGIN.left + (b * PLOT_W) / Math.max(1, nBuckets) + 0.5;
    for (let si = 0; si < series.length; si++) {
      const v = Number(series[si].points[b][1]);
      if (v <= 0) continue;
      const h = yScale(v);
      yCursor -= h;
      parts.push(el(
        'rect',
        {
          x, y: yCursor, width: barW, height: h,
          fill: colorFor(si), 'data-celebrity': series[si].name,
        },
        el('title', {}, esc(`${series[si].name}: ${fmtNumber(v)} @ ${fmtBucketTime(b, bucketMs)}`)),
      ));
    }
    if (nBuckets <= 24 || b % Math.ceil(nBuckets / 12) === 0) {
      parts.push(el('text', {
        x: x + barW / 2, y: MARGIN.top + PLOT_H + 16,
        'text-anchor': 'middle', 'font-size': 10, fill: '#555',
      }, esc(fmtBucketTime(b, bucketMs))));
    }
  }
  return svgRoot(parts.join(''), 'per-minute-bars');
}

type ValueFormat = 'count' | 'duration_ms' | 'minutes';

function formatValue(v: number, how: ValueFormat): string {
  if (how === 'duration_ms') return fmtDuration(v);
  if (how === 'minutes') return fmtMinutes(v);
  return fmtNumber(v);
}

export function renderCategoryBars(spec: ChartSpec, selected: string[]): string {
  const how: ValueFormat =
    spec.chart_type === 'total_durations' ? 'duration_ms'
    : spec.chart_type === 'seasonal_comparison' ? 'minutes'
    : 'count';
  const allSeries = spec.series ?? [];
  // Category charts: one series (counts/durations) or one per season.
  const categories: string[] = [];
  for (const s of allSeries) {
    for (const [cat] of s.points) {
      if (!categories.includes(String(cat))) categories.push(String(cat));
    }
  }
  const shown = selected.length ? categories.filter((c) => selected.includes(c)) : categories;
  const maxV = Math.max(1, ...allSeries.flatMap((s) =>
    s.points.filter(([c]) => shown.includes(String(c))).map(([, v]) => Number(v)),
  ));
  const yScale = linearScale(maxV, PLOT_H);
  const groupW = shown.length ? PLOT_W / shown.length : 0;
  const barW = allSeries.length ? Math.max(1, (groupW - 8) / allSeries.length) : 0;

  const parts: string[] = [chartTitle(spec.title), yAxis(maxV, (v) => formatValue(v, how))];
  shown.forEach((cat, ci) => {
    allSeries.forEach((s, si) => {
      const point = s.points.find(([c]) => String(c) === cat);
      if (!point) return;
      const v = Number(point[1]);
      const h = yScale(v);
      const x = MARGIN.left + ci * groupW + 4 + si * barW;
      const y = MARGIN.top + PLOT_H - h;
      const label = allSeries.length > 1 ? `${cat} (${s.name})` : cat;
      parts.push(el(
        'rect',
        { x, y, width: barW, height: Math.max(h, 0.5), fill: colorFor(si), 'data-celebrity': cat },
        el('title', {}, esc(`${label}: ${formatValue(v, how)}`)),
      ));
      parts.push(el('text', {
        x: x + barW / 2, y: y - 4, 'text-anchor': 'middle', 'font-size': 10, fill: '#333',
      }, esc(formatValue(v, how))));
    });
    parts.push(el('text', {
      x: MARGIN.left + ci * groupW + groupW / 2, y: MARGIN.top + PLOT_H + 16,
      'text-anchor': 'middle', 'font-size': 10, fill: '#555', 'data-celebrity': cat,
    }, esc(cat)));
  });
  if (allSeries.length > 1) {
    allSeries.forEach((s, si) => {
      parts.push(el('rect', {
        x: MARGIN.left + si * 110, y: HEIGHT_LEGEND_Y, width: 10, height: 10, fill: colorFor(si),
      }));
      parts.push(el('text', {
        x: MARGIN.left + si * 110 + 14, y: HEIGHT_LEGEND_Y + 9, 'font-size': 11, fill: '#333',
      }, esc(s.name)));
    });
  }
  return svgRoot(parts.join(''), `category-bars ${spec.chart_type}`);
}

const HEIGHT_LEGEND_Y = MARGIN.top + PLOT_H + 24;
