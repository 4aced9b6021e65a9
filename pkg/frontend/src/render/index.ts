/** Renderer dispatch: ChartSpec -> SVG/HTML string.
 * No analytics happen here — every displayed number exists verbatim in the
 * spec payload; renderers only select and format. */

import { ChartSpec, SUPPORTED_SCHEMA } from '../types.js';
import { esc } from '../svg.js';
import { renderCategoryBars, renderStackedBars } from './bars.js';
import { renderStackedArea, renderTrendLines } from './lines.js';
import { renderMatrix } from './matrix.js';
import { renderNetwork } from './network.js';
import { renderPie } from './pie.js';

export function isEmptySpec(spec: ChartSpec): boolean {
  if (spec.series !== null) {
    return spec.series.length === 0 || spec.series.every((s) => s.points.length === 0);
  }
  if (spec.matrix !== null) {
    return spec.matrix.row_labels.length === 0 || spec.matrix.col_labels.length === 0;
  }
  if (spec.graph !== null) return spec.graph.nodes.length === 0;
  return true;
}

export function renderChart(spec: ChartSpec, selected: string[] = [], minEdgeWeight?: number): string {
  if (spec.schema !== SUPPORTED_SCHEMA) {
    return (
      `<div class="schema-banner" role="alert">chart schema ${esc(spec.schema)} ` +
      `is not supported by this dashboard (expected ${SUPPORTED_SCHEMA})</div>`
    );
  }
  if (isEmptySpec(spec)) {
    return (
      `<div class="empty-state"><p>no appearances</p>` +
      `<p class="empty-detail">${esc(spec.title)}: nothing to draw for this scope</p></div>`
    );
  }
  switch (spec.chart_type) {
    case 'per_minute_bars':
      return renderStackedBars(spec, selected);
    case 'total_counts':
    case 'total_durations':
    case 'seasonal_comparison':
      return renderCategoryBars(spec, selected);
    case 'trend_lines':
      return renderTrendLines(spec, selected);
    case 'distribution_pie':
      return renderPie(spec, selected);
    case 'coappearance_matrix':
    case 'segment_heatmap':
      return renderMatrix(spec, selected);
    case 'coappearance_network':
      return renderNetwork(spec, selected, minEdgeWeight);
    case 'stacked_area':
      return renderStackedArea(spec, selected);
  }
}
