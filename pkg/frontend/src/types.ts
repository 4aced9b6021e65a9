/** ChartSpec schema version 1 — mirrors the service's JSON payloads. */

export const SUPPORTED_SCHEMA = 1;

export const CHART_TYPES = [
  'per_minute_bars',
  'total_counts',
  'total_durations',
  'trend_lines',
  'distribution_pie',
  'coappearance_matrix',
  'coappearance_network',
  'stacked_area',
  'seasonal_comparison',
  'segment_heatmap',
] as const;

export type ChartType = (typeof CHART_TYPES)[number];

export function isChartType(value: string): value is ChartType {
  return (CHART_TYPES as readonly string[]).includes(value);
}

export interface Axis {
  label: string;
  kind: 'time' | 'category' | 'segment';
}

export interface Series {
  name: string;
  points: [string | number, number][];
}

export interface MatrixData {
  row_labels: string[];
  col_labels: string[];
  cells: number[][];
}

export interface GraphNode {
  id: string;
  weight: number;
}

export interface GraphEdge {
  a: string;
  b: string;
  weight: number;
}

export interface GraphData {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface ChartSpec {
  schema: number;
  chart_type: ChartType;
  title: string;
  x_axis: Axis;
  series: Series[] | null;
  matrix: MatrixData | null;
  graph: GraphData | null;
  meta: Record<string, unknown>;
}

export interface EpisodeMeta {
  episode_id: string;
  series_id: string;
  season: number;
  episode_number: number;
  duration_ms: number;
  processed: boolean;
}
