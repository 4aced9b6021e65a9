/**
 * ViewState <-> URL query string, losslessly and with minimal URLs:
 * parameters at their defaults are elided, malformed values fall back to
 * defaults and produce a visible notice.
 */

import { ChartType, isChartType } from './types.js';

export interface ChartParams {
  bucket_ms: number;
  window_ms: number;
  segment_ms: number;
  gap_ms: number;
  tail_ms: number;
  min_edge_weight: number;
}

export const DEFAULT_PARAMS: ChartParams = {
  bucket_ms: 60_000,
  window_ms: 1_000,
  segment_ms: 300_000,
  gap_ms: 2_000,
  tail_ms: 500,
  min_edge_weight: 1,
};

export type Scope =
  | { kind: 'episode'; episodeId: string }
  | { kind: 'series'; seriesId: string; seasons: number[] };

export interface ViewState {
  scope: Scope;
  chartType: ChartType;
  params: ChartParams;
  /** celebrity ids the cross-filter is narrowed to; empty = everyone */
  selected: string[];
}

export const DEFAULT_CHART: ChartType = 'total_counts';

export function defaultState(episodeId = ''): ViewState {
  return {
    scope: { kind: 'episode', episodeId },
    chartType: DEFAULT_CHART,
    params: { ...DEFAULT_PARAMS },
    selected: [],
  };
}

const PARAM_KEYS = Object.keys(DEFAULT_PARAMS) as (keyof ChartParams)[];

export function serializeState(state: ViewState): string {
  const qs = new URLSearchParams();
  if (state.scope.kind === 'episode') {
    if (state.scope.episodeId) qs.set('ep', state.scope.episodeId);
  } else {
    qs.set('series', state.scope.seriesId);
    if (state.scope.seasons.length) qs.set('seasons', state.scope.seasons.join(','));
  }
  if (state.chartType !== DEFAULT_CHART) qs.set('chart', state.chartType);
  for (const key of PARAM_KEYS) {
    if (state.params[key] !== DEFAULT_PARAMS[key]) qs.set(key, String(state.params[key]));
  }
  if (state.selected.length) qs.set('sel', state.selected.join(','));
  return qs.toString();
}

export interface ParsedState {
  state: ViewState;
  /** human-readable fallback notices, e.g. "segment_ms=abc is invalid" */
  notices: string[];
}

export function parseState(query: string): ParsedState {
  const qs = new URLSearchParams(query);
  const notices: string[] = [];
  const state = defaultState();

  const series = qs.get('series');
  if (series) {
    const seasons: number[] = [];
    for (const part of (qs.get('seasons') ?? '').split(',')) {
      if (!part) continue;
      const n = Number(part);
      if (Number.isInteger(n) && n >= 1) seasons.push(n);
      else notices.push(`season "${part}" is invalid and was dropped`);
    }
    state.scope = { kind: 'series', seriesId: series, seasons };
  } else {
    state.scope = { kind: 'episode', episodeId: qs.get('ep') ?? '' };
  }

  const chart = qs.get('chart');
  if (chart !== null) {
    if (isChartType(chart)) state.chartType = chart;
    else notices.push(`chart "${chart}" is unknown, showing ${DEFAULT_CHART}`);
  }

  for (const key of PARAM_KEYS) {
    const raw = qs.get(key);
    if (raw === null) continue;
    const n = Number(raw);
    if (Number.isInteger(n) && n >= 1) {
      state.params[key] = n;
    } else {
      notices.push(`${key}=${raw} is invalid, using default ${DEFAULT_PARAMS[key]}`);
    }
  }

  const sel = qs.get('sel');
  if (sel) state.selected = sel.split(',').filter((s) => s.length > 0);
  return { state, notices };
}
