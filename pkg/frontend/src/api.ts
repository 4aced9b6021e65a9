/** URL building for the chart endpoints; parameters map 1:1 to the
 * service's query strings, so every explored view is a shareable URL. */

import { DEFAULT_PARAMS, ViewState } from './state.js';
import { ChartSpec, EpisodeMeta } from './types.js';

export function chartUrl(state: ViewState, base = ''): string {
  const qs = new URLSearchParams();
  if (state.scope.kind === 'series') {
    if (state.scope.seasons.length) qs.set('seasons', state.scope.seasons.join(','));
    if (state.params.gap_ms !== DEFAULT_PARAMS.gap_ms) qs.set('gap_ms', String(state.params.gap_ms));
    if (state.params.tail_ms !== DEFAULT_PARAMS.tail_ms) qs.set('tail_ms', String(state.params.tail_ms));
    const suffix = qs.toString();
    return `${base}/series/${encodeURIComponent(state.scope.seriesId)}/charts/seasonal_comparison${suffix ? '?' + suffix : ''}`;
  }
  const p = state.params;
  if (p.bucket_ms !== DEFAULT_PARAMS.bucket_ms) qs.set('bucket_ms', String(p.bucket_ms));
  if (p.window_ms !== DEFAULT_PARAMS.window_ms) qs.set('window_ms', String(p.window_ms));
  if (p.segment_ms !== DEFAULT_PARAMS.segment_ms) qs.set('segment_ms', String(p.segment_ms));
  if (p.gap_ms !== DEFAULT_PARAMS.gap_ms) qs.set('gap_ms', String(p.gap_ms));
  if (p.tail_ms !== DEFAULT_PARAMS.tail_ms) qs.set('tail_ms', String(p.tail_ms));
  if (p.min_edge_weight !== DEFAULT_PARAMS.min_edge_weight) {
    qs.set('min_edge_weight', String(p.min_edge_weight));
  }
  const suffix = qs.toString();
  return (
    `${base}/episodes/${encodeURIComponent(state.scope.episodeId)}` +
    `/charts/${state.chartType}${suffix ? '?' + suffix : ''}`
  );
}

export type SpecFetcher = (url: string) => Promise<ChartSpec>;

export function httpFetcher(base = ''): SpecFetcher {
  return async (url: string) => {
    const resp = await fetch(base + url);
    if (!resp.ok) {
      const body = await resp.json().catch(() => ({}));
      throw new Error(body.message ?? `request failed with ${resp.status}`);
    }
    return (await resp.json()) as ChartSpec;
  };
}

export async function fetchEpisodes(base = ''): Promise<EpisodeMeta[]> {
  const resp = await fetch(`${base}/episodes`);
  if (!resp.ok) throw new Error(`listing episodes failed with ${resp.status}`);
  return (await resp.json()) as EpisodeMeta[];
}
