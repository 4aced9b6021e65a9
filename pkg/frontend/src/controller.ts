/** Dashboard orchestration, DOM-free for testability.
 *
 * Parameter changes debounce 300 ms into exactly one re-query; concurrent
 * responses resolve latest-wins; celebrity clicks cross-filter the loaded
 * spec without a round-trip, and raising min_edge_weight on a loaded
 * network filters client-side while lowering it re-fetches.
 */

import { SpecFetcher, chartUrl } from './api.js';
import { debounce, Debounced } from './debounce.js';
import { ChartParams, ViewState, serializeState } from './state.js';
import { ChartSpec, ChartType } from './types.js';
import { renderChart } from './render/index.js';

export interface ControllerHooks {
  fetchSpec: SpecFetcher;
  /** called with fresh markup after every state change or response */
  onRender: (html: string, state: ViewState) => void;
  /** called whenever the serialized URL query should change */
  onUrl?: (query: string) => void;
  onError?: (message: string) => void;
  debounceMs?: number;
}

export class DashboardController {
  state: ViewState;
  spec: ChartSpec | null = null;
  /** min_edge_weight the loaded network spec was computed with */
  private loadedMinEdge: number;
  private seq = 0;
  private readonly hooks: ControllerHooks;
  private readonly queueRefetch: Debounced<[]>;

  constructor(initial: ViewState, hooks: ControllerHooks) {
    this.state = initial;
    this.hooks = hooks;
    this.loadedMinEdge = initial.params.min_edge_weight;
    this.queueRefetch = debounce(() => void this.refetch(), hooks.debounceMs ?? 300);
  }

  /** One immediate fetch for the current state (initial load, chart switch). */
  async refetch(): Promise<void> {
    const mySeq = ++this.seq;
    this.pushUrl();
    try {
      const spec = await this.hooks.fetchSpec(chartUrl(this.state));
      if (mySeq !== this.seq) return; // a newer request already resolved
      this.spec = spec;
      this.loadedMinEdge = this.state.params.min_edge_weight;
      this.render();
    } catch (e) {
      if (mySeq !== this.seq) return;
      this.hooks.onError?.(e instanceof Error ? e.message : String(e));
    }
  }

  render(): void {
    if (!this.spec) return;
    const html = renderChart(this.spec, this.state.selected, this.state.params.min_edge_weight);
    this.hooks.onRender(html, this.state);
  }

  setChartType(chartType: ChartType): void {
    if (chartType === this.state.chartType) return;
    this.state = { ...this.state, chartType };
    void this.refetch();
  }

  setEpisode(episodeId: string): void {
    this.state = { ...this.state, scope: { kind: 'episode', episodeId }, selected: [] };
    void this.refetch();
  }

  setSeries(seriesId: string, seasons: number[]): void {
    this.state = {
      ...this.state,
      scope: { kind: 'series', seriesId, seasons },
      chartType: 'seasonal_comparison',
      selected: [],
    };
    void this.refetch();
  }

  /** Sliders and number inputs: debounced so exploration causes one query. */
  setParam(key: keyof ChartParams, value: number): void {
    if (this.state.params[key] === value) return;
    this.state = { ...this.state, params: { ...this.state.params, [key]: value } };
    if (key === 'min_edge_weight' && this.canFilterEdgesLocally(value)) {
      this.pushUrl();
      this.render(); // loaded spec already contains every edge we need
      return;
    }
    this.queueRefetch();
  }

  private canFilterEdgesLocally(newMin: number): boolean {
    return (
      this.state.chartType === 'coappearance_network' &&
      this.spec !== null &&
      this.spec.chart_type === 'coappearance_network' &&
      newMin >= this.loadedMinEdge
    );
  }

  /** Cross-filter: narrow every view to one celebrity; click again to clear. */
  toggleCelebrity(id: string): void {
    const selected = this.state.selected.includes(id)
      ? this.state.selected.filter((s) => s !== id)
      : [id];
    this.state = { ...this.state, selected };
    this.pushUrl();
    this.render(); // selection filters the loaded payload, no re-query
  }

  /** Matrix cell click: open the pair's per-minute overlap. */
  openPair(a: string, b: string): void {
    if (a === b) return;
    this.state = { ...this.state, chartType: 'per_minute_bars', selected: [a, b] };
    void this.refetch();
  }

  private pushUrl(): void {
    this.hooks.onUrl?.(serializeState(this.state));
  }
}
