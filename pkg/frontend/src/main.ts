/** Browser bootstrap: wires the controller to the DOM and the URL bar. */

import { fetchEpisodes, httpFetcher } from './api.js';
import { DashboardController } from './controller.js';
import { ChartParams, parseState } from './state.js';
import { CHART_TYPES, ChartType } from './types.js';

const PARAM_INPUTS: [keyof ChartParams, string][] = [
  ['bucket_ms', 'bucket (ms)'],
  ['window_ms', 'co-appearance window (ms)'],
  ['segment_ms', 'segment (ms)'],
  ['gap_ms', 'coalesce gap (ms)'],
  ['tail_ms', 'coalesce tail (ms)'],
  ['min_edge_weight', 'min edge weight'],
];

function qsel<T extends Element>(sel: string): T {
  const node = document.querySelector<T>(sel);
  if (!node) throw new Error(`missing element ${sel}`);
  return node;
}

function showNotices(notices: string[]): void {
  const box = qsel<HTMLElement>('#notices');
  box.innerHTML = '';
  for (const n of notices) {
    const div = document.createElement('div');
    div.className = 'notice';
    div.textContent = n;
    box.appendChild(div);
  }
}

async function boot(): Promise<void> {
  const { state, notices } = parseState(window.location.search.replace(/^\?/, ''));
  showNotices(notices);

  const chartHost = qsel<HTMLElement>('#chart');
  const controller = new DashboardController(state, {
    fetchSpec: httpFetcher(),
    onRender: (html, s) => {
      chartHost.innerHTML = html;
      document.querySelectorAll<HTMLButtonElement>('#chart-nav button').forEach((b) => {
        b.classList.toggle('active', b.dataset.chart === s.chartType);
      });
      const sel = qsel<HTMLElement>('#selection');
      sel.textContent = s.selected.length ? `filtered to: ${s.selected.join(', ')}` : '';
    },
    onUrl: (query) => {
      const url = query ? `?${query}` : window.location.pathname;
      window.history.replaceState(null, '', url);
    },
    onError: (message) => {
      chartHost.innerHTML = `<div class="empty-state"><p>request failed</p><p class="empty-detail"></p></div>`;
      chartHost.querySelector('.empty-detail')!.textContent = message;
    },
  });

  // chart navigation
  const nav = qsel<HTMLElement>('#chart-nav');
  for (const t of CHART_TYPES) {
    const btn = document.createElement('button');
    btn.textContent = t.replace(/_/g, ' ');
    btn.dataset.chart = t;
    btn.addEventListener('click', () => controller.setChartType(t as ChartType));
    nav.appendChild(btn);
  }

  // parameter inputs
  const paramsBox = qsel<HTMLElement>('#params');
  for (const [key, label] of PARAM_INPUTS) {
    const wrap = document.createElement('label');
    wrap.textContent = label;
    const input = document.createElement('input');
    input.type = 'number';
    input.min = '1';
    input.value = String(controller.state.params[key]);
    input.addEventListener('input', () => {
      const v = Number(input.value);
      if (Number.isInteger(v) && v >= 1) controller.setParam(key, v);
    });
    wrap.appendChild(input);
    paramsBox.appendChild(wrap);
  }

  // cross-filtering via event delegation on rendered SVG
  chartHost.addEventListener('click', (ev) => {
    const target = ev.target as Element | null;
    if (!target) return;
    const cell = target.closest('[data-pair-a]');
    if (cell) {
      controller.openPair(cell.getAttribute('data-pair-a')!, cell.getAttribute('data-pair-b')!);
      return;
    }
    const celeb = target.closest('[data-celebrity]');
    if (celeb) controller.toggleCelebrity(celeb.getAttribute('data-celebrity')!);
  });

  // episode picker
  const picker = qsel<HTMLSelectElement>('#episode');
  try {
    const episodes = await fetchEpisodes();
    for (const ep of episodes.filter((e) => e.processed)) {
      const opt = document.createElement('option');
      opt.value = ep.episode_id;
      opt.textContent = `${ep.series_id} s${ep.season}e${ep.episode_number} (${ep.episode_id})`;
      picker.appendChild(opt);
    }
    if (controller.state.scope.kind === 'episode' && !controller.state.scope.episodeId) {
      if (picker.options.length) controller.setEpisode(picker.options[0].value);
    }
    if (controller.state.scope.kind === 'episode' && controller.state.scope.episodeId) {
      picker.value = controller.state.scope.episodeId;
      void controller.refetch();
    } else {
      void controller.refetch();
    }
  } catch {
    showNotices(['backend unreachable; pick an episode once the service is up']);
  }
  picker.addEventListener('change', () => controller.setEpisode(picker.value));
}

void boot();
