/** Tiny SVG string helpers shared by the renderers. */

export const WIDTH = 760;
export const HEIGHT = 380;
export const MARGIN = { top: 28, right: 24, bottom: 46, left: 64 };

export const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
export const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const PALETTE = [
  '#4e79a7', '#f28e2b', '#e15759', '#76b7b2', '#59a14f',
  '#edc948', '#b07aa1', '#ff9da7', '#9c755f', '#bab0ac',
];

export function colorFor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export function esc(value: string | number): string {
  return String(value)
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children = '',
): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => `${k}="${esc(v)}"`)
    .join(' ');
  return children === '' && tag !== 'text' && tag !== 'title'
    ? `<${tag} ${a}/>`
    : `<${tag} ${a}>${children}</${tag}>`;
}

export function svgRoot(children: string, cssClass: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `class="chart ${cssClass}" role="img">${children}</svg>`
  );
}

export function linearScale(domainMax: number, rangePx: number): (v: number) => number {
  const max = domainMax > 0 ? domainMax : 1;
  return (v: number) => (v / max) * rangePx;
}

/** Left axis: a line plus ~4 tick labels formatted by `fmt`. */
export function yAxis(maxValue: number, fmt: (v: number) => string): string {
  const parts: string[] = [];
  const x = MARGIN.left;
  parts.push(el('line', {
    x1: x, y1: MARGIN.top, x2: x, y2: MARGIN.top + PLOT_H,
    stroke: '#999', 'stroke-width': 1,
  }));
  const ticks = 4;
  for (let i = 0; i <= ticks; i++) {
    const v = (maxValue * i) / ticks;
    const y = MARGIN.top + PLOT_H - (PLOT_H * i) / ticks;
    parts.push(el('text', {
      x: x - 8, y: y + 4, 'text-anchor': 'end', 'font-size': 11, fill: '#555',
    }, esc(fmt(v))));
  }
  return parts.join('');
}

export function chartTitle(title: string): string {
  return el('text', {
    x: WIDTH / 2, y: 18, 'text-anchor': 'middle', 'font-size': 14, 'font-weight': 600,
  }, esc(title));
}
