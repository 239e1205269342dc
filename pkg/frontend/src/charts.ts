/** SVG chart builders. Pure string generators, no DOM state. */

import type { HistogramBar, TailPoint, TrendPoint } from "./viewmodel";

const WIDTH = 560;
const HEIGHT = 180;
const PAD = 24;

function svgOpen(): string {
  return `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" preserveAspectRatio="none" role="img">`;
}

/** Polarity histogram: terror-leaning left (negative), police-leaning right. */
export function histogramSvg(bars: HistogramBar[]): string {
  if (bars.length === 0) return `${svgOpen()}</svg>`;
  const plotWidth = WIDTH - 2 * PAD;
  const barWidth = plotWidth / bars.length;
  const parts: string[] = [svgOpen()];
  parts.push(
    `<line x1="${WIDTH / 2}" y1="0" x2="${WIDTH / 2}" y2="${HEIGHT}" class="axis-center"/>`,
  );
  bars.forEach((bar, i) => {
    const h = bar.height * (HEIGHT - 2 * PAD);
    const x = PAD + i * barWidth;
    const y = HEIGHT - PAD - h;
    const side = bar.center < 0 ? "terror" : "police";
    parts.push(
      `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(barWidth * 0.9).toFixed(1)}" ` +
        `height="${h.toFixed(1)}" class="bar bar-${side}"><title>${bar.center.toFixed(2)}: ${bar.count}</title></rect>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

/** Death-toll tail: survival counts on log-log-ish scales. */
export function tailSvg(points: TailPoint[]): string {
  if (points.length === 0) {
    return `${svgOpen()}<text x="${WIDTH / 2}" y="${HEIGHT / 2}" class="empty">no attacks yet</text></svg>`;
  }
  const maxToll = Math.max(1, ...points.map((p) => p.toll));
  const maxCount = Math.max(1, ...points.map((p) => p.atLeast));
  const sx = (toll: number) => PAD + (Math.log1p(toll) / Math.log1p(maxToll)) * (WIDTH - 2 * PAD);
  const sy = (count: number) =>
    HEIGHT - PAD - (Math.log1p(count) / Math.log1p(maxCount)) * (HEIGHT - 2 * PAD);
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.toll).toFixed(1)},${sy(p.atLeast).toFixed(1)}`)
    .join(" ");
  const dots = points
    .map(
      (p) =>
        `<circle cx="${sx(p.toll).toFixed(1)}" cy="${sy(p.atLeast).toFixed(1)}" r="2.5" class="dot">` +
        `<title>&ge;${p.toll} deaths: ${p.atLeast} attacks</title></circle>`,
    )
    .join("");
  return `${svgOpen()}<path d="${path}" class="tail-line"/>${dots}</svg>`;
}

/** Polarization trend over the buffered frames. */
export function trendSvg(points: TrendPoint[]): string {
  if (points.length === 0) return `${svgOpen()}</svg>`;
  const t0 = points[0]!.tick;
  const t1 = Math.max(points[points.length - 1]!.tick, t0 + 1);
  const sx = (tick: number) => PAD + ((tick - t0) / (t1 - t0)) * (WIDTH - 2 * PAD);
  const sy = (value: number) => HEIGHT - PAD - value * (HEIGHT - 2 * PAD);
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.tick).toFixed(1)},${sy(p.value).toFixed(1)}`)
    .join(" ");
  return (
    `${svgOpen()}<line x1="${PAD}" y1="${sy(1)}" x2="${WIDTH - PAD}" y2="${sy(1)}" class="axis-top"/>` +
    `<path d="${path}" class="trend-line"/></svg>`
  );
}
