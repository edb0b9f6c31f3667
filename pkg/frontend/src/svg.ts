/** Minimal deterministic SVG chart builder (no DOM, no dependencies). */

export interface Curve {
  label: string;
  xs: number[];
  ys: number[];
  yLow?: number[];
  yHigh?: number[];
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  curves: Curve[];
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

// documented style keys, one per method
export const METHOD_STYLES: Record<string, { color: string; marker: string }> = {
  "mgg-softmax": { color: "#1f77b4", marker: "circle" },
  "em-baseline": { color: "#d62728", marker: "square" },
};

function styleFor(label: string) {
  return METHOD_STYLES[label] ?? { color: "#2ca02c", marker: "diamond" };
}

// log-domain floor so zero errors stay plottable on a log axis
const LOG_FLOOR = 1e-12;

function transform(value: number, log: boolean): number {
  if (!log) return value;
  return Math.log10(Math.max(value, LOG_FLOOR));
}

function niceTicks(lo: number, hi: number, log: boolean): number[] {
  if (log) {
    const ticks: number[] = [];
    for (let d = Math.floor(lo); d <= Math.ceil(hi); d++) ticks.push(d);
    return ticks;
  }
  if (hi === lo) return [lo];
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / 4));
  const mult = span / 4 / step >= 5 ? 5 : span / 4 / step >= 2 ? 2 : 1;
  const s = step * mult;
  const start = Math.ceil(lo / s) * s;
  const ticks: number[] = [];
  for (let t = start; t <= hi + 1e-12; t += s) ticks.push(Number(t.toPrecision(12)));
  return ticks;
}

function fmtTick(t: number, log: boolean): string {
  const v = log ? 10 ** t : t;
  if (v !== 0 && (Math.abs(v) < 1e-3 || Math.abs(v) >= 1e4)) return v.toExponential(0);
  return String(Number(v.toPrecision(6)));
}

export function renderChart(spec: ChartSpec): string {
  const pts = spec.curves.flatMap((c) =>
    c.xs.map((x, i) => ({
      x: transform(x, !!spec.logX),
      y: transform(c.ys[i], !!spec.logY),
      lo: transform(c.yLow ? c.yLow[i] : c.ys[i], !!spec.logY),
      hi: transform(c.yHigh ? c.yHigh[i] : c.ys[i], !!spec.logY),
    })),
  );
  let xMin = Math.min(...pts.map((p) => p.x));
  let xMax = Math.max(...pts.map((p) => p.x));
  let yMin = Math.min(...pts.map((p) => p.lo));
  let yMax = Math.max(...pts.map((p) => p.hi));
  if (xMax === xMin) {
    xMin -= 1;
    xMax += 1;
  }
  if (yMax === yMin) {
    yMin -= 1;
    yMax += 1;
  }
  const padY = 0.05 * (yMax - yMin);
  yMin -= padY;
  yMax += padY;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const sy = (y: number) => MARGIN.top + (1 - (y - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="15">${spec.title}</text>`,
  );
  // axes
  const axisY = HEIGHT - MARGIN.bottom;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${WIDTH - MARGIN.right}" y2="${axisY}" stroke="black"/>`,
  );
  for (const t of niceTicks(xMin, xMax, !!spec.logX)) {
    if (t < xMin - 1e-9 || t > xMax + 1e-9) continue;
    const x = sx(t);
    parts.push(`<line x1="${x}" y1="${axisY}" x2="${x}" y2="${axisY + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${x}" y="${axisY + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmtTick(t, !!spec.logX)}</text>`,
    );
  }
  for (const t of niceTicks(yMin, yMax, !!spec.logY)) {
    if (t < yMin - 1e-9 || t > yMax + 1e-9) continue;
    const y = sy(t);
    parts.push(`<line x1="${MARGIN.left - 5}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="black"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${fmtTick(t, !!spec.logY)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">${spec.xLabel}</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${spec.yLabel}</text>`,
  );
  // curves with min/max whiskers
  spec.curves.forEach((curve) => {
    const { color, marker } = styleFor(curve.label);
    const coords = curve.xs.map((x, i) => ({
      px: sx(transform(x, !!spec.logX)),
      py: sy(transform(curve.ys[i], !!spec.logY)),
      lo: sy(transform(curve.yLow ? curve.yLow[i] : curve.ys[i], !!spec.logY)),
      hi: sy(transform(curve.yHigh ? curve.yHigh[i] : curve.ys[i], !!spec.logY)),
    }));
    const line = coords.map((c) => `${c.px.toFixed(2)},${c.py.toFixed(2)}`).join(" ");
    parts.push(`<polyline points="${line}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    for (const c of coords) {
      if (Math.abs(c.lo - c.hi) > 0.5) {
        parts.push(`<line x1="${c.px}" y1="${c.lo}" x2="${c.px}" y2="${c.hi}" stroke="${color}" stroke-width="1"/>`);
      }
      if (marker === "circle") {
        parts.push(`<circle cx="${c.px}" cy="${c.py}" r="3.2" fill="${color}"/>`);
      } else if (marker === "square") {
        parts.push(`<rect x="${c.px - 3}" y="${c.py - 3}" width="6" height="6" fill="${color}"/>`);
      } else {
        parts.push(
          `<polygon points="${c.px},${c.py - 4} ${c.px + 4},${c.py} ${c.px},${c.py + 4} ${c.px - 4},${c.py}" fill="${color}"/>`,
        );
      }
    }
  });
  // legend (spread shown as min/max whiskers)
  spec.curves.forEach((curve, idx) => {
    const { color } = styleFor(curve.label);
    const y = MARGIN.top + 14 + idx * 16;
    const x = WIDTH - MARGIN.right - 190;
    parts.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(
      `<text x="${x + 28}" y="${y}" font-family="sans-serif" font-size="11">${curve.label} (mean, min/max)</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export interface Bar {
  label: string;
  group: string;
  value: number;
}

export function renderBars(title: string, yLabel: string, bars: Bar[], logY = true): string {
  const groups = [...new Set(bars.map((b) => b.group))];
  const labels = [...new Set(bars.map((b) => b.label))];
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const ys = bars.map((b) => transform(b.value, logY));
  const yMin = Math.min(...ys, logY ? -4 : 0) - 0.2;
  const yMax = Math.max(...ys) + 0.2;
  const sy = (y: number) => MARGIN.top + (1 - (y - yMin) / (yMax - yMin)) * plotH;
  const slot = plotW / labels.length;
  const barW = Math.max(2, (slot * 0.8) / groups.length);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="15">${title}</text>`,
  );
  const axisY = HEIGHT - MARGIN.bottom;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${WIDTH - MARGIN.right}" y2="${axisY}" stroke="black"/>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${yLabel}</text>`,
  );
  for (const t of niceTicks(yMin, yMax, logY)) {
    const y = sy(t);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="black"/>`,
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${fmtTick(t, logY)}</text>`,
    );
  }
  bars.forEach((bar) => {
    const li = labels.indexOf(bar.label);
    const gi = groups.indexOf(bar.group);
    const x = MARGIN.left + li * slot + slot * 0.1 + gi * barW;
    const y = sy(transform(bar.value, logY));
    const { color } = styleFor(bar.group);
    parts.push(`<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${barW.toFixed(2)}" height="${(axisY - y).toFixed(2)}" fill="${color}"/>`);
  });
  groups.forEach((group, idx) => {
    const { color } = styleFor(group);
    const y = MARGIN.top + 14 + idx * 16;
    const x = WIDTH - MARGIN.right - 170;
    parts.push(
      `<rect x="${x}" y="${y - 10}" width="12" height="12" fill="${color}"/>`,
      `<text x="${x + 18}" y="${y}" font-family="sans-serif" font-size="11">${group}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
