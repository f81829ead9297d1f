// Deterministic SVG building blocks shared by the chart renderers.
//
// Every coordinate is formatted with a fixed number of decimals and nothing
// time- or environment-dependent is ever emitted, so rendering the same table
// twice produces byte-identical output.

export interface Margin {
  readonly top: number;
  readonly right: number;
  readonly bottom: number;
  readonly left: number;
}

export interface Frame {
  readonly width: number;
  readonly height: number;
  readonly margin: Margin;
}

export const FRAME: Frame = {
  width: 860,
  height: 520,
  margin: { top: 56, right: 36, bottom: 64, left: 88 },
};

export const COLORS = {
  background: "#ffffff",
  text: "#222222",
  grid: "#dddddd",
  axis: "#555555",
  primary: "#1b6ca8",
  secondary: "#c2571a",
  reference: "#777777",
  asymptote: "#444444",
} as const;

export const FONT_FAMILY = "'DejaVu Sans Mono', 'Courier New', monospace";

/** Plot-area pixel bounds derived from a frame. */
export interface PlotArea {
  readonly left: number;
  readonly right: number;
  readonly top: number;
  readonly bottom: number;
}

export function plotArea(frame: Frame): PlotArea {
  return {
    left: frame.margin.left,
    right: frame.width - frame.margin.right,
    top: frame.margin.top,
    bottom: frame.height - frame.margin.bottom,
  };
}

/** Fixed-precision pixel coordinate, the only number format in the output. */
export function px(value: number): string {
  const fixed = value.toFixed(2);
  // Avoid the two encodings of zero ("-0.00" vs "0.00").
  return fixed === "-0.00" ? "0.00" : fixed;
}

function escapeXml(raw: string): string {
  return raw
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

// ---------------------------------------------------------------------------
// Scales and ticks

export interface Scale {
  /** Map a data value to a pixel coordinate. */
  readonly map: (value: number) => number;
  readonly dataMin: number;
  readonly dataMax: number;
}

export function linearScale(
  dataMin: number,
  dataMax: number,
  pixelMin: number,
  pixelMax: number,
): Scale {
  const span = dataMax - dataMin;
  const ratio = span === 0 ? 0 : (pixelMax - pixelMin) / span;
  return {
    map: (value) =>
      span === 0 ? (pixelMin + pixelMax) / 2 : pixelMin + (value - dataMin) * ratio,
    dataMin,
    dataMax,
  };
}

/** Base-10 logarithmic scale; the data bounds must be strictly positive. */
export function logScale(
  dataMin: number,
  dataMax: number,
  pixelMin: number,
  pixelMax: number,
): Scale {
  if (!(dataMin > 0) || !(dataMax > 0)) {
    throw new RangeError("logScale requires strictly positive bounds");
  }
  const inner = linearScale(Math.log10(dataMin), Math.log10(dataMax), pixelMin, pixelMax);
  return {
    map: (value) => inner.map(Math.log10(value)),
    dataMin,
    dataMax,
  };
}

/** Round tick positions covering [min, max] using a 1/2/5 step ladder. */
export function linearTicks(min: number, max: number, target = 6): number[] {
  if (!(max > min)) {
    return [min];
  }
  const rawStep = (max - min) / Math.max(target, 2);
  const power = Math.floor(Math.log10(rawStep));
  const base = Math.pow(10, power);
  let step = 10 * base;
  for (const multiple of [1, 2, 5]) {
    if (multiple * base >= rawStep) {
      step = multiple * base;
      break;
    }
  }
  const ticks: number[] = [];
  const first = Math.ceil(min / step - 1e-9) * step;
  for (let v = first; v <= max + step * 1e-9; v += step) {
    // Snap to the step grid so accumulated float error never leaks out.
    ticks.push(Number((Math.round(v / step) * step).toPrecision(12)));
  }
  return ticks;
}

/** Powers of ten inside [min, max] for logarithmic axes. */
export function decadeTicks(min: number, max: number): number[] {
  const lo = Math.ceil(Math.log10(min) - 1e-9);
  const hi = Math.floor(Math.log10(max) + 1e-9);
  const ticks: number[] = [];
  for (let k = lo; k <= hi; k += 1) {
    ticks.push(Math.pow(10, k));
  }
  if (ticks.length === 0) {
    ticks.push(min, max);
  }
  return ticks;
}

/**
 * Log-axis ticks: whole decades when the range spans at least three of them,
 * otherwise the 1/2/5 ladder inside the range so short axes stay readable.
 */
export function logTicks(min: number, max: number): number[] {
  const decades = decadeTicks(min, max);
  if (decades.length >= 3) {
    return decades;
  }
  const loPower = Math.floor(Math.log10(min));
  const hiPower = Math.ceil(Math.log10(max));
  const ticks: number[] = [];
  for (let k = loPower; k <= hiPower; k += 1) {
    for (const multiple of [1, 2, 5]) {
      const value = multiple * Math.pow(10, k);
      if (value >= min * (1 - 1e-9) && value <= max * (1 + 1e-9)) {
        ticks.push(value);
      }
    }
  }
  return ticks.length > 0 ? ticks : decades;
}

/** Compact, deterministic tick label. */
export function tickLabel(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    const exponent = Math.floor(Math.log10(magnitude) + 1e-9);
    const mantissa = value / Math.pow(10, exponent);
    const head = Number(mantissa.toPrecision(3));
    return head === 1 ? `1e${exponent}` : head === -1 ? `-1e${exponent}` : `${head}e${exponent}`;
  }
  return String(Number(value.toPrecision(6)));
}

// ---------------------------------------------------------------------------
// Element builders (each returns one complete SVG fragment line)

export function svgOpen(frame: Frame, title: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" ` +
    `height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}" ` +
    `font-family="${FONT_FAMILY}">\n` +
    `<rect x="0" y="0" width="${frame.width}" height="${frame.height}" ` +
    `fill="${COLORS.background}"/>\n` +
    textElement(frame.width / 2, 28, title, {
      anchor: "middle",
      size: 17,
      color: COLORS.text,
    })
  );
}

export const SVG_CLOSE = "</svg>\n";

export interface TextOptions {
  readonly anchor?: "start" | "middle" | "end";
  readonly size?: number;
  readonly color?: string;
  readonly rotate?: number;
}

export function textElement(
  x: number,
  y: number,
  content: string,
  options: TextOptions = {},
): string {
  const anchor = options.anchor ?? "start";
  const size = options.size ?? 13;
  const color = options.color ?? COLORS.text;
  const transform =
    options.rotate === undefined
      ? ""
      : ` transform="rotate(${options.rotate} ${px(x)} ${px(y)})"`;
  return (
    `<text x="${px(x)}" y="${px(y)}" text-anchor="${anchor}" ` +
    `font-size="${size}" fill="${color}"${transform}>${escapeXml(content)}</text>\n`
  );
}

export function lineElement(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  color: string,
  width = 1,
  dash?: string,
): string {
  const dashAttr = dash === undefined ? "" : ` stroke-dasharray="${dash}"`;
  return (
    `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" ` +
    `stroke="${color}" stroke-width="${width}"${dashAttr}/>\n`
  );
}

export function polylineElement(
  points: ReadonlyArray<readonly [number, number]>,
  color: string,
  width = 2,
  dash?: string,
): string {
  const coords = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  const dashAttr = dash === undefined ? "" : ` stroke-dasharray="${dash}"`;
  return (
    `<polyline points="${coords}" fill="none" stroke="${color}" ` +
    `stroke-width="${width}" stroke-linejoin="round"${dashAttr}/>\n`
  );
}

export function circleElement(
  cx: number,
  cy: number,
  r: number,
  fill: string,
): string {
  return `<circle cx="${px(cx)}" cy="${px(cy)}" r="${px(r)}" fill="${fill}"/>\n`;
}

export function rectElement(
  x: number,
  y: number,
  width: number,
  height: number,
  fill: string,
): string {
  return (
    `<rect x="${px(x)}" y="${px(y)}" width="${px(width)}" ` +
    `height="${px(height)}" fill="${fill}"/>\n`
  );
}

// ---------------------------------------------------------------------------
// Axes

export interface AxisOptions {
  readonly label: string;
  readonly ticks: readonly number[];
  readonly scale: Scale;
  /** Format used for tick labels; defaults to tickLabel. */
  readonly format?: (value: number) => string;
}

export function xAxis(area: PlotArea, options: AxisOptions): string {
  const format = options.format ?? tickLabel;
  let out = lineElement(area.left, area.bottom, area.right, area.bottom, COLORS.axis);
  for (const tick of options.ticks) {
    const x = options.scale.map(tick);
    if (x < area.left - 0.5 || x > area.right + 0.5) {
      continue;
    }
    out += lineElement(x, area.top, x, area.bottom, COLORS.grid);
    out += lineElement(x, area.bottom, x, area.bottom + 5, COLORS.axis);
    out += textElement(x, area.bottom + 20, format(tick), {
      anchor: "middle",
      size: 12,
    });
  }
  out += textElement((area.left + area.right) / 2, area.bottom + 44, options.label, {
    anchor: "middle",
    size: 13,
  });
  return out;
}

export function yAxis(area: PlotArea, options: AxisOptions): string {
  const format = options.format ?? tickLabel;
  let out = lineElement(area.left, area.top, area.left, area.bottom, COLORS.axis);
  for (const tick of options.ticks) {
    const y = options.scale.map(tick);
    if (y < area.top - 0.5 || y > area.bottom + 0.5) {
      continue;
    }
    out += lineElement(area.left, y, area.right, y, COLORS.grid);
    out += lineElement(area.left - 5, y, area.left, y, COLORS.axis);
    out += textElement(area.left - 9, y + 4, format(tick), {
      anchor: "end",
      size: 12,
    });
  }
  out += textElement(area.left - 64, (area.top + area.bottom) / 2, options.label, {
    anchor: "middle",
    size: 13,
    rotate: -90,
  });
  return out;
}
