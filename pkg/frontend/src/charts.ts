// Chart renderers for the solver CLI's CSV artifacts.
//
// Each renderer turns one parsed table into a complete SVG document string.
// All numerical statements shown on a figure (fitted slopes, the mass limit)
// are read verbatim from the CSV comment lines; the renderers only apply
// plotting transforms (scales, log axes, magnitudes) on top of the data.

import {
  column,
  CsvTable,
  requireColumns,
  requireComment,
  SchemaError,
} from "./csv.js";
import {
  COLORS,
  logTicks,
  FRAME,
  Frame,
  linearScale,
  linearTicks,
  lineElement,
  logScale,
  plotArea,
  polylineElement,
  circleElement,
  rectElement,
  Scale,
  svgOpen,
  SVG_CLOSE,
  textElement,
  tickLabel,
  xAxis,
  yAxis,
} from "./svg.js";

export type PlotKind = "decay" | "series" | "heatmap" | "geon-sweep";

export const PLOT_KINDS: readonly PlotKind[] = [
  "decay",
  "series",
  "heatmap",
  "geon-sweep",
];

/** Render `table` as the requested kind of figure. */
export function render(kind: PlotKind, table: CsvTable): string {
  switch (kind) {
    case "decay":
      return renderDecay(table);
    case "series":
      return renderSeries(table);
    case "heatmap":
      return renderHeatmap(table);
    case "geon-sweep":
      return renderGeonSweep(table);
  }
}

// ---------------------------------------------------------------------------
// decay: semilog plot of the flow's decay quantities with fitted exponentials

const DECAY_COLUMNS = ["t", "speed_excess", "shape_deviation", "v_min", "v_max"];

interface DecaySeries {
  readonly label: string;
  readonly color: string;
  readonly slopeKey: string;
  readonly values: readonly number[];
}

export function renderDecay(table: CsvTable): string {
  requireColumns(table, DECAY_COLUMNS);
  const t = column(table, "t");
  const series: DecaySeries[] = [
    {
      label: "speed excess",
      color: COLORS.primary,
      slopeKey: "slope_speed_excess",
      values: column(table, "speed_excess"),
    },
    {
      label: "shape deviation",
      color: COLORS.secondary,
      slopeKey: "slope_shape_deviation",
      values: column(table, "shape_deviation"),
    },
  ];
  const slopesRaw = series.map((s) => requireComment(table, s.slopeKey));

  const area = plotArea(FRAME);
  const positives = series.flatMap((s) => s.values.filter((v) => v > 0));
  // With no positive samples (the exactly-flat run) there is nothing to show
  // on a log axis; keep a fixed decade window and annotate the floor instead.
  const yMin = positives.length > 0 ? Math.min(...positives) / 1.6 : 1e-16;
  const yMax = positives.length > 0 ? Math.max(...positives) * 1.6 : 1.0;
  const xScale = linearScale(t[0]!, t[t.length - 1]!, area.left, area.right);
  const yScale = logScale(yMin, yMax, area.bottom, area.top);

  let out = svgOpen(FRAME, "Graph-flow decay");
  out += xAxis(area, { label: "t", ticks: linearTicks(t[0]!, t[t.length - 1]!), scale: xScale });
  out += yAxis(area, {
    label: "max deviation",
    ticks: logTicks(yMin, yMax),
    scale: yScale,
  });

  let annotationRow = 0;
  const annotate = (content: string, color: string): string => {
    annotationRow += 1;
    return textElement(area.left + 12, area.top + 6 + 16 * annotationRow, content, {
      size: 12,
      color,
    });
  };

  for (let k = 0; k < series.length; k += 1) {
    const s = series[k]!;
    const raw = slopesRaw[k]!;
    const points: Array<readonly [number, number]> = [];
    for (let i = 0; i < t.length; i += 1) {
      const v = s.values[i]!;
      if (v > 0) {
        points.push([xScale.map(t[i]!), yScale.map(v)]);
      }
    }
    if (points.length > 0) {
      out += polylineElement(points, s.color, 2);
    }

    const slope = Number(raw);
    const lastPositive = lastPositiveIndex(s.values);
    if (Number.isFinite(slope) && lastPositive >= 0) {
      // Fitted exponential through the last measured point: a straight line
      // in this semilog view, so its two endpoints determine it.
      const tAnchor = t[lastPositive]!;
      const vAnchor = s.values[lastPositive]!;
      const fitted = (time: number): number =>
        vAnchor * Math.exp(slope * (time - tAnchor));
      const tStart = t[firstPositiveIndex(s.values)]!;
      out += polylineElement(
        [
          [xScale.map(tStart), yScale.map(clampLog(fitted(tStart), yMin, yMax))],
          [xScale.map(tAnchor), yScale.map(clampLog(fitted(tAnchor), yMin, yMax))],
        ],
        s.color,
        1.2,
        "6 4",
      );
      out += annotate(`${s.label} slope = ${raw}`, s.color);
    } else {
      out += annotate(`${s.label} slope = ${raw} (no fit)`, s.color);
    }
  }

  if (positives.length === 0) {
    out += textElement(
      (area.left + area.right) / 2,
      (area.top + area.bottom) / 2,
      "all samples at the zero floor",
      { anchor: "middle", size: 14, color: COLORS.reference },
    );
  }

  out += legend(area, series.map((s) => ({ label: s.label, color: s.color })));
  return out + SVG_CLOSE;
}

function firstPositiveIndex(values: readonly number[]): number {
  for (let i = 0; i < values.length; i += 1) {
    if (values[i]! > 0) {
      return i;
    }
  }
  return -1;
}

function lastPositiveIndex(values: readonly number[]): number {
  for (let i = values.length - 1; i >= 0; i -= 1) {
    if (values[i]! > 0) {
      return i;
    }
  }
  return -1;
}

function clampLog(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

// ---------------------------------------------------------------------------
// series: quasilocal-mass evolution with its limit drawn as an asymptote

const SERIES_COLUMNS = ["t", "quasilocal_mass"];

export function renderSeries(table: CsvTable): string {
  requireColumns(table, SERIES_COLUMNS);
  const t = column(table, "t");
  const mass = column(table, "quasilocal_mass");
  const rawTotal = requireComment(table, "m_total");
  const mTotal = Number(rawTotal);
  if (!Number.isFinite(mTotal)) {
    throw new SchemaError(
      `${table.path}: "# m_total=" comment is not a finite number: "${rawTotal}"`,
    );
  }

  const area = plotArea(FRAME);
  let lo = Math.min(mTotal, ...mass);
  let hi = Math.max(mTotal, ...mass);
  if (hi === lo) {
    // Constant series (the rigid w0 = 1 case): pad to a visible band.
    lo -= 1;
    hi += 1;
  } else {
    const pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  const xScale = linearScale(t[0]!, t[t.length - 1]!, area.left, area.right);
  const yScale = linearScale(lo, hi, area.bottom, area.top);

  let out = svgOpen(FRAME, "Quasilocal mass");
  out += xAxis(area, { label: "t", ticks: linearTicks(t[0]!, t[t.length - 1]!), scale: xScale });
  out += yAxis(area, { label: "mass", ticks: linearTicks(lo, hi), scale: yScale });

  const yLimit = yScale.map(mTotal);
  out += lineElement(area.left, yLimit, area.right, yLimit, COLORS.asymptote, 1.4, "8 5");
  out += polylineElement(
    t.map((time, i) => [xScale.map(time), yScale.map(mass[i]!)] as const),
    COLORS.primary,
    2,
  );
  out += textElement(area.left + 12, area.top + 22, `m_total = ${rawTotal}`, {
    size: 12,
    color: COLORS.asymptote,
  });
  out += legend(area, [
    { label: "quasilocal mass", color: COLORS.primary },
    { label: "limit", color: COLORS.asymptote },
  ]);
  return out + SVG_CLOSE;
}

// ---------------------------------------------------------------------------
// heatmap: one scalar field sampled on the torus grid

const HEATMAP_COLUMNS = ["theta1", "theta2", "value"];

const HEAT_STOPS: ReadonlyArray<readonly [number, number, number]> = [
  [0.267, 0.005, 0.329],
  [0.283, 0.141, 0.458],
  [0.254, 0.265, 0.53],
  [0.207, 0.372, 0.553],
  [0.164, 0.471, 0.558],
  [0.128, 0.567, 0.551],
  [0.135, 0.659, 0.518],
  [0.267, 0.749, 0.441],
  [0.478, 0.821, 0.318],
  [0.741, 0.873, 0.15],
  [0.993, 0.906, 0.144],
];

function heatColor(fraction: number): string {
  const clamped = Math.min(1, Math.max(0, fraction));
  const position = clamped * (HEAT_STOPS.length - 1);
  const low = Math.floor(position);
  const high = Math.min(low + 1, HEAT_STOPS.length - 1);
  const blend = position - low;
  const channels = [0, 1, 2].map((c) => {
    const value = HEAT_STOPS[low]![c]! * (1 - blend) + HEAT_STOPS[high]![c]! * blend;
    return Math.round(255 * value)
      .toString(16)
      .padStart(2, "0");
  });
  return `#${channels.join("")}`;
}

const HEATMAP_FRAME: Frame = {
  width: 860,
  height: 520,
  margin: { top: 56, right: 140, bottom: 64, left: 88 },
};

export function renderHeatmap(table: CsvTable): string {
  requireColumns(table, HEATMAP_COLUMNS);
  const theta1 = column(table, "theta1");
  const theta2 = column(table, "theta2");
  const values = column(table, "value");

  // Rows are written row-major: theta1 constant over each block while theta2
  // sweeps the second axis.  Recover the grid shape from that layout.
  let n2 = 1;
  while (n2 < theta1.length && theta1[n2] === theta1[0]) {
    n2 += 1;
  }
  if (table.rows.length % n2 !== 0) {
    throw new SchemaError(
      `${table.path}: ${table.rows.length} rows do not divide into blocks ` +
        `of ${n2} (column "theta1" is not row-major)`,
    );
  }
  const n1 = table.rows.length / n2;
  for (let i1 = 0; i1 < n1; i1 += 1) {
    for (let i2 = 0; i2 < n2; i2 += 1) {
      const row = i1 * n2 + i2;
      if (theta1[row] !== theta1[i1 * n2] || theta2[row] !== theta2[i2]) {
        throw new SchemaError(
          `${table.path}: line ${row + 2 + Object.keys(table.comments).length}: ` +
            `columns "theta1","theta2" do not follow the row-major grid layout`,
        );
      }
    }
  }

  const spacing1 = n1 > 1 ? theta1[n2]! - theta1[0]! : 1;
  const spacing2 = n2 > 1 ? theta2[1]! - theta2[0]! : 1;
  const period1 = n1 * spacing1;
  const period2 = n2 * spacing2;

  const vMin = Math.min(...values);
  const vMax = Math.max(...values);
  const span = vMax - vMin;

  const area = plotArea(HEATMAP_FRAME);
  const xScale = linearScale(0, period1, area.left, area.right);
  const yScale = linearScale(0, period2, area.bottom, area.top);

  let out = svgOpen(HEATMAP_FRAME, "Torus field");
  const cellW = (area.right - area.left) / n1;
  const cellH = (area.bottom - area.top) / n2;
  for (let i1 = 0; i1 < n1; i1 += 1) {
    for (let i2 = 0; i2 < n2; i2 += 1) {
      const value = values[i1 * n2 + i2]!;
      const fraction = span === 0 ? 0.5 : (value - vMin) / span;
      // Overdraw each cell very slightly so rounding never leaves hairlines.
      out += rectElement(
        area.left + i1 * cellW,
        area.top + (n2 - 1 - i2) * cellH,
        cellW + 0.25,
        cellH + 0.25,
        heatColor(fraction),
      );
    }
  }
  out += xAxis(area, { label: "theta1", ticks: linearTicks(0, period1), scale: xScale });
  out += yAxis(area, { label: "theta2", ticks: linearTicks(0, period2), scale: yScale });

  // Color bar with min/max labels.
  const barLeft = area.right + 28;
  const barWidth = 18;
  const segments = 24;
  const segH = (area.bottom - area.top) / segments;
  for (let k = 0; k < segments; k += 1) {
    out += rectElement(
      barLeft,
      area.bottom - (k + 1) * segH,
      barWidth,
      segH + 0.25,
      heatColor((k + 0.5) / segments),
    );
  }
  out += textElement(barLeft + barWidth / 2, area.bottom + 18, tickLabel(vMin), {
    anchor: "middle",
    size: 11,
  });
  out += textElement(barLeft + barWidth / 2, area.top - 8, tickLabel(vMax), {
    anchor: "middle",
    size: 11,
  });
  out += textElement(
    area.left + 12,
    area.top + 22,
    `min = ${tickLabel(vMin)}, max = ${tickLabel(vMax)}`,
    { size: 12 },
  );
  return out + SVG_CLOSE;
}

// ---------------------------------------------------------------------------
// geon-sweep: static-mass remainder against the leading asymptotic order

const GEON_COLUMNS = ["r0", "mass", "mass_leading", "remainder", "h_boundary"];

export function renderGeonSweep(table: CsvTable): string {
  requireColumns(table, GEON_COLUMNS);
  const r0 = column(table, "r0");
  const remainder = column(table, "remainder");
  const rawSlope = requireComment(table, "remainder_slope");

  const magnitudes = remainder.map((v, i) => {
    const magnitude = Math.abs(v);
    if (magnitude === 0) {
      throw new SchemaError(
        `${table.path}: column "remainder", row ${i + 1}: zero value cannot ` +
          `be drawn on a log axis`,
      );
    }
    return magnitude;
  });
  for (let i = 0; i < r0.length; i += 1) {
    if (!(r0[i]! > 0)) {
      throw new SchemaError(
        `${table.path}: column "r0", row ${i + 1}: log axis requires ` +
          `positive values, found ${r0[i]}`,
      );
    }
  }

  const area = plotArea(FRAME);
  const xMin = Math.min(...r0) / 1.3;
  const xMax = Math.max(...r0) * 1.3;
  // The -3 reference through the first sweep point bounds the vertical range
  // together with the data itself.
  const anchorR = r0[0]!;
  const anchorY = magnitudes[0]!;
  const referenceAt = (r: number): number => anchorY * Math.pow(r / anchorR, -3);
  const yCandidates = [...magnitudes, referenceAt(xMin), referenceAt(xMax)];
  const yMin = Math.min(...yCandidates) / 1.6;
  const yMax = Math.max(...yCandidates) * 1.6;
  const xScale = logScale(xMin, xMax, area.left, area.right);
  const yScale = logScale(yMin, yMax, area.bottom, area.top);

  let out = svgOpen(FRAME, "Static mass remainder sweep");
  out += xAxis(area, { label: "r0", ticks: logTicks(xMin, xMax), scale: xScale });
  out += yAxis(area, {
    label: "|remainder|",
    ticks: logTicks(yMin, yMax),
    scale: yScale,
  });

  out += polylineElement(
    [
      [xScale.map(xMin), yScale.map(referenceAt(xMin))],
      [xScale.map(xMax), yScale.map(referenceAt(xMax))],
    ],
    COLORS.reference,
    1.4,
    "8 5",
  );
  out += polylineElement(
    r0.map((r, i) => [xScale.map(r), yScale.map(magnitudes[i]!)] as const),
    COLORS.primary,
    2,
  );
  for (let i = 0; i < r0.length; i += 1) {
    out += circleElement(xScale.map(r0[i]!), yScale.map(magnitudes[i]!), 4, COLORS.primary);
  }
  out += textElement(area.left + 12, area.top + 22, `remainder slope = ${rawSlope}`, {
    size: 12,
    color: COLORS.primary,
  });
  out += legend(area, [
    { label: "measured remainder", color: COLORS.primary },
    { label: "slope -3 reference", color: COLORS.reference },
  ]);
  return out + SVG_CLOSE;
}

// ---------------------------------------------------------------------------

function legend(
  area: { readonly right: number; readonly top: number },
  entries: ReadonlyArray<{ readonly label: string; readonly color: string }>,
): string {
  let out = "";
  for (let i = 0; i < entries.length; i += 1) {
    const entry = entries[i]!;
    const y = area.top + 14 + 18 * i;
    out += lineElement(area.right - 180, y, area.right - 150, y, entry.color, 3);
    out += textElement(area.right - 142, y + 4, entry.label, { size: 12 });
  }
  return out;
}
