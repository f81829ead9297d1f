export {
  column,
  parseCsv,
  readCsv,
  requireColumns,
  requireComment,
  SchemaError,
} from "./csv.js";
export type { CsvTable } from "./csv.js";
export {
  PLOT_KINDS,
  render,
  renderDecay,
  renderGeonSweep,
  renderHeatmap,
  renderSeries,
} from "./charts.js";
export type { PlotKind } from "./charts.js";
export { main } from "./cli.js";
