#!/usr/bin/env node
// Command-line entry point:
//
//   plot --kind <decay|series|heatmap|geon-sweep> --in <csv> --out <img>
//
// Exit codes: 0 on success, 1 when the input cannot be read or does not match
// the expected schema (the message names the offending column), 64 on usage
// errors.

import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { PLOT_KINDS, PlotKind, render } from "./charts.js";
import { readCsv, SchemaError } from "./csv.js";

const USAGE =
  "usage: plot --kind <decay|series|heatmap|geon-sweep> --in <csv> --out <img>";

const EXIT_OK = 0;
const EXIT_FAILURE = 1;
const EXIT_USAGE = 64;

interface Args {
  readonly kind: PlotKind;
  readonly input: string;
  readonly output: string;
}

function parseArgs(argv: readonly string[]): Args | string {
  const values: Partial<Record<"kind" | "in" | "out", string>> = {};
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i]!;
    if (flag !== "--kind" && flag !== "--in" && flag !== "--out") {
      return `unknown argument: ${flag}`;
    }
    const name = flag.slice(2) as "kind" | "in" | "out";
    const value = argv[i + 1];
    if (value === undefined) {
      return `${flag} requires a value`;
    }
    if (values[name] !== undefined) {
      return `${flag} given more than once`;
    }
    values[name] = value;
    i += 1;
  }
  if (values.kind === undefined || values.in === undefined || values.out === undefined) {
    return "missing required arguments";
  }
  if (!(PLOT_KINDS as readonly string[]).includes(values.kind)) {
    return `unknown --kind "${values.kind}" (choose from ${PLOT_KINDS.join(", ")})`;
  }
  return { kind: values.kind as PlotKind, input: values.in, output: values.out };
}

/** Run the renderer; returns the process exit code. */
export function main(argv: readonly string[]): number {
  const args = parseArgs(argv);
  if (typeof args === "string") {
    console.error(`error: ${args}`);
    console.error(USAGE);
    return EXIT_USAGE;
  }

  let image: string;
  try {
    image = render(args.kind, readCsv(args.input));
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return EXIT_FAILURE;
    }
    throw err;
  }

  try {
    writeFileSync(args.output, image, "utf8");
  } catch (err) {
    const reason = err instanceof Error ? err.message : String(err);
    console.error(`error: cannot write ${args.output}: ${reason}`);
    return EXIT_FAILURE;
  }
  console.log(`wrote ${args.output}`);
  return EXIT_OK;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
