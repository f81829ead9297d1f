// Strict reader for the solver's CSV artifacts.
//
// The files follow one fixed layout: optional `# key=value` comment lines,
// then a single header line, then purely numeric data rows.  Anything else is
// a schema mismatch and raises SchemaError with a column/row diagnostic, so
// the CLI can report exactly which part of the file disagreed.

import { readFileSync } from "node:fs";

/** Raised when a CSV file does not match the expected artifact layout. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface CsvTable {
  /** Path the table was read from (used in diagnostics only). */
  readonly path: string;
  /** `# key=value` comment lines, values kept verbatim as raw strings. */
  readonly comments: Readonly<Record<string, string>>;
  /** Column names, in file order. */
  readonly header: readonly string[];
  /** Data rows; rows[i][j] is column header[j] of the i-th row. */
  readonly rows: ReadonlyArray<readonly number[]>;
}

const COMMENT_PATTERN = /^# ([A-Za-z0-9_]+)=(.*)$/;

/** Read a CSV artifact, enforcing the comment/header/rows layout strictly. */
export function readCsv(path: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    const reason = err instanceof Error ? err.message : String(err);
    throw new SchemaError(`cannot read ${path}: ${reason}`);
  }
  return parseCsv(text, path);
}

/** Parse CSV text; `path` appears only in diagnostics. */
export function parseCsv(text: string, path: string): CsvTable {
  const lines = text.split(/\r?\n/);
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }

  const comments: Record<string, string> = {};
  let cursor = 0;
  while (cursor < lines.length && lines[cursor]!.startsWith("#")) {
    const line = lines[cursor]!;
    const match = COMMENT_PATTERN.exec(line);
    if (match === null) {
      throw new SchemaError(
        `${path}: line ${cursor + 1} is a comment but not "# key=value": ${line}`,
      );
    }
    comments[match[1]!] = match[2]!;
    cursor += 1;
  }

  if (cursor >= lines.length) {
    throw new SchemaError(`${path}: missing header line`);
  }
  const header = lines[cursor]!.split(",");
  if (header.some((name) => name.trim() === "")) {
    throw new SchemaError(`${path}: header has an empty column name`);
  }
  cursor += 1;

  const rows: number[][] = [];
  for (; cursor < lines.length; cursor += 1) {
    const line = lines[cursor]!;
    if (line.startsWith("#")) {
      throw new SchemaError(
        `${path}: line ${cursor + 1}: comments are only allowed before the header`,
      );
    }
    if (line.trim() === "") {
      throw new SchemaError(`${path}: line ${cursor + 1} is blank`);
    }
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path}: line ${cursor + 1} has ${cells.length} cells, expected ` +
          `${header.length} (${header.join(", ")})`,
      );
    }
    const row: number[] = [];
    for (let j = 0; j < cells.length; j += 1) {
      const cell = cells[j]!;
      const value = cell.trim() === "" ? Number.NaN : Number(cell);
      if (!Number.isFinite(value)) {
        throw new SchemaError(
          `${path}: line ${cursor + 1}, column "${header[j]}": ` +
            `not a finite number: "${cell}"`,
        );
      }
      row.push(value);
    }
    rows.push(row);
  }

  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return { path, comments, header, rows };
}

/**
 * Require the table's header to equal `expected` exactly (names and order).
 * The artifacts are produced with a fixed column order, so any deviation is
 * reported as a schema mismatch naming the first offending column.
 */
export function requireColumns(
  table: CsvTable,
  expected: readonly string[],
): void {
  const n = Math.max(table.header.length, expected.length);
  for (let i = 0; i < n; i += 1) {
    const want = expected[i];
    const got = table.header[i];
    if (want !== got) {
      throw new SchemaError(
        `${table.path}: column ${i + 1} mismatch: expected ` +
          `${want === undefined ? "(end of header)" : `"${want}"`}, found ` +
          `${got === undefined ? "(end of header)" : `"${got}"`} ` +
          `(full header: ${table.header.join(", ")})`,
      );
    }
  }
}

/** Fetch a `# key=value` comment's raw value, or fail with a diagnostic. */
export function requireComment(table: CsvTable, key: string): string {
  const value = table.comments[key];
  if (value === undefined) {
    throw new SchemaError(`${table.path}: missing "# ${key}=" comment line`);
  }
  return value;
}

/** Column values by header name; the header must contain the name. */
export function column(table: CsvTable, name: string): number[] {
  const index = table.header.indexOf(name);
  if (index < 0) {
    throw new SchemaError(
      `${table.path}: no column "${name}" (header: ${table.header.join(", ")})`,
    );
  }
  return table.rows.map((row) => row[index]!);
}
