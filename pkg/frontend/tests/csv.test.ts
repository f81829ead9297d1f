import { describe, expect, it } from "vitest";
import { fileURLToPath } from "node:url";
import { join } from "node:path";
import {
  column,
  parseCsv,
  readCsv,
  requireColumns,
  requireComment,
  SchemaError,
} from "../src/csv.js";

const FIXTURES = join(fileURLToPath(new URL(".", import.meta.url)), "fixtures");

describe("readCsv", () => {
  it("reads comments, header, and rows from a real artifact", () => {
    const table = readCsv(join(FIXTURES, "generic_decay.csv"));
    expect(table.header).toEqual(["t", "speed_excess", "shape_deviation", "v_min", "v_max"]);
    expect(table.comments["slope_speed_excess"]).toBe("-2.000192847916098");
    expect(table.rows.length).toBe(21);
    expect(table.rows[0]![0]).toBe(0);
  });

  it("keeps comment values verbatim even when they are not numbers", () => {
    const table = readCsv(join(FIXTURES, "reference_decay.csv"));
    expect(table.comments["slope_speed_excess"]).toBe("nan");
    expect(table.comments["slope_shape_deviation"]).toBe("nan");
  });

  it("fails with the path when the file does not exist", () => {
    expect(() => readCsv(join(FIXTURES, "no_such_file.csv"))).toThrowError(SchemaError);
    expect(() => readCsv(join(FIXTURES, "no_such_file.csv"))).toThrowError(/no_such_file\.csv/);
  });
});

describe("parseCsv", () => {
  it("rejects a malformed comment line", () => {
    expect(() => parseCsv("# not a pair\na,b\n1,2\n", "x.csv")).toThrowError(
      /line 1 is a comment but not/,
    );
  });

  it("rejects comments after the header", () => {
    expect(() => parseCsv("a,b\n1,2\n# k=v\n", "x.csv")).toThrowError(
      /comments are only allowed before the header/,
    );
  });

  it("rejects a row with the wrong cell count, naming the row", () => {
    expect(() => parseCsv("a,b\n1,2\n3\n", "x.csv")).toThrowError(
      /line 3 has 1 cells, expected 2/,
    );
  });

  it("rejects non-numeric cells, naming the column", () => {
    expect(() => parseCsv("a,b\n1,oops\n", "x.csv")).toThrowError(
      /column "b": not a finite number: "oops"/,
    );
  });

  it("rejects empty cells and non-finite values", () => {
    expect(() => parseCsv("a,b\n1,\n", "x.csv")).toThrowError(/column "b"/);
    expect(() => parseCsv("a,b\n1,Infinity\n", "x.csv")).toThrowError(/column "b"/);
  });

  it("rejects an empty table", () => {
    expect(() => parseCsv("a,b\n", "x.csv")).toThrowError(/no data rows/);
    expect(() => parseCsv("", "x.csv")).toThrowError(/missing header/);
  });

  it("rejects blank interior lines", () => {
    expect(() => parseCsv("a,b\n1,2\n\n3,4\n", "x.csv")).toThrowError(/line 3 is blank/);
  });
});

describe("requireColumns", () => {
  const table = parseCsv("t,value\n0,1\n", "x.csv");

  it("accepts an exact match", () => {
    expect(() => requireColumns(table, ["t", "value"])).not.toThrow();
  });

  it("names the first mismatching column", () => {
    expect(() => requireColumns(table, ["t", "mass"])).toThrowError(
      /column 2 mismatch: expected "mass", found "value"/,
    );
  });

  it("rejects missing trailing columns", () => {
    expect(() => requireColumns(table, ["t", "value", "extra"])).toThrowError(
      /column 3 mismatch: expected "extra", found \(end of header\)/,
    );
  });

  it("rejects surplus trailing columns", () => {
    expect(() => requireColumns(table, ["t"])).toThrowError(
      /column 2 mismatch: expected \(end of header\), found "value"/,
    );
  });
});

describe("requireComment and column", () => {
  const table = parseCsv("# m_total=0.25\nt,value\n0,1\n2,3\n", "x.csv");

  it("returns the raw comment string", () => {
    expect(requireComment(table, "m_total")).toBe("0.25");
  });

  it("fails on a missing comment", () => {
    expect(() => requireComment(table, "slope")).toThrowError(/missing "# slope="/);
  });

  it("extracts a column by name", () => {
    expect(column(table, "value")).toEqual([1, 3]);
    expect(() => column(table, "zzz")).toThrowError(/no column "zzz"/);
  });
});
