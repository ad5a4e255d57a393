import { describe, expect, it } from "vitest";

import { column, parseCsv, requireColumns, SchemaError } from "../src/csv.js";

describe("parseCsv", () => {
  it("reads header and numeric columns", () => {
    const table = parseCsv("x,u\n0.5,1\n1.5,-2\n");
    expect(table.header).toEqual(["x", "u"]);
    expect(table.rows).toBe(2);
    expect(Array.from(column(table, "x"))).toEqual([0.5, 1.5]);
    expect(Array.from(column(table, "u"))).toEqual([1, -2]);
  });

  it("round-trips full double precision", () => {
    const value = 0.1234567890123456789;
    const table = parseCsv(`x,u\n0,${value.toPrecision(17)}\n`);
    expect(column(table, "u")[0]).toBe(value);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", "empty.csv")).toThrow(SchemaError);
  });

  it("rejects ragged rows with the row number", () => {
    expect(() => parseCsv("x,u\n1,2\n3\n", "bad.csv")).toThrow(/row 2/);
  });

  it("rejects non-numeric cells naming the column", () => {
    expect(() => parseCsv("x,u\n1,fast\n", "bad.csv")).toThrow(/column 'u'/);
  });

  it("rejects duplicate header names", () => {
    expect(() => parseCsv("x,x\n1,2\n")).toThrow(/duplicate/);
  });
});

describe("requireColumns", () => {
  it("accepts a superset", () => {
    const table = parseCsv("n,t,extra\n0,0,1\n");
    expect(() => requireColumns(table, ["n", "t"], "ok.csv")).not.toThrow();
  });

  it("names the first missing column", () => {
    const table = parseCsv("x,u\n0,0\n");
    expect(() => requireColumns(table, ["t", "energy"], "sol.csv")).toThrow(
      /sol\.csv: missing column 't'/,
    );
  });
});
