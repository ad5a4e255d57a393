/** Strict parsing for the solver's comma-separated output tables. */

export interface Table {
  /** Column names in file order. */
  header: string[];
  /** Column name -> values, one entry per data row. */
  columns: Map<string, Float64Array>;
  rows: number;
}

export class SchemaError extends Error {}

/** Parse CSV text with a single header line and purely numeric rows. */
export function parseCsv(text: string, source = "<string>"): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty CSV`);
  }
  const header = (lines[0] as string).split(",").map((name) => name.trim());
  if (new Set(header).size !== header.length) {
    throw new SchemaError(`${source}: duplicate column names in header`);
  }
  const rows = lines.length - 1;
  const data = header.map(() => new Float64Array(rows));
  for (let r = 0; r < rows; r++) {
    const cells = (lines[r + 1] as string).split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${source}: row ${r + 1} has ${cells.length} fields, expected ${header.length}`,
      );
    }
    for (let c = 0; c < header.length; c++) {
      const value = Number(cells[c]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(
          `${source}: row ${r + 1}, column '${header[c]}': not a finite number: ${cells[c]}`,
        );
      }
      (data[c] as Float64Array)[r] = value;
    }
  }
  const columns = new Map<string, Float64Array>();
  header.forEach((name, i) => columns.set(name, data[i] as Float64Array));
  return { header, columns, rows };
}

/** Assert that every column in `required` is present, naming the first gap. */
export function requireColumns(table: Table, required: string[], source: string): void {
  for (const name of required) {
    if (!table.columns.has(name)) {
      throw new SchemaError(
        `${source}: missing column '${name}' (header: ${table.header.join(",")})`,
      );
    }
  }
}

export function column(table: Table, name: string): Float64Array {
  const values = table.columns.get(name);
  if (values === undefined) {
    throw new SchemaError(`missing column '${name}'`);
  }
  return values;
}
