/**
 * Strict CSV ingestion for the simulator's tabular outputs.
 *
 * Every file carries an optional leading `#` comment block (unit
 * conventions), then an exact header line, then numeric rows. Headers are
 * contracts: a mutated header means the producer changed and we must fail
 * rather than guess column meanings.
 */

export class CsvError extends Error {}

export interface Table {
  /** Column names in file order. */
  header: string[];
  /** Row-major numeric data. */
  rows: number[][];
}

/** Parse `text`, requiring the header to equal `expectedHeader` exactly. */
export function parseCsv(text: string, expectedHeader: string[]): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0 && !line.startsWith("#"));
  if (lines.length === 0) {
    throw new CsvError("CSV has no header line");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  if (
    header.length !== expectedHeader.length ||
    header.some((h, i) => h !== expectedHeader[i])
  ) {
    throw new CsvError(
      `header mismatch: expected "${expectedHeader.join(",")}" ` +
        `but found "${header.join(",")}"`,
    );
  }
  const rows: number[][] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new CsvError(
        `row has ${cells.length} cells, header has ${header.length}: "${line}"`,
      );
    }
    const row = cells.map((c) => Number(c));
    if (row.some((v) => Number.isNaN(v))) {
      throw new CsvError(`non-numeric cell in row: "${line}"`);
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new CsvError("CSV has a header but no data rows");
  }
  return { header, rows };
}

/** Column accessor; the header was validated so the name must exist. */
export function column(table: Table, name: string): number[] {
  const i = table.header.indexOf(name);
  if (i < 0) throw new CsvError(`no column "${name}"`);
  return table.rows.map((r) => r[i]);
}

/** Sorted unique values of a column (grid axes of the sweep outputs). */
export function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}
