/**
 * Strict reader for the sweep CSV contract:
 *   sweep_var,sweep_value,method,metric,value,n_trials,seed
 * Unknown layouts fail loudly with the offending column named.
 */

export const EXPECTED_COLUMNS = [
  "sweep_var",
  "sweep_value",
  "method",
  "metric",
  "value",
  "n_trials",
  "seed",
] as const;

export interface SweepRow {
  sweepVar: string;
  sweepValue: number;
  method: string;
  metric: string;
  value: number;
  nTrials: number;
  seed: number;
}

export class CsvError extends Error {}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new CsvError("empty CSV: no header line");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const col of EXPECTED_COLUMNS) {
    if (!header.includes(col)) {
      throw new CsvError(`missing column '${col}'`);
    }
  }
  const idx = Object.fromEntries(EXPECTED_COLUMNS.map((c) => [c, header.indexOf(c)]));
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length < header.length) {
      throw new CsvError(`line ${i + 1}: expected ${header.length} fields, got ${parts.length}`);
    }
    const num = (col: string): number => {
      const raw = parts[idx[col]].trim();
      const v = Number(raw);
      if (!Number.isFinite(v)) {
        throw new CsvError(`line ${i + 1}: column '${col}' is not a finite number: '${raw}'`);
      }
      return v;
    };
    rows.push({
      sweepVar: parts[idx.sweep_var].trim(),
      sweepValue: num("sweep_value"),
      method: parts[idx.method].trim(),
      metric: parts[idx.metric].trim(),
      value: num("value"),
      nTrials: num("n_trials"),
      seed: num("seed"),
    });
  }
  if (rows.length === 0) {
    throw new CsvError("empty CSV: header but no data rows");
  }
  return rows;
}
