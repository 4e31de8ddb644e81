/** Turn sweep rows into the figure a family describes. */

import { SweepRow } from "./csv.js";
import { FigureFamily } from "./families.js";
import { ChartSpec, Series, renderChart } from "./svg.js";

export class RenderError extends Error {}

export function buildChart(family: FigureFamily, rows: SweepRow[]): ChartSpec {
  const relevant = rows.filter((r) => family.metrics.includes(r.metric));
  if (relevant.length === 0) {
    throw new RenderError(
      `no rows with metric '${family.metrics.join("' or '")}' for family ${family.id}`,
    );
  }
  const wrongVar = relevant.find((r) => r.sweepVar !== family.sweepVar);
  if (wrongVar) {
    throw new RenderError(
      `family ${family.id} plots sweep_var '${family.sweepVar}', CSV has '${wrongVar.sweepVar}'`,
    );
  }
  const keys: string[] = [];
  const byKey = new Map<string, SweepRow[]>();
  for (const row of relevant) {
    const key =
      family.metrics.length > 1 ? `${row.method} (${metricLabel(row.metric)})` : row.method;
    if (!byKey.has(key)) {
      byKey.set(key, []);
      keys.push(key);
    }
    byKey.get(key)!.push(row);
  }
  const series: Series[] = keys.map((key) => ({
    label: key,
    points: byKey
      .get(key)!
      .map((r): [number, number] => [r.sweepValue, r.value])
      .sort((a, b) => a[0] - b[0]),
  }));
  return { title: family.title, xLabel: family.xLabel, yLabel: family.yLabel, series };
}

function metricLabel(metric: string): string {
  return metric
    .replace(/^delta_u_/, "")
    .replace(/_pct$/, "")
    .replace(/_/g, "-");
}

export function renderFamily(family: FigureFamily, rows: SweepRow[]): string {
  return renderChart(buildChart(family, rows));
}
