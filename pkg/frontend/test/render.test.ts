import { describe, expect, it } from "vitest";
import { parseSweepCsv } from "../src/csv.js";
import { FAMILIES, familyById } from "../src/families.js";
import { RenderError, buildChart, renderFamily } from "../src/render.js";

const HEADER = "sweep_var,sweep_value,method,metric,value,n_trials,seed";

function fig4Csv(): string {
  const lines = [HEADER];
  for (const isd of [10, 20, 30]) {
    for (const method of ["brd_perfect", "brd_estimated", "iwfa"]) {
      lines.push(`isd,${isd},${method},mean_sum_rate,${10 + isd / 10},500,7`);
    }
  }
  return lines.join("\n") + "\n";
}

describe("family registry", () => {
  it("contains the eight figure families", () => {
    expect(Object.keys(FAMILIES).sort()).toEqual([
      "fig4a", "fig4b", "fig5a", "fig5b", "fig8a", "fig8b", "fig9a", "fig9b",
    ]);
  });

  it("rejects unknown ids with the known list", () => {
    expect(() => familyById("fig7")).toThrow(/unknown figure family 'fig7'/);
  });
});

describe("buildChart", () => {
  it("makes one series per method, points sorted by sweep value", () => {
    const chart = buildChart(familyById("fig4a"), parseSweepCsv(fig4Csv()));
    expect(chart.series.map((s) => s.label)).toEqual(["brd_perfect", "brd_estimated", "iwfa"]);
    for (const s of chart.series) {
      expect(s.points.map((p) => p[0])).toEqual([10, 20, 30]);
    }
  });

  it("splits series per metric for the loss families", () => {
    const rows = parseSweepCsv(
      [
        HEADER,
        "sir_db,0,lspd,delta_u_sum_rate_pct,3.0,2000,7",
        "sir_db,0,lspd,delta_u_sum_ee_pct,6.0,2000,7",
        "sir_db,5,lspd,delta_u_sum_rate_pct,2.5,2000,7",
        "sir_db,5,lspd,delta_u_sum_ee_pct,5.0,2000,7",
      ].join("\n"),
    );
    const chart = buildChart(familyById("fig5b"), rows);
    expect(chart.series.map((s) => s.label)).toEqual(["lspd (sum-rate)", "lspd (sum-ee)"]);
  });

  it("rejects a sweep-variable mismatch", () => {
    expect(() => buildChart(familyById("fig5a"), [
      { sweepVar: "isd", sweepValue: 1, method: "m", metric: "esnr_db", value: 1, nTrials: 1, seed: 1 },
    ])).toThrow(RenderError);
  });

  it("names the missing metric", () => {
    expect(() => buildChart(familyById("fig9a"), [
      { sweepVar: "n_bits", sweepValue: 1, method: "m", metric: "other", value: 1, nTrials: 1, seed: 1 },
    ])).toThrow(/esnr_db/);
  });
});

describe("renderFamily", () => {
  it("emits one polyline per series plus legend entries", () => {
    const svg = renderFamily(familyById("fig4a"), parseSweepCsv(fig4Csv()));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.match(/<polyline/g)).toHaveLength(3);
    expect(svg).toContain("brd_estimated");
    expect(svg).toContain("Inter-site distance (m)");
  });

  it("is byte-identical across reruns", () => {
    const rows = parseSweepCsv(fig4Csv());
    const a = renderFamily(familyById("fig4a"), rows);
    const b = renderFamily(familyById("fig4a"), rows);
    expect(a).toBe(b);
  });

  it("handles a degenerate single-point sweep", () => {
    const rows = parseSweepCsv(`${HEADER}\nisd,10,iwfa,mean_sum_rate,11.5,500,7\n`);
    const svg = renderFamily(familyById("fig4b"), rows);
    expect(svg).toContain("<polyline");
  });
});
