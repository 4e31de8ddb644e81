/** Figure-family registry: which sweep variable and metrics each one draws. */

export interface FigureFamily {
  id: string;
  sweepVar: string;
  metrics: string[];
  xLabel: string;
  yLabel: string;
  title: string;
}

export const FAMILIES: Record<string, FigureFamily> = {
  fig4a: {
    id: "fig4a",
    sweepVar: "isd",
    metrics: ["mean_sum_rate"],
    xLabel: "Inter-site distance (m)",
    yLabel: "Average sum-rate (bit/s/Hz)",
    title: "Sum-rate vs inter-site distance, two bands",
  },
  fig4b: {
    id: "fig4b",
    sweepVar: "isd",
    metrics: ["mean_sum_rate"],
    xLabel: "Inter-site distance (m)",
    yLabel: "Average sum-rate (bit/s/Hz)",
    title: "Sum-rate vs inter-site distance, single band",
  },
  fig5a: {
    id: "fig5a",
    sweepVar: "sir_db",
    metrics: ["esnr_db"],
    xLabel: "SIR (dB)",
    yLabel: "Estimation SNR (dB)",
    title: "Training-phase estimation SNR vs SIR",
  },
  fig5b: {
    id: "fig5b",
    sweepVar: "sir_db",
    metrics: ["delta_u_sum_rate_pct", "delta_u_sum_ee_pct"],
    xLabel: "SIR (dB)",
    yLabel: "Relative utility loss (%)",
    title: "Training-phase utility loss vs SIR",
  },
  fig8a: {
    id: "fig8a",
    sweepVar: "sir_db",
    metrics: ["esnr_db"],
    xLabel: "SIR (dB)",
    yLabel: "Estimation SNR (dB)",
    title: "Exchange-phase estimation SNR vs SIR",
  },
  fig8b: {
    id: "fig8b",
    sweepVar: "sir_db",
    metrics: ["delta_u_sum_rate_pct", "delta_u_sum_ee_pct"],
    xLabel: "SIR (dB)",
    yLabel: "Relative utility loss (%)",
    title: "Exchange-phase utility loss vs SIR",
  },
  fig9a: {
    id: "fig9a",
    sweepVar: "n_bits",
    metrics: ["esnr_db"],
    xLabel: "Gain quantizer bits",
    yLabel: "Estimation SNR (dB)",
    title: "Estimation SNR vs gain quantizer bits",
  },
  fig9b: {
    id: "fig9b",
    sweepVar: "t_ii",
    metrics: ["esnr_db"],
    xLabel: "Exchange slots",
    yLabel: "Estimation SNR (dB)",
    title: "Estimation SNR vs exchange slots",
  },
};

export function familyById(id: string): FigureFamily {
  const fam = FAMILIES[id];
  if (!fam) {
    throw new Error(
      `unknown figure family '${id}' (known: ${Object.keys(FAMILIES).sort().join(", ")})`,
    );
  }
  return fam;
}
