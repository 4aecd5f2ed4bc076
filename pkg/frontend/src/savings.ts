/** Savings panel formatting. The numbers are the service's, verbatim;
 * formatting here is display-only rounding, no arithmetic. */

import type { SavingsPayload } from "./types.js";

export function formatJoules(value: number): string {
  return `${value.toFixed(2)} J`;
}

export function formatPercent(value: number): string {
  return `${value.toFixed(1)}%`;
}

/** "1.55 J (15.9%)" */
export function formatSavings(savings: SavingsPayload): string {
  return `${savings.delta_j.toFixed(2)} J (${formatPercent(savings.delta_pct)})`;
}

export interface SavingsPanelData {
  beforeLabel: string;
  afterLabel: string;
  savingsLabel: string;
}

export function savingsPanelData(savings: SavingsPayload): SavingsPanelData {
  return {
    beforeLabel: formatJoules(savings.before_j),
    afterLabel: formatJoules(savings.after_j),
    savingsLabel: formatSavings(savings),
  };
}
