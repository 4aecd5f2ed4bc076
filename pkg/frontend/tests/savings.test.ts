import { describe, expect, it } from "vitest";

import { formatSavings, savingsPanelData } from "../src/savings.js";
import { sessionPayload } from "./state.test.js";

describe("savings formatting", () => {
  it("renders the study-style label", () => {
    const payload = sessionPayload([]);
    expect(formatSavings(payload.savings)).toBe("1.55 J (15.9%)");
  });

  it("uses the service numbers verbatim, never recomputing", () => {
    // deliberately inconsistent payload: if the client recomputed the
    // delta from before/after it would show 2.00 J / 20%, not these
    const payload = sessionPayload([]);
    payload.savings.before_j = 10;
    payload.savings.after_j = 8;
    payload.savings.delta_j = 1.55;
    payload.savings.delta_pct = 15.9;
    const data = savingsPanelData(payload.savings);
    expect(data.savingsLabel).toBe("1.55 J (15.9%)");
    expect(data.beforeLabel).toBe("10.00 J");
    expect(data.afterLabel).toBe("8.00 J");
  });

  it("formats zero and negative deltas plainly", () => {
    const payload = sessionPayload([]);
    payload.savings.delta_j = 0;
    payload.savings.delta_pct = 0;
    expect(formatSavings(payload.savings)).toBe("0.00 J (0.0%)");
    payload.savings.delta_j = -0.5;
    payload.savings.delta_pct = -5;
    expect(formatSavings(payload.savings)).toBe("-0.50 J (-5.0%)");
  });
});
