import { describe, expect, it } from "vitest";

import { ReviewState } from "../src/state.js";
import type { SessionPayload } from "../src/types.js";

export function sessionPayload(
  patchsets: Array<{ asset: string; hunks: number; diff?: string }>,
): SessionPayload {
  const estimate = {
    transfer_joules: 8,
    cpu_joules: 2,
    total_joules: 10,
    per_segment_joules: {},
    bytes: 1000,
    dom_ops: 4,
  };
  return {
    session_id: "s-123",
    fallback_used: false,
    finalized: false,
    savings: {
      before_j: 10,
      after_j: 8.45,
      delta_j: 1.55,
      delta_pct: 15.9,
      before: estimate,
      after: { ...estimate, total_joules: 8.45 },
    },
    patchsets: patchsets.map((p) => ({
      asset: p.asset,
      diff: p.diff ?? "",
      hunks: p.hunks,
      original_digest: "d".repeat(64),
    })),
    transformations: [],
  };
}

describe("ReviewState", () => {
  it("defaults every hunk to accepted", () => {
    const state = new ReviewState(sessionPayload([{ asset: "a.css", hunks: 2 }]));
    expect(state.decisionFor("a.css", 0)).toBe("accepted");
    expect(state.decisionFor("a.css", 1)).toBe("accepted");
    expect(state.hunkCount).toBe(2);
  });

  it("rejecting the second hunk produces the documented request body", () => {
    const state = new ReviewState(sessionPayload([{ asset: "a.css", hunks: 2 }]));
    state.decide("a.css", 1, "rejected");
    expect(state.toApplyRequest()).toEqual({
      decisions: { "a.css": { "0": "accepted", "1": "rejected" } },
    });
  });

  it("reject all flips everything and is reversible", () => {
    const state = new ReviewState(
      sessionPayload([
        { asset: "a.css", hunks: 2 },
        { asset: "b.js", hunks: 1 },
      ]),
    );
    state.rejectAll();
    expect(state.rejectedCount()).toBe(3);
    state.acceptAll();
    expect(state.rejectedCount()).toBe(0);
  });

  it("unknown hunks are an error, not a silent default", () => {
    const state = new ReviewState(sessionPayload([{ asset: "a.css", hunks: 1 }]));
    expect(() => state.decide("a.css", 5, "rejected")).toThrow(/unknown hunk/);
    expect(() => state.decide("other.css", 0, "rejected")).toThrow(/unknown hunk/);
  });

  it("a rebuilt state starts from the default decisions again", () => {
    const payload = sessionPayload([{ asset: "a.css", hunks: 2 }]);
    const first = new ReviewState(payload);
    first.rejectAll();
    const reloaded = new ReviewState(payload, { reloaded: true });
    expect(reloaded.reloaded).toBe(true);
    expect(reloaded.decisionFor("a.css", 0)).toBe("accepted");
    expect(reloaded.decisionFor("a.css", 1)).toBe("accepted");
  });
});
