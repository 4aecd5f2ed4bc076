/** Local review-session state.
 *
 * Decisions are a function of user clicks only; everything numeric comes
 * from the service payload and is never recomputed here. New sessions
 * (and reloads of non-finalized sessions) start with every hunk accepted,
 * with "reject all" one click away.
 */

import type { ApplyRequest, Decision, SessionPayload } from "./types.js";

export class ReviewState {
  readonly payload: SessionPayload;
  /** asset id -> hunk id -> decision */
  private readonly decisions = new Map<string, Map<number, Decision>>();
  /** set when the state was rebuilt from a re-fetched session */
  readonly reloaded: boolean;

  constructor(payload: SessionPayload, opts: { reloaded?: boolean } = {}) {
    this.payload = payload;
    this.reloaded = opts.reloaded ?? false;
    for (const patchset of payload.patchsets) {
      const perHunk = new Map<number, Decision>();
      for (let id = 0; id < patchset.hunks; id++) {
        perHunk.set(id, "accepted");
      }
      this.decisions.set(patchset.asset, perHunk);
    }
  }

  get sessionId(): string {
    return this.payload.session_id;
  }

  get hunkCount(): number {
    let total = 0;
    for (const perHunk of this.decisions.values()) {
      total += perHunk.size;
    }
    return total;
  }

  assetIds(): string[] {
    return this.payload.patchsets.map((p) => p.asset);
  }

  decisionFor(asset: string, hunkId: number): Decision {
    const perHunk = this.decisions.get(asset);
    const decision = perHunk?.get(hunkId);
    if (decision === undefined) {
      throw new Error(`unknown hunk ${asset}#${hunkId}`);
    }
    return decision;
  }

  decide(asset: string, hunkId: number, decision: Decision): void {
    const perHunk = this.decisions.get(asset);
    if (perHunk === undefined || !perHunk.has(hunkId)) {
      throw new Error(`unknown hunk ${asset}#${hunkId}`);
    }
    perHunk.set(hunkId, decision);
  }

  setAll(decision: Decision): void {
    for (const perHunk of this.decisions.values()) {
      for (const id of perHunk.keys()) {
        perHunk.set(id, decision);
      }
    }
  }

  rejectAll(): void {
    this.setAll("rejected");
  }

  acceptAll(): void {
    this.setAll("accepted");
  }

  rejectedCount(): number {
    let count = 0;
    for (const perHunk of this.decisions.values()) {
      for (const decision of perHunk.values()) {
        if (decision === "rejected") {
          count += 1;
        }
      }
    }
    return count;
  }

  /** Exact request body for POST /v1/sessions/{id}/apply. */
  toApplyRequest(): ApplyRequest {
    const out: ApplyRequest["decisions"] = {};
    for (const [asset, perHunk] of this.decisions) {
      const entry: Record<string, Decision> = {};
      for (const [id, decision] of perHunk) {
        entry[String(id)] = decision;
      }
      out[asset] = entry;
    }
    return { decisions: out };
  }
}
