/** The review surface: asset list, per-hunk accept/reject, savings panel. */

import { parseUnifiedDiff } from "./diffmodel.js";
import { savingsPanelData } from "./savings.js";
import { ReviewState } from "./state.js";
import type { Decision, SessionPayload } from "./types.js";

export interface ReviewHandlers {
  onApply: (state: ReviewState) => void;
  onDecisionChange?: (asset: string, hunkId: number, decision: Decision) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderSavingsPanel(
  doc: Document,
  payload: SessionPayload,
): HTMLElement {
  const data = savingsPanelData(payload.savings);
  const panel = el(doc, "section", "savings-panel");
  const rows: Array<[string, string, string]> = [
    ["before", "savings-before", data.beforeLabel],
    ["after", "savings-after", data.afterLabel],
    ["saved", "savings-delta", data.savingsLabel],
  ];
  for (const [label, className, value] of rows) {
    const row = el(doc, "div", "savings-row");
    row.appendChild(el(doc, "span", "savings-label", label));
    row.appendChild(el(doc, "span", className, value));
    panel.appendChild(row);
  }
  if (payload.fallback_used) {
    panel.appendChild(
      el(doc, "div", "savings-note", "remote backend unavailable; rule engine used"),
    );
  }
  return panel;
}

function renderHunk(
  doc: Document,
  state: ReviewState,
  asset: string,
  hunkId: number,
  header: string,
  rows: Array<{ kind: string; text: string }>,
  handlers: ReviewHandlers,
): HTMLElement {
  const block = el(doc, "article", "hunk");
  block.dataset.asset = asset;
  block.dataset.hunkId = String(hunkId);
  block.dataset.decision = state.decisionFor(asset, hunkId);

  const bar = el(doc, "header", "hunk-bar");
  bar.appendChild(el(doc, "code", "hunk-header", header));
  const controls = el(doc, "span", "hunk-controls");
  for (const decision of ["accepted", "rejected"] as const) {
    const button = el(
      doc,
      "button",
      `hunk-${decision}`,
      decision === "accepted" ? "accept" : "reject",
    );
    button.type = "button";
    button.setAttribute(
      "aria-pressed",
      String(state.decisionFor(asset, hunkId) === decision),
    );
    button.addEventListener("click", () => {
      state.decide(asset, hunkId, decision);
      block.dataset.decision = decision;
      for (const other of controls.querySelectorAll("button")) {
        other.setAttribute(
          "aria-pressed",
          String(other === button),
        );
      }
      handlers.onDecisionChange?.(asset, hunkId, decision);
    });
    controls.appendChild(button);
  }
  bar.appendChild(controls);
  block.appendChild(bar);

  const body = el(doc, "pre", "hunk-body");
  for (const row of rows) {
    const line = el(doc, "div", `diff-row diff-${row.kind}`);
    const marker = row.kind === "delete" ? "-" : row.kind === "insert" ? "+" : " ";
    line.textContent = marker + row.text;
    body.appendChild(line);
  }
  block.appendChild(body);
  return block;
}

export function renderReview(
  container: HTMLElement,
  payload: SessionPayload,
  state: ReviewState,
  handlers: ReviewHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("review");

  if (state.reloaded && !payload.finalized) {
    container.appendChild(
      el(
        doc,
        "div",
        "review-warning",
        "session reloaded: local decisions were reset to the default (all accepted)",
      ),
    );
  }

  container.appendChild(renderSavingsPanel(doc, payload));

  const nav = el(doc, "nav", "asset-nav");
  const assetsPane = el(doc, "div", "assets");
  container.appendChild(nav);
  container.appendChild(assetsPane);

  if (payload.patchsets.length === 0) {
    assetsPane.appendChild(
      el(doc, "p", "no-changes", "no changes: the bundle is already optimal"),
    );
  }

  for (const patchset of payload.patchsets) {
    const link = el(doc, "button", "asset-link", patchset.asset);
    link.type = "button";
    const section = el(doc, "section", "asset");
    section.id = `asset-${patchset.asset.replace(/[^a-zA-Z0-9_-]/g, "_")}`;
    link.addEventListener("click", () => section.scrollIntoView());
    nav.appendChild(link);

    section.appendChild(el(doc, "h2", "asset-title", patchset.asset));
    for (const hunk of parseUnifiedDiff(patchset.diff)) {
      section.appendChild(
        renderHunk(doc, state, patchset.asset, hunk.id, hunk.header, hunk.rows,
                   handlers),
      );
    }
    assetsPane.appendChild(section);
  }

  const actions = el(doc, "div", "review-actions");
  const rejectAll = el(doc, "button", "reject-all", "reject all");
  rejectAll.type = "button";
  rejectAll.addEventListener("click", () => {
    state.rejectAll();
    renderReview(container, payload, state, handlers);
  });
  const acceptAll = el(doc, "button", "accept-all", "accept all");
  acceptAll.type = "button";
  acceptAll.addEventListener("click", () => {
    state.acceptAll();
    renderReview(container, payload, state, handlers);
  });
  const apply = el(doc, "button", "apply", "apply decisions");
  apply.type = "button";
  apply.disabled = state.hunkCount === 0;
  apply.addEventListener("click", () => handlers.onApply(state));
  actions.appendChild(acceptAll);
  actions.appendChild(rejectAll);
  actions.appendChild(apply);
  container.appendChild(actions);
}

/** Instructive view for an unknown/expired session. */
export function renderExpiredView(
  container: HTMLElement,
  onReoptimize: () => void,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("review", "review-expired");
  container.appendChild(
    el(
      doc,
      "p",
      "expired-message",
      "This review session has expired (sessions live for an hour). " +
        "Re-run the optimizer to get fresh suggestions.",
    ),
  );
  const button = el(doc, "button", "reoptimize", "re-optimize");
  button.type = "button";
  button.addEventListener("click", onReoptimize);
  container.appendChild(button);
}
