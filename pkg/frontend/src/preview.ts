/** Sandboxed page previews: original, optimized, or both side by side.
 *
 * Panes are iframes with the sandbox attribute; script execution is off
 * unless explicitly toggled on, so untrusted corpus pages stay inert.
 * Stylesheets from the snapshot are inlined so the preview approximates
 * the real rendering without any network access.
 */

import type { PreviewMode } from "./types.js";

export interface SnapshotAsset {
  url: string;
  text?: string;
}

export interface PreviewOptions {
  allowScripts?: boolean;
}

/** Entry document with snapshot stylesheets inlined. */
export function buildPreviewHtml(assets: SnapshotAsset[]): string {
  const entry = assets.find(
    (a) => a.text !== undefined && /\.html?$/.test(a.url),
  );
  if (entry === undefined || entry.text === undefined) {
    throw new Error("snapshot has no html entry");
  }
  const byUrl = new Map<string, string>();
  for (const asset of assets) {
    if (asset.text !== undefined) {
      byUrl.set(asset.url, asset.text);
    }
  }
  return entry.text.replace(
    /<link\b[^>]*rel=["']?stylesheet["']?[^>]*>/gi,
    (tag) => {
      const href = /href=["']?([^"'\s>]+)/i.exec(tag)?.[1];
      const css = href !== undefined ? byUrl.get(href) : undefined;
      return css !== undefined ? `<style>${css}</style>` : tag;
    },
  );
}

function buildPane(
  doc: Document,
  label: string,
  assets: SnapshotAsset[],
  options: PreviewOptions,
): HTMLElement {
  const pane = el(doc, "figure", "preview-pane");
  pane.appendChild(el(doc, "figcaption", "preview-label", label));
  try {
    const frame = doc.createElement("iframe");
    // no allow-same-origin: the previewed page cannot reach this app
    frame.setAttribute(
      "sandbox",
      options.allowScripts ? "allow-scripts" : "",
    );
    frame.setAttribute("srcdoc", buildPreviewHtml(assets));
    frame.className = "preview-frame";
    pane.appendChild(frame);
  } catch (error) {
    // a broken pane must never block its sibling
    pane.appendChild(
      el(doc, "div", "preview-error", `preview unavailable: ${String(error)}`),
    );
  }
  return pane;
}

function el(
  doc: Document,
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderPreview(
  container: HTMLElement,
  original: SnapshotAsset[],
  optimized: SnapshotAsset[],
  mode: PreviewMode,
  options: PreviewOptions = {},
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("preview", `preview-${mode}`);
  if (mode === "original" || mode === "split") {
    container.appendChild(buildPane(doc, "original", original, options));
  }
  if (mode === "optimized" || mode === "split") {
    container.appendChild(buildPane(doc, "optimized", optimized, options));
  }
}
