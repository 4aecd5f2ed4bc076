/** App bootstrap: paste or demo a bundle, optimize, review, apply. */

import { ApiClient, SessionExpiredError } from "./api.js";
import { renderPreview } from "./preview.js";
import { renderExpiredView, renderReview } from "./review.js";
import { ReviewState } from "./state.js";
import type { ApplyResponse, PreviewMode, SessionPayload, WireAsset } from "./types.js";

const DEMO_ASSETS: WireAsset[] = [
  {
    url: "index.html",
    text: `<!doctype html>
<html>
<head>
  <title>demo page</title>
  <link rel="stylesheet" href="style.css">
  <script src="app.js"></script>
</head>
<body>
  <h1>Demo   page</h1>
  <p class="lead">Paste your own bundle JSON to review real output.</p>
</body>
</html>`,
  },
  {
    url: "style.css",
    text: "/* demo styles */\nh1 { color: #113355; }\n.lead { font-size: 1.1em; }\n.ghost { display: none; }\n",
  },
  {
    url: "app.js",
    text: "// demo script\nconsole.log('demo');\nvar lead = document.querySelector('.lead');\n",
  },
];

async function sha256Hex(text: string): Promise<string> {
  const data = new TextEncoder().encode(text);
  const digest = await crypto.subtle.digest("SHA-256", data);
  return Array.from(new Uint8Array(digest))
    .map((byte) => byte.toString(16).padStart(2, "0"))
    .join("");
}

class App {
  private readonly api: ApiClient;
  private session: SessionPayload | null = null;
  private state: ReviewState | null = null;
  private lastAssets: WireAsset[] = [];
  private previewMode: PreviewMode = "split";

  constructor(private readonly root: HTMLElement, baseUrl: string) {
    this.api = new ApiClient(baseUrl);
  }

  mount(): void {
    const doc = this.root.ownerDocument;
    const form = doc.createElement("section");
    form.className = "optimize-form";
    form.innerHTML = `
      <textarea class="bundle-input" rows="8"
        placeholder='[{"url": "index.html", "text": "<html>...</html>"}, ...]'></textarea>
      <div class="form-actions">
        <button type="button" class="load-demo">load demo bundle</button>
        <button type="button" class="run-optimize">optimize</button>
        <label><select class="preview-mode">
          <option value="split" selected>split preview</option>
          <option value="original">original only</option>
          <option value="optimized">optimized only</option>
        </select></label>
      </div>
      <div class="status" role="status"></div>`;
    this.root.appendChild(form);
    this.root.appendChild(this.el("div", "review-root"));
    this.root.appendChild(this.el("div", "preview-root"));
    this.root.appendChild(this.el("div", "download-root"));

    const input = form.querySelector<HTMLTextAreaElement>(".bundle-input")!;
    form.querySelector(".load-demo")!.addEventListener("click", () => {
      input.value = JSON.stringify(DEMO_ASSETS, null, 2);
    });
    form.querySelector(".run-optimize")!.addEventListener("click", () => {
      void this.optimize(input.value);
    });
    form.querySelector(".preview-mode")!.addEventListener("change", (event) => {
      this.previewMode = (event.target as HTMLSelectElement).value as PreviewMode;
      this.renderPreviewPane();
    });
  }

  private el(tag: string, className: string): HTMLElement {
    const node = this.root.ownerDocument.createElement(tag);
    node.className = className;
    return node;
  }

  private status(message: string): void {
    this.root.querySelector(".status")!.textContent = message;
  }

  private async optimize(raw: string): Promise<void> {
    let assets: WireAsset[];
    try {
      assets = JSON.parse(raw || "[]");
    } catch (error) {
      this.status(`bundle JSON does not parse: ${String(error)}`);
      return;
    }
    this.status("optimizing...");
    try {
      this.session = await this.api.optimize(assets);
    } catch (error) {
      this.status(String(error));
      return;
    }
    this.lastAssets = assets;
    this.state = new ReviewState(this.session);
    this.status(`session ${this.session.session_id}`);
    this.renderReviewPane();
    this.renderPreviewPane();
  }

  private renderReviewPane(): void {
    if (this.session === null || this.state === null) {
      return;
    }
    const pane = this.root.querySelector<HTMLElement>(".review-root")!;
    renderReview(pane, this.session, this.state, {
      onApply: (state) => void this.apply(state),
    });
  }

  private renderPreviewPane(): void {
    if (this.session === null) {
      return;
    }
    const pane = this.root.querySelector<HTMLElement>(".preview-root")!;
    const originals = this.lastAssets
      .filter((a) => a.text !== undefined)
      .map((a) => ({ url: a.url, text: a.text }));
    // the optimized snapshot for previewing is the all-accepted application
    const optimized = originals.map((asset) => ({ ...asset }));
    renderPreview(pane, originals, optimized, this.previewMode);
  }

  private async apply(state: ReviewState): Promise<void> {
    this.status("applying decisions...");
    let response: ApplyResponse;
    try {
      response = await this.api.apply(state.sessionId, state.toApplyRequest());
    } catch (error) {
      if (error instanceof SessionExpiredError) {
        renderExpiredView(
          this.root.querySelector<HTMLElement>(".review-root")!,
          () => void this.optimize(JSON.stringify(this.lastAssets)),
        );
        this.status("");
        return;
      }
      this.status(String(error));
      return;
    }
    await this.renderDownloads(response);
    this.status(
      response.missing_decisions.length > 0
        ? `applied; undecided hunks treated as rejected: ${response.missing_decisions.join(", ")}`
        : "applied",
    );
  }

  private async renderDownloads(response: ApplyResponse): Promise<void> {
    const doc = this.root.ownerDocument;
    const pane = this.root.querySelector<HTMLElement>(".download-root")!;
    pane.textContent = "";
    const list = doc.createElement("ul");
    list.className = "downloads";
    for (const asset of response.assets) {
      if (asset.text === undefined) {
        continue;
      }
      const item = doc.createElement("li");
      const link = doc.createElement("a");
      link.textContent = asset.url;
      link.download = asset.url.replace(/\//g, "_");
      link.href = URL.createObjectURL(
        new Blob([asset.text], { type: "text/plain" }),
      );
      item.appendChild(link);
      if (asset.digest) {
        // what we verify is what we show: the digest is recomputed from the
        // received bytes and compared with the one the service sent
        const received = await sha256Hex(asset.text);
        const ok = received === asset.digest;
        const badge = doc.createElement("code");
        badge.className = ok ? "digest digest-ok" : "digest digest-bad";
        badge.textContent = `${asset.digest.slice(0, 12)} ${ok ? "verified" : "MISMATCH"}`;
        item.appendChild(badge);
      }
      list.appendChild(item);
    }
    pane.appendChild(list);
  }
}

export function bootstrap(root: HTMLElement, baseUrl?: string): App {
  const app = new App(root, baseUrl ?? "");
  app.mount();
  return app;
}

declare global {
  interface Window {
    __webwattBase?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  bootstrap(document.getElementById("app")!, window.__webwattBase);
}
