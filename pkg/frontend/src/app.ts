/** Wiring: fetch-and-render loop, URL-fragment state, debounced threshold. */

import { ApiClient } from "./api.js";
import { renderResults, renderTreePanel } from "./render.js";
import {
  QueryState,
  clampThreshold,
  parseState,
  serializeState,
  withQuery,
} from "./state.js";

export interface AppElements {
  results: HTMLElement;
  tree: HTMLElement;
  querySelect: HTMLSelectElement;
  directionSelect: HTMLSelectElement;
  thresholdSlider: HTMLInputElement;
  thresholdValue: HTMLElement;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}

export class ExplorerApp {
  state: QueryState;

  constructor(
    private readonly api: ApiClient,
    private readonly doc: Document,
    private readonly els: AppElements,
    initialFragment = "",
  ) {
    this.state = parseState(initialFragment);
  }

  /** Fetch the current query's results and render them as-is. */
  async fetchAndRender(): Promise<void> {
    if (!this.state.queryId) {
      this.els.results.replaceChildren();
      return;
    }
    const payload = await this.api.retrieve(
      this.state.queryId,
      this.state.direction,
      this.state.threshold,
      this.state.k,
    );
    renderResults(this.doc, this.els.results, payload, (id) =>
      this.selectQuery(id),
    );
  }

  /** Card click: the clicked node becomes the next query. */
  async selectQuery(id: string): Promise<void> {
    this.state = withQuery(this.state, id);
    this.els.querySelect.value = id;
    this.syncFragment();
    await this.fetchAndRender();
  }

  async setThreshold(value: number): Promise<void> {
    this.state = { ...this.state, threshold: clampThreshold(value) };
    this.els.thresholdValue.textContent = this.state.threshold.toFixed(2);
    this.syncFragment();
    await this.fetchAndRender();
  }

  async setDirection(direction: string): Promise<void> {
    this.state = {
      ...this.state,
      direction: direction === "c2p" ? "c2p" : "p2c",
    };
    this.syncFragment();
    await this.fetchAndRender();
  }

  private syncFragment(): void {
    const win = this.doc.defaultView;
    if (win) win.location.hash = serializeState(this.state);
  }

  async start(debounceMs = 150): Promise<void> {
    const [nodes, tree] = await Promise.all([
      this.api.listNodes(),
      this.api.getTree(),
    ]);
    renderTreePanel(this.doc, this.els.tree, tree);

    this.els.querySelect.replaceChildren();
    for (const node of nodes) {
      const option = this.doc.createElement("option");
      option.value = node.id;
      option.textContent = node.label ? `${node.label} (${node.id})` : node.id;
      this.els.querySelect.appendChild(option);
    }
    if (!this.state.queryId && nodes.length > 0) {
      this.state = withQuery(this.state, nodes[0].id);
    }
    this.els.querySelect.value = this.state.queryId;
    this.els.directionSelect.value = this.state.direction;
    this.els.thresholdSlider.value = String(this.state.threshold);
    this.els.thresholdValue.textContent = this.state.threshold.toFixed(2);

    this.els.querySelect.addEventListener("change", () => {
      void this.selectQuery(this.els.querySelect.value);
    });
    this.els.directionSelect.addEventListener("change", () => {
      void this.setDirection(this.els.directionSelect.value);
    });
    const debounced = debounce(
      (value: number) => void this.setThreshold(value),
      debounceMs,
    );
    this.els.thresholdSlider.addEventListener("input", () => {
      debounced(Number(this.els.thresholdSlider.value));
    });

    await this.fetchAndRender();
  }
}

/** Browser entry point; no-op outside a DOM context (tests import pieces). */
export function mount(baseUrl = "http://127.0.0.1:8000"): void {
  if (typeof document === "undefined") return;
  const els: AppElements = {
    results: document.getElementById("results") as HTMLElement,
    tree: document.getElementById("tree") as HTMLElement,
    querySelect: document.getElementById("query") as HTMLSelectElement,
    directionSelect: document.getElementById("direction") as HTMLSelectElement,
    thresholdSlider: document.getElementById("threshold") as HTMLInputElement,
    thresholdValue: document.getElementById("threshold-value") as HTMLElement,
  };
  const app = new ExplorerApp(
    new ApiClient(baseUrl),
    document,
    els,
    window.location.hash,
  );
  void app.start();
}
