/** DOM rendering. Result cards are appended in payload order (the service
 * already sorts by ascending norm); no client-side sorting or scoring.
 */

import type { RetrievePayload, RetrieveResult, TreePayload } from "./api.js";

export function renderResultCard(
  doc: Document,
  result: RetrieveResult,
  onSelect: (id: string) => void,
): HTMLElement {
  const card = doc.createElement("div");
  card.className = "result-card";
  card.dataset.nodeId = result.id;

  const title = doc.createElement("h3");
  title.textContent = result.label ? `${result.label} (${result.id})` : result.id;
  card.appendChild(title);

  const meta = doc.createElement("p");
  meta.className = "card-meta";
  meta.textContent =
    `group ${result.group} · score ${result.score.toFixed(4)} · ` +
    `norm ${result.norm.toFixed(4)}`;
  card.appendChild(meta);

  card.addEventListener("click", () => onSelect(result.id));
  return card;
}

export function renderResults(
  doc: Document,
  container: HTMLElement,
  payload: RetrievePayload,
  onSelect: (id: string) => void,
): void {
  container.replaceChildren();
  if (payload.results.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty-state";
    empty.textContent =
      `No results for "${payload.query}" at threshold ` +
      `${payload.threshold.toFixed(2)}. Lower the threshold to see more.`;
    container.appendChild(empty);
    return;
  }
  for (const result of payload.results) {
    container.appendChild(renderResultCard(doc, result, onSelect));
  }
}

export function renderTreePanel(
  doc: Document,
  container: HTMLElement,
  tree: TreePayload,
): void {
  container.replaceChildren();
  const list = doc.createElement("ul");
  list.className = "tree-panel";
  for (const edge of tree.edges) {
    const item = doc.createElement("li");
    item.textContent =
      `${edge.parent} → ${edge.child} ` +
      `(freq ${edge.frequency}, prop ${edge.proportion.toFixed(2)})`;
    list.appendChild(item);
  }
  container.appendChild(list);
}
