/** Query state held in the URL fragment so views are shareable. */

export type Direction = "p2c" | "c2p";

export interface QueryState {
  queryId: string;
  direction: Direction;
  threshold: number; // radians in [0, pi]
  k: number; // >= 1
}

export const DEFAULT_STATE: QueryState = {
  queryId: "",
  direction: "p2c",
  threshold: 0,
  k: 10,
};

const PI = Math.PI;

export function clampThreshold(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(PI, Math.max(0, value));
}

export function clampK(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_STATE.k;
  return Math.max(1, Math.round(value));
}

/** Serialize to a URL fragment like `#query=n3&direction=p2c&threshold=1.5&k=10`. */
export function serializeState(state: QueryState): string {
  const params = new URLSearchParams({
    query: state.queryId,
    direction: state.direction,
    threshold: state.threshold.toFixed(4),
    k: String(state.k),
  });
  return `#${params.toString()}`;
}

/** Parse a URL fragment, falling back to defaults for missing or bad fields. */
export function parseState(fragment: string): QueryState {
  const raw = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  const params = new URLSearchParams(raw);
  const direction = params.get("direction");
  return {
    queryId: params.get("query") ?? DEFAULT_STATE.queryId,
    direction: direction === "c2p" ? "c2p" : "p2c",
    threshold: clampThreshold(Number(params.get("threshold") ?? "0")),
    k: clampK(Number(params.get("k") ?? String(DEFAULT_STATE.k))),
  };
}

export function withQuery(state: QueryState, queryId: string): QueryState {
  return { ...state, queryId };
}
