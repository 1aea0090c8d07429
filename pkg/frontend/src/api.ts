/** Typed client for the retrieval service. The UI never computes scores or
 * reorders results itself; everything shown comes straight from the payload.
 */

export interface NodeInfo {
  id: string;
  label: string;
  group: string;
  norm: number;
}

export interface TreeEdge {
  parent: string;
  child: string;
  frequency: number;
  proportion: number;
}

export interface TreePayload {
  edges: TreeEdge[];
}

export interface RetrieveResult {
  id: string;
  label: string;
  group: string;
  score: number;
  norm: number;
}

export interface RetrievePayload {
  query: string;
  direction: string;
  threshold: number;
  results: RetrieveResult[];
}

export type FetchLike = (url: string) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) {
      throw new Error(`request failed: ${resp.status} ${path}`);
    }
    return (await resp.json()) as T;
  }

  listNodes(): Promise<NodeInfo[]> {
    return this.get<NodeInfo[]>("/nodes");
  }

  getTree(): Promise<TreePayload> {
    return this.get<TreePayload>("/tree");
  }

  retrieve(
    query: string,
    direction: string,
    threshold: number,
    k: number,
  ): Promise<RetrievePayload> {
    const params = new URLSearchParams({
      query,
      direction,
      threshold: String(threshold),
      k: String(k),
    });
    return this.get<RetrievePayload>(`/retrieve?${params.toString()}`);
  }
}
