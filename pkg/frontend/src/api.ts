/**
 * Typed client for the review service API.
 *
 * Every call carries the bearer token; summaries and note counts always
 * come back from the server so the client never drifts from stored state.
 */

export interface Progress {
  scored: number;
  total: number;
}

export interface Ticket {
  id: string;
  name: string;
  state: "computing" | "computed" | "failed";
  progress: Progress;
}

export interface DatasetListItem {
  id: string;
  name: string;
  state: string;
  computing: boolean;
}

export interface DatasetLists {
  single_type: DatasetListItem[];
  treasures: DatasetListItem[];
}

export interface Summary {
  coins: number;
  potential_links: number;
  categories: Record<string, number>;
}

export interface DatasetDetail {
  ticket: Ticket;
  summary: Summary | null;
  kind: string;
  created_at: string;
  error: string | null;
  warnings: string[];
}

export interface PairTransform {
  rotation: number;
  scale: number;
  dx: number;
  dy: number;
}

export interface PairEntry {
  name1: string;
  name2: string;
  distance: number;
  alignable: boolean;
  note: string;
  comment: string;
  transform: PairTransform | null;
}

export interface PairsPage {
  total: number;
  offset: number;
  limit: number;
  entries: PairEntry[];
}

export interface EvaluationResponse {
  evaluation: { name1: string; name2: string; note: string; comment: string };
  summary: Summary;
}

export interface CurvePayload {
  points: [number, number][];
  knee_index: number | null;
}

export interface EmbeddingPayload {
  points: { name: string; x: number; y: number }[];
}

export interface ClustersPayload {
  provisional: boolean;
  threshold: number;
  labels: { name: string; cluster_id: number }[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private token: string = "",
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const h: Record<string, string> = { ...extra };
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      let code = "ERROR";
      let message = `${response.status}`;
      try {
        const body = await response.json();
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  listDatasets(): Promise<DatasetLists> {
    return this.request("/api/datasets", { headers: this.headers() });
  }

  datasetDetail(id: string): Promise<DatasetDetail> {
    return this.request(`/api/datasets/${id}`, { headers: this.headers() });
  }

  pairs(id: string, offset: number, limit: number, query = ""): Promise<PairsPage> {
    const params = new URLSearchParams({ offset: String(offset), limit: String(limit) });
    if (query) params.set("query", query);
    return this.request(`/api/datasets/${id}/pairs?${params}`, { headers: this.headers() });
  }

  setEvaluation(
    id: string,
    name1: string,
    name2: string,
    note: string,
    comment: string,
  ): Promise<EvaluationResponse> {
    return this.request(
      `/api/datasets/${id}/pairs/${encodeURIComponent(name1)}/${encodeURIComponent(name2)}`,
      {
        method: "PUT",
        headers: this.headers({ "Content-Type": "application/json" }),
        body: JSON.stringify({ note, comment }),
      },
    );
  }

  curve(id: string): Promise<CurvePayload> {
    return this.request(`/api/datasets/${id}/curve`, { headers: this.headers() });
  }

  embedding(id: string): Promise<EmbeddingPayload> {
    return this.request(`/api/datasets/${id}/embedding`, { headers: this.headers() });
  }

  clusters(id: string, threshold: number): Promise<ClustersPayload> {
    return this.request(`/api/datasets/${id}/clusters?threshold=${threshold}`, {
      headers: this.headers(),
    });
  }

  imageUrl(id: string, name: string): string {
    return `${this.base}/api/datasets/${id}/images/${encodeURIComponent(name)}`;
  }

  exportUrl(id: string): string {
    return `${this.base}/api/datasets/${id}/export`;
  }

  async fetchImage(id: string, name: string): Promise<Blob> {
    const response = await fetch(this.imageUrl(id, name), { headers: this.headers() });
    if (!response.ok) throw new ApiError(response.status, "IMAGE_ERROR", `image ${name}`);
    return response.blob();
  }

  async fetchExport(id: string): Promise<{ filename: string; blob: Blob }> {
    const response = await fetch(this.exportUrl(id), { headers: this.headers() });
    if (!response.ok) throw new ApiError(response.status, "EXPORT_ERROR", "export failed");
    const disposition = response.headers.get("content-disposition") ?? "";
    const match = /filename="([^"]+)"/.exec(disposition);
    return { filename: match ? match[1] : "notations.csv", blob: await response.blob() };
  }
}
