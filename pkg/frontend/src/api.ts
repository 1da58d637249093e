// Typed client for the correction service. Types mirror the wire format;
// the client performs no color computation of its own.

export interface SessionInfo {
  id: string;
  width: number;
  height: number;
}

export interface PickRecord {
  index: number;
  x: number;
  y: number;
  picked_rgb: number[];
  gamma: number[];
  ell: number[];
  cluster: number;
}

export interface CorrectionSummary {
  mode: "awb" | "pick";
  gamma: number[];
  ell: number[];
  cluster: number;
  corrected_url: string;
  pick?: PickRecord;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const defaultFetch: FetchLike = (input, init) => fetch(input, init);

async function errorFrom(res: Response): Promise<ApiError> {
  let detail = res.statusText || `HTTP ${res.status}`;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, detail);
}

export class WbrfApi {
  constructor(
    private baseUrl = "",
    private fetchFn: FetchLike = defaultFetch,
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as T;
  }

  createSession(data: Blob, signal?: AbortSignal): Promise<SessionInfo> {
    const form = new FormData();
    form.append("file", data, "upload.png");
    return this.json("/api/session", { method: "POST", body: form, signal });
  }

  runAwb(id: string, signal?: AbortSignal): Promise<CorrectionSummary> {
    return this.json(`/api/session/${id}/awb`, { method: "POST", signal });
  }

  pick(id: string, x: number, y: number, signal?: AbortSignal): Promise<CorrectionSummary> {
    return this.json(`/api/session/${id}/pick`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ x, y }),
      signal,
    });
  }

  listPicks(id: string, signal?: AbortSignal): Promise<PickRecord[]> {
    return this.json<{ picks: PickRecord[] }>(`/api/session/${id}/picks`, { signal }).then(
      (body) => body.picks,
    );
  }

  imageUrl(id: string, which: "original" | "corrected"): string {
    return `${this.baseUrl}/api/session/${id}/image/${which}`;
  }

  async fetchImage(
    id: string,
    which: "original" | "corrected",
    signal?: AbortSignal,
  ): Promise<Uint8Array> {
    const res = await this.fetchFn(this.imageUrl(id, which), { signal });
    if (!res.ok) throw await errorFrom(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  async deleteSession(id: string): Promise<void> {
    const res = await this.fetchFn(`${this.baseUrl}/api/session/${id}`, { method: "DELETE" });
    if (!res.ok) throw await errorFrom(res);
  }
}
