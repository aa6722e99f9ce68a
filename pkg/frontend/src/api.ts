/**
 * Typed client for the peer-engine HTTP API.
 *
 * Every number shown in the UI comes out of these payloads; the client never
 * computes similarities of its own.
 */

export interface FirmSummary {
  company_id: string;
  name: string;
}

export interface PeerEntry {
  company_id: string;
  name: string;
  similarity: number;
}

export interface WordEntry {
  word: string;
  similarity: number;
}

export interface MapPoint {
  company_id: string;
  name: string;
  x: number;
  y: number;
}

export interface Envelope<T> {
  status: string;
  code: string | null;
  snapshot_digest: string;
  data: T;
}

export interface FirmsPage {
  total: number;
  offset: number;
  limit: number;
  firms: FirmSummary[];
}

export interface HealthInfo {
  firms: number;
  dim: number;
  has_segmentation: boolean;
  has_words: boolean;
  strategy: string;
}

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly code: string | null = null,
    readonly httpStatus: number | null = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<Envelope<T>> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ServiceError(`service unreachable: ${(err as Error).message}`);
    }
    let body: Envelope<T> & { message?: string };
    try {
      body = await response.json();
    } catch {
      throw new ServiceError(`malformed response (HTTP ${response.status})`, null, response.status);
    }
    if (!response.ok || body.status !== "ok") {
      throw new ServiceError(
        body.message ?? `request failed (HTTP ${response.status})`,
        body.code ?? null,
        response.status,
      );
    }
    return body;
  }

  health(): Promise<Envelope<HealthInfo>> {
    return this.request<HealthInfo>("/health");
  }

  firms(offset = 0, limit = 1000): Promise<Envelope<FirmsPage>> {
    return this.request<FirmsPage>(`/firms?offset=${offset}&limit=${limit}`);
  }

  /** Page through /firms until the whole id + name list is local. */
  async allFirms(): Promise<FirmSummary[]> {
    const out: FirmSummary[] = [];
    let offset = 0;
    for (;;) {
      const page = await this.firms(offset, 1000);
      out.push(...page.data.firms);
      offset += page.data.firms.length;
      if (offset >= page.data.total || page.data.firms.length === 0) {
        return out;
      }
    }
  }

  peers(companyId: string, n: number): Promise<Envelope<{ peers: PeerEntry[] }>> {
    return this.request(`/peers/${encodeURIComponent(companyId)}?n=${n}`);
  }

  segmentPeers(companyId: string): Promise<Envelope<{ peers: PeerEntry[] }>> {
    return this.request(`/segment-peers/${encodeURIComponent(companyId)}`);
  }

  portfolioPeers(ids: string[], n: number): Promise<Envelope<{ peers: PeerEntry[] }>> {
    return this.request("/portfolio-peers", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ids, n }),
    });
  }

  topwords(companyId: string, n: number): Promise<Envelope<{ words: WordEntry[] }>> {
    return this.request(`/topwords/${encodeURIComponent(companyId)}?n=${n}`);
  }

  map(): Promise<Envelope<{ points: MapPoint[] }>> {
    return this.request("/map");
  }
}
