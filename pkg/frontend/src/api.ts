/** Thin typed client for the service endpoints. No dialogue logic lives here. */

import type { KbSummary, TurnResponse, WireTurn } from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const doc = (await res.json()) as { detail?: string };
        if (doc.detail) detail = doc.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ServiceError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  async health(): Promise<{ status: string; kb_version: number }> {
    return this.request("/api/health");
  }

  async createSession(): Promise<string> {
    const doc = await this.request<{ session_id: string }>("/api/sessions", {
      method: "POST",
    });
    return doc.session_id;
  }

  async postTurn(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/turns`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  async transcript(sessionId: string, afterSeq = 0): Promise<WireTurn[]> {
    const doc = await this.request<{ turns: WireTurn[] }>(
      `/api/sessions/${encodeURIComponent(sessionId)}/transcript?after_seq=${afterSeq}`,
    );
    return doc.turns;
  }

  async kbSummary(): Promise<KbSummary> {
    return this.request("/api/kb/summary");
  }
}
