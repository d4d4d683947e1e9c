// Thin client for the render service. The editor talks to nothing else.

import type { PvgDocument } from "./types.js";

export interface Diagnostic {
  severity: "error" | "warning";
  code: string;
  message: string;
  primitive_index: number;
}

export interface RenderResult {
  blob: Blob;
  contentHash: string;
  fromCache: boolean;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async getDocument(): Promise<PvgDocument | null> {
    const res = await this.fetchFn(this.url(`/api/doc/${this.sessionId}`));
    if (res.status === 404) return null;
    if (!res.ok) throw new Error(`GET doc failed: ${res.status}`);
    return (await res.json()) as PvgDocument;
  }

  async putDocument(doc: PvgDocument): Promise<Diagnostic[]> {
    const res = await this.fetchFn(this.url(`/api/doc/${this.sessionId}`), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!res.ok) {
      throw new Error(`PUT doc failed: ${res.status}`);
    }
    const body = (await res.json()) as { diagnostics: Diagnostic[] };
    return body.diagnostics;
  }

  async render(
    w: number,
    h: number,
    viewport?: [number, number, number, number],
  ): Promise<RenderResult> {
    let q = `w=${w}&h=${h}`;
    if (viewport) {
      q += `&viewport=${viewport.join(",")}`;
    }
    const res = await this.fetchFn(this.url(`/api/render/${this.sessionId}?${q}`));
    if (!res.ok) {
      throw new Error(`render failed: ${res.status}`);
    }
    return {
      blob: await res.blob(),
      contentHash: res.headers.get("X-Content-Hash") ?? "",
      fromCache: res.headers.get("X-Cache") === "hit",
    };
  }

  async metrics(): Promise<Record<string, number>> {
    const res = await this.fetchFn(this.url("/api/metrics"));
    return (await res.json()) as Record<string, number>;
  }
}
