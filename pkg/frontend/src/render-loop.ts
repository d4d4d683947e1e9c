// Latest-wins render scheduling.
//
// Slider scrubbing floods the loop with document versions; we debounce
// PUTs to at most one per 100 ms, keep a single render in flight, and
// drop stale responses: only the newest requested version may paint, and
// identical content hashes skip the repaint entirely.

import type { ApiClient, Diagnostic, RenderResult } from "./api.js";
import type { PvgDocument } from "./types.js";
import { cloneDocument } from "./types.js";
import { debounce } from "./debounce.js";

export interface LoopEvents {
  onImage(result: RenderResult, seq: number): void;
  onDiagnostics(diags: Diagnostic[]): void;
  onError(err: unknown): void;
}

export const SLIDER_DEBOUNCE_MS = 100;

export class RenderLoop {
  private seq = 0;
  private displayedSeq = -1;
  private displayedHash = "";
  private inFlight = false;
  private queued: { doc: PvgDocument; seq: number } | null = null;
  private readonly push: ReturnType<typeof debounce<[PvgDocument, number]>>;

  constructor(
    private readonly api: ApiClient,
    private readonly size: () => [number, number],
    private readonly events: LoopEvents,
    debounceMs = SLIDER_DEBOUNCE_MS,
  ) {
    this.push = debounce((doc: PvgDocument, seq: number) => {
      void this.cycle(doc, seq);
    }, debounceMs);
  }

  /** Submit a new document version; returns its sequence number. */
  submit(doc: PvgDocument): number {
    const seq = ++this.seq;
    this.push(cloneDocument(doc), seq);
    return seq;
  }

  flush(): void {
    this.push.flush();
  }

  private async cycle(doc: PvgDocument, seq: number): Promise<void> {
    if (this.inFlight) {
      this.queued = { doc, seq }; // supersedes anything already queued
      return;
    }
    this.inFlight = true;
    try {
      const diags = await this.api.putDocument(doc);
      this.events.onDiagnostics(diags);
      if (!diags.some((d) => d.severity === "error")) {
        const [w, h] = this.size();
        const result = await this.api.render(w, h);
        if (seq > this.displayedSeq && result.contentHash !== this.displayedHash) {
          this.displayedSeq = seq;
          this.displayedHash = result.contentHash;
          this.events.onImage(result, seq);
        } else if (seq > this.displayedSeq) {
          this.displayedSeq = seq; // same pixels; skip the repaint
        }
      }
    } catch (err) {
      this.events.onError(err);
    } finally {
      this.inFlight = false;
      const next = this.queued;
      this.queued = null;
      if (next && next.seq > this.displayedSeq) {
        void this.cycle(next.doc, next.seq);
      }
    }
  }

  get displayed(): { seq: number; hash: string } {
    return { seq: this.displayedSeq, hash: this.displayedHash };
  }
}
