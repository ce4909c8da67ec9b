/** SSE client for the engine transcript, built on streaming fetch so the
 * same code runs in browsers and under node tests.
 *
 * Events carry strictly increasing sequence numbers. On any drop the
 * client resubscribes with Last-Event-ID set to the last sequence it saw,
 * so a reconnect neither loses nor duplicates events; a hole in the
 * sequence is surfaced through onGap rather than papered over.
 */
import type { EngineEvent } from "./types.js";

export interface TranscriptOptions {
  onEvent: (event: EngineEvent) => void;
  onGap?: (expected: number, got: number) => void;
  onStatusChange?: (status: "connecting" | "live" | "retrying" | "closed") => void;
  reconnectDelayMs?: number;
  maxReconnects?: number;
  fetchFn?: typeof fetch;
}

export class TranscriptStream {
  private lastSeq = 0;
  private closed = false;
  private reconnects = 0;

  constructor(
    private url: string,
    private options: TranscriptOptions,
  ) {}

  get lastSequence(): number {
    return this.lastSeq;
  }

  close(): void {
    this.closed = true;
    this.options.onStatusChange?.("closed");
  }

  /** Consume the stream until closed; resolves when the server ends a
   * non-follow stream or the reconnect budget is spent. */
  async run(): Promise<void> {
    const fetchFn = this.options.fetchFn ?? fetch;
    const maxReconnects = this.options.maxReconnects ?? Infinity;
    while (!this.closed) {
      this.options.onStatusChange?.(this.reconnects === 0 ? "connecting" : "retrying");
      try {
        const headers: Record<string, string> = {};
        if (this.lastSeq > 0) {
          headers["Last-Event-ID"] = String(this.lastSeq);
        }
        const response = await fetchFn(this.url, { headers });
        if (!response.ok || response.body === null) {
          throw new Error(`transcript stream failed: ${response.status}`);
        }
        this.options.onStatusChange?.("live");
        await this.consume(response.body);
        if (!this.url.includes("follow=true")) {
          return; // finite replay requested; done
        }
      } catch {
        // fall through to the reconnect path
      }
      if (this.closed) return;
      this.reconnects += 1;
      if (this.reconnects > maxReconnects) {
        this.options.onStatusChange?.("closed");
        return;
      }
      await delay(this.options.reconnectDelayMs ?? 500);
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary !== -1) {
        this.handleBlock(buffer.slice(0, boundary));
        buffer = buffer.slice(boundary + 2);
        boundary = buffer.indexOf("\n\n");
      }
      if (this.closed) {
        await reader.cancel();
        return;
      }
    }
  }

  private handleBlock(block: string): void {
    const dataLines = block
      .split("\n")
      .filter((line) => line.startsWith("data: "))
      .map((line) => line.slice(6));
    if (dataLines.length === 0) return;
    const event = JSON.parse(dataLines.join("")) as EngineEvent;
    if (event.seq <= this.lastSeq) {
      return; // duplicate from an overlapping reconnect
    }
    if (this.lastSeq > 0 && event.seq !== this.lastSeq + 1) {
      this.options.onGap?.(this.lastSeq + 1, event.seq);
    }
    this.lastSeq = event.seq;
    this.options.onEvent(event);
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
