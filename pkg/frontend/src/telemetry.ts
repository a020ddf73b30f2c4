import type { ApiClient } from "./api.js";
import type { EventBody } from "./types.js";

// Hovers shorter than this are treated as the pointer passing through,
// not as the user reading the tile.
export const HOVER_DEBOUNCE_MS = 250;
const FLUSH_INTERVAL_MS = 2000;

/**
 * Records clicks and hover dwell times on instrumented elements and ships
 * them to the service. Events are queued and flushed in order; failed
 * flushes keep the queue so nothing is lost while offline. Timestamps are
 * forced monotone to satisfy the service contract.
 */
export class TelemetryRecorder {
  private queue: EventBody[] = [];
  private hoverStarts = new Map<HTMLElement, number>();
  private lastTimestamp = 0;
  private flushTimer: number | undefined;
  private flushing = false;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly now: () => number = () => Date.now(),
  ) {}

  /** Attach click + hover instrumentation to one element. */
  attach(element: HTMLElement, target: string): void {
    element.addEventListener("click", () => {
      this.record({ kind: "click", target });
    });
    element.addEventListener("mouseenter", () => {
      this.hoverStarts.set(element, this.now());
    });
    element.addEventListener("mouseleave", () => {
      const start = this.hoverStarts.get(element);
      if (start === undefined) {
        return;
      }
      this.hoverStarts.delete(element);
      const elapsedMs = this.now() - start;
      if (elapsedMs >= HOVER_DEBOUNCE_MS) {
        this.record({ kind: "hover", target, duration_s: elapsedMs / 1000 });
      }
    });
  }

  record(event: EventBody): void {
    const ts = Math.max(this.now() / 1000, this.lastTimestamp);
    this.lastTimestamp = ts;
    this.queue.push({ ...event, timestamp: ts });
  }

  get pending(): number {
    return this.queue.length;
  }

  start(): void {
    if (this.flushTimer === undefined) {
      this.flushTimer = window.setInterval(() => void this.flush(), FLUSH_INTERVAL_MS);
    }
  }

  stop(): void {
    if (this.flushTimer !== undefined) {
      window.clearInterval(this.flushTimer);
      this.flushTimer = undefined;
    }
  }

  /** Ship queued events in order; on failure the remainder stays queued. */
  async flush(): Promise<void> {
    if (this.flushing) {
      return;
    }
    this.flushing = true;
    try {
      while (this.queue.length > 0) {
        const event = this.queue[0];
        try {
          await this.api.postEvent(this.sessionId, event);
        } catch {
          break; // offline or rejected; retry on the next flush
        }
        this.queue.shift();
      }
    } finally {
      this.flushing = false;
    }
  }
}
