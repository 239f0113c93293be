// Server-sent-events reader over fetch (EventSource cannot send the
// Last-Event-ID header on manual reconnects). Emits parsed events,
// tracks the last received id, resumes from it after a drop, and
// reports staleness so the UI can show a badge while retrying.

export interface SseEvent {
  id?: string;
  event: string;
  data: string;
}

/** Incremental SSE parser: feed buffered text, get complete events and
 * the unconsumed remainder back. Pure, so tests can drive it directly. */
export function parseSseBuffer(buffer: string): { events: SseEvent[]; rest: string } {
  const events: SseEvent[] = [];
  const normalized = buffer.replace(/\r\n/g, "\n");
  let start = 0;
  for (;;) {
    const sep = normalized.indexOf("\n\n", start);
    if (sep === -1) break;
    const block = normalized.slice(start, sep);
    start = sep + 2;
    const evt: SseEvent = { event: "message", data: "" };
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (!line || line.startsWith(":")) continue; // comment / heartbeat
      const colon = line.indexOf(":");
      const field = colon === -1 ? line : line.slice(0, colon);
      let value = colon === -1 ? "" : line.slice(colon + 1);
      if (value.startsWith(" ")) value = value.slice(1);
      if (field === "id") evt.id = value;
      else if (field === "event") evt.event = value;
      else if (field === "data") dataLines.push(value);
    }
    evt.data = dataLines.join("\n");
    if (evt.id !== undefined || evt.data || evt.event !== "message") events.push(evt);
  }
  return { events, rest: normalized.slice(start) };
}

export type StreamStatus = "connecting" | "live" | "stale" | "ended" | "stopped";

export interface LiveStreamOptions {
  url: string;
  onEvent: (evt: SseEvent) => void;
  onStatus?: (status: StreamStatus) => void;
  fetchFn?: (url: string, init?: RequestInit) => Promise<Response>;
  retryMs?: number;
  lastEventId?: string;
}

export class LiveStream {
  lastEventId: string | undefined;
  private stopped = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private abort: AbortController | null = null;

  constructor(private opts: LiveStreamOptions) {
    this.lastEventId = opts.lastEventId;
  }

  start() {
    this.stopped = false;
    void this.connect();
  }

  private status(s: StreamStatus) {
    this.opts.onStatus?.(s);
  }

  private async connect(): Promise<void> {
    if (this.stopped) return;
    this.status("connecting");
    const fetchFn = this.opts.fetchFn ?? ((u: string, i?: RequestInit) => fetch(u, i));
    this.abort = new AbortController();
    const headers: Record<string, string> = { Accept: "text/event-stream" };
    if (this.lastEventId !== undefined) headers["Last-Event-ID"] = this.lastEventId;
    try {
      const resp = await fetchFn(this.opts.url, { headers, signal: this.abort.signal });
      if (!resp.ok || !resp.body) throw new Error(`stream http ${resp.status}`);
      this.status("live");
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        const { events, rest } = parseSseBuffer(buffer);
        buffer = rest;
        for (const evt of events) {
          if (evt.id !== undefined) this.lastEventId = evt.id;
          if (evt.event === "end") {
            this.status("ended");
            this.stopped = true;
            return;
          }
          this.opts.onEvent(evt);
        }
      }
    } catch {
      // drop-through to retry below
    }
    if (this.stopped) return;
    this.status("stale");
    this.retryTimer = setTimeout(() => void this.connect(), this.opts.retryMs ?? 1000);
  }

  stop() {
    this.stopped = true;
    if (this.retryTimer) clearTimeout(this.retryTimer);
    this.abort?.abort();
    this.status("stopped");
  }
}
