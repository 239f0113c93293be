// Live chart data model: three per-layer series in event order, a
// sliding virtual-time window, and event-id dedupe so a stream
// reconnect (which replays from the last received id) never doubles a
// point. Rendering lives in views/chartview.ts; this model is DOM-free.

import type { MetricEvent, MetricSampleInfo } from "./types.js";

export const LAYERS = ["RLC", "PDCP", "MAC"] as const;
export type Layer = (typeof LAYERS)[number];

export interface ChartPoint {
  t: number;
  latencyMs: number;
}

export class ChartModel {
  readonly series: Record<Layer, ChartPoint[]> = { RLC: [], PDCP: [], MAC: [] };
  lastEventId = 0;
  duplicatesDropped = 0;
  streamDropped = 0; // server-side drop counter (slow consumer)

  constructor(public windowMs: number = 60_000) {}

  /** Append one routed-indication event; returns false for duplicates. */
  appendEvent(event: MetricEvent): boolean {
    if (event.event_id <= this.lastEventId) {
      this.duplicatesDropped += 1;
      return false;
    }
    this.lastEventId = event.event_id;
    if (event.dropped !== undefined) this.streamDropped = event.dropped;
    for (const sample of event.samples) {
      this.appendSample(sample);
    }
    this.trim();
    return true;
  }

  private appendSample(sample: MetricSampleInfo) {
    const series = this.series[sample.layer as Layer];
    if (!series) return; // reserved layers are not charted
    series.push({ t: sample.t, latencyMs: sample.latency_ms });
  }

  seed(events: MetricEvent[]) {
    for (const event of events) this.appendEvent(event);
  }

  latestT(): number {
    let latest = 0;
    for (const layer of LAYERS) {
      const s = this.series[layer];
      if (s.length) latest = Math.max(latest, s[s.length - 1].t);
    }
    return latest;
  }

  private trim() {
    const cutoff = this.latestT() - this.windowMs;
    for (const layer of LAYERS) {
      const s = this.series[layer];
      let drop = 0;
      while (drop < s.length && s[drop].t < cutoff) drop++;
      if (drop) s.splice(0, drop);
    }
  }

  pointCount(): number {
    return LAYERS.reduce((n, l) => n + this.series[l].length, 0);
  }

  reset() {
    for (const layer of LAYERS) this.series[layer].length = 0;
    this.lastEventId = 0;
    this.duplicatesDropped = 0;
    this.streamDropped = 0;
  }
}
