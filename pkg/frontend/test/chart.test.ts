// Live chart model: partition by layer, event-id dedupe across a
// reconnect replay, and the sliding window.

import { describe, expect, it } from "vitest";

import { ChartModel } from "../src/chart.js";
import { makeEvent } from "./mockapi.js";

describe("chart model", () => {
  it("300 streamed samples become 3 series of 100 points", () => {
    const chart = new ChartModel(600_000);
    for (let i = 1; i <= 100; i++) {
      chart.appendEvent(makeEvent(i, i * 100));
    }
    expect(chart.series.RLC).toHaveLength(100);
    expect(chart.series.PDCP).toHaveLength(100);
    expect(chart.series.MAC).toHaveLength(100);
    expect(chart.pointCount()).toBe(300);
  });

  it("appends in event order and tracks the last event id", () => {
    const chart = new ChartModel();
    chart.appendEvent(makeEvent(1, 100));
    chart.appendEvent(makeEvent(2, 200));
    expect(chart.lastEventId).toBe(2);
    expect(chart.series.RLC.map((p) => p.t)).toEqual([100, 200]);
  });

  it("reconnect replay overlap produces no duplicate points", () => {
    const chart = new ChartModel(600_000);
    for (let i = 1; i <= 10; i++) chart.appendEvent(makeEvent(i, i * 100));
    // stream drops; server replays from event 8 (ids 8..15 overlap 8..10)
    for (let i = 8; i <= 15; i++) chart.appendEvent(makeEvent(i, i * 100));
    expect(chart.series.MAC).toHaveLength(15);
    expect(chart.duplicatesDropped).toBe(3);
    const ts = chart.series.MAC.map((p) => p.t);
    expect(new Set(ts).size).toBe(ts.length);
    expect(chart.lastEventId).toBe(15);
  });

  it("window slides: points older than windowMs fall off", () => {
    const chart = new ChartModel(1_000);
    for (let i = 1; i <= 30; i++) chart.appendEvent(makeEvent(i, i * 100));
    // latest t = 3000; cutoff = 2000
    expect(chart.series.RLC.every((p) => p.t >= 2000)).toBe(true);
    expect(chart.series.RLC.length).toBe(11);
  });

  it("empty session yields empty series (axes render regardless)", () => {
    const chart = new ChartModel();
    expect(chart.pointCount()).toBe(0);
    expect(chart.latestT()).toBe(0);
  });

  it("seed() replays past events identically to live appends", () => {
    const live = new ChartModel();
    const seeded = new ChartModel();
    const events = Array.from({ length: 20 }, (_, i) => makeEvent(i + 1, (i + 1) * 100));
    for (const e of events) live.appendEvent(e);
    seeded.seed(events);
    expect(seeded.series).toEqual(live.series);
    expect(seeded.lastEventId).toBe(live.lastEventId);
  });

  it("exposes the server-side drop counter", () => {
    const chart = new ChartModel();
    const event = { ...makeEvent(1, 100), dropped: 7 };
    chart.appendEvent(event);
    expect(chart.streamDropped).toBe(7);
  });
});
