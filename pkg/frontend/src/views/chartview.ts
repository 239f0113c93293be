// Canvas renderer for the three-layer latency chart.

import { ChartModel, LAYERS, type Layer } from "../chart.js";
import { formatVirtualTime } from "../state.js";
import type { StreamStatus } from "../stream.js";

export const LAYER_COLORS: Record<Layer, string> = {
  RLC: "#2f7ed8",
  PDCP: "#0faa58",
  MAC: "#d84b2f",
};

export function renderChartShell(
  sessionId: string | null,
  status: StreamStatus,
  model: ChartModel,
  wallPacing: boolean,
): string {
  const badge =
    status === "live"
      ? '<span class="badge live">live</span>'
      : status === "stale"
        ? '<span class="badge stale">stale, retrying</span>'
        : `<span class="badge idle">${status}</span>`;
  const legend = LAYERS.map(
    (l) => `<span class="series-chip" style="--c:${LAYER_COLORS[l]}">${l}</span>`,
  ).join(" ");
  const meta = sessionId
    ? `${sessionId} · window ${formatVirtualTime(model.windowMs, wallPacing)} · ` +
      `${model.pointCount()} points · dedup ${model.duplicatesDropped} · dropped ${model.streamDropped}`
    : "select a running session to stream its indication latency";
  return `<section class="panel" id="chart-panel">
  <h2>Indication latency ${badge}
    <label class="pacing-toggle"><input type="checkbox" id="pacing-toggle"${wallPacing ? " checked" : ""}>
    wall-clock axis</label></h2>
  <div class="chart-legend">${legend} <span class="chart-meta">${meta}</span></div>
  <canvas id="latency-chart" width="960" height="280"></canvas>
</section>`;
}

export function drawChart(canvas: HTMLCanvasElement, model: ChartModel, wallPacing: boolean) {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const padL = 48;
  const padB = 24;
  const plotW = width - padL - 8;
  const plotH = height - padB - 8;

  const latest = model.latestT();
  const t0 = Math.max(0, latest - model.windowMs);
  let maxY = 1;
  for (const layer of LAYERS) {
    for (const p of model.series[layer]) maxY = Math.max(maxY, p.latencyMs);
  }
  maxY *= 1.15;

  ctx.strokeStyle = "#444";
  ctx.strokeRect(padL, 8, plotW, plotH);
  ctx.fillStyle = "#888";
  ctx.font = "11px sans-serif";
  for (let g = 0; g <= 4; g++) {
    const y = 8 + (plotH * g) / 4;
    const value = maxY * (1 - g / 4);
    ctx.fillText(value.toFixed(1), 4, y + 4);
    ctx.strokeStyle = "#2a2a2a";
    ctx.beginPath();
    ctx.moveTo(padL, y);
    ctx.lineTo(padL + plotW, y);
    ctx.stroke();
  }
  ctx.fillText(formatVirtualTime(t0, wallPacing), padL, height - 8);
  const endLabel = formatVirtualTime(latest, wallPacing);
  ctx.fillText(endLabel, padL + plotW - ctx.measureText(endLabel).width, height - 8);

  const span = Math.max(latest - t0, 1);
  for (const layer of LAYERS) {
    const series = model.series[layer];
    if (!series.length) continue;
    ctx.strokeStyle = LAYER_COLORS[layer];
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    series.forEach((p, i) => {
      const x = padL + ((p.t - t0) / span) * plotW;
      const y = 8 + plotH - (p.latencyMs / maxY) * plotH;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}
