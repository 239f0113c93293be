// Lease calendar: one swim-lane per node over virtual time, plus the
// reservation form. Conflict reasons from rejected requests render
// inline on the lanes the request targeted.

import type { CalendarModel, ReservationHint } from "../state.js";
import { formatVirtualTime } from "../state.js";
import type { ImageInfo, NodeInfo } from "../types.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

const STATE_CLASS: Record<string, string> = {
  Requested: "seg-requested",
  Active: "seg-active",
  Expired: "seg-expired",
  Terminated: "seg-terminated",
};

export function renderCalendar(model: CalendarModel, wallPacing: boolean): string {
  const span = Math.max(model.horizonMs, 1);
  const rows = model.lanes
    .map((lane) => {
      const segs = lane.segments
        .map((seg) => {
          const left = (seg.startMs / span) * 100;
          const width = Math.max(((seg.endMs - seg.startMs) / span) * 100, 0.5);
          const cls = STATE_CLASS[seg.state] ?? "seg-requested";
          const label = `${seg.leaseId} ${seg.state} [${seg.startMs}, ${seg.endMs}) ${seg.requester}`;
          return `<div class="lane-seg ${cls}" data-lease="${esc(seg.leaseId)}"
            style="left:${left.toFixed(2)}%;width:${width.toFixed(2)}%" title="${esc(label)}"></div>`;
        })
        .join("");
      const notes = lane.notes
        .map((n) => `<div class="lane-conflict" data-lease="${esc(n.leaseId)}">⚠ ${esc(n.text)}</div>`)
        .join("");
      return `<div class="lane" data-node="${esc(lane.nodeId)}">
        <div class="lane-label">${esc(lane.nodeId)} <span class="role">${lane.role}</span></div>
        <div class="lane-track">${segs}</div>
        ${notes}
      </div>`;
    })
    .join("\n");
  const nowPct = ((model.nowMs / span) * 100).toFixed(2);
  return `<section class="panel" id="calendar-panel">
  <h2>Lease calendar <span class="axis-hint">0 … ${formatVirtualTime(span, wallPacing)}</span></h2>
  <div class="calendar">
    <div class="now-line" style="left:${nowPct}%" title="virtual now"></div>
    ${rows}
  </div>
</section>`;
}

export function renderReservationForm(
  nodes: NodeInfo[],
  images: ImageInfo[],
  hint: ReservationHint,
  selection: { nodeIds: string[]; images: string[] },
  feedback: string,
): string {
  const nodeBoxes = nodes
    .map((n) => {
      const checked = selection.nodeIds.includes(n.node_id) ? " checked" : "";
      return `<label class="pick"><input type="checkbox" name="resv-node" value="${esc(n.node_id)}"${checked}>
        ${esc(n.node_id)} <span class="role">${n.role}</span></label>`;
    })
    .join("\n");
  const imageBoxes = images
    .map((i) => {
      const checked = selection.images.includes(i.name) ? " checked" : "";
      return `<label class="pick"><input type="checkbox" name="resv-image" value="${esc(i.name)}"${checked}>
        ${esc(i.name)} <span class="role">${i.role_tag}</span></label>`;
    })
    .join("\n");
  return `<section class="panel" id="reserve-panel">
  <h2>Reserve</h2>
  <form id="reserve-form">
    <fieldset><legend>Nodes</legend>${nodeBoxes}</fieldset>
    <fieldset><legend>Images</legend>${imageBoxes}</fieldset>
    <div class="form-row">
      <label>center MHz <input type="number" id="resv-center" value="3550" step="any"></label>
      <label>bandwidth MHz <input type="number" id="resv-bw" value="100" step="any"></label>
      <label>start ms <input type="number" id="resv-start" value="0"></label>
      <label>end ms <input type="number" id="resv-end" value="3600000"></label>
    </div>
    <button type="submit" id="reserve-submit"${hint.disabled ? " disabled" : ""}>Request lease</button>
    <span class="rule-hint" id="reserve-hint">${esc(hint.hint)}</span>
  </form>
  <div class="feedback" id="reserve-feedback">${esc(feedback)}</div>
</section>`;
}
