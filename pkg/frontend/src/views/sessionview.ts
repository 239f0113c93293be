// Session console: container states, process roles, launch/stop/xApp
// actions. Buttons carry data-action attributes; main.ts delegates.

import type { ImageInfo, LeaseInfo, SessionInfo, XappInfo } from "../types.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function containerRow(c: SessionInfo["containers"][number]): string {
  const procs = c.processes.map((p) => `<span class="proc">${esc(p)}</span>`).join(" ") || "—";
  return `<tr>
    <td>${esc(c.container_id)}</td><td>${esc(c.node_id)}</td><td>${esc(c.image)}</td>
    <td><span class="cstate cstate-${c.state.toLowerCase()}">${c.state}</span></td><td>${procs}</td>
  </tr>`;
}

export function renderSessions(
  sessions: SessionInfo[],
  xapps: XappInfo[],
  selectedSession: string | null,
): string {
  const cards = sessions
    .map((s) => {
      const apps = xapps
        .filter((x) => x.session_id === s.session_id)
        .map((x) => `<span class="xapp-chip" title="${esc(x.handler)}">${esc(x.xapp_id)}</span>`)
        .join(" ");
      const stopBtn =
        s.state === "Running" || s.state === "Failed"
          ? `<button data-action="stop-session" data-session="${esc(s.session_id)}">Stop</button>`
          : "";
      const watchBtn =
        s.state === "Running"
          ? `<button data-action="watch-session" data-session="${esc(s.session_id)}"${
              selectedSession === s.session_id ? " disabled" : ""
            }>Watch chart</button>`
          : "";
      const xappBtn =
        s.state === "Running"
          ? `<button data-action="add-xapp" data-session="${esc(s.session_id)}">+ MAC monitor xApp</button>`
          : "";
      const stats =
        s.indications_routed !== undefined
          ? `<span class="stat">indications: ${s.indications_routed}</span>
             <span class="stat">attached UEs: ${s.attached_ues}</span>
             <span class="stat">actions: ${s.timing?.actions ?? 0} (${s.timing?.violations ?? 0} late)</span>`
          : "";
      return `<article class="session-card" data-session="${esc(s.session_id)}">
      <header><strong>${esc(s.session_id)}</strong>
        <span class="sstate sstate-${s.state.toLowerCase()}">${s.state}</span>
        lease ${esc(s.lease_id)} · uptime ${s.uptime_ms} ms ${stats}
        ${watchBtn} ${xappBtn} ${stopBtn}</header>
      <table class="containers"><thead>
        <tr><th>container</th><th>node</th><th>image</th><th>state</th><th>processes</th></tr>
      </thead><tbody>${s.containers.map(containerRow).join("")}</tbody></table>
      <div class="xapps">xApps: ${apps || "—"}</div>
      ${s.stop_cause ? `<div class="stop-cause">cause: ${esc(s.stop_cause)}</div>` : ""}
    </article>`;
    })
    .join("\n");
  return `<section class="panel" id="session-panel">
  <h2>Sessions</h2>
  ${cards || '<p class="empty">no sessions yet: reserve nodes, then launch</p>'}
</section>`;
}

export function renderLaunchForm(leases: LeaseInfo[], images: ImageInfo[]): string {
  const launchable = leases.filter((l) => l.state === "Active" || l.state === "Requested");
  if (!launchable.length) {
    return `<section class="panel" id="launch-panel"><h2>Launch</h2>
    <p class="empty">no active lease to launch against</p></section>`;
  }
  const options = launchable
    .map((l) => `<option value="${esc(l.lease_id)}">${esc(l.lease_id)} (${l.state})</option>`)
    .join("");
  const imageNames = images.map((i) => i.name);
  return `<section class="panel" id="launch-panel">
  <h2>Launch</h2>
  <form id="launch-form">
    <label>lease <select id="launch-lease">${options}</select></label>
    <div id="launch-assignments" data-images="${esc(imageNames.join(","))}"></div>
    <button type="submit">Launch session</button>
    <span class="feedback" id="launch-feedback"></span>
  </form>
</section>`;
}

export function renderAssignmentPickers(
  nodeIds: string[],
  roleOf: Map<string, string>,
  images: ImageInfo[],
): string {
  return nodeIds
    .map((nodeId) => {
      const role = roleOf.get(nodeId) ?? "";
      const preferred =
        role === "BaseStation" ? "gnb-ric" : role === "FixedUE" || role === "MobileUE" ? "nrue" : "";
      const opts = images
        .map(
          (i) =>
            `<option value="${esc(i.name)}"${i.name === preferred ? " selected" : ""}>${esc(i.name)}</option>`,
        )
        .join("");
      return `<label class="assign">${esc(nodeId)} <span class="role">${esc(role)}</span>
      <select name="assign" data-node="${esc(nodeId)}">${opts}</select></label>`;
    })
    .join("\n");
}
