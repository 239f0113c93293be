// Abstract schematic of sites and nodes with coverage circles (no map
// tiles; positions are projected, relative distances preserved).

import type { MapModel, MapNode } from "../state.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function nodeGlyph(n: MapNode): string {
  const title = `<title>${esc(n.nodeId)} (${n.role})</title>`;
  if (n.role === "BaseStation") {
    const cov = n.coverageRadius
      ? `<circle class="coverage${n.flagged ? " flagged" : ""}" cx="${n.x}" cy="${n.y}" r="${n.coverageRadius.toFixed(1)}"/>`
      : "";
    return `${cov}<g class="node bs${n.flagged ? " flagged" : ""}" data-node="${esc(n.nodeId)}">
      <polygon points="${n.x - 9},${n.y + 9} ${n.x + 9},${n.y + 9} ${n.x},${n.y - 11}"/>
      ${title}
      <text x="${n.x}" y="${n.y + 24}">${esc(n.nodeId)}</text></g>`;
  }
  const cls = n.role === "SandboxHost" ? "host" : "ue";
  const shape =
    n.role === "SandboxHost"
      ? `<rect x="${n.x - 6}" y="${n.y - 6}" width="12" height="12"/>`
      : `<circle cx="${n.x}" cy="${n.y}" r="6"/>`;
  return `<g class="node ${cls}" data-node="${esc(n.nodeId)}">${shape}${title}
    <text x="${n.x}" y="${n.y + 20}">${esc(n.nodeId)}</text></g>`;
}

export function renderMap(model: MapModel): string {
  const glyphs: string[] = [];
  for (const site of model.sites) {
    for (const node of site.nodes) glyphs.push(nodeGlyph(node));
  }
  const legend = model.sites
    .map((s) => `<span class="site-chip" data-site="${esc(s.siteId)}">${esc(s.name)} (${s.kind})</span>`)
    .join(" ");
  return `<section class="panel" id="map-panel">
  <h2>Node map</h2>
  <div class="site-legend">${legend}</div>
  <svg viewBox="0 0 1000 600" class="node-map" role="img" aria-label="node map">
    ${glyphs.join("\n    ")}
  </svg>
</section>`;
}
