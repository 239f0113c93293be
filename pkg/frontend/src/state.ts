// Pure view-model builders: every structure here derives solely from
// /v1 responses (and the live stream), never from client-side rules.

import type {
  CoverageResponse,
  LeaseInfo,
  ImageInfo,
  NodeInfo,
  NodesResponse,
  SiteInfo,
} from "./types.js";

// -- node map -------------------------------------------------------------

export interface MapNode {
  nodeId: string;
  role: NodeInfo["role"];
  x: number; // viewBox units 0..1000
  y: number; // viewBox units 0..600
  boosted: boolean;
  coverageRadius: number | null; // viewBox units, BS only
  inRangeUes: string[];
  flagged: boolean;
}

export interface MapSiteGroup {
  siteId: string;
  name: string;
  kind: SiteInfo["kind"];
  nodes: MapNode[];
}

export interface MapModel {
  sites: MapSiteGroup[];
}

const VIEW_W = 1000;
const VIEW_H = 600;

function rawXY(node: NodeInfo): { x: number; y: number } {
  const p = node.position;
  if (p.longitude !== undefined && p.latitude !== undefined) {
    return { x: p.longitude, y: p.latitude };
  }
  return { x: p.x ?? 0, y: p.y ?? 0 };
}

/** Abstract schematic: nodes projected into a fixed viewBox with a
 * shared linear scale, so relative distances stay truthful per site. */
export function buildMapModel(
  nodesDoc: NodesResponse,
  coverage: CoverageResponse,
  boostedRadiusM = 2000,
): MapModel {
  const covByBs = new Map(coverage.entries.map((e) => [e.bs_id, e]));
  const pts = nodesDoc.nodes.map((n) => ({ node: n, ...rawXY(n) }));
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const minX = Math.min(...xs, 0);
  const maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, 0);
  const maxY = Math.max(...ys, 1);
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const pad = 80;
  const scale = Math.min((VIEW_W - 2 * pad) / spanX, (VIEW_H - 2 * pad) / spanY);

  // meters-per-unit estimate so coverage circles scale with positions;
  // geographic spans use ~111 km per degree of latitude
  const geographic = nodesDoc.nodes.some((n) => n.position.latitude !== undefined);
  const metersPerUnit = geographic ? 111_000 : 1;

  const groups = new Map<string, MapSiteGroup>();
  for (const site of nodesDoc.sites) {
    groups.set(site.site_id, { siteId: site.site_id, name: site.name, kind: site.kind, nodes: [] });
  }
  for (const { node, x, y } of pts) {
    const cov = covByBs.get(node.node_id);
    const mapNode: MapNode = {
      nodeId: node.node_id,
      role: node.role,
      x: pad + (x - minX) * scale,
      y: VIEW_H - (pad + (y - minY) * scale), // north up
      boosted: node.booster !== null,
      coverageRadius:
        node.role === "BaseStation" ? (boostedRadiusM / metersPerUnit) * scale : null,
      inRangeUes: cov ? cov.in_range_ues : [],
      flagged: cov ? cov.flagged : false,
    };
    groups.get(node.site_id)?.nodes.push(mapNode);
  }
  return { sites: [...groups.values()] };
}

// -- lease calendar ---------------------------------------------------------

export interface LaneSegment {
  leaseId: string;
  startMs: number;
  endMs: number;
  state: LeaseInfo["state"];
  requester: string;
}

export interface LaneNote {
  leaseId: string; // the rejected request
  text: string;
}

export interface CalendarLane {
  nodeId: string;
  role: NodeInfo["role"];
  segments: LaneSegment[];
  notes: LaneNote[]; // conflict reasons rendered inline on this lane
}

export interface CalendarModel {
  lanes: CalendarLane[];
  horizonMs: number;
  nowMs: number;
}

export function buildCalendarModel(
  nodes: NodeInfo[],
  leases: LeaseInfo[],
  nowMs: number,
): CalendarModel {
  const lanes = new Map<string, CalendarLane>();
  for (const node of [...nodes].sort((a, b) => a.node_id.localeCompare(b.node_id))) {
    lanes.set(node.node_id, { nodeId: node.node_id, role: node.role, segments: [], notes: [] });
  }
  let horizon = nowMs + 60_000;
  for (const lease of leases) {
    if (lease.state === "Rejected") {
      // conflict reasons attach to the lanes the request targeted
      for (const nodeId of lease.node_ids) {
        const lane = lanes.get(nodeId);
        if (!lane) continue;
        for (const c of lease.conflicts) {
          lane.notes.push({ leaseId: lease.lease_id, text: `${lease.lease_id}: ${c.detail}` });
        }
      }
      continue;
    }
    const [start, end] = lease.interval;
    const effectiveEnd = lease.released_at !== null ? Math.min(end, lease.released_at) : end;
    horizon = Math.max(horizon, effectiveEnd);
    for (const nodeId of lease.node_ids) {
      lanes.get(nodeId)?.segments.push({
        leaseId: lease.lease_id,
        startMs: start,
        endMs: effectiveEnd,
        state: lease.state,
        requester: lease.requester,
      });
    }
  }
  return { lanes: [...lanes.values()], horizonMs: horizon, nowMs };
}

// -- reservation form ---------------------------------------------------------

export interface ReservationSelection {
  nodeIds: string[];
  images: string[];
}

export interface ReservationHint {
  disabled: boolean;
  hint: string;
}

/** Submit-validity hint only: the server remains the admission
 * authority. A gNB-role image needs at least 1 BS and 1 UE selected. */
export function computeReservationHint(
  selection: ReservationSelection,
  nodes: NodeInfo[],
  images: ImageInfo[],
): ReservationHint {
  if (selection.nodeIds.length === 0) {
    return { disabled: true, hint: "select at least one node" };
  }
  const roleOf = new Map(nodes.map((n) => [n.node_id, n.role]));
  const tagOf = new Map(images.map((i) => [i.name, i.role_tag]));
  const hasGnbImage = selection.images.some((name) => tagOf.get(name) === "gnb-ric");
  if (hasGnbImage) {
    const roles = selection.nodeIds.map((id) => roleOf.get(id));
    const hasBs = roles.includes("BaseStation");
    const hasUe = roles.includes("FixedUE") || roles.includes("MobileUE");
    if (!hasBs || !hasUe) {
      return {
        disabled: true,
        hint: "a gNB image needs at least 1 BS node and 1 UE node selected",
      };
    }
  }
  return { disabled: false, hint: "" };
}

// -- time axis ---------------------------------------------------------

export function formatVirtualTime(ms: number, wallPacing: boolean): string {
  return wallPacing ? `${(ms / 1000).toFixed(1)} s` : `${ms} ms`;
}
