// Shapes of /v1 API responses (the frozen field-name contract).

export interface Position {
  latitude?: number;
  longitude?: number;
  x?: number;
  y?: number;
}

export interface SiteInfo {
  site_id: string;
  name: string;
  kind: "farm" | "campus" | "sandbox";
  position: Position;
}

export interface RadioInfo {
  model_class: string;
  max_bandwidth: number;
  freq_range: [number, number];
}

export interface NodeInfo {
  node_id: string;
  site_id: string;
  role: "BaseStation" | "FixedUE" | "MobileUE" | "SandboxHost";
  position: Position;
  radios: RadioInfo[];
  booster: { tx_gain: number; rx_gain: number } | null;
  mgmt_endpoint: string;
}

export interface NodesResponse {
  sites: SiteInfo[];
  nodes: NodeInfo[];
}

export interface CoverageEntry {
  bs_id: string;
  in_range_ues: string[];
  flagged: boolean;
}

export interface CoverageResponse {
  min_ues: number;
  entries: CoverageEntry[];
  flagged_bs_ids: string[];
}

export interface ConflictInfo {
  other_lease_id: string;
  kind: "node" | "spectrum";
  detail: string;
}

export interface LeaseInfo {
  lease_id: string;
  requester: string;
  node_ids: string[];
  spectrum: { center: number; bandwidth: number };
  interval: [number, number];
  images: string[];
  state: "Requested" | "Active" | "Expired" | "Terminated" | "Rejected";
  decided_at: number;
  conflicts: ConflictInfo[];
  released_at: number | null;
}

export interface ImageInfo {
  name: string;
  digest: string;
  role_tag: "gnb-ric" | "nrue" | "custom";
}

export interface ContainerInfo {
  container_id: string;
  node_id: string;
  image: string;
  state: "Pending" | "Starting" | "Running" | "Stopped" | "Failed";
  processes: string[];
}

export interface SessionInfo {
  session_id: string;
  lease_id: string;
  state: "Launching" | "Running" | "Failed" | "Stopped";
  uptime_ms: number;
  stop_cause: string;
  containers: ContainerInfo[];
  attached_ues?: number;
  indications_routed?: number;
  timing?: { actions: number; within_window: number; sub_window: number; violations: number };
}

export interface XappInfo {
  session_id: string;
  xapp_id: string;
  handler: string;
  subscriptions: {
    selector: string;
    report_period_ms: number;
    metric_set: string[];
    cell_filter: string | null;
  }[];
}

export interface MetricSampleInfo {
  t: number;
  layer: "RLC" | "PDCP" | "MAC";
  latency_ms: number;
  ue_id: string;
  cell_id: string;
}

export interface MetricEvent {
  event_id: number;
  xapp_id: string;
  agent_id: string;
  conn_id: number;
  sub_id: number;
  seq: number;
  n_samples: number;
  t: number;
  samples: MetricSampleInfo[];
  dropped?: number;
}

export interface ErrorEnvelope {
  error: { code: string; message: string; detail?: unknown };
}
