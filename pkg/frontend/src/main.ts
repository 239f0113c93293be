// Single-page portal: every view renders from /v1 responses and the
// live stream alone; a refresh rebuilds the whole UI from the API.

import { ApiClient, ApiFailure } from "./api.js";
import { ChartModel } from "./chart.js";
import {
  buildCalendarModel,
  buildMapModel,
  computeReservationHint,
  type ReservationSelection,
} from "./state.js";
import { LiveStream, type StreamStatus } from "./stream.js";
import type {
  CoverageResponse,
  ImageInfo,
  LeaseInfo,
  MetricEvent,
  NodesResponse,
  SessionInfo,
  XappInfo,
} from "./types.js";
import { renderCalendar, renderReservationForm } from "./views/calendarview.js";
import { drawChart, renderChartShell } from "./views/chartview.js";
import { renderMap } from "./views/mapview.js";
import {
  renderAssignmentPickers,
  renderLaunchForm,
  renderSessions,
} from "./views/sessionview.js";

const REFRESH_MS = 2500;

interface PortalData {
  nodes: NodesResponse;
  coverage: CoverageResponse;
  leases: LeaseInfo[];
  images: ImageInfo[];
  sessions: SessionInfo[];
  xapps: XappInfo[];
  virtualNow: number;
}

export class Portal {
  data: PortalData | null = null;
  selection: ReservationSelection = { nodeIds: [], images: [] };
  spectrum = { center: 3550, bandwidth: 100, start: 0, end: 3_600_000 };
  reserveFeedback = "";
  launchFeedback = "";
  watchedSession: string | null = null;
  chart = new ChartModel(60_000);
  streamStatus: StreamStatus = "stopped";
  wallPacing = false;
  private stream: LiveStream | null = null;

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  async loadAll(): Promise<void> {
    const [nodes, coverage, leasesDoc, imagesDoc, sessionsDoc, xappsDoc, health] =
      await Promise.all([
        this.api.nodes(),
        this.api.coverage(),
        this.api.leases(),
        this.api.images(),
        this.api.sessions(),
        this.api.xapps(),
        this.api.health(),
      ]);
    this.data = {
      nodes,
      coverage,
      leases: leasesDoc.leases,
      images: imagesDoc.images,
      sessions: sessionsDoc.sessions,
      xapps: xappsDoc.xapps,
      virtualNow: health.virtual_now_ms,
    };
  }

  renderHtml(): string {
    if (!this.data) return '<p class="empty">loading…</p>';
    const d = this.data;
    const hint = computeReservationHint(this.selection, d.nodes.nodes, d.images);
    const mapModel = buildMapModel(d.nodes, d.coverage);
    const calModel = buildCalendarModel(d.nodes.nodes, d.leases, d.virtualNow);
    return [
      `<header class="topbar"><h1>O-RAN living lab</h1>
       <span class="clock">virtual now: ${d.virtualNow} ms</span></header>`,
      renderMap(mapModel),
      renderCalendar(calModel, this.wallPacing),
      renderReservationForm(d.nodes.nodes, d.images, hint, this.selection, this.reserveFeedback),
      renderLaunchForm(d.leases, d.images),
      renderSessions(d.sessions, d.xapps, this.watchedSession),
      renderChartShell(this.watchedSession, this.streamStatus, this.chart, this.wallPacing),
    ].join("\n");
  }

  render() {
    this.root.innerHTML = this.renderHtml();
    this.fillAssignmentPickers();
    const canvas = this.root.querySelector<HTMLCanvasElement>("#latency-chart");
    if (canvas) drawChart(canvas, this.chart, this.wallPacing);
  }

  private fillAssignmentPickers() {
    const container = this.root.querySelector<HTMLElement>("#launch-assignments");
    const leaseSelect = this.root.querySelector<HTMLSelectElement>("#launch-lease");
    if (!container || !leaseSelect || !this.data) return;
    const lease = this.data.leases.find((l) => l.lease_id === leaseSelect.value);
    if (!lease) return;
    const roleOf = new Map(this.data.nodes.nodes.map((n) => [n.node_id, n.role as string]));
    container.innerHTML = renderAssignmentPickers(
      [...lease.node_ids].sort(),
      roleOf,
      this.data.images,
    );
  }

  // -- actions ------------------------------------------------------------

  async submitReservation(): Promise<void> {
    try {
      await this.api.requestLease({
        node_ids: this.selection.nodeIds,
        spectrum: { center: this.spectrum.center, bandwidth: this.spectrum.bandwidth },
        interval: [this.spectrum.start, this.spectrum.end],
        images: this.selection.images,
      });
      this.reserveFeedback = "lease admitted";
    } catch (err) {
      if (err instanceof ApiFailure) {
        // rejection details land on the calendar lanes after reload
        this.reserveFeedback = `${err.envelope.code}: ${err.envelope.message}`;
      } else {
        this.reserveFeedback = String(err);
      }
    }
    await this.loadAll();
    this.render();
  }

  async launchSession(leaseId: string, assignments: Record<string, string>): Promise<void> {
    try {
      const session = await this.api.launchSession(leaseId, assignments);
      this.launchFeedback = `launched ${session.session_id}`;
      this.watchSession(session.session_id);
    } catch (err) {
      this.launchFeedback =
        err instanceof ApiFailure ? `${err.envelope.code}: ${err.envelope.message}` : String(err);
    }
    await this.loadAll();
    this.render();
    const fb = this.root.querySelector("#launch-feedback");
    if (fb) fb.textContent = this.launchFeedback;
  }

  async stopSession(sessionId: string): Promise<void> {
    try {
      await this.api.stopSession(sessionId);
    } catch {
      // surfaced by the next refresh
    }
    if (this.watchedSession === sessionId) this.stream?.stop();
    await this.loadAll();
    this.render();
  }

  async addMacXapp(sessionId: string): Promise<void> {
    const id = `mac-monitor-${Date.now() % 100000}`;
    try {
      await this.api.registerXapp(sessionId, {
        xapp_id: id,
        kind: "latency_monitor",
        metric_set: ["MAC"],
        report_period_ms: 200,
      });
    } catch {
      // duplicate ids and the like land in the xApp list on refresh
    }
    await this.loadAll();
    this.render();
  }

  watchSession(sessionId: string): void {
    this.stream?.stop();
    this.watchedSession = sessionId;
    this.chart.reset();
    // seed from the API so a mid-session page load reconstructs the
    // chart, then resume the stream from the last seeded event id
    void this.api.metrics(sessionId).then((doc) => {
      this.chart.seed(doc.events);
      this.stream = new LiveStream({
        url: this.api.liveMetricsUrl(sessionId),
        lastEventId: this.chart.lastEventId ? String(this.chart.lastEventId) : undefined,
        onEvent: (evt) => {
          if (evt.event !== "indication") return;
          const event = JSON.parse(evt.data) as MetricEvent;
          this.chart.appendEvent(event);
          const canvas = this.root.querySelector<HTMLCanvasElement>("#latency-chart");
          if (canvas) drawChart(canvas, this.chart, this.wallPacing);
        },
        onStatus: (status) => {
          this.streamStatus = status;
          const badgeHost = this.root.querySelector("#chart-panel h2");
          if (badgeHost) this.render();
        },
      });
      this.stream.start();
      this.render();
    });
  }

  // -- event wiring ----------------------------------------------------------

  bind() {
    this.root.addEventListener("change", (ev) => {
      const target = ev.target as HTMLInputElement;
      if (target.name === "resv-node" || target.name === "resv-image") {
        const list = new Set(
          target.name === "resv-node" ? this.selection.nodeIds : this.selection.images,
        );
        if (target.checked) list.add(target.value);
        else list.delete(target.value);
        if (target.name === "resv-node") this.selection.nodeIds = [...list];
        else this.selection.images = [...list];
        this.render();
      } else if (target.id === "launch-lease") {
        this.fillAssignmentPickers();
      } else if (target.id === "pacing-toggle") {
        this.wallPacing = target.checked;
        this.render();
      } else if (target.id === "resv-center") this.spectrum.center = Number(target.value);
      else if (target.id === "resv-bw") this.spectrum.bandwidth = Number(target.value);
      else if (target.id === "resv-start") this.spectrum.start = Number(target.value);
      else if (target.id === "resv-end") this.spectrum.end = Number(target.value);
    });

    this.root.addEventListener("submit", (ev) => {
      const form = ev.target as HTMLFormElement;
      ev.preventDefault();
      if (form.id === "reserve-form") void this.submitReservation();
      if (form.id === "launch-form") {
        const leaseSelect = this.root.querySelector<HTMLSelectElement>("#launch-lease");
        if (!leaseSelect) return;
        const assignments: Record<string, string> = {};
        this.root
          .querySelectorAll<HTMLSelectElement>('select[name="assign"]')
          .forEach((sel) => {
            assignments[sel.dataset.node ?? ""] = sel.value;
          });
        void this.launchSession(leaseSelect.value, assignments);
      }
    });

    this.root.addEventListener("click", (ev) => {
      const button = (ev.target as HTMLElement).closest("button[data-action]");
      if (!button) return;
      const action = button.getAttribute("data-action");
      const sessionId = button.getAttribute("data-session") ?? "";
      if (action === "stop-session") void this.stopSession(sessionId);
      if (action === "watch-session") this.watchSession(sessionId);
      if (action === "add-xapp") void this.addMacXapp(sessionId);
    });
  }

  async start() {
    this.bind();
    await this.loadAll();
    this.render();
    setInterval(() => {
      void this.loadAll().then(() => this.render());
    }, REFRESH_MS);
  }
}

declare global {
  interface Window {
    portal?: Portal;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const api = new ApiClient("", "demo-token");
  const portal = new Portal(api, document.getElementById("app") as HTMLElement);
  window.portal = portal;
  void portal.start();
}
