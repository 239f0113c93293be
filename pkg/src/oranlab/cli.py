"""Command-line client covering the full reserve / image / launch / run
workflow against the HTTP API, plus the self-contained `demo run` and
the `serve` entry point.

Global flags mirror environment variables with the ARA_ prefix
(ARA_API, ARA_TOKEN, ARA_SEED, ARA_DEPLOYMENT).
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import httpx


@dataclass
class CliContext:
    api: str
    token: str
    seed: int
    deployment: str


def _render_error(payload) -> str:
    if isinstance(payload, dict) and "error" in payload:
        err = payload["error"]
        text = f"error {err.get('code')}: {err.get('message')}"
        detail = err.get("detail")
        if detail:
            text += "\n" + json.dumps(detail, indent=2)
        return text
    return f"error: {payload}"


class Client:
    def __init__(self, ctx: CliContext):
        self._http = httpx.Client(base_url=ctx.api, timeout=30.0)
        self._token = ctx.token

    def call(self, method: str, path: str, *, body=None, params=None, auth: bool = False):
        headers = {"Authorization": f"Bearer {self._token}"} if auth else {}
        try:
            resp = self._http.request(method, path, json=body, params=params, headers=headers)
        except httpx.HTTPError as exc:
            click.echo(f"error transport: cannot reach API: {exc}", err=True)
            sys.exit(2)
        if resp.status_code >= 400:
            try:
                payload = resp.json()
            except ValueError:
                payload = resp.text
            click.echo(_render_error(payload), err=True)
            sys.exit(1)
        return resp

    def stream(self, path: str, params=None):
        return self._http.stream("GET", path, params=params, timeout=None)


@click.group(context_settings={"auto_envvar_prefix": "ARA"})
@click.option("--api", default="http://127.0.0.1:8080", show_default=True, help="API base URL")
@click.option("--token", default="demo-token", show_default=True, help="bearer token")
@click.option("--seed", default=42, show_default=True, type=int, help="simulation seed")
@click.option("--deployment", default="ara-phase1", show_default=True,
              help="bundled fixture name or deployment file path")
@click.pass_context
def main(ctx, api, token, seed, deployment):
    """Operate the desk-scale O-RAN living lab."""
    ctx.obj = CliContext(api, token, seed, deployment)


# -- nodes ---------------------------------------------------------------


@main.group()
def nodes():
    """Inventory queries."""


@nodes.command("list")
@click.option("--role", default=None, help="filter by role (BaseStation, FixedUE, ...)")
@click.option("--site", default=None, help="filter by site id")
@click.pass_obj
def nodes_list(obj, role, site):
    params = {}
    if role:
        params["role"] = role
    if site:
        params["site"] = site
    doc = Client(obj).call("GET", "/v1/nodes", params=params).json()
    for node in doc["nodes"]:
        booster = "booster" if node["booster"] else "no-booster"
        radios = ",".join(r["model_class"] for r in node["radios"])
        click.echo(f"{node['node_id']:<16} {node['role']:<12} site={node['site_id']:<14} "
                   f"[{radios}] {booster}")
    click.echo(f"{len(doc['nodes'])} node(s)")


# -- leases ---------------------------------------------------------------


@main.group()
def lease():
    """Reservations."""


@lease.command("request")
@click.option("--nodes", "node_csv", required=True, help="comma-separated node ids")
@click.option("--center", required=True, type=float, help="spectrum center MHz")
@click.option("--bandwidth", required=True, type=float, help="spectrum bandwidth MHz")
@click.option("--start", required=True, type=int, help="start (virtual ms)")
@click.option("--end", required=True, type=int, help="end (virtual ms, exclusive)")
@click.option("--image", "images", multiple=True, help="image name (repeatable)")
@click.pass_obj
def lease_request(obj, node_csv, center, bandwidth, start, end, images):
    body = {
        "node_ids": [n.strip() for n in node_csv.split(",") if n.strip()],
        "spectrum": {"center": center, "bandwidth": bandwidth},
        "interval": [start, end],
        "images": list(images),
    }
    doc = Client(obj).call("POST", "/v1/leases", body=body, auth=True).json()
    click.echo(f"lease {doc['lease_id']} state={doc['state']} interval={doc['interval']}")


@lease.command("list")
@click.pass_obj
def lease_list(obj):
    doc = Client(obj).call("GET", "/v1/leases").json()
    for l in doc["leases"]:
        click.echo(f"{l['lease_id']} state={l['state']:<10} nodes={','.join(l['node_ids'])} "
                   f"interval={l['interval']} requester={l['requester']}")
    click.echo(f"{len(doc['leases'])} lease(s)")


@lease.command("terminate")
@click.argument("lease_id")
@click.pass_obj
def lease_terminate(obj, lease_id):
    doc = Client(obj).call("DELETE", f"/v1/leases/{lease_id}", auth=True).json()
    click.echo(f"lease {doc['lease_id']} state={doc['state']}")


# -- images ---------------------------------------------------------------


@main.group()
def image():
    """Image catalog."""


@image.command("list")
@click.pass_obj
def image_list(obj):
    doc = Client(obj).call("GET", "/v1/images").json()
    for img in doc["images"]:
        click.echo(f"{img['name']:<18} role={img['role_tag']:<8} digest={img['digest'][:16]}…")
    click.echo(f"{len(doc['images'])} image(s)")


# -- sessions ---------------------------------------------------------------


@main.group()
def session():
    """Experiment sessions."""


def _echo_session(doc):
    click.echo(f"session {doc['session_id']} lease={doc['lease_id']} state={doc['state']} "
               f"uptime={doc['uptime_ms']}ms")
    for c in doc["containers"]:
        procs = ",".join(c["processes"]) or "-"
        click.echo(f"  {c['container_id']} node={c['node_id']} image={c['image']} "
                   f"state={c['state']} processes={procs}")


@session.command("launch")
@click.option("--lease", "lease_id", required=True)
@click.option("--assign", "assignments", multiple=True, required=True,
              help="node=image (repeatable)")
@click.pass_obj
def session_launch(obj, lease_id, assignments):
    mapping = {}
    for item in assignments:
        if "=" not in item:
            raise click.BadParameter(f"--assign needs node=image, got {item!r}")
        node, image_name = item.split("=", 1)
        mapping[node.strip()] = image_name.strip()
    doc = Client(obj).call("POST", "/v1/sessions",
                           body={"lease_id": lease_id, "assignments": mapping}, auth=True).json()
    _echo_session(doc)


@session.command("status")
@click.argument("session_id")
@click.pass_obj
def session_status(obj, session_id):
    _echo_session(Client(obj).call("GET", f"/v1/sessions/{session_id}").json())


@session.command("stop")
@click.argument("session_id")
@click.pass_obj
def session_stop(obj, session_id):
    _echo_session(Client(obj).call("DELETE", f"/v1/sessions/{session_id}", auth=True).json())


# -- metrics ---------------------------------------------------------------


@main.group()
def metrics():
    """Live metric streams."""


@metrics.command("tail")
@click.option("--session", "session_id", required=True)
@click.option("--count", default=10, show_default=True, help="events to print before exiting")
@click.pass_obj
def metrics_tail(obj, session_id, count):
    client = Client(obj)
    printed = 0
    with client.stream("/v1/metrics/live", params={"session": session_id}) as resp:
        if resp.status_code >= 400:
            resp.read()
            click.echo(_render_error(resp.json()), err=True)
            sys.exit(1)
        event: dict = {}
        for line in resp.iter_lines():
            if line.startswith(":"):
                continue
            if line == "":
                if event.get("event") == "indication" and "data" in event:
                    data = json.loads(event["data"])
                    click.echo(
                        f"[{data['t']:>8}ms] event={data['event_id']} agent={data['agent_id']} "
                        f"sub={data['sub_id']} seq={data['seq']} samples={data['n_samples']} "
                        f"xapp={data['xapp_id']}"
                    )
                    printed += 1
                    if printed >= count:
                        return
                if event.get("event") == "end":
                    click.echo("stream ended (session stopped)")
                    return
                event = {}
                continue
            key, _, value = line.partition(":")
            event[key.strip()] = value.strip()


@main.group()
def chart():
    """Chart exports."""


@chart.command("export")
@click.option("--session", "session_id", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.pass_obj
def chart_export(obj, session_id, out_path):
    resp = Client(obj).call("GET", "/v1/export/chart", params={"session": session_id})
    Path(out_path).write_text(resp.text, encoding="utf-8")
    rows = max(0, len(resp.text.splitlines()) - 1)
    click.echo(f"wrote {out_path} ({rows} rows, 3 layer series)")


# -- demo ---------------------------------------------------------------


@main.group()
def demo():
    """Self-contained end-to-end demonstrations."""


@demo.command("run")
@click.option("--duration", default=3000, show_default=True, help="virtual ms to simulate")
@click.option("--seed", default=None, type=int, help="override the global --seed")
@click.option("--deployment", default=None, help="override the global --deployment")
@click.pass_obj
def demo_run(obj, duration, seed, deployment):
    """Reserve 1 BS + 1 UE, launch containers, run gNB/RIC/xApps + nrUE."""
    from .config import LabConfig
    from .lab import LivingLab, run_demo_workflow

    cfg = LabConfig(
        deployment=deployment if deployment is not None else obj.deployment,
        seed=seed if seed is not None else obj.seed,
        # demo-tuned threshold so the control loop visibly fires
        xapp_overrides={"threshold-control": {"threshold_ms": 2.5}},
    )
    try:
        lab = LivingLab(cfg)
        result = run_demo_workflow(lab, duration_ms=duration)
    except Exception as exc:
        click.echo(f"demo failed: {exc}", err=True)
        sys.exit(1)
    click.echo(f"lease: {result.lease_id}")
    click.echo(f"session: {result.session_id}")
    for c in result.containers:
        click.echo(f"  container {c['container_id']} node={c['node_id']} image={c['image']} "
                   f"state={c['state']} processes={','.join(c['processes'])}")
    click.echo(f"ue attached: {result.attach_ok}")
    click.echo(f"indications routed: {result.indications_routed}")
    click.echo(f"control actions: {result.actions} (timing {result.timing})")
    click.echo(f"conservation: {result.conservation}")
    if not result.ok:
        click.echo("demo run FAILED", err=True)
        sys.exit(1)
    click.echo("demo run OK")


# -- serve ---------------------------------------------------------------


@main.command("serve")
@click.option("--listen", default="127.0.0.1:8080", show_default=True, help="host:port")
@click.option("--pace", default=1000, show_default=True,
              help="virtual ms advanced per wall second")
@click.pass_obj
def serve_cmd(obj, listen, pace):
    """Run the HTTP service (portal UI at /ui when built)."""
    from .api import ApiError, serve
    from .config import LabConfig, ServeConfig

    host, _, port = listen.partition(":")
    cfg = ServeConfig(
        host=host or "127.0.0.1",
        port=int(port or 8080),
        pace_virtual_ms_per_s=pace,
        lab=LabConfig(deployment=obj.deployment, seed=obj.seed),
    )
    try:
        serve(cfg)
    except ApiError as exc:
        click.echo(f"error {exc.code}: {exc.message}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
