"""Container-mode experiment provisioning.

Turns an Active lease plus per-node image assignments into an
ExperimentSession whose containers progress Pending -> Starting ->
Running through a pluggable executor. The default executor is an
in-process simulation with seeded deterministic latencies; a stub marks
where a real container runtime would plug in. Launch is all-or-nothing:
a failure stops every already-started container.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
import yaml

from .errors import OranLabError, ValidationError
from .inventory import Inventory, NodeRecord, NodeRole, UE_ROLES
from .leases import Lease, LeaseState
from .ransim import stable_seed


class ProvisionError(OranLabError):
    pass


class ExecutorFailure(ProvisionError):
    """The executor could not start or stop a container."""


ROLE_TAGS = ("gnb-ric", "nrue", "custom")

PROCESS_ROLES = {
    "gnb-ric": ("gNB", "near-RT-RIC", "xApp-host"),
    "nrue": ("nrUE",),
    "custom": ("custom",),
}


@dataclass(frozen=True)
class ImageDescriptor:
    name: str
    digest: str  # sha256 hex of the image content
    role_tag: str


class ImageCatalog:
    """Named images with pinned content digests.

    User-registered images resolve identically to pre-built ones; digest
    verification happens both at registration and again at launch.
    """

    def __init__(self):
        self._images: dict[str, ImageDescriptor] = {}
        self._content: dict[str, str] = {}

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "ImageCatalog":
        if path is None:
            path = Path(str(resources.files("oranlab").joinpath("images", "catalog.yaml")))
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        catalog = cls()
        for entry in doc.get("images", []):
            catalog.register(entry["name"], entry["content"], entry["role_tag"], entry.get("digest"))
        return catalog

    def register(self, name: str, content: str, role_tag: str, digest: Optional[str] = None) -> ImageDescriptor:
        if name in self._images:
            raise ProvisionError(f"image name {name!r} already in catalog")
        if role_tag not in ROLE_TAGS:
            raise ValidationError(f"image {name}: unknown role_tag {role_tag!r}")
        actual = hashlib.sha256(content.encode("utf-8")).hexdigest()
        if digest is not None and digest != actual:
            raise ValidationError(f"image {name}: digest does not match catalog content")
        desc = ImageDescriptor(name, actual, role_tag)
        self._images[name] = desc
        self._content[name] = content
        return desc

    def resolve_image(self, name: str) -> ImageDescriptor:
        desc = self._images.get(name)
        if desc is None:
            raise ProvisionError(f"unknown image {name!r}")
        return desc

    def verify_digest(self, name: str) -> bool:
        desc = self.resolve_image(name)
        content = self._content.get(name, "")
        return hashlib.sha256(content.encode("utf-8")).hexdigest() == desc.digest

    def names(self) -> list[str]:
        return sorted(self._images)

    def gnb_image_names(self) -> frozenset[str]:
        return frozenset(n for n, d in self._images.items() if d.role_tag == "gnb-ric")

    # test hook: simulates a corrupted store between registration and launch
    def _tamper(self, name: str, content: str):
        self._content[name] = content


class ContainerState(Enum):
    PENDING = "Pending"
    STARTING = "Starting"
    RUNNING = "Running"
    STOPPED = "Stopped"
    FAILED = "Failed"


_CONTAINER_TRANSITIONS = {
    ContainerState.PENDING: {ContainerState.STARTING},
    ContainerState.STARTING: {ContainerState.RUNNING, ContainerState.FAILED, ContainerState.STOPPED},
    ContainerState.RUNNING: {ContainerState.STOPPED, ContainerState.FAILED},
}


@dataclass(frozen=True)
class ProcessHandle:
    role: str
    handle: str


@dataclass
class ContainerInstance:
    container_id: str
    node_id: str
    image: ImageDescriptor
    state: ContainerState = ContainerState.PENDING
    processes: tuple[ProcessHandle, ...] = ()

    def transition(self, to: ContainerState):
        allowed = _CONTAINER_TRANSITIONS.get(self.state, set())
        if to not in allowed:
            raise ProvisionError(
                f"container {self.container_id}: illegal transition {self.state.value} -> {to.value}"
            )
        self.state = to
        if to is not ContainerState.RUNNING:
            self.processes = ()


class SessionState(Enum):
    LAUNCHING = "Launching"
    RUNNING = "Running"
    FAILED = "Failed"
    STOPPED = "Stopped"


@dataclass
class ExperimentSession:
    session_id: str
    lease_id: str
    containers: list[ContainerInstance]
    state: SessionState = SessionState.LAUNCHING
    started_at: int = 0
    stopped_at: Optional[int] = None
    stop_cause: str = ""
    launch_order: list[str] = field(default_factory=list)  # container ids
    runtime: Optional[object] = None  # simulation runtime attached by the lab

    @property
    def running(self) -> bool:
        return self.state is SessionState.RUNNING

    def container_for_node(self, node_id: str) -> ContainerInstance:
        for c in self.containers:
            if c.node_id == node_id:
                return c
        raise ProvisionError(f"no container for node {node_id!r}")


class Executor:
    """Side-effect boundary for container lifecycle operations."""

    def start_container(self, node: NodeRecord, image: ImageDescriptor, container_id: str):
        raise NotImplementedError

    def stop_container(self, node: NodeRecord, container_id: str):
        raise NotImplementedError


class SimExecutor(Executor):
    """In-process executor with deterministic seeded latencies.

    Every action is appended to a line-delimited log (action, node,
    container, timestamp); replaying a launch against the log reproduces
    the same session state.
    """

    def __init__(self, clock, seed: int = 0, fail_on: Iterable[str] = (), log_path: Optional[Path] = None):
        self.clock = clock
        self.rng = np.random.default_rng(stable_seed(seed, "executor"))
        self.fail_on = set(fail_on)
        self.log: list[dict] = []
        self._log_path = Path(log_path) if log_path else None

    def _record(self, action: str, node_id: str, container_id: str, extra: str = ""):
        rec = {
            "action": action,
            "node": node_id,
            "container": container_id,
            "t": self.clock.now,
        }
        if extra:
            rec["detail"] = extra
        self.log.append(rec)
        if self._log_path is not None:
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def start_container(self, node: NodeRecord, image: ImageDescriptor, container_id: str):
        # simulated startup cost over the node's management channel
        latency_ms = int(self.rng.integers(50, 400))
        self._record("start", node.node_id, container_id, f"image={image.name} startup_ms={latency_ms}")
        if node.node_id in self.fail_on:
            self._record("start-failed", node.node_id, container_id)
            raise ExecutorFailure(f"injected failure starting container on {node.node_id}")

    def stop_container(self, node: NodeRecord, container_id: str):
        self._record("stop", node.node_id, container_id)


class RealRuntimeExecutor(Executor):
    """Placeholder for a real container runtime (not implemented).

    A production deployment would talk to the node's management endpoint
    here; the simulation never instantiates this class.
    """

    def start_container(self, node, image, container_id):
        raise NotImplementedError("real container runtime integration is out of scope")

    def stop_container(self, node, container_id):
        raise NotImplementedError("real container runtime integration is out of scope")


def resolve_image(name: str, catalog: ImageCatalog) -> ImageDescriptor:
    return catalog.resolve_image(name)


class Provisioner:
    """Realizes Active leases as running experiment sessions."""

    def __init__(
        self,
        inventory: Inventory,
        catalog: ImageCatalog,
        executor: Executor,
        clock,
        runtime_factory: Optional[Callable[[ExperimentSession, Lease], object]] = None,
    ):
        self._inv = inventory
        self._catalog = catalog
        self._executor = executor
        self._clock = clock
        self._runtime_factory = runtime_factory
        self._sessions: dict[str, ExperimentSession] = {}
        self._counter = 0
        self._lock = threading.RLock()

    # -- helpers ---------------------------------------------------------

    def _check_assignment(self, lease: Lease, assignments: dict[str, str]) -> dict[str, ImageDescriptor]:
        leased = set(lease.request.node_ids)
        missing = leased - set(assignments)
        if missing:
            raise ProvisionError(f"assignment missing for node(s) {sorted(missing)}")
        extra = set(assignments) - leased
        if extra:
            raise ProvisionError(f"assignment for non-leased node(s) {sorted(extra)}")
        resolved: dict[str, ImageDescriptor] = {}
        for node_id, image_name in assignments.items():
            node = self._inv.node(node_id)
            desc = self._catalog.resolve_image(image_name)
            if node.role is NodeRole.BASE_STATION and desc.role_tag not in ("gnb-ric", "custom"):
                raise ProvisionError(f"node {node_id}: BaseStation requires gnb-ric or custom image")
            if node.role in UE_ROLES and desc.role_tag not in ("nrue", "custom"):
                raise ProvisionError(f"node {node_id}: UE requires nrue or custom image")
            if not self._catalog.verify_digest(image_name):
                raise ProvisionError(f"image {image_name}: digest verification failed at launch")
            resolved[node_id] = desc
        return resolved

    def _launch_order(self, node_ids: Iterable[str]) -> list[str]:
        # base stations first so the gNB/RIC pair is up before UE attach
        nodes = [self._inv.node(n) for n in node_ids]
        bs = sorted(n.node_id for n in nodes if n.role is NodeRole.BASE_STATION)
        rest = sorted(n.node_id for n in nodes if n.role is not NodeRole.BASE_STATION)
        return bs + rest

    # -- operations --------------------------------------------------------

    def launch_session(self, lease: Lease, assignments: dict[str, str]) -> ExperimentSession:
        with self._lock:
            if lease.state is not LeaseState.ACTIVE:
                raise ProvisionError(f"lease {lease.lease_id} is {lease.state.value}, not Active")
            resolved = self._check_assignment(lease, assignments)
            self._counter += 1
            session_id = f"session-{self._counter:04d}"
            order = self._launch_order(lease.request.node_ids)
            containers = []
            for i, node_id in enumerate(order, start=1):
                containers.append(
                    ContainerInstance(f"{session_id}-c{i}", node_id, resolved[node_id])
                )
            session = ExperimentSession(session_id, lease.lease_id, containers,
                                        started_at=self._clock.now)
            self._sessions[session_id] = session

            started: list[ContainerInstance] = []
            for container in containers:
                node = self._inv.node(container.node_id)
                container.transition(ContainerState.STARTING)
                try:
                    self._executor.start_container(node, container.image, container.container_id)
                except ExecutorFailure:
                    container.transition(ContainerState.FAILED)
                    for prev in reversed(started):
                        self._executor.stop_container(self._inv.node(prev.node_id), prev.container_id)
                        prev.transition(ContainerState.STOPPED)
                    session.state = SessionState.FAILED
                    session.stop_cause = f"executor failure on {container.node_id}"
                    return session
                container.transition(ContainerState.RUNNING)
                container.processes = tuple(
                    ProcessHandle(role, f"{container.container_id}/{role}")
                    for role in PROCESS_ROLES[container.image.role_tag]
                )
                started.append(container)
                session.launch_order.append(container.container_id)

            session.state = SessionState.RUNNING
            if self._runtime_factory is not None:
                session.runtime = self._runtime_factory(session, lease)
            return session

    def stop_session(self, session_id: str, cause: str = "user stop") -> ExperimentSession:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise ProvisionError(f"unknown session {session_id!r}")
            if session.state is SessionState.STOPPED:
                raise ProvisionError(f"session {session_id} already stopped")
            runtime = session.runtime
            if runtime is not None and hasattr(runtime, "shutdown"):
                runtime.shutdown()  # closes E2 connections with a Disconnect
            for container_id in reversed(session.launch_order):
                container = next(c for c in session.containers if c.container_id == container_id)
                if container.state in (ContainerState.RUNNING, ContainerState.STARTING):
                    self._executor.stop_container(
                        self._inv.node(container.node_id), container.container_id
                    )
                    container.transition(ContainerState.STOPPED)
            session.state = SessionState.STOPPED
            session.stopped_at = self._clock.now
            session.stop_cause = cause
            return session

    def session_status(self, session_id: str) -> dict:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise ProvisionError(f"unknown session {session_id!r}")
            end = session.stopped_at if session.stopped_at is not None else self._clock.now
            return {
                "session_id": session.session_id,
                "lease_id": session.lease_id,
                "state": session.state.value,
                "uptime_ms": max(0, end - session.started_at),
                "stop_cause": session.stop_cause,
                "containers": [
                    {
                        "container_id": c.container_id,
                        "node_id": c.node_id,
                        "image": c.image.name,
                        "state": c.state.value,
                        "processes": [p.role for p in c.processes],
                    }
                    for c in session.containers
                ],
            }

    def get(self, session_id: str) -> ExperimentSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise ProvisionError(f"unknown session {session_id!r}")
        return session

    def sessions_for_lease(self, lease_id: str) -> list[ExperimentSession]:
        with self._lock:
            return [s for s in self._sessions.values() if s.lease_id == lease_id]

    def list_sessions(self) -> list[ExperimentSession]:
        with self._lock:
            return list(self._sessions.values())
