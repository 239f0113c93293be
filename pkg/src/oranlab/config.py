"""Dataclass configuration for a living-lab instance."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .linkmodel import LinkModel


@dataclass
class LabConfig:
    deployment: str = "ara-phase1"  # bundled fixture name or a file path
    seed: int = 42
    tick_ms: int = 100  # sampling tick of the virtual clock
    link_model: LinkModel = field(default_factory=LinkModel)
    catalog_path: Optional[Path] = None  # None -> bundled images/catalog.yaml
    registry_path: Optional[Path] = None  # None -> bundled xapps/registry.yaml
    routing_delay_ms: tuple[int, int] = (10, 60)  # simulated RIC routing delay
    lease_log_path: Optional[Path] = None
    executor_log_path: Optional[Path] = None
    # per-xApp parameter overrides applied on top of the registry file,
    # e.g. {"threshold-control": {"threshold_ms": 2.5}}
    xapp_overrides: dict = field(default_factory=dict)
    # static bearer tokens: token -> account name
    tokens: dict = field(default_factory=lambda: {"demo-token": "demo"})


@dataclass
class ServeConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    # wall-clock pacing: how many virtual ms advance per wall second
    pace_virtual_ms_per_s: int = 1000
    lab: LabConfig = field(default_factory=LabConfig)
