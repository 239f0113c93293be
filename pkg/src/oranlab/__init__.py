"""Desk-scale O-RAN living lab.

Testbed orchestration (inventory, leases, container-mode provisioning)
fused with a simulated disaggregated RAN whose gNB agents report
RLC/PDCP/MAC latency metrics over the E2-lite protocol to a near-RT-RIC
hosting pluggable xApps, operated through an HTTP API, a CLI and a
browser portal.
"""

__version__ = "0.1.0"

from .config import LabConfig, ServeConfig
from .lab import LivingLab, run_demo_workflow

__all__ = ["LabConfig", "LivingLab", "ServeConfig", "run_demo_workflow", "__version__"]
