"""Shared fixtures and hypothesis profiles."""

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci", max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile(
    "fast", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))

from oranlab.inventory import load_inventory
from oranlab.linkmodel import LinkModel
from oranlab.provisioner import ImageCatalog


@pytest.fixture(scope="session")
def phase1():
    return load_inventory("ara-phase1")


@pytest.fixture(scope="session")
def sandbox():
    return load_inventory("sandbox-50")


@pytest.fixture
def link_model():
    return LinkModel()


@pytest.fixture
def catalog():
    return ImageCatalog.load()
