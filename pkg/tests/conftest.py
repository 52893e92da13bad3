"""Shared fixtures: the synthetic dataset and a served voting bundle.

Heavy artifacts (trained ensemble, saved bundle) are session-scoped; tests
must treat them as read-only.
"""

from __future__ import annotations

import os

import pytest

from cadvote.bundle import load_bundle, save_bundle
from cadvote.dataset import Dataset, load_dataset
from cadvote.ensemble import train_voting
from cadvote.evaluation import DEFAULT_MEMBER_SPECS
from cadvote.fixture import synthetic_dataset

REAL_DATA_ENV = "CAD_DATASET"


@pytest.fixture(scope="session")
def fixture_300() -> Dataset:
    return synthetic_dataset(300, seed=0)


@pytest.fixture(scope="session")
def fixture_303() -> Dataset:
    return synthetic_dataset(303, seed=0)


@pytest.fixture(scope="session")
def voting_bundle_path(fixture_300, tmp_path_factory) -> str:
    """A saved default voting bundle trained on the full fixture."""
    model = train_voting(fixture_300, DEFAULT_MEMBER_SPECS, seed=5)
    path = tmp_path_factory.mktemp("bundle") / "model.cadm"
    save_bundle(
        model,
        path,
        metrics={"accuracy": 0.81, "cv": {"k": 10, "seed": 0, "mode": "default"}},
    )
    return str(path)


@pytest.fixture(scope="session")
def voting_bundle(voting_bundle_path):
    return load_bundle(voting_bundle_path)


def real_dataset() -> Dataset | None:
    """The real catheterization export, when the user points us at it."""
    path = os.environ.get(REAL_DATA_ENV)
    if not path:
        return None
    return load_dataset(path)


def require_real_dataset() -> Dataset:
    d = real_dataset()
    if d is None:
        pytest.skip(
            f"real dataset not available: set {REAL_DATA_ENV}=/path/to/export.csv "
            "to run the published-accuracy checks (the synthetic fixture covers "
            "every other criterion)"
        )
    return d
