from __future__ import annotations

import pytest

from quakedesk.ingest import load_seed_dataset


@pytest.fixture()
def seed_ref():
    ref, _ = load_seed_dataset()
    return ref


@pytest.fixture()
def seed_catalog():
    _, catalog = load_seed_dataset()
    return catalog
