"""Shared fixtures for the evcs-attack tests."""

from pathlib import Path

import pytest

from evcs_attack.cli.config import default_grid_path
from evcs_attack.grid import (
    Branch,
    GeneratorParams,
    GridSpec,
    LoadParams,
    NodeRecord,
    assemble_descriptor,
    load_grid_spec,
)

FIXTURES = Path(__file__).parent / "fixtures"

# One machine feeding one load: a 3-state model small enough to write out by hand
TOY_M, TOY_D, TOY_KP, TOY_KI = 1.0, 0.1, 0.2, 0.3
TOY_B, TOY_DL = 2.0, 0.5


def make_toy_spec(load_damping: float = TOY_DL) -> GridSpec:
    return GridSpec(
        base_mva=100.0,
        f_s=60.0,
        nodes=(NodeRecord("R", "reference"), NodeRecord("L", "load")),
        generators=(GeneratorParams("R", TOY_M, TOY_D, TOY_KP, TOY_KI),),
        loads=(LoadParams("L", p_bar=1.0, damping=load_damping, evcs_max=0.5),),
        branches=(Branch("R", "L", TOY_B),),
        name="toy",
    )


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def toy_spec():
    return make_toy_spec()


@pytest.fixture
def toy_model(toy_spec):
    return assemble_descriptor(toy_spec, "L")


@pytest.fixture
def two_area_spec():
    return load_grid_spec(FIXTURES / "two_area.json")


@pytest.fixture(scope="session")
def manhattan_spec():
    return load_grid_spec(default_grid_path())


@pytest.fixture(scope="session")
def manhattan_model(manhattan_spec):
    return assemble_descriptor(manhattan_spec, "B4")
