import numpy as np
import pytest

from nhse_lab import LatticeModel, spectral_area_closed_form


@pytest.fixture
def skin_model():
    """Asymmetric two-range lattice with a large enclosed spectral area."""
    return LatticeModel({1: 1.0, -1: 0.8, 2: 0.8, -2: 0.6}, label="skin")


@pytest.fixture
def reciprocal_model():
    """Complex but reciprocal hoppings: zero enclosed area, no skin effect."""
    return LatticeModel(
        {1: 1 - 0.6j, -1: 1 - 0.6j, 2: 0.5 + 0.1j, -2: 0.5 + 0.1j},
        label="reciprocal",
    )


@pytest.fixture
def hermitian_model():
    return LatticeModel({1: 1.0, -1: 1.0}, label="hermitian")


def hatano_nelson(t1, tm1, label="hatano-nelson"):
    return LatticeModel({1: t1, -1: tm1}, label=label)


def unit_disk(rng):
    while True:
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if abs(z) <= 1.0:
            return z


def rand_model(rng, rmax=3, reciprocal=False, min_area=None):
    """Random model with unit-disk amplitudes; optionally reciprocal or
    redrawn until the enclosed area passes min_area."""
    while True:
        if reciprocal:
            hop = {}
            for r in range(1, rmax + 1):
                hop[r] = hop[-r] = unit_disk(rng)
        else:
            hop = {r: unit_disk(rng) for r in range(-rmax, rmax + 1) if r != 0}
        m = LatticeModel(hop, label="random")
        if min_area is None or abs(spectral_area_closed_form(m)) > min_area:
            return m
