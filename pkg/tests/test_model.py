import numpy as np
import pytest
from conftest import hatano_nelson, rand_model

from nhse_lab import (
    LatticeModel,
    SpectrumCurve,
    dispersion_derivative,
    dispersion_pbc,
    drift_velocity,
    k_grid,
    locate_max_imag,
    max_group_speed,
    obc_matrix,
    obc_spectrum,
    predicted_acceleration,
    sample_pbc_spectrum,
    spectral_area_closed_form,
    spectral_area_quadrature,
    summarize,
)
from nhse_lab.analysis import polygon_winding, polyline_distance


def test_model_validation():
    with pytest.raises(ValueError):
        LatticeModel({})
    with pytest.raises(ValueError):
        LatticeModel({0: 1.0})
    with pytest.raises(ValueError):
        LatticeModel({1: float("nan")})
    m = LatticeModel({1: 2, -2: 1.5, 0: 0.3})
    assert m.hop_range == 2
    assert m.max_amplitude == 2.0


def test_dispersion_matches_direct_sum():
    rng = np.random.default_rng(0)
    m = rand_model(rng)
    for k in rng.uniform(-np.pi, np.pi, 7):
        direct = -sum(t * np.exp(1j * k * r) for r, t in m.hoppings.items())
        assert abs(dispersion_pbc(m, k) - direct) < 1e-14
        ddirect = -sum(1j * r * t * np.exp(1j * k * r) for r, t in m.hoppings.items())
        assert abs(dispersion_derivative(m, k) - ddirect) < 1e-14


def test_sample_grid_validation(skin_model):
    with pytest.raises(ValueError):
        sample_pbc_spectrum(skin_model, 15)
    with pytest.raises(ValueError):
        sample_pbc_spectrum(skin_model, 17)
    k = k_grid(16)
    assert k[0] == -np.pi
    assert k[-1] < np.pi


def test_area_quadrature_matches_closed_form():
    rng = np.random.default_rng(42)
    for _ in range(100):
        m = rand_model(rng)
        q = spectral_area_quadrature(sample_pbc_spectrum(m, 4096))
        assert abs(q - spectral_area_closed_form(m)) < 1e-9


def test_area_reciprocal_null():
    rng = np.random.default_rng(1)
    for _ in range(20):
        m = rand_model(rng, reciprocal=True)
        assert spectral_area_closed_form(m) == 0.0
        assert abs(spectral_area_quadrature(sample_pbc_spectrum(m, 4096))) < 1e-10


def test_area_orientation_flip(skin_model):
    curve = sample_pbc_spectrum(skin_model, 1024)
    a = spectral_area_quadrature(curve)
    rev = SpectrumCurve(curve.k_samples, curve.e_samples[::-1].copy(), "rev")
    assert abs(spectral_area_quadrature(rev) + a) < 1e-12


def test_area_hatano_nelson():
    m = hatano_nelson(1.3, 0.7)
    want = -np.pi * (1.3 ** 2 - 0.7 ** 2)
    assert abs(spectral_area_closed_form(m) - want) < 1e-12
    assert abs(spectral_area_quadrature(sample_pbc_spectrum(m, 1024)) - want) < 1e-10


def test_skin_area_frozen_value(skin_model):
    # -0.92 pi, the reference enclosed area of the skin fixture
    want = -2.8902652413026098
    assert abs(spectral_area_closed_form(skin_model) - want) < 1e-12
    assert abs(spectral_area_quadrature(sample_pbc_spectrum(skin_model, 4096)) - want) < 1e-10


def test_scale_covariance():
    rng = np.random.default_rng(5)
    m = rand_model(rng, min_area=0.3)
    s = 1.7
    scaled = LatticeModel({r: s * t for r, t in m.hoppings.items()}, label="scaled")
    assert abs(spectral_area_closed_form(scaled) - s ** 2 * spectral_area_closed_form(m)) < 1e-10
    sm, ss = summarize(m), summarize(scaled)
    assert abs(ss.v_m - s * sm.v_m) < 1e-6
    assert abs(ss.k_m - sm.k_m) < 1e-7


def test_locate_max_skin(skin_model):
    loc = locate_max_imag(sample_pbc_spectrum(skin_model))
    assert not loc.degenerate
    assert abs(loc.k_m - (-0.9359296)) < 1e-5
    assert abs(loc.lambda_max - 0.3520345) < 1e-6


def test_locate_max_hatano_nelson():
    m = hatano_nelson(1.0, 0.4)
    loc = locate_max_imag(sample_pbc_spectrum(m))
    assert abs(loc.k_m - (-np.pi / 2)) < 1e-6
    assert abs(loc.lambda_max - 0.6) < 1e-9
    assert abs(drift_velocity(m) - (-1.4)) < 1e-6


def test_locate_max_hermitian_flat(hermitian_model):
    loc = locate_max_imag(sample_pbc_spectrum(hermitian_model))
    assert loc.degenerate
    assert loc.k_m == -np.pi
    assert abs(loc.lambda_max) < 1e-12
    with pytest.warns(UserWarning):
        v = drift_velocity(hermitian_model)
    assert abs(v) < 1e-12


def test_locate_max_dominates_samples():
    rng = np.random.default_rng(9)
    for _ in range(10):
        m = rand_model(rng)
        curve = sample_pbc_spectrum(m, 1024)
        loc = locate_max_imag(curve)
        assert loc.lambda_max >= curve.e_samples.imag.max() - 1e-12


def test_drift_velocity_skin(skin_model):
    assert abs(drift_velocity(skin_model) - (-4.1233325)) < 1e-5


def test_obc_matrix_structure(skin_model):
    h = obc_matrix(skin_model, 12)
    assert h.shape == (12, 12)
    assert h[3, 4] == -skin_model.hoppings[1]
    assert h[4, 3] == -skin_model.hoppings[-1]
    assert h[3, 5] == -skin_model.hoppings[2]
    assert h[5, 3] == -skin_model.hoppings[-2]
    assert h[0, 3] == 0.0


def test_obc_hermitian_exact(hermitian_model):
    n = 40
    ev = obc_spectrum(hermitian_model, n)
    want = np.sort(-2.0 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
    assert np.abs(ev.imag).max() < 1e-10
    assert np.abs(np.sort(ev.real) - want).max() < 1e-10


def test_obc_sorted_and_vectors(skin_model):
    ev = obc_spectrum(skin_model, 40)
    order = np.lexsort((ev.imag, ev.real))
    assert np.array_equal(order, np.arange(len(ev)))
    ev2, vecs = obc_spectrum(skin_model, 40, return_vectors=True)
    assert np.allclose(ev, ev2)
    h = obc_matrix(skin_model, 40)
    resid = np.linalg.norm(h @ vecs - vecs * ev2, axis=0)
    assert resid.max() < 1e-8 * np.linalg.norm(h, 2)


def test_obc_size_validation(skin_model):
    with pytest.raises(ValueError):
        obc_spectrum(skin_model, 4 * skin_model.hop_range + 3)


def test_obc_inside_pbc_loop():
    # eigenvalues of a finite chain sit inside (or near, at finite size) the
    # PBC loop for skin-effect models; 0.08 covers the N = 60 spill observed
    # on random draws
    rng = np.random.default_rng(17)
    for _ in range(5):
        m = rand_model(rng, min_area=0.1)
        curve = sample_pbc_spectrum(m, 2048)
        for e in obc_spectrum(m, 60):
            inside = polygon_winding(complex(e), curve.e_samples) != 0
            assert inside or polyline_distance(complex(e), curve.e_samples) < 0.08


def test_summarize_flags(skin_model, reciprocal_model, hermitian_model):
    s = summarize(skin_model)
    assert s.nhse_flag and not s.degenerate_max
    assert abs(s.accel - (-1.84)) < 1e-10
    r = summarize(reciprocal_model)
    assert not r.nhse_flag
    assert abs(r.area) < 1e-12
    h = summarize(hermitian_model)
    assert not h.nhse_flag and h.degenerate_max
    assert h.accel == 0.0


def test_predicted_acceleration_values(skin_model, reciprocal_model):
    assert abs(predicted_acceleration(skin_model) - (-1.84)) < 1e-10
    assert predicted_acceleration(reciprocal_model) == 0.0


def test_max_group_speed(skin_model):
    k = k_grid(4096)
    direct = np.abs(dispersion_derivative(skin_model, k)).max()
    assert abs(max_group_speed(skin_model) - direct) < 1e-12
