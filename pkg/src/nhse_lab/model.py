"""Single-band lattice models and their static spectral quantities.

A lattice is defined by a finite set of complex hopping amplitudes t_r
indexed by the signed hop distance r, with Hamiltonian matrix elements
H_{n,l} = -t_{l-n}.  Under periodic boundary conditions the spectrum is
the Laurent-symbol curve E(k) = -sum_r t_r exp(i k r); under open
boundaries it is the spectrum of the banded Toeplitz truncation.  The
signed area enclosed by the PBC curve diagnoses the skin effect and
fixes the predicted early-time center-of-mass acceleration a = (2/pi) A.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

DEFAULT_NK = 4096


def k_grid(n_k: int) -> np.ndarray:
    """Uniform wavenumber grid k_j = -pi + j * 2pi/n_k, j = 0..n_k-1."""
    return -np.pi + 2.0 * np.pi * np.arange(n_k) / n_k


@dataclass(frozen=True)
class LatticeModel:
    """Finite set of hopping amplitudes {r: t_r} plus a free-form label.

    Absent entries mean t_r = 0.  A nonzero t_0 only shifts the spectrum
    rigidly and is allowed.
    """

    hoppings: dict[int, complex]
    label: str = ""

    def __post_init__(self):
        clean = {}
        has_hop = False
        for r, t in self.hoppings.items():
            r = int(r)
            t = complex(t)
            if not np.isfinite(t.real) or not np.isfinite(t.imag):
                raise ValueError(f"non-finite hopping t_{r}")
            clean[r] = t
            if r != 0 and t != 0:
                has_hop = True
        if not has_hop:
            raise ValueError("model needs at least one nonzero hopping with r != 0")
        object.__setattr__(self, "hoppings", clean)

    @property
    def hop_range(self) -> int:
        return max(abs(r) for r in self.hoppings)

    @property
    def max_amplitude(self) -> float:
        return max(abs(t) for t in self.hoppings.values())


@dataclass(frozen=True)
class SpectrumCurve:
    """PBC dispersion sampled on the uniform Brillouin-zone grid."""

    k_samples: np.ndarray
    e_samples: np.ndarray
    model_label: str = ""

    @property
    def n_k(self) -> int:
        return len(self.k_samples)


@dataclass(frozen=True)
class SpectralSummary:
    """Bundle of the static quantities derived from one model."""

    area: float
    k_m: float
    lambda_max: float
    v_m: float
    accel: float
    nhse_flag: bool
    degenerate_max: bool = False


class MaxImagResult(NamedTuple):
    k_m: float
    lambda_max: float
    degenerate: bool


def dispersion_pbc(model: LatticeModel, k):
    """Bloch dispersion E(k) = -sum_r t_r exp(i k r), 2pi-periodic."""
    k = np.asarray(k, dtype=float)
    e = np.zeros(k.shape, dtype=complex)
    for r, t in model.hoppings.items():
        e -= t * np.exp(1j * k * r)
    return e if e.shape else complex(e)


def dispersion_derivative(model: LatticeModel, k):
    """Analytic dE/dk = -sum_r i r t_r exp(i k r)."""
    k = np.asarray(k, dtype=float)
    d = np.zeros(k.shape, dtype=complex)
    for r, t in model.hoppings.items():
        d -= 1j * r * t * np.exp(1j * k * r)
    return d if d.shape else complex(d)


def max_group_speed(model: LatticeModel, n_k: int = DEFAULT_NK) -> float:
    """max_k |dE/dk|, used to size real-space windows around the light cone."""
    return float(np.abs(dispersion_derivative(model, k_grid(n_k))).max())


def sample_pbc_spectrum(model: LatticeModel, n_k: int = DEFAULT_NK) -> SpectrumCurve:
    """Sample E(k) on the uniform grid; n_k must be even and at least 16."""
    if n_k < 16 or n_k % 2:
        raise ValueError("n_k must be even and >= 16")
    k = k_grid(n_k)
    return SpectrumCurve(k, dispersion_pbc(model, k), model.label)


def obc_matrix(model: LatticeModel, n: int) -> np.ndarray:
    """Dense n-by-n open-boundary Hamiltonian, H_{n,l} = -t_{l-n}."""
    h = np.zeros((n, n), dtype=complex)
    for r, t in model.hoppings.items():
        if abs(r) < n:
            idx = np.arange(n - abs(r))
            if r >= 0:
                h[idx, idx + r] = -t
            else:
                h[idx - r, idx] = -t
    return h


def obc_spectrum(model: LatticeModel, n: int, return_vectors: bool = False):
    """Open-boundary eigenvalues, sorted by real part then imaginary part.

    With return_vectors=True also returns the eigenvector matrix (columns
    matching the sorted eigenvalues) after checking the residual bound
    ||H x - E x|| <= 1e-8 ||H||.
    """
    if n < 4 * model.hop_range + 4:
        raise ValueError(f"n must be >= {4 * model.hop_range + 4} for hop range {model.hop_range}")
    h = obc_matrix(model, n)
    if not return_vectors:
        ev = np.linalg.eigvals(h)
        order = np.lexsort((ev.imag, ev.real))
        return ev[order]
    ev, vecs = np.linalg.eig(h)
    scale = np.linalg.norm(h, 2)
    resid = np.linalg.norm(h @ vecs - vecs * ev, axis=0)
    if np.any(resid > 1e-8 * scale):
        raise np.linalg.LinAlgError(
            f"eigenpair residual {resid.max():.3g} exceeds 1e-8*||H|| for n={n}, model '{model.label}'"
        )
    order = np.lexsort((ev.imag, ev.real))
    return ev[order], vecs[:, order]


def spectral_area_quadrature(curve: SpectrumCurve) -> float:
    """Signed area of the sampled PBC loop, A = loop integral of E_I dE_R.

    Trapezoid rule for the equivalent integral of E_I dE_R/dk over the
    closed k-grid, with the tangent dE_R/dk obtained by spectral
    differentiation of the samples themselves.  For band-limited symbols
    (every finite-range model) this is exact to rounding, unlike the
    chord-polygon shoelace whose error decays only quadratically.
    """
    e = curve.e_samples
    n = len(e)
    modes = np.fft.fftfreq(n, d=1.0 / n)
    der = np.fft.ifft(1j * modes * np.fft.fft(e.real)).real
    return float(np.sum(e.imag * der) * (2.0 * np.pi / n))


def spectral_area_closed_form(model: LatticeModel) -> float:
    """Exact enclosed area A = -pi * sum_r r |t_r|^2."""
    return float(-np.pi * sum(r * abs(t) ** 2 for r, t in model.hoppings.items()))


def _refine_max(km, ym_prev, y0, ym_next, dk):
    """Quadratic vertex through three consecutive samples around a grid max."""
    denom = ym_prev - 2.0 * y0 + ym_next
    if denom >= 0.0:
        return km, y0
    delta = 0.5 * (ym_prev - ym_next) / denom * dk
    value = y0 - (ym_prev - ym_next) ** 2 / (8.0 * denom)
    k_ref = km + delta
    k_ref = (k_ref + np.pi) % (2.0 * np.pi) - np.pi
    return k_ref, value


def locate_max_imag(curve: SpectrumCurve) -> MaxImagResult:
    """Wavenumber maximizing E_I(k), refined by 3-point quadratic interpolation.

    Ties within 1e-9 of the maximum are flagged as degenerate and broken by
    the smallest k.  A flat E_I (Hermitian model) counts as an all-tie:
    k_m = -pi with the degenerate flag raised.
    """
    ei = curve.e_samples.imag
    k = curve.k_samples
    dk = 2.0 * np.pi / curve.n_k
    span = ei.max() - ei.min()
    if span <= 1e-12 * max(1.0, np.abs(ei).max()):
        return MaxImagResult(float(k[0]), float(ei.max()), True)
    prev = np.roll(ei, 1)
    nxt = np.roll(ei, -1)
    cand = np.flatnonzero((ei >= prev) & (ei >= nxt))
    peaks = []
    for j in cand:
        km, val = _refine_max(k[j], prev[j], ei[j], nxt[j], dk)
        peaks.append((km, val))
    best = max(val for _, val in peaks)
    tied = [(km, val) for km, val in peaks if best - val <= 1e-9]
    tied.sort()
    degenerate = len(tied) > 1
    k_m, lambda_max = tied[0][0], best
    return MaxImagResult(float(k_m), float(lambda_max), degenerate)


def drift_velocity(model: LatticeModel, n_k: int = DEFAULT_NK) -> float:
    """dE_R/dk at the maximizing wavenumber k_m (analytic derivative).

    Warns when the maximum of E_I is degenerate; the value is then the one
    at the tie-broken k_m and carries no preferred-drift meaning.
    """
    loc = locate_max_imag(sample_pbc_spectrum(model, n_k))
    if loc.degenerate:
        warnings.warn("degenerate maximum of E_I(k); drift velocity is ill-defined")
    return float(dispersion_derivative(model, loc.k_m).real)


def predicted_acceleration(model: LatticeModel) -> float:
    """Early-time center-of-mass acceleration a = (2/pi) * A."""
    return 2.0 / np.pi * spectral_area_closed_form(model)


def summarize(model: LatticeModel, n_k: int = DEFAULT_NK,
              area_tolerance: float | None = None) -> SpectralSummary:
    """Compute area, k_m, lambda_max, v_m, accel and the skin-effect flag."""
    if area_tolerance is None:
        area_tolerance = 1e-6 * model.max_amplitude ** 2
    if area_tolerance <= 0:
        raise ValueError("area_tolerance must be positive")
    curve = sample_pbc_spectrum(model, n_k)
    area = spectral_area_closed_form(model)
    loc = locate_max_imag(curve)
    v_m = float(dispersion_derivative(model, loc.k_m).real)
    return SpectralSummary(
        area=area,
        k_m=loc.k_m,
        lambda_max=loc.lambda_max,
        v_m=v_m,
        accel=2.0 / np.pi * area,
        nhse_flag=bool(abs(area) > area_tolerance),
        degenerate_max=loc.degenerate,
    )
