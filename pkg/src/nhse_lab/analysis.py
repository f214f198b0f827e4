"""Model-agnostic fitting and plane-geometry utilities.

Parabola and drift fits quantify the early-time acceleration law and the
late-time drift of center-of-mass trajectories; the shoelace area and the
winding/distance helpers provide a geometry oracle for sampled spectral
loops in the complex-energy plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FitReport:
    """Result of a least-squares trajectory fit.

    For parabola fits the coefficient is c in n_cm = c t^2, so the
    acceleration (second derivative) is 2c.  For drift fits the coefficient
    is the slope.  The flagged bit marks fits whose residual exceeds the
    noise floor (residual_rms > 0.1 |coefficient| t_hi^2 for parabolas),
    a hint that the window leaves the parabolic regime.
    """

    coefficient: float
    residual_rms: float
    window: tuple[float, float]
    n_points: int
    flagged: bool = False

    @property
    def accel(self) -> float:
        """Acceleration under the a = 2c convention."""
        return 2.0 * self.coefficient


def _select(traj, window):
    times = np.asarray(traj.times, dtype=float)
    com = np.asarray(traj.com, dtype=float)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    t_lo, t_hi = float(window[0]), float(window[1])
    mask = (times >= t_lo - 1e-12) & (times <= t_hi + 1e-12)
    return times[mask], com[mask], (t_lo, t_hi)


def fit_parabola(traj, window=None, include_cubic: bool = False,
                 include_linear: bool = False) -> FitReport:
    """Least-squares fit of c t^2 to a trajectory; the constant term is always 0.

    The trajectory must start at n_cm(0) = 0 and the early-time law has no
    constant term.  Generic models do carry a genuine t^3 correction;
    include_cubic=True co-fits it and still reports the t^2 coefficient,
    which removes the window-scale bias of the pure fit.  include_linear=True
    likewise co-fits a drift term v t, for protocols with a small residual
    group velocity on top of the parabola.
    """
    t, y, win = _select(traj, window)
    if len(t) < 3:
        raise ValueError("parabola fit needs at least 3 points in the window")
    if abs(np.asarray(traj.com)[0]) > 1e-9:
        raise ValueError("trajectory must start at n_cm = 0")
    if include_cubic or include_linear:
        cols = ([t] if include_linear else []) + [t ** 2] + ([t ** 3] if include_cubic else [])
        design = np.stack(cols, axis=1)
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        c = float(coef[1 if include_linear else 0])
        resid = y - design @ coef
    else:
        t4 = float((t ** 4).sum())
        c = float((y * t ** 2).sum() / t4) if t4 > 0 else 0.0
        resid = y - c * t ** 2
    rms = float(np.sqrt(np.mean(resid ** 2)))
    flagged = rms > 0.1 * abs(c) * win[1] ** 2
    return FitReport(c, rms, win, len(t), flagged)


def fit_drift(traj, window) -> FitReport:
    """Least-squares slope of n_cm over a late-time window.

    The window must start at or past half of the trajectory span, guarding
    against conflating the early parabolic regime with the asymptotic drift.
    """
    times = np.asarray(traj.times, dtype=float)
    if window[0] < 0.5 * times[-1] - 1e-12:
        raise ValueError("drift window must lie in the late-time half of the trajectory")
    t, y, win = _select(traj, window)
    if len(t) < 2:
        raise ValueError("drift fit needs at least 2 points in the window")
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return FitReport(float(slope), rms, win, len(t))


def finite_difference_accel(traj):
    """Central second differences of n_cm(t); endpoints omitted.

    Requires uniformly spaced times; resample first otherwise.  Returns
    (times[1:-1], a_est).
    """
    t = np.asarray(traj.times, dtype=float)
    y = np.asarray(traj.com, dtype=float)
    if len(t) < 3:
        raise ValueError("need at least 3 samples")
    dt = np.diff(t)
    if dt.max() - dt.min() > 1e-9 * dt.max():
        raise ValueError("times must be uniformly spaced")
    h = dt.mean()
    a = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h ** 2
    return t[1:-1], a


def shoelace_area(points) -> float:
    """Signed area of a closed sampled curve, as the loop integral of y dx.

    The trapezoid form 0.5 * sum (y_j + y_{j+1})(x_{j+1} - x_j) over the
    cyclically closed polygon.  For a counterclockwise unit circle this is
    -pi (the y dx orientation), and for self-intersecting loops distinct
    sub-regions contribute with their own signs.
    """
    z = np.asarray(points, dtype=complex)
    if len(z) < 3:
        raise ValueError("need at least 3 points")
    x, y = z.real, z.imag
    dx = np.roll(x, -1) - x
    return float(0.5 * np.sum((y + np.roll(y, -1)) * dx))


def polygon_winding(point: complex, polygon) -> int:
    """Winding number of a closed sampled polygon around a point."""
    z = np.asarray(polygon, dtype=complex) - complex(point)
    ang = np.angle(z)
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    return int(round(d.sum() / (2.0 * np.pi)))


def polyline_distance(point: complex, polygon) -> float:
    """Distance from a point to a closed polygon (point-to-segment minimum)."""
    a = np.asarray(polygon, dtype=complex)
    b = np.roll(a, -1)
    ap = complex(point) - a
    ab = b - a
    denom = np.abs(ab) ** 2
    denom = np.where(denom > 0, denom, 1.0)
    s = np.clip((ap.real * ab.real + ap.imag * ab.imag) / denom, 0.0, 1.0)
    return float(np.abs(complex(point) - (a + s * ab)).min())
