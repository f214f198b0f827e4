"""Experiment configs, CSV/JSON writers, and dependency-free SVG plots.

Configs are versioned JSON (schema: 1) parsed fail-closed: unknown keys are
rejected so a typo in a physics parameter cannot silently fall back to a
default.  CSV values carry 17 significant digits, enough to round-trip a
double, so downstream fits are not quantization-limited.  Plots are
hand-rolled SVG: polylines, circles, and rect heat maps only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import DEFAULT_NK, LatticeModel
from .walk import WalkParams


class ConfigError(ValueError):
    """Invalid experiment configuration or model file."""


def fmt(x) -> str:
    """Full-precision float formatting for CSV cells."""
    return f"{float(x):.17g}"


def model_to_dict(model: LatticeModel) -> dict:
    return {
        "label": model.label,
        "hoppings": [
            {"r": int(r), "re": float(t.real), "im": float(t.imag)}
            for r, t in sorted(model.hoppings.items())
        ],
    }


def model_from_dict(d) -> LatticeModel:
    if not isinstance(d, dict):
        raise ConfigError("model must be an object")
    unknown = set(d) - {"label", "hoppings"}
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    if "hoppings" not in d:
        raise ConfigError("model needs a 'hoppings' list")
    hop = {}
    for item in d["hoppings"]:
        if not isinstance(item, dict) or set(item) - {"r", "re", "im"}:
            raise ConfigError("each hopping must be an object with keys r, re, im")
        try:
            r = int(item["r"])
            t = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad hopping entry {item}") from exc
        if r in hop:
            raise ConfigError(f"duplicate hopping range r={r}")
        hop[r] = t
    label = d.get("label", "")
    if not isinstance(label, str):
        raise ConfigError("model label must be a string")
    try:
        return LatticeModel(hop, label=label)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a kind plus the knobs that kind accepts.

    Unused knobs stay None; parse_config materializes kind defaults so that
    parse(serialize(cfg)) == cfg.
    """

    kind: str
    model: LatticeModel | None = None
    beta: float | None = None
    h: float | None = None
    protocol: str | None = None
    steps: int | None = None
    n_k: int = DEFAULT_NK
    obc_sites: int | None = None
    dt: float | None = None
    t_final: float | None = None
    n_times: int | None = None
    engine: str | None = None
    window_halfwidth: int | None = None
    fit_window: float | None = None
    n_models: int | None = None
    family: str | None = None
    seed: int | None = None

    def walk_params(self) -> WalkParams:
        return WalkParams(self.beta, self.h)


_KINDS = ("spectrum", "evolve", "walk", "accel_report")

_ALLOWED = {
    "spectrum": {"model", "n_k", "obc_sites"},
    "evolve": {"model", "n_k", "dt", "t_final", "n_times", "engine", "window_halfwidth"},
    "walk": {"beta", "h", "protocol", "steps", "window_halfwidth", "fit_window"},
    "accel_report": {"n_models", "family", "seed", "n_k"},
}

_REQUIRED = {
    "spectrum": {"model"},
    "evolve": {"model", "t_final"},
    "walk": {"beta", "h", "protocol", "steps"},
    "accel_report": {"seed"},
}


def _need(d, key, kinds, cast, check=None, msg=""):
    v = d.get(key)
    if v is None:
        return None
    try:
        v = cast(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{key}' must be {cast.__name__}") from exc
    if check is not None and not check(v):
        raise ConfigError(f"field '{key}' out of range: {msg}")
    return v


def parse_config(data) -> ExperimentConfig:
    """Validate a config dict (already JSON-decoded) into an ExperimentConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema") != 1:
        raise ConfigError("config needs 'schema': 1")
    kind = data.get("kind")
    if kind not in _KINDS:
        raise ConfigError(f"kind must be one of {_KINDS}")
    allowed = _ALLOWED[kind] | {"schema", "kind"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown fields for kind '{kind}': {sorted(unknown)}")
    missing = _REQUIRED[kind] - set(data)
    if missing:
        raise ConfigError(f"kind '{kind}' requires fields: {sorted(missing)}")

    model = model_from_dict(data["model"]) if "model" in data else None
    n_k = _need(data, "n_k", kind, int, lambda v: v >= 16 and v % 2 == 0,
                "even and >= 16") or DEFAULT_NK
    cfg = dict(kind=kind, model=model, n_k=n_k)
    if kind == "spectrum":
        cfg["obc_sites"] = _need(data, "obc_sites", kind, int, lambda v: v >= 2, ">= 2") or 60
    elif kind == "evolve":
        cfg["t_final"] = _need(data, "t_final", kind, float, lambda v: v > 0, "> 0")
        cfg["n_times"] = _need(data, "n_times", kind, int, lambda v: v >= 3, ">= 3") or 25
        cfg["dt"] = _need(data, "dt", kind, float, lambda v: v > 0, "> 0") or 0.01
        engine = data.get("engine", "bloch")
        if engine not in ("bloch", "rk4", "spectral_formula"):
            raise ConfigError("engine must be bloch, rk4, or spectral_formula")
        cfg["engine"] = engine
        cfg["window_halfwidth"] = _need(data, "window_halfwidth", kind, int,
                                        lambda v: v >= 1, ">= 1")
    elif kind == "walk":
        beta = _need(data, "beta", kind, float, lambda v: 0 < v < np.pi,
                     "strictly between 0 and pi")
        hval = _need(data, "h", kind, float, np.isfinite, "finite")
        protocol = data.get("protocol")
        if protocol not in ("two_pulse", "single_pulse"):
            raise ConfigError("protocol must be 'two_pulse' or 'single_pulse'")
        steps = _need(data, "steps", kind, int, lambda v: v >= 1, ">= 1")
        cfg.update(beta=beta, h=hval, protocol=protocol, steps=steps)
        cfg["window_halfwidth"] = _need(data, "window_halfwidth", kind, int,
                                        lambda v: v >= steps, ">= steps (light cone)")
        cfg["fit_window"] = _need(data, "fit_window", kind, float,
                                  lambda v: v >= 3, ">= 3 steps")
    else:
        cfg["seed"] = _need(data, "seed", kind, int, lambda v: v >= 0, ">= 0")
        cfg["n_models"] = _need(data, "n_models", kind, int, lambda v: v >= 1, ">= 1") or 20
        family = data.get("family", "nhse")
        if family not in ("nhse", "reciprocal"):
            raise ConfigError("family must be 'nhse' or 'reciprocal'")
        cfg["family"] = family
    return ExperimentConfig(**cfg)


def serialize_config(cfg: ExperimentConfig) -> dict:
    """JSON-ready dict; parse_config(serialize_config(cfg)) == cfg."""
    out: dict = {"schema": 1, "kind": cfg.kind}
    for key in sorted(_ALLOWED[cfg.kind]):
        v = getattr(cfg, key)
        if v is None:
            continue
        out[key] = model_to_dict(v) if key == "model" else v
    return out


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def write_csv(path, header: str, rows):
    """Write rows of numbers (or strings) under a one-line header."""
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else
                              str(c) if isinstance(c, (int, np.integer)) else fmt(c)
                              for c in row) + "\n")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_state_csv(path, state):
    """Snapshot of a WaveState: n, Re psi, Im psi, |psi|^2 (normalized form)."""
    rows = [
        (int(n), a.real, a.imag, abs(a) ** 2)
        for n, a in zip(state.sites, state.amplitudes)
    ]
    write_csv(path, "n,Re_psi,Im_psi,abs2", rows)


# ---------------------------------------------------------------- SVG plots

_W, _H = 720, 520
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return raw


def _axes_svg(x0, x1, y0, y1, title, xlabel, ylabel):
    """Frame, ticks, and labels; returns (svg fragments, x->px, y->px)."""
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * pw

    def py(y):
        return _MT + (y1 - y) / (y1 - y0) * ph

    parts = [
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<text x="{_W / 2:.0f}" y="{_H - 12}" text-anchor="middle" font-size="13">{xlabel}</text>',
        f'<text x="18" y="{_H / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {_H / 2:.0f})">{ylabel}</text>',
    ]
    for t in _ticks(x0, x1):
        parts.append(f'<line x1="{px(t):.1f}" y1="{_MT + ph}" x2="{px(t):.1f}" '
                     f'y2="{_MT + ph + 5}" stroke="#444"/>')
        parts.append(f'<text x="{px(t):.1f}" y="{_MT + ph + 20}" text-anchor="middle" '
                     f'font-size="11">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        parts.append(f'<line x1="{_ML - 5}" y1="{py(t):.1f}" x2="{_ML}" '
                     f'y2="{py(t):.1f}" stroke="#444"/>')
        parts.append(f'<text x="{_ML - 8}" y="{py(t):.1f}" text-anchor="end" '
                     f'dominant-baseline="middle" font-size="11">{t:.3g}</text>')
    return parts, px, py


def _polyline(xs, ys, px, py, color, dashed=False, width=1.5):
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    dash = ' stroke-dasharray="6 4"' if dashed else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>'


def _save_svg(path, parts, width=_W, height=_H):
    body = "\n".join(parts)
    with open(path, "w") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n{body}\n</svg>\n'
        )


def line_plot_svg(path, curves, scatters=(), title="", xlabel="", ylabel=""):
    """Polyline-and-scatter plot.

    curves: iterable of (x, y, color, dashed); scatters: (x, y, color).
    """
    xs_all = [np.asarray(c[0], dtype=float) for c in curves] + \
             [np.asarray(s[0], dtype=float) for s in scatters]
    ys_all = [np.asarray(c[1], dtype=float) for c in curves] + \
             [np.asarray(s[1], dtype=float) for s in scatters]
    x0 = min(a.min() for a in xs_all)
    x1 = max(a.max() for a in xs_all)
    y0 = min(a.min() for a in ys_all)
    y1 = max(a.max() for a in ys_all)
    padx, pady = 0.05 * (x1 - x0 or 1.0), 0.05 * (y1 - y0 or 1.0)
    parts, px, py = _axes_svg(x0 - padx, x1 + padx, y0 - pady, y1 + pady,
                              title, xlabel, ylabel)
    for c in curves:
        x, y, color = np.asarray(c[0], float), np.asarray(c[1], float), c[2]
        dashed = len(c) > 3 and c[3]
        parts.append(_polyline(x, y, px, py, color, dashed))
    for sx, sy, color in scatters:
        for x, y in zip(np.asarray(sx, float), np.asarray(sy, float)):
            parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" '
                         f'fill="none" stroke="{color}" stroke-width="1.2"/>')
    _save_svg(path, parts)


def _heat_color(v):
    """0..1 -> dark blue to yellow, three-anchor gradient."""
    v = min(max(float(v), 0.0), 1.0)
    anchors = [(0.0, (15, 15, 70)), (0.5, (190, 60, 100)), (1.0, (252, 235, 90))]
    for (va, ca), (vb, cb) in zip(anchors, anchors[1:]):
        if v <= vb:
            s = (v - va) / (vb - va)
            rgb = tuple(int(round(a + s * (b - a))) for a, b in zip(ca, cb))
            return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"
    return "rgb(252,235,90)"


def _downsample(grid, limit=200):
    """Block-average rows/cols down to at most limit each."""
    g = np.asarray(grid, dtype=float)
    for axis in (0, 1):
        n = g.shape[axis]
        if n > limit:
            factor = int(np.ceil(n / limit))
            pad = (-n) % factor
            if pad:
                idx = [slice(None)] * 2
                idx[axis] = slice(n - 1, n)
                g = np.concatenate([g, np.repeat(g[tuple(idx)], pad, axis=axis)], axis=axis)
            shape = list(g.shape)
            shape[axis] = g.shape[axis] // factor
            g = g.reshape(shape[:axis] + [shape[axis], factor] + shape[axis + 1:]).mean(axis=axis + 1)
    return g


def heatmap_svg(path, grid, extent, title="", xlabel="", ylabel="", inset=None):
    """Heat map of grid[row, col] with rows spanning extent y and cols x.

    extent = (x0, x1, y0, y1); row 0 sits at y0.  inset, if given, is an
    (x, y, label) trajectory drawn in a small panel at the top right.
    """
    g = _downsample(grid)
    vmax = g.max() or 1.0
    x0, x1, y0, y1 = extent
    parts, px, py = _axes_svg(x0, x1, y0, y1, title, xlabel, ylabel)
    nrow, ncol = g.shape
    cw = (px(x1) - px(x0)) / ncol
    ch = (py(y0) - py(y1)) / nrow
    for i in range(nrow):
        ylo = y0 + (y1 - y0) * (i + 1) / nrow
        for j in range(ncol):
            v = g[i, j] / vmax
            if v < 0.004:
                continue
            xlo = x0 + (x1 - x0) * j / ncol
            parts.append(f'<rect x="{px(xlo):.2f}" y="{py(ylo):.2f}" width="{cw + 0.5:.2f}" '
                         f'height="{ch + 0.5:.2f}" fill="{_heat_color(v)}"/>')
    if inset is not None:
        ix, iy, ilabel = inset
        ix, iy = np.asarray(ix, float), np.asarray(iy, float)
        ox, oy, iw, ih = _W - _MR - 230, _MT + 14, 210, 130
        parts.append(f'<rect x="{ox}" y="{oy}" width="{iw}" height="{ih}" '
                     f'fill="white" fill-opacity="0.85" stroke="#444"/>')
        ylo, yhi = iy.min(), iy.max()
        if yhi - ylo < 1e-12:
            ylo, yhi = ylo - 1.0, yhi + 1.0

        def ipx(x):
            return ox + 8 + (x - ix.min()) / (ix.max() - ix.min() or 1.0) * (iw - 16)

        def ipy(y):
            return oy + ih - 10 - (y - ylo) / (yhi - ylo) * (ih - 24)

        parts.append(_polyline(ix, iy, ipx, ipy, "#cc3311", width=1.8))
        parts.append(f'<text x="{ox + iw / 2:.0f}" y="{oy + 12}" text-anchor="middle" '
                     f'font-size="11">{ilabel}</text>')
    _save_svg(path, parts)
