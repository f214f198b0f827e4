"""Command-line front door: spectrum, evolve, walk, and report subcommands.

Each subcommand reads a JSON experiment config, runs the corresponding
pipeline, and writes CSV/JSON data plus an SVG figure into the output
directory.  Exit codes: 0 success, 1 config/validation error, 2 numerical
failure, 3 report-threshold breach.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace

import numpy as np

from .analysis import fit_drift, fit_parabola
from .dynamics import (
    ComTrajectory,
    bloch_propagate,
    com_trajectory,
    default_window,
    early_time_window,
    flat_amplitude,
)
from .io import (
    ConfigError,
    ExperimentConfig,
    fmt,
    heatmap_svg,
    line_plot_svg,
    load_config,
    write_csv,
    write_json,
)
from .model import (
    LatticeModel,
    obc_spectrum,
    predicted_acceleration,
    sample_pbc_spectrum,
    spectral_area_quadrature,
    summarize,
)
from .walk import (
    predicted_walk_acceleration,
    single_pulse_initial,
    two_pulse_initial,
    walk_com,
    walk_run,
    walk_window,
)

_REPORT_THRESHOLD = 0.05


def _rel_err(a_fit: float, a_pred: float) -> float:
    """Relative mismatch, falling back to absolute when the prediction is ~0."""
    if abs(a_pred) > 1e-9:
        return abs(a_fit - a_pred) / abs(a_pred)
    return abs(a_fit - a_pred)


def run_spectrum(cfg: ExperimentConfig, out: str):
    """PBC curve, OBC eigenvalues, summary, and the complex-plane figure."""
    curve = sample_pbc_spectrum(cfg.model, cfg.n_k)
    summary = summarize(cfg.model, cfg.n_k)
    obc = obc_spectrum(cfg.model, cfg.obc_sites)
    write_csv(os.path.join(out, "pbc.csv"), "k,Re_E,Im_E",
              ((k, e.real, e.imag) for k, e in zip(curve.k_samples, curve.e_samples)))
    write_csv(os.path.join(out, "obc.csv"), "index,Re_E,Im_E",
              ((i, e.real, e.imag) for i, e in enumerate(obc)))
    doc = asdict(summary)
    doc["area_quadrature"] = spectral_area_quadrature(curve)
    write_json(os.path.join(out, "summary.json"), doc)
    loop_x = np.append(curve.e_samples.real, curve.e_samples.real[0])
    loop_y = np.append(curve.e_samples.imag, curve.e_samples.imag[0])
    line_plot_svg(
        os.path.join(out, "spectrum.svg"),
        curves=[(loop_x, loop_y, "#0077bb")],
        scatters=[(obc.real, obc.imag, "#cc3311")],
        title=f"PBC loop and OBC eigenvalues: {cfg.model.label or 'model'}",
        xlabel="Re E", ylabel="Im E",
    )


def run_evolve(cfg: ExperimentConfig, out: str):
    """Intensity map, center-of-mass trajectory, parabola/drift fits, figure."""
    model = cfg.model
    amp = flat_amplitude(cfg.n_k)
    t_star = min(early_time_window(model, cfg.n_k), cfg.t_final)
    coarse = np.linspace(0.0, cfg.t_final, cfg.n_times)
    times = np.unique(np.concatenate([np.linspace(0.0, t_star, 25), coarse]))
    window = None
    if cfg.window_halfwidth is not None:
        window = (-cfg.window_halfwidth, cfg.window_halfwidth)
    map_window = window or default_window(model, cfg.t_final)

    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        traj = com_trajectory(model, amp, times, engine=cfg.engine,
                              window=window, dt=cfg.dt)
        states = [bloch_propagate(model, amp, float(t), map_window) for t in coarse]
    contaminated = [w for w in rec if "edge" in str(w.message)]
    if contaminated:
        raise FloatingPointError(
            f"trajectory window contaminated: {contaminated[0].message}")

    sites = states[0].sites
    write_csv(os.path.join(out, "intensity_map.csv"), "t,n,abs_psi",
              ((t, int(n), a)
               for t, st in zip(coarse, states)
               for n, a in zip(sites, np.abs(st.amplitudes))))
    write_csv(os.path.join(out, "trajectory.csv"), "t,n_cm,engine",
              ((t, c, cfg.engine) for t, c in zip(traj.times, traj.com)))

    summary = summarize(model, cfg.n_k)
    fr = fit_parabola(traj, window=(0.0, t_star), include_cubic=True)
    a_pred = predicted_acceleration(model)
    v_fit = None
    try:
        v_fit = fit_drift(traj, (0.75 * cfg.t_final, cfg.t_final)).coefficient
    except ValueError:
        pass
    write_json(os.path.join(out, "fit.json"), {
        "a_fit": fr.accel,
        "a_predicted": a_pred,
        "rel_err": _rel_err(fr.accel, a_pred),
        "t_star": t_star,
        "v_fit": v_fit,
        "v_m": summary.v_m,
    })

    grid = np.stack([np.abs(st.amplitudes) for st in states], axis=1)
    heatmap_svg(
        os.path.join(out, "evolution.svg"), grid,
        extent=(0.0, cfg.t_final, float(sites[0]), float(sites[-1])),
        title=f"|psi_n(t)| (normalized): {model.label or 'model'}",
        xlabel="t", ylabel="n",
        inset=(traj.times, traj.com, "n_cm(t)"),
    )


def run_walk(cfg: ExperimentConfig, out: str):
    """Walk intensity map, trajectory, parabola fit, and overlay figure."""
    p = cfg.walk_params()
    halfwidth = cfg.window_halfwidth or (cfg.steps + 10)
    window = (-halfwidth, halfwidth)
    if cfg.protocol == "two_pulse":
        initial = two_pulse_initial(p, window)
    else:
        initial = single_pulse_initial(window)
    states = walk_run(p, initial, cfg.steps)
    sites = initial.sites
    write_csv(os.path.join(out, "walk_map.csv"), "m,n,intensity_u,intensity_v",
              ((st.m, int(n), iu, iv)
               for st in states
               for n, iu, iv in zip(sites, np.abs(st.u) ** 2, np.abs(st.v) ** 2)))
    ms = np.arange(cfg.steps + 1, dtype=float)
    ncm = np.array([walk_com(st) for st in states])
    write_csv(os.path.join(out, "walk_trajectory.csv"), "m,n_cm",
              ((int(m), c) for m, c in zip(ms, ncm)))

    if cfg.fit_window is not None:
        m_fit = min(cfg.fit_window, float(cfg.steps))
        include_linear = cfg.protocol == "single_pulse"
    elif cfg.protocol == "two_pulse":
        m_fit, include_linear = min(15.0, float(cfg.steps)), False
    else:
        # the single-pulse protocol rides a small residual drift; co-fit it
        # over a slightly longer window where the parabola dominates
        m_fit, include_linear = min(20.0, float(cfg.steps)), True
    traj = ComTrajectory(ms, ncm, engine="walk", model_label=cfg.protocol)
    fr = fit_parabola(traj, window=(0.0, m_fit), include_linear=include_linear)
    a_pred = predicted_walk_acceleration(p)
    write_json(os.path.join(out, "walk_fit.json"), {
        "a_fit": fr.accel,
        "a_predicted": a_pred,
        "rel_err": _rel_err(fr.accel, a_pred),
        "fit_window": [0.0, m_fit],
    })

    dense = np.linspace(0.0, cfg.steps, 200)
    line_plot_svg(
        os.path.join(out, "walk.svg"),
        curves=[(ms, ncm, "#0077bb"),
                (dense, 0.5 * a_pred * dense ** 2, "#cc3311", True)],
        title=f"walk n_cm(m), {cfg.protocol}, beta={p.beta:.4g}, h={p.h:.4g}",
        xlabel="m", ylabel="n_cm",
    )


def _draw_models(family: str, n_models: int, seed: int) -> list[LatticeModel]:
    """Seeded random models, drawn up front so threading cannot reorder them."""
    rng = np.random.default_rng(seed)

    def disk():
        while True:
            z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            if abs(z) <= 1.0:
                return z

    models = []
    while len(models) < n_models:
        if family == "reciprocal":
            hop = {}
            for r in (1, 2, 3):
                hop[r] = hop[-r] = disk()
            models.append(LatticeModel(hop, label=f"reciprocal-{len(models):02d}"))
        else:
            hop = {r: disk() for r in (-3, -2, -1, 1, 2, 3)}
            m = LatticeModel(hop, label=f"nhse-{len(models):02d}")
            if abs(predicted_acceleration(m)) * np.pi / 2.0 > 0.3:
                models.append(m)
    return models


def _report_row(item):
    model_id, model, n_k = item
    try:
        a_pred = predicted_acceleration(model)
        area = a_pred * np.pi / 2.0
        t_star = early_time_window(model, n_k)
        if not np.isfinite(t_star):
            t_star = 1.0
        times = np.linspace(0.0, t_star, 25)
        traj = com_trajectory(model, flat_amplitude(n_k), times,
                              engine="spectral_formula")
        a_fit = fit_parabola(traj, include_cubic=True).accel
        return {"model_id": model_id, "area": area, "a_predicted": a_pred,
                "a_fit": a_fit, "rel_err": _rel_err(a_fit, a_pred), "error": ""}
    except Exception as exc:  # per-model failures recorded, run continues
        return {"model_id": model_id, "area": np.nan, "a_predicted": np.nan,
                "a_fit": np.nan, "rel_err": np.nan, "error": str(exc)}


def _worker_count() -> int:
    env = os.environ.get("NHSE_LAB_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError("NHSE_LAB_THREADS must be an integer") from exc
        if n < 1:
            raise ConfigError("NHSE_LAB_THREADS must be >= 1")
        return n
    return min(8, os.cpu_count() or 1)


def run_accel_report(cfg: ExperimentConfig, out: str) -> int:
    """Batch a = (2/pi) A validation over seeded random models.

    Returns 3 (threshold breach) if any model misses 5% or fails outright,
    else 0.  Output bytes depend only on config + seed: models are drawn in
    the main thread and rows merged by model_id.
    """
    models = _draw_models(cfg.family, cfg.n_models, cfg.seed)
    items = [(i, m, cfg.n_k) for i, m in enumerate(models)]
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        rows = list(pool.map(_report_row, items))
    rows.sort(key=lambda r: r["model_id"])
    write_csv(os.path.join(out, "report.csv"), "model_id,area,a_predicted,a_fit,rel_err",
              ((r["model_id"], r["area"], r["a_predicted"], r["a_fit"], r["rel_err"])
               for r in rows))
    failures = [{"model_id": r["model_id"], "error": r["error"]} for r in rows if r["error"]]
    rel = [r["rel_err"] for r in rows if not r["error"]]
    max_rel = max(rel) if rel else np.nan
    breach = bool(failures) or (not rel) or any(not np.isfinite(e) or e > _REPORT_THRESHOLD for e in rel)
    write_json(os.path.join(out, "report_summary.json"), {
        "family": cfg.family,
        "seed": cfg.seed,
        "n_models": cfg.n_models,
        "threshold": _REPORT_THRESHOLD,
        "max_rel_err": float(max_rel) if np.isfinite(max_rel) else None,
        "failures": failures,
        "breach": breach,
    })
    return 3 if breach else 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


_KIND_BY_CMD = {"spectrum": "spectrum", "evolve": "evolve",
                "walk": "walk", "report": "accel_report"}


def _build_parser() -> _Parser:
    parser = _Parser(prog="nhse-lab",
                     description="Non-Hermitian lattice spectra, dynamics, and quantum walks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("spectrum", "PBC/OBC spectra, enclosed area, and summary"),
        ("evolve", "wave-packet evolution and self-acceleration fit"),
        ("walk", "discrete-time quantum walk trajectory and fit"),
        ("report", "batch acceleration-law validation over random models"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--nk", type=int, default=None, help="k-grid override")
        sp.add_argument("--steps", type=int, default=None,
                        help="walk steps / evolve sample-count override")
        sp.add_argument("--seed", type=int, default=None, help="report seed override")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.nk is not None:
        if args.nk < 16 or args.nk % 2:
            raise ConfigError("--nk must be even and >= 16")
        cfg = replace(cfg, n_k=args.nk)
    if args.steps is not None:
        if args.steps < 1:
            raise ConfigError("--steps must be >= 1")
        if cfg.kind == "walk":
            cfg = replace(cfg, steps=args.steps)
        elif cfg.kind == "evolve":
            cfg = replace(cfg, n_times=max(3, args.steps))
        else:
            raise ConfigError(f"--steps does not apply to kind '{cfg.kind}'")
    if args.seed is not None:
        if cfg.kind != "accel_report":
            raise ConfigError("--seed only applies to report runs")
        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        expected = _KIND_BY_CMD[args.command]
        if cfg.kind != expected:
            raise ConfigError(
                f"config kind '{cfg.kind}' does not match subcommand '{args.command}'")
        cfg = _apply_overrides(cfg, args)
        os.makedirs(args.out, exist_ok=True)
        if args.command == "report":
            return run_accel_report(cfg, args.out)
        {"spectrum": run_spectrum, "evolve": run_evolve, "walk": run_walk}[args.command](cfg, args.out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError,
            OverflowError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
