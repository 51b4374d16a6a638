"""Run a configured experiment and write CSV series plus a JSON summary."""
from __future__ import annotations

import json
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..bec_analytic import alphas_from_points, analytic_series, revival_time
from ..classical import (HistogramEstimator, KdeEstimator, bec_exact_flow, crle_series,
                         sample_initial)
from ..dynamics import Propagator, diagnostics, entropy_series
from ..models import (BecParams, DickeParams, PolynomialHamiltonian, build_bec, build_dicke,
                      classical_counterpart, dicke_parity, initial_state, rescale_initial,
                      total_number, weyl_quantize)
from ..hilbert import CompositeSpace, FockSpace
from ..shorttime import correlation_coefficient, quad_coefficient_from_series
from ..states import as_points, bosonic_coherent, husimi_initial_density, product_state
from .averaging import (LEAKAGE_BOUND, amplitudes_leakage, check_times,
                        dicke_mean_entanglement)
from .config import ExperimentConfig
from .fitting import fit_saturation

logger = logging.getLogger(__name__)


def write_series_csv(path: Path, times, values):
    """Two-column CSV with a ``t,S`` header and round-trip float precision."""
    with open(path, "w", newline="") as fh:
        fh.write("t,S\n")
        for t, s in zip(times, values):
            fh.write(f"{float(t):.17g},{float(s):.17g}\n")


def read_series_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def _grid(opts: dict, hbar: float = 1.0, g: float | None = None) -> np.ndarray:
    t_max = opts.get("t_max", "revival")
    if t_max == "revival":
        if g is None:
            raise ValueError("t_max 'revival' is only defined for the BEC model")
        t_max = opts.get("revival_fraction", 1.0) * revival_time(g, hbar)
    return np.linspace(0.0, float(t_max), int(opts["n_points"]))


def _estimator(opts: dict | None):
    opts = opts or {}
    if opts.get("kind", "kde") == "histogram":
        return HistogramEstimator(opts["bin_width"])
    return KdeEstimator(opts.get("bandwidth"), opts.get("method", "binned"),
                        max_points=opts.get("max_points", 2000))


def _fit_dict(fit):
    return {"a0": fit.a0, "a1": fit.a1, "rms": fit.rms, "converged": fit.converged,
            "stderr": list(fit.stderr), **fit.diagnostics}


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


def _shorttime(state0, prop, H, u0, v0, hbar, cfg: ExperimentConfig):
    spec = cfg.get("shorttime", {})
    corr = correlation_coefficient(H, u0, v0, hbar)
    c = max(corr.value, 1e-300)
    t_hi = np.sqrt(spec.get("level", 0.01) / c)
    grid = np.linspace(0.0, t_hi, spec.get("n_points", 41))
    series = entropy_series(state0, prop, grid)
    fit = quad_coefficient_from_series(series, t_hi, hbar, spec.get("degree", 4))
    return {"correlation": corr.value, "fit": fit.value, "fit_window": t_hi,
            "relative_gap": abs(fit.value - corr.value) / c, "S0": float(series.values[0])}


def _classical(cfg: ExperimentConfig, params: BecParams, out: Path) -> dict:
    ccfg = cfg.get("classical", {})
    hbar = params.hbar
    coords = cfg.get("initial")
    density = husimi_initial_density(as_points(coords), hbar)
    ens = sample_initial(density, ccfg.get("n_samples", 100000), cfg.seed)
    tc = _grid(ccfg.get("t_grid", cfg.get("t_grid")), hbar, params.g)
    method = ccfg.get("integrator", "exact")
    cr = crle_series(ens, classical_counterpart(params), tc, _estimator(ccfg.get("estimator")),
                     mode=ccfg.get("mode", 1), dt=ccfg.get("dt", 0.01), method=method,
                     exact_flow=bec_exact_flow(params), n_boot=ccfg.get("n_boot", 20),
                     boot_seed=cfg.seed)
    write_series_csv(out / f"bec_hbar{_tag(hbar)}_classical.csv", tc, cr.values)
    alphas = alphas_from_points(*coords, hbar)
    quantum = analytic_series(tc, alphas, params.omega, params.lam, params.g, hbar)
    noise = cr.metadata.get("noise")
    return {"n_samples": ens.n, "bandwidth": cr.metadata["bandwidth"], "integrator": method,
            "initial_purity": cr.metadata["initial_purity"],
            "linf_to_quantum": float(np.max(np.abs(cr.values - quantum))),
            "noise_max": float(np.max(noise)) if noise is not None else None}


def run_bec_member(cfg: ExperimentConfig, hbar: float, n_max: int, out: Path) -> dict:
    p = cfg.get("params")
    params = BecParams(p.get("omega", 1.0), p.get("lam", 0.2), p.get("g", 0.1), hbar, n_max)
    coords = cfg.get("initial")
    psi0, u0, v0 = initial_state(params, coords)
    H = build_bec(params)
    prop = Propagator(H, hbar)
    t = _grid(cfg.get("t_grid"), hbar, params.g)
    series = entropy_series(psi0, prop, t, metadata={"hbar": hbar})
    alphas = alphas_from_points(*coords, hbar)
    analytic = analytic_series(t, alphas, params.omega, params.lam, params.g, hbar)
    tag = _tag(hbar)
    write_series_csv(out / f"bec_hbar{tag}_quantum.csv", t, series.values)
    write_series_csv(out / f"bec_hbar{tag}_analytic.csv", t, analytic)

    amps = prop.propagate(psi0.amplitudes, check_times(t))
    n_tot = np.real(total_number(params.space()).diagonal())
    diag = diagnostics(amps, H, {"number": n_tot})
    leak = amplitudes_leakage(psi0.space, amps)
    diag.update({"max_leakage": leak, "leakage_ok": bool(leak < LEAKAGE_BOUND),
                 "method": prop.method, "dimension": params.space().dim})
    summary = {
        "hbar": hbar, "n_max": n_max, "revival_time": revival_time(params.g, hbar),
        "max_abs_diff_analytic": float(np.max(np.abs(series.values - analytic))),
        "plateau": float(np.mean(series.window(0.25 * t[-1], 0.75 * t[-1]).values)),
        "shorttime": _shorttime(psi0, prop, H, u0, v0, hbar, cfg),
        "diagnostics": diag,
    }
    if cfg.get("classical", {}).get("enabled", False):
        summary["classical"] = _classical(cfg, params, out)
    return summary


def run_dicke_member(cfg: ExperimentConfig, hbar: float, two_j: int, n_max: int, out: Path,
                     threads: int = 1) -> dict:
    p = cfg.get("params")
    params = DickeParams(p.get("epsilon", 1.0), p.get("omega", 1.0), p.get("G", 0.35),
                         p.get("G_prime", 0.35), two_j, hbar, n_max)
    t = _grid(cfg.get("t_grid"))
    r1 = cfg.get("initial")
    mean, members, diag = dicke_mean_entanglement(params, r1, t, m=cfg.get("M", 8),
                                                  spacing=cfg.get("spacing", 1.0),
                                                  threads=threads)
    tag = _tag(two_j / 2)
    write_series_csv(out / f"dicke_J{tag}_mean.csv", t, mean.values)
    if cfg.get("outputs", {}).get("members", False):
        for i, s in enumerate(members):
            write_series_csv(out / f"dicke_J{tag}_member{i}.csv", t, s.values)
    fit = fit_saturation(mean)

    H = build_dicke(params)
    prop = Propagator(H, hbar)
    psi0, u0, v0 = initial_state(params, rescale_initial(r1, two_j))
    amps = prop.propagate(psi0.amplitudes, check_times(t))
    diag.update(diagnostics(amps, H, {"parity": dicke_parity(params)}))
    return {"J": two_j / 2, "two_j": two_j, "n_max": n_max, "fit": _fit_dict(fit),
            "shorttime": _shorttime(psi0, prop, H, u0, v0, hbar, cfg), "diagnostics": diag}


def run_polynomial_member(cfg: ExperimentConfig, hbar: float, n_max: int, out: Path) -> dict:
    H, prop, psi0, u0, v0 = member_system(cfg, hbar, None, n_max)
    t = _grid(cfg.get("t_grid"))
    series = entropy_series(psi0, prop, t)
    write_series_csv(out / f"polynomial_hbar{_tag(hbar)}.csv", t, series.values)
    amps = prop.propagate(psi0.amplitudes, check_times(t))
    diag = diagnostics(amps, H)
    leak = amplitudes_leakage(psi0.space, amps)
    diag.update({"max_leakage": leak, "leakage_ok": bool(leak < LEAKAGE_BOUND)})
    return {"hbar": hbar, "n_max": n_max,
            "shorttime": _shorttime(psi0, prop, H, u0, v0, hbar, cfg), "diagnostics": diag}


def member_system(cfg: ExperimentConfig, hbar: float, two_j, n_max: int):
    """``(H, propagator, psi0, u0, v0)`` for the member's initial product state."""
    p = cfg.get("params")
    coords = cfg.get("initial")
    if cfg.model == "bec":
        params = BecParams(p.get("omega", 1.0), p.get("lam", 0.2), p.get("g", 0.1), hbar, n_max)
        H = build_bec(params)
        psi0, u0, v0 = initial_state(params, coords)
    elif cfg.model == "dicke":
        params = DickeParams(p.get("epsilon", 1.0), p.get("omega", 1.0), p.get("G", 0.35),
                             p.get("G_prime", 0.35), two_j, hbar, n_max)
        H = build_dicke(params)
        psi0, u0, v0 = initial_state(params, rescale_initial(coords, two_j))
    else:
        poly = PolynomialHamiltonian(tuple(tuple(t) for t in p["terms"]))
        space = CompositeSpace(FockSpace(n_max), FockSpace(n_max))
        pa, pb = as_points(coords)
        u0 = bosonic_coherent(pa, hbar, space.factor_a)
        v0 = bosonic_coherent(pb, hbar, space.factor_b)
        psi0 = product_state(u0, v0, space)
        H = weyl_quantize(poly, hbar, space)
    return H, Propagator(H, hbar), psi0, u0, v0


def run_shorttime(cfg: ExperimentConfig, out_dir) -> dict:
    """Short-time coefficients only, one entry per member."""
    rows = []
    for hbar, two_j, n_max in cfg.members():
        H, prop, psi0, u0, v0 = member_system(cfg, hbar, two_j, n_max)
        rows.append({"hbar": hbar, "two_j": two_j, "n_max": n_max,
                     **_shorttime(psi0, prop, H, u0, v0, hbar, cfg)})
    return _write_summary(cfg, out_dir, "shorttime.json", {"members": rows})


def run_classical(cfg: ExperimentConfig, out_dir) -> dict:
    """Classical ensemble series only (BEC)."""
    if cfg.model != "bec":
        raise ValueError("the classical run is only wired for the BEC model")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for hbar, _, n_max in cfg.members():
        p = cfg.get("params")
        params = BecParams(p.get("omega", 1.0), p.get("lam", 0.2), p.get("g", 0.1), hbar, n_max)
        rows.append({"hbar": hbar, **_classical(cfg, params, out)})
    return _write_summary(cfg, out, "classical.json", {"members": rows})


def _write_summary(cfg, out_dir, filename, body):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"name": cfg.name, "model": cfg.model, "config": cfg.raw, "seed": cfg.seed,
               **body, "versions": _versions()}
    with open(out / filename, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
    return summary


def _versions():
    return {"semient": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def run_experiment(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Run every member of ``cfg``; returns the summary also written to ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    members = cfg.members()

    def run(member):
        hbar, two_j, n_max = member
        logger.info("running %s member hbar=%g two_j=%s n_max=%d", cfg.name, hbar, two_j, n_max)
        if cfg.model == "bec":
            return run_bec_member(cfg, hbar, n_max, out)
        if cfg.model == "dicke":
            return run_dicke_member(cfg, hbar, two_j, n_max, out)
        return run_polynomial_member(cfg, hbar, n_max, out)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, members))
    else:
        results = [run(m) for m in members]

    leak_ok = all(r["diagnostics"].get("leakage_ok", True) for r in results)
    summary = {"name": cfg.name, "model": cfg.model, "config": cfg.raw, "seed": cfg.seed,
               "members": results, "leakage_ok": leak_ok, "versions": _versions()}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
    return summary


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")

