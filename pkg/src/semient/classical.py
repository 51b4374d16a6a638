"""Liouville dynamics by characteristics and the classical reduced linear entropy.

The initial density is sampled, each sample follows Hamilton's equations, and
the marginal purity ``int P_k^2 dq dp`` is estimated from the cloud.  The
entropy is self-normalized, ``S_cl(t) = 1 - purity_k(t) / purity_k(0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.signal import fftconvolve
from scipy.spatial.distance import pdist

from .models import BecParams, ClassicalSystem
from .states import GaussianProductDensity

MIN_SAMPLES = 1000

# fourth-order triple jump (Yoshida 1990)
_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


class IntegrationError(RuntimeError):
    pass


class DegenerateEnsemble(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ClassicalEnsemble:
    samples: np.ndarray          # (N, 4): q1, p1, q2, p2
    hbar: float
    seed: Optional[int] = None
    time: float = 0.0

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    def mode(self, k: int) -> np.ndarray:
        if k not in (1, 2):
            raise ValueError("mode must be 1 or 2")
        return self.samples[:, 2 * (k - 1): 2 * k]


@dataclass(frozen=True)
class CrleSeries:
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)


def sample_initial(density: GaussianProductDensity, n_samples: int, seed: int) -> ClassicalEnsemble:
    """I.i.d. draws from the Husimi product density; bit-identical for a given seed."""
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    rng = np.random.default_rng(seed)
    centre = density.center_vector()
    x = centre + np.sqrt(density.variance) * rng.standard_normal((n_samples, centre.size))
    return ClassicalEnsemble(x, density.hbar, seed)


# -- flows --------------------------------------------------------------------

def bec_exact_flow(params: BecParams):
    """Closed-form flow of the BEC counterpart.

    The total action generates a common rotation at ``omega + g (2 I + 3 hbar)``
    and commutes with the hopping term, which mixes the modes at rate ``lam``.
    """
    def flow(x, t):
        z1 = x[:, 0] + 1j * x[:, 1]
        z2 = x[:, 2] + 1j * x[:, 3]
        action = 0.5 * (np.abs(z1) ** 2 + np.abs(z2) ** 2)
        phase = np.exp(-1j * (params.omega + params.g * (2 * action + 3 * params.hbar)) * t)
        c, s = np.cos(params.lam * t), np.sin(params.lam * t)
        w1 = phase * (c * z1 - 1j * s * z2)
        w2 = phase * (c * z2 - 1j * s * z1)
        return np.stack([w1.real, w1.imag, w2.real, w2.imag], axis=1)
    return flow


def _midpoint_step(system: ClassicalSystem, x, h, tol=1e-14, max_iter=60):
    y = x + h * system.vector_field(x)
    for _ in range(max_iter):
        y_new = x + h * system.vector_field(0.5 * (x + y))
        delta = np.max(np.abs(y_new - y))
        y = y_new
        if delta <= tol * max(1.0, np.max(np.abs(y))):
            return y
    raise IntegrationError(f"implicit midpoint did not converge (step {h:g}, last change {delta:.3g})")


def symplectic_step(system: ClassicalSystem, x, h):
    """One fourth-order symplectic step (triple-jump of implicit midpoint)."""
    for w in _YOSHIDA:
        x = _midpoint_step(system, x, w * h)
    return x


def rk4_step(system: ClassicalSystem, x, h):
    f = system.vector_field
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def iter_flow(x0: np.ndarray, system: ClassicalSystem, t_grid, dt: float = 0.01,
              method: str = "symplectic", exact_flow=None) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, x(t))`` at each grid time, integrating from t = 0."""
    t_grid = np.asarray(t_grid, dtype=float)
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    if method == "exact":
        if exact_flow is None:
            raise ValueError("method='exact' needs an exact flow")
        for t in t_grid:
            yield float(t), exact_flow(x0, t)
        return
    step = {"symplectic": symplectic_step, "rk4": rk4_step}.get(method)
    if step is None:
        raise ValueError(f"unknown integrator {method!r}")
    x, t_now = x0.copy(), 0.0
    for t in t_grid:
        span = t - t_now
        if span < 0:
            raise ValueError("t_grid must be non-negative and increasing")
        n_steps = int(np.ceil(span / dt - 1e-9))
        h = span / n_steps if n_steps else 0.0
        for _ in range(n_steps):
            x = step(system, x, h)
        if not np.all(np.isfinite(x)):
            bad = np.flatnonzero(~np.all(np.isfinite(x), axis=1))
            raise IntegrationError(f"non-finite state for samples {bad[:10].tolist()} at t={t:g}")
        t_now = t
        yield float(t), x


def trajectory(x0, system: ClassicalSystem, t_grid, dt: float = 0.01, method="symplectic"):
    """Single orbit sampled on ``t_grid``; returns an array ``(len(t_grid), 4)``."""
    return np.array([x[0] for _, x in iter_flow(x0, system, t_grid, dt, method)])


def reference_trajectory(x0, system: ClassicalSystem, t_grid, rtol=1e-12):
    """High-order adaptive solution used as an independent check of the integrators."""
    sol = solve_ivp(lambda t, y: system.vector_field(y), (0.0, float(np.max(t_grid))),
                    np.asarray(x0, dtype=float), method="DOP853", t_eval=t_grid,
                    rtol=rtol, atol=rtol)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y.T


def propagate(ensemble: ClassicalEnsemble, system: ClassicalSystem, t_grid, dt: float = 0.01,
              method: str = "symplectic", exact_flow=None) -> list[ClassicalEnsemble]:
    return [ClassicalEnsemble(x, ensemble.hbar, ensemble.seed, t)
            for t, x in iter_flow(ensemble.samples, system, t_grid, dt, method, exact_flow)]


def energy_drift(system: ClassicalSystem, x0, xt) -> float:
    """Largest per-sample relative energy change."""
    e0 = system.energy(x0)
    et = system.energy(xt)
    scale = np.maximum(np.abs(e0), 1e-12)
    return float(np.max(np.abs(et - e0) / scale))


# -- purity estimators ----------------------------------------------------------

def silverman_bandwidth(xy: np.ndarray) -> float:
    """Isotropic 2-D Silverman rule, ``sigma * n^(-1/6)``."""
    sigma = np.sqrt(0.5 * (np.var(xy[:, 0]) + np.var(xy[:, 1])))
    return float(sigma * xy.shape[0] ** (-1.0 / 6.0))


@dataclass(frozen=True)
class KdeEstimator:
    """Squared-integral of a Gaussian KDE.

    ``method="binned"`` uses linear binning and an FFT pair sum over all
    samples; ``"pairwise"`` sums exact Gaussian overlaps over at most
    ``max_points`` samples.
    """

    bandwidth: Optional[float] = None
    method: str = "binned"
    grid_step: float = 0.25       # grid spacing in units of the bandwidth
    max_points: int = 2000
    max_grid: int = 2048

    def with_bandwidth(self, b: float) -> "KdeEstimator":
        return KdeEstimator(b, self.method, self.grid_step, self.max_points, self.max_grid)

    def resolve_bandwidth(self, xy) -> float:
        return self.bandwidth if self.bandwidth is not None else silverman_bandwidth(xy)

    def purity(self, xy: np.ndarray, weights: np.ndarray | None = None) -> float:
        b = self.resolve_bandwidth(xy)
        if self.method == "pairwise":
            return _pairwise_purity(xy, b, weights, self.max_points)
        if self.method == "binned":
            return _binned_purity(xy, b, weights, self.grid_step, self.max_grid)
        raise ValueError(f"unknown KDE method {self.method!r}")


@dataclass(frozen=True)
class HistogramEstimator:
    """Plug-in purity from square bins, self-pairs removed."""

    bin_width: float

    def with_bandwidth(self, b):
        return self

    def resolve_bandwidth(self, xy) -> float:
        return self.bin_width

    def purity(self, xy, weights=None) -> float:
        w = np.ones(len(xy)) if weights is None else np.asarray(weights, dtype=float)
        idx = np.floor(xy / self.bin_width).astype(np.int64)
        _, inverse = np.unique(idx, axis=0, return_inverse=True)
        counts = np.bincount(inverse.ravel(), weights=w)
        sq = np.bincount(inverse.ravel(), weights=w ** 2)
        total = w.sum()
        return float((np.sum(counts ** 2) - np.sum(sq)) / (total ** 2 - np.sum(w ** 2))
                     / self.bin_width ** 2)


def _pairwise_purity(xy, b, weights, max_points):
    n = xy.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if n > max_points:
        # deterministic thinning keeps repeated calls comparable
        keep = np.linspace(0, n - 1, max_points).astype(int)
        xy, w = xy[keep], w[keep]
    d2 = pdist(xy, "sqeuclidean")
    kern = np.exp(-d2 / (4 * b * b)) / (4 * np.pi * b * b)
    iu = np.triu_indices(len(w), 1)
    pair = 2 * np.sum(w[iu[0]] * w[iu[1]] * kern) + np.sum(w ** 2) / (4 * np.pi * b * b)
    return float(pair / w.sum() ** 2)


def _binned_purity(xy, b, weights, grid_step, max_grid):
    w = np.ones(xy.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    reach = 6.0 * np.sqrt(2.0) * b
    lo = xy.min(axis=0) - reach
    hi = xy.max(axis=0) + reach
    step = max(grid_step * b, float(np.max(hi - lo)) / (max_grid - 1))
    shape = np.ceil((hi - lo) / step).astype(int) + 2
    f = (xy - lo) / step
    i0 = np.floor(f).astype(np.int64)
    frac = f - i0
    grid = np.zeros(shape)
    for dx in (0, 1):
        wx = frac[:, 0] if dx else 1 - frac[:, 0]
        for dy in (0, 1):
            wy = frac[:, 1] if dy else 1 - frac[:, 1]
            np.add.at(grid, (i0[:, 0] + dx, i0[:, 1] + dy), w * wx * wy)
    half = int(np.ceil(reach / step))
    off = np.arange(-half, half + 1) * step
    g1 = np.exp(-off ** 2 / (4 * b * b))
    kernel = np.outer(g1, g1) / (4 * np.pi * b * b)
    smoothed = fftconvolve(grid, kernel, mode="same")
    return float(np.sum(grid * smoothed) / w.sum() ** 2)


def marginal_purity(snapshot: ClassicalEnsemble, mode: int = 1, estimator=None,
                    weights=None) -> float:
    """Estimate ``int P_k^2 dq dp`` for one mode's marginal."""
    estimator = estimator or KdeEstimator()
    xy = snapshot.mode(mode)
    if np.allclose(xy, xy[0]):
        raise DegenerateEnsemble("all samples coincide; the marginal has no density")
    return estimator.purity(xy, weights)


def crle_series(ensemble: ClassicalEnsemble, system: ClassicalSystem, t_grid, estimator=None,
                mode: int = 1, dt: float = 0.01, method: str = "symplectic", exact_flow=None,
                n_boot: int = 0, boot_seed: int = 0) -> CrleSeries:
    """Classical reduced linear entropy along the characteristics.

    The bandwidth is fixed from the initial snapshot so the same functional
    is applied at every time.  With ``n_boot > 0`` the metadata carries a
    per-time bootstrap standard deviation under ``"noise"``.
    """
    estimator = estimator or KdeEstimator()
    b = estimator.resolve_bandwidth(ensemble.mode(mode))
    est = estimator.with_bandwidth(b)
    rng = np.random.default_rng(boot_seed)
    boot_w = rng.multinomial(ensemble.n, np.full(ensemble.n, 1.0 / ensemble.n), size=n_boot)
    purities, boot = [], []
    for _, x in iter_flow(ensemble.samples, system, t_grid, dt, method, exact_flow):
        xy = x[:, 2 * (mode - 1): 2 * mode]
        purities.append(est.purity(xy))
        boot.append([est.purity(xy, wb) for wb in boot_w])
    purities = np.array(purities)
    values = 1.0 - purities / purities[0]
    meta = {"estimator": type(estimator).__name__, "bandwidth": b, "n_samples": ensemble.n,
            "mode": mode, "hbar": ensemble.hbar, "seed": ensemble.seed,
            "initial_purity": float(purities[0])}
    if n_boot:
        boot = np.array(boot)                      # (n_t, n_boot)
        meta["noise"] = np.std(1.0 - boot / boot[0], axis=1, ddof=1)
    return CrleSeries(np.asarray(t_grid, dtype=float), values, meta)
