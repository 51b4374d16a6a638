"""Short-time entanglement: correlation formula, existence test, fits and scans.

For a product initial state ``|u0> (x) |v0>`` the entropy starts as
``S(t) ~ combination * t^2 / hbar^2`` with
``combination = 2 (C00 + C11 - C10 - C01)`` built from the bare Hamiltonian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import EntropySeries, Propagator, entropy_series
from .hilbert import HermitianOperator, StateVector
from .models import (DickeParams, build_dicke, initial_state, model_hamiltonian,
                     rescale_initial)
from .states import FactorState

DEFAULT_ONSET_LEVEL = 0.01
MIN_FIT_POINTS = 8


class IllConditionedFit(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationSet:
    c00: float
    c01: float
    c10: float
    c11: float

    @property
    def combination(self) -> float:
        return 2.0 * (self.c00 + self.c11 - self.c10 - self.c01)

    @property
    def variance(self) -> float:
        return self.c11 - self.c00


@dataclass(frozen=True)
class QuadCoefficient:
    value: float
    hbar: float
    source: str
    residual: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)


def correlations(H: HermitianOperator, u0: FactorState, v0: FactorState) -> CorrelationSet:
    """Correlations of the bare Hamiltonian in ``|u0> (x) |v0>``.

    Two contractions of ``phi = H psi0`` give everything: the projections
    onto ``<u0|`` and ``<v0|`` supply C01 and C10.
    """
    da, db = H.space.dims
    if (u0.amplitudes.size, v0.amplitudes.size) != (da, db):
        raise ValueError("factor states do not match the Hamiltonian's space")
    u = u0.amplitudes / np.linalg.norm(u0.amplitudes)
    v = v0.amplitudes / np.linalg.norm(v0.amplitudes)
    psi = np.kron(u, v)
    phi = H.matrix @ psi
    mean = np.vdot(psi, phi).real
    m = phi.reshape(da, db)
    c01 = np.linalg.norm(u.conj() @ m) ** 2
    c10 = np.linalg.norm(m @ v.conj()) ** 2
    return CorrelationSet(mean ** 2, float(c01), float(c10), float(np.vdot(phi, phi).real))


def correlation_coefficient(H, u0, v0, hbar) -> QuadCoefficient:
    corr = correlations(H, u0, v0)
    return QuadCoefficient(corr.combination / hbar ** 2, hbar, "correlation",
                           extra={"correlations": corr})


def entanglement_exists(corr: CorrelationSet, rtol: float = 1e-10) -> bool:
    return corr.combination > rtol * max(abs(corr.c11), 1e-300)


def onset_window(series: EntropySeries, level: float = DEFAULT_ONSET_LEVEL) -> float:
    """Time at which the series first reaches ``level``."""
    above = np.flatnonzero(series.values >= level)
    return float(series.times[above[0]] if above.size else series.times[-1])


def quad_coefficient_from_series(series: EntropySeries, t_window: float | None = None,
                                 hbar: float = 1.0, degree: int = 2) -> QuadCoefficient:
    """Least-squares ``S = c t^2`` over ``0 <= t <= t_window``.

    ``degree > 2`` adds ``t^3 .. t^degree`` nuisance terms, which removes the
    curvature bias of a wide window; the reported value is still ``c``.
    """
    t_hi = onset_window(series) if t_window is None else t_window
    mask = (series.times >= 0) & (series.times <= t_hi)
    t, s = series.times[mask], series.values[mask]
    n_pos = np.count_nonzero(t > 0)
    if n_pos < max(MIN_FIT_POINTS, 2 * (degree - 1)):
        raise IllConditionedFit(f"only {n_pos} samples in (0, {t_hi:g}] for a degree-{degree} fit")
    x = t / t_hi
    basis = np.stack([x ** k for k in range(2, degree + 1)], axis=1)
    if np.linalg.cond(basis) > 1e10:
        raise IllConditionedFit(f"onset fit is ill-conditioned (cond {np.linalg.cond(basis):.2g})")
    coef, *_ = np.linalg.lstsq(basis, s, rcond=None)
    resid = float(np.sqrt(np.mean((s - basis @ coef) ** 2)))
    return QuadCoefficient(float(coef[0] / t_hi ** 2), hbar, "fit", resid,
                           {"t_window": t_hi, "degree": degree})


def linear_onset_test(series: EntropySeries, t_window: float, degree: int = 4):
    """Fit ``S`` by a polynomial on the window; return (slope, uncertainty).

    The slope of a product-state series must be zero.  On noise-free data the
    residual is polynomial truncation error rather than noise, so the
    uncertainty adds the slope change between degree and degree + 1 to the
    least-squares standard error.
    """
    mask = (series.times >= 0) & (series.times <= t_window)
    t, s = series.times[mask], series.values[mask]
    scale = t_window

    def fit(deg):
        vander = np.vander(t / scale, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(vander, s, rcond=None)
        resid = s - vander @ coef
        sigma2 = np.dot(resid, resid) / max(t.size - deg - 1, 1)
        cov = sigma2 * np.linalg.inv(vander.T @ vander)
        return coef[1], np.sqrt(cov[1, 1])

    slope, stat = fit(degree)
    higher, _ = fit(degree + 1)
    return float(slope / scale), float(np.hypot(stat, slope - higher) / scale)


def onset_derivatives(state0, prop: Propagator, h: float = 1e-4):
    """S(0), central-difference dS/dt(0) and curvature S''(0)/2 from +-h."""
    s = entropy_series(state0, prop, [-h, 0.0, h]).values
    return float(s[1]), float((s[2] - s[0]) / (2 * h)), float((s[2] - 2 * s[1] + s[0]) / (2 * h * h))


@dataclass(frozen=True)
class ScanResult:
    parameters: tuple
    coefficients: tuple[QuadCoefficient, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.coefficients])

    @property
    def differences(self) -> np.ndarray:
        return np.abs(np.diff(self.values))


def hbar_scan(factory: Callable[[float], tuple], hbar_list: Sequence[float],
              source: str = "correlation", t_window: float | None = None,
              n_points: int = 41, degree: int = 2) -> ScanResult:
    """Short-time coefficient at fixed classical initial conditions for each hbar.

    ``factory(hbar)`` returns ``(H, u0, v0)`` with coherent labels recomputed
    for that hbar.  ``source="fit"`` evolves the state and fits the onset
    instead of using the correlation formula.
    """
    out = []
    for hb in hbar_list:
        H, u0, v0 = factory(hb)
        coeff = correlation_coefficient(H, u0, v0, hb)
        if source == "fit":
            psi0 = np.kron(u0.amplitudes, v0.amplitudes)
            state = StateVector(H.space, psi0)
            t_hi = t_window or 0.1 / np.sqrt(max(coeff.value, 1e-300))
            series = entropy_series(state, Propagator(H, hb), np.linspace(0, t_hi, n_points))
            coeff = quad_coefficient_from_series(series, t_hi, hb, degree)
        out.append(coeff)
    return ScanResult(tuple(hbar_list), tuple(out))


def model_factory(params_for_hbar: Callable[[float], object], coords) -> Callable[[float], tuple]:
    """Factory for :func:`hbar_scan` from a params builder and fixed phase-space coords."""
    def factory(hb):
        params = params_for_hbar(hb)
        _, u0, v0 = initial_state(params, coords)
        return model_hamiltonian(params), u0, v0
    return factory


def spin_scan(base: DickeParams, r1, two_j_list: Sequence[int], n_max_for=None) -> ScanResult:
    """Dicke short-time coefficients with initial conditions rescaled by sqrt(J)."""
    out = []
    for two_j in two_j_list:
        n_max = n_max_for(two_j) if n_max_for else base.n_max
        params = DickeParams(base.epsilon, base.omega, base.G, base.G_prime, two_j, base.hbar, n_max)
        coords = rescale_initial(r1, two_j)
        _, u0, v0 = initial_state(params, coords)
        out.append(correlation_coefficient(build_dicke(params), u0, v0, base.hbar))
    return ScanResult(tuple(two_j_list), tuple(out))
