"""Exponential-saturation fit ``S(t) = A0 (1 - exp(-A1 t))``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynamics import EntropySeries

MIN_POINTS = 20


@dataclass(frozen=True)
class FitResult:
    a0: float
    a1: float
    rms: float
    converged: bool
    stderr: tuple[float, float] = (np.nan, np.nan)
    diagnostics: dict = field(default_factory=dict)

    def predict(self, t) -> np.ndarray:
        return self.a0 * (1.0 - np.exp(-self.a1 * np.asarray(t, dtype=float)))


def _residuals(params, t, s):
    a0, a1 = params
    e = np.exp(-a1 * t)
    return a0 * (1.0 - e) - s, np.stack([1.0 - e, a0 * t * e], axis=1)


def initial_guess(t, s):
    """A0 from the last quartile; A1 from a log-linear fit of 1 - S/A0."""
    a0 = float(np.mean(s[3 * len(s) // 4:]))
    ratio = s / a0
    ok = (t > 0) & (ratio > 0) & (ratio < 0.95)
    if np.count_nonzero(ok) >= 2:
        y = -np.log1p(-ratio[ok])
        a1 = float(np.dot(t[ok], y) / np.dot(t[ok], t[ok]))
    else:
        a1 = 3.0 / t[-1]
    return a0, max(a1, 1e-8 / max(t[-1], 1e-300))


def fit_saturation(series: EntropySeries, max_iter: int = 200, tol: float = 1e-14) -> FitResult:
    """Gauss-Newton with backtracking on the two saturation parameters.

    Deterministic: the start point is a function of the data only.
    """
    t, s = series.times, series.values
    if t.size < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points, got {t.size}")
    a0_start = float(np.mean(s[3 * len(s) // 4:]))
    if abs(a0_start) <= 1e-14:
        rms = float(np.sqrt(np.mean(s ** 2)))
        return FitResult(0.0, 0.0, rms, False, diagnostics={"reason": "degenerate: no saturation"})

    params = np.array(initial_guess(t, s))
    r, jac = _residuals(params, t, s)
    cost = float(np.dot(r, r))
    converged, it, reason = False, 0, "max_iter"
    for it in range(1, max_iter + 1):
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        while lam > 1e-10:
            trial = params + lam * step
            if trial[1] > 0:
                r_new, jac_new = _residuals(trial, t, s)
                cost_new = float(np.dot(r_new, r_new))
                if cost_new <= cost:
                    break
            lam *= 0.5
        else:
            converged, reason = True, "no descent along Gauss-Newton step"
            break
        small_step = np.all(np.abs(lam * step) <= tol * np.maximum(np.abs(params), 1e-300) * 1e2)
        small_cost = cost - cost_new <= tol * max(cost, 1e-300)
        params, r, jac, cost = trial, r_new, jac_new, cost_new
        if small_step or (small_cost and it > 1):
            converged, reason = True, "converged"
            break

    a0, a1 = (float(x) for x in params)
    dof = max(t.size - 2, 1)
    # guard the covariance against an exact fit
    sigma2 = max(cost / dof, 1e-300)
    try:
        cov = sigma2 * np.linalg.inv(jac.T @ jac)
        stderr = (float(np.sqrt(cov[0, 0])), float(np.sqrt(cov[1, 1])))
    except np.linalg.LinAlgError:
        stderr = (np.nan, np.nan)
    converged = converged and a1 > 0 and 0 <= a0 < 1
    diag = {"iterations": it, "reason": reason, "span_ok": bool(t[-1] - t[0] >= 3.0 / a1) if a1 > 0 else False}
    return FitResult(a0, a1, float(np.sqrt(cost / t.size)), converged, stderr, diag)
