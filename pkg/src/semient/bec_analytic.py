"""Closed-form entanglement of the two-mode BEC model.

Both modes start in coherent states ``alpha_i = (q_i + i p_i)/sqrt(2 hbar)``.
The linear part rotates the labels into ``beta_1, beta_2``; every other term
is a function of the conserved total number, which yields a double Poisson
sum for the purity.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson


class BetaPair(NamedTuple):
    beta1: complex
    beta2: complex


def alphas_from_points(q1, p1, q2, p2, hbar):
    s = np.sqrt(2 * hbar)
    return complex(q1, p1) / s, complex(q2, p2) / s


def beta(t, alphas, omega, lam) -> BetaPair:
    a1, a2 = alphas
    rot = np.exp(-1j * omega * t)
    c, s = np.cos(lam * t), np.sin(lam * t)
    return BetaPair(rot * (a1 * c - 1j * a2 * s), rot * (a2 * c - 1j * a1 * s))


def _poisson_support(mean, tol):
    """Index range holding all but ``tol`` of a Poisson(mean) distribution."""
    if mean == 0:
        return 0, 0
    spread = 8 * np.sqrt(mean)
    hi = int(max(np.ceil(mean + spread), poisson.isf(tol / 2, mean) + 1))
    lo = int(max(0, min(np.floor(mean - spread), poisson.ppf(tol / 2, mean) - 1)))
    return lo, hi


def analytic_rle(t, alphas, omega, lam, g, hbar, tol=1e-12) -> float:
    """Reduced linear entropy at time ``t``."""
    if g * t == 0:
        return 0.0          # kernel is identically one: the modes never entangle
    b1, b2 = beta(t, alphas, omega, lam)
    n1, n2 = abs(b1) ** 2, abs(b2) ** 2
    lo, hi = _poisson_support(n1, tol)
    n = np.arange(lo, hi + 1)
    w = np.exp(n * np.log(n1) - n1 - gammaln(n + 1)) if n1 > 0 else np.array([1.0])
    w /= w.sum()
    # purity = sum_{n,m} w_n w_m K(n - m); fold the symmetric double sum onto lags
    lags = np.arange(w.size)
    auto = np.correlate(w, w, mode="full")[w.size - 1:]
    kernel = np.exp(-4 * n2 * np.sin(hbar * g * t * lags) ** 2)
    purity = auto[0] + 2 * np.dot(auto[1:], kernel[1:])
    return float(1.0 - purity)


def analytic_series(t_grid, alphas, omega, lam, g, hbar, tol=1e-12) -> np.ndarray:
    return np.array([analytic_rle(t, alphas, omega, lam, g, hbar, tol) for t in np.ravel(t_grid)])


def revival_time(g, hbar) -> float:
    """First instant at which the two modes are again in a product state."""
    if g * hbar == 0:
        raise ValueError("revival time is undefined for g * hbar = 0")
    return float(np.pi / (g * hbar))
