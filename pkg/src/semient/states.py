"""Coherent-state preparation and the initial phase-space density.

Phase points are ``(q, p)`` pairs.  Bosonic labels are ``v = (q + ip)/sqrt(2 hbar)``.
Spin labels are stereographic, ``v = (q + ip)/sqrt(c hbar J - (q^2 + p^2))``,
with the shell constant ``c`` fixed by :data:`SPIN_SHELL_FACTOR`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as la
from scipy.special import gammaln

from .hilbert import CompositeSpace, FockSpace, SpinSpace, StateVector, spin_ops

# Denominator constant of the spin parametrization, taken at face value
# (c = 1).  c = 4 gives the canonical convention J_z = -hbar J + (q^2+p^2)/2.
# The classical counterpart reads this value so quantum and classical agree.
SPIN_SHELL_FACTOR = 1.0

# Truncated coherent states must satisfy ||(a - v)|v>|| <= BOSONIC_TAIL_TOL.
# Only the top component survives in that residual, so it equals |v| |c_nmax|.
BOSONIC_TAIL_TOL = 1e-6


class TruncationError(ValueError):
    """Fock cutoff too small for the requested coherent state."""


class DomainError(ValueError):
    """Phase point outside the spin parametrization disk."""


class PhasePoint(NamedTuple):
    q: float
    p: float


def as_points(coords) -> tuple[PhasePoint, ...]:
    """Flat ``(q1, p1, q2, p2, ...)`` -> tuple of PhasePoints."""
    arr = np.asarray(coords, dtype=float).ravel()
    if arr.size % 2:
        raise ValueError("need an even number of phase-space coordinates")
    return tuple(PhasePoint(float(q), float(p)) for q, p in arr.reshape(-1, 2))


def bosonic_label(point: PhasePoint, hbar: float) -> complex:
    return complex(point.q, point.p) / np.sqrt(2 * hbar)


def spin_label(point: PhasePoint, hbar: float, two_j: int,
               shell: float = SPIN_SHELL_FACTOR) -> complex:
    """Stereographic spin-coherent label for ``point``.

    Raises DomainError at or beyond the pole ``q^2 + p^2 = shell * hbar * J``.
    """
    r2 = point.q ** 2 + point.p ** 2
    radius2 = shell * hbar * two_j / 2
    if r2 >= radius2:
        raise DomainError(
            f"q^2 + p^2 = {r2:.6g} must stay below {radius2:.6g} (spin pole)")
    return complex(point.q, point.p) / np.sqrt(radius2 - r2)


def bosonic_amplitudes(v: complex, n_max: int, check_tail: bool = True) -> np.ndarray:
    n = np.arange(n_max + 1)
    if v == 0:
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    mean = abs(v) ** 2
    log_mod = -mean / 2 + n * np.log(abs(v)) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mod + 1j * n * np.angle(v))
    amps /= np.linalg.norm(amps)
    residual = abs(v) * abs(amps[-1])
    if check_tail and residual > BOSONIC_TAIL_TOL:
        raise TruncationError(
            f"|v|^2 = {mean:.4g} is too close to n_max = {n_max}: eigenvalue residual"
            f" {residual:.2g} exceeds {BOSONIC_TAIL_TOL:g}")
    return amps


def spin_amplitudes(v: complex, two_j: int) -> np.ndarray:
    """exp[(arctan|v|/|v|)(v J+ - v* J-)] |J,-J> with dimensionless J+-."""
    space = SpinSpace(two_j)
    jp, jm, _ = spin_ops(space, hbar=1.0)
    ref = np.zeros(space.dim, dtype=complex)
    ref[0] = 1.0
    if v == 0:
        return ref
    xi = v * np.arctan(abs(v)) / abs(v)
    gen = (xi * jp - np.conj(xi) * jm).toarray()
    return la.expm(gen) @ ref


def _as_factor_state(amps, factor):
    return FactorState(factor, np.asarray(amps, dtype=complex))


@dataclass(frozen=True, eq=False)
class FactorState:
    """Pure state of one factor; kept separate so product structure is explicit."""

    space: FockSpace | SpinSpace
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def bosonic_coherent(point: PhasePoint, hbar: float, space: FockSpace) -> FactorState:
    """Truncated, renormalized Glauber coherent state centred at ``point``."""
    return _as_factor_state(bosonic_amplitudes(bosonic_label(point, hbar), space.n_max), space)


def spin_coherent(point: PhasePoint, hbar: float, space: SpinSpace,
                  shell: float = SPIN_SHELL_FACTOR) -> FactorState:
    v = spin_label(point, hbar, space.two_j, shell)
    return _as_factor_state(spin_amplitudes(v, space.two_j), space)


def coherent(point: PhasePoint, hbar: float, space) -> FactorState:
    if isinstance(space, FockSpace):
        return bosonic_coherent(point, hbar, space)
    return spin_coherent(point, hbar, space)


def product_state(state_a: FactorState, state_b: FactorState,
                  composite: CompositeSpace) -> StateVector:
    if (state_a.amplitudes.size, state_b.amplitudes.size) != composite.dims:
        raise ValueError(
            f"factor dims {(state_a.amplitudes.size, state_b.amplitudes.size)}"
            f" do not match composite {composite.dims}")
    return StateVector(composite, np.kron(state_a.amplitudes, state_b.amplitudes))


@dataclass(frozen=True)
class GaussianProductDensity:
    """Husimi weight of a product of coherent states.

    Each mode is an isotropic Gaussian of variance ``hbar`` per quadrature,
    ``exp(-((q-q0)^2 + (p-p0)^2) / (2 hbar)) / (2 pi hbar)``, so the whole
    density integrates to one.
    """

    centers: tuple[PhasePoint, ...]
    hbar: float

    @property
    def n_modes(self) -> int:
        return len(self.centers)

    @property
    def variance(self) -> float:
        return self.hbar

    def center_vector(self) -> np.ndarray:
        return np.array([c for pt in self.centers for c in pt], dtype=float)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d2 = np.sum((x - self.center_vector()) ** 2, axis=-1)
        return np.exp(-d2 / (2 * self.hbar)) / (2 * np.pi * self.hbar) ** self.n_modes

    def marginal_purity(self) -> float:
        """Exact integral of the squared single-mode marginal."""
        return 1.0 / (4 * np.pi * self.hbar)


def husimi_initial_density(points: Sequence[PhasePoint], hbar: float) -> GaussianProductDensity:
    pts = tuple(PhasePoint(*pt) for pt in points)
    if len(pts) != 2:
        raise ValueError("the initial density is defined for two modes")
    return GaussianProductDensity(pts, float(hbar))
