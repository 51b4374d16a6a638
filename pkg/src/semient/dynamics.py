"""Unitary propagation of pure states and entropy time series."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .hilbert import (FockSpace, HermitianOperator, StateVector, hermiticity_error,
                      HERMITIAN_TOL)

logger = logging.getLogger(__name__)

SPECTRAL_MAX_DIM = 3000


class KrylovBreakdown(RuntimeError):
    pass


@dataclass(frozen=True)
class EntropySeries:
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.values, dtype=float)
        if t.shape != s.shape:
            raise ValueError(f"times {t.shape} and values {s.shape} differ in length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(s)):
            raise ValueError("entropy values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", s)

    def __len__(self):
        return self.times.size

    def window(self, t_lo, t_hi) -> "EntropySeries":
        mask = (self.times >= t_lo) & (self.times <= t_hi)
        return EntropySeries(self.times[mask], self.values[mask], dict(self.metadata))


class Propagator:
    """exp(-i H t / hbar) acting on state vectors.

    ``method="auto"`` picks the spectral route below :data:`SPECTRAL_MAX_DIM`
    and Lanczos above it.
    """

    def __init__(self, hamiltonian: HermitianOperator, hbar: float = 1.0, method: str = "auto",
                 krylov_tol: float = 1e-10, krylov_dim: int = 40):
        if not hamiltonian.hermitian or hermiticity_error(hamiltonian.matrix) > HERMITIAN_TOL * max(
                1.0, abs(hamiltonian.matrix).max()):
            raise ValueError("Propagator needs a Hermitian Hamiltonian")
        if method == "auto":
            method = "spectral" if hamiltonian.space.dim <= SPECTRAL_MAX_DIM else "krylov"
        if method not in ("spectral", "krylov"):
            raise ValueError(f"unknown propagation method {method!r}")
        self.hamiltonian = hamiltonian
        self.hbar = float(hbar)
        self.method = method
        self.krylov_tol = krylov_tol
        self.krylov_dim = krylov_dim
        self._eig = None

    def eigensystem(self):
        if self._eig is None:
            h = self.hamiltonian.dense()
            if self.hamiltonian.is_real():
                h = h.real
            self._eig = la.eigh(h)
        return self._eig

    def propagate(self, psi0: np.ndarray, t_grid) -> np.ndarray:
        """Amplitudes at each grid time, shape ``(len(t_grid), dim)``."""
        t_grid = np.asarray(t_grid, dtype=float)
        if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
            raise ValueError("t_grid must be increasing")
        if self.method == "spectral":
            energies, vecs = self.eigensystem()
            coeffs = vecs.conj().T @ psi0
            phases = np.exp(-1j * np.outer(t_grid, energies) / self.hbar)
            return (phases * coeffs) @ vecs.T
        return self._krylov_series(psi0, t_grid)

    # Lanczos with a posteriori error control and step halving
    def _krylov_series(self, psi0, t_grid):
        out = np.empty((t_grid.size, psi0.size), dtype=complex)
        psi, t_now = psi0.astype(complex), 0.0
        h = self.hamiltonian.matrix
        dt_try = None
        for i, t in enumerate(t_grid):
            remaining = t - t_now
            while abs(remaining) > 0:
                step = remaining if dt_try is None else np.sign(remaining) * min(abs(remaining), dt_try)
                new, err = self._krylov_step(h, psi, step)
                if err > self.krylov_tol * max(abs(step), 1.0) and abs(step) > 1e-12:
                    dt_try = abs(step) / 2
                    continue
                psi = new
                remaining -= step
                t_now += step
                dt_try = abs(step) * 1.5 if err < self.krylov_tol * 1e-2 else abs(step)
            out[i] = psi
        return out

    def _krylov_step(self, h, psi, dt):
        m = min(self.krylov_dim, psi.size)
        beta0 = np.linalg.norm(psi)
        basis = np.zeros((m + 1, psi.size), dtype=complex)
        alpha = np.zeros(m)
        beta = np.zeros(m)
        basis[0] = psi / beta0
        k_used = m
        for k in range(m):
            w = h @ basis[k]
            alpha[k] = np.vdot(basis[k], w).real
            w = w - alpha[k] * basis[k] - (beta[k - 1] * basis[k - 1] if k else 0)
            # full reorthogonalisation; subspaces are small
            w -= basis[: k + 1].T @ (basis[: k + 1].conj() @ w)
            beta[k] = np.linalg.norm(w)
            if beta[k] < 1e-13 * max(1.0, abs(alpha[k])):
                k_used = k + 1
                break
            basis[k + 1] = w / beta[k]
        if not np.all(np.isfinite(alpha[:k_used])):
            raise KrylovBreakdown(f"non-finite Lanczos coefficients after {k_used} steps")
        tri = np.diag(alpha[:k_used]) + np.diag(beta[: k_used - 1], 1) + np.diag(beta[: k_used - 1], -1)
        small = la.expm(-1j * dt / self.hbar * tri)[:, 0]
        err = beta0 * (beta[k_used - 1] * abs(small[-1]) if k_used == m else 0.0)
        return beta0 * (basis[:k_used].T @ small), err


def evolve(state: StateVector, prop: Propagator, t_grid) -> list[StateVector]:
    amps = prop.propagate(state.amplitudes, t_grid)
    return [StateVector(state.space, a) for a in amps]


def _rle_from_amplitudes(amps, dims, keep):
    m = amps.reshape(-1, *dims)
    if keep in ("a", 0):
        red = np.einsum("tij,tkj->tik", m, m.conj())
    else:
        red = np.einsum("tji,tjk->tik", m, m.conj())
    return 1.0 - np.sum(np.abs(red) ** 2, axis=(1, 2))


def entropy_series(state0: StateVector, prop: Propagator, t_grid, keep="a",
                   metadata: dict | None = None, chunk: int = 256) -> EntropySeries:
    """Reduced linear entropy of one factor along the unitary flow."""
    t_grid = np.asarray(t_grid, dtype=float)
    dims = state0.space.dims
    if prop.method == "spectral":
        # bounded memory: the spectral route has no state to carry between chunks
        values = np.concatenate([
            _rle_from_amplitudes(prop.propagate(state0.amplitudes, t_grid[lo: lo + chunk]),
                                 dims, keep)
            for lo in range(0, t_grid.size, chunk)])
    else:
        values = _rle_from_amplitudes(prop.propagate(state0.amplitudes, t_grid), dims, keep)
    return EntropySeries(t_grid, values, dict(metadata or {}))


def leakage(state: StateVector, margin: int) -> float:
    """Largest probability held in the top ``margin`` levels of any bosonic factor."""
    m = state.as_matrix()
    probs = np.abs(m) ** 2
    worst = 0.0
    for axis, factor in enumerate((state.space.factor_a, state.space.factor_b)):
        if not isinstance(factor, FockSpace):
            continue
        if margin >= factor.n_max:
            raise ValueError("margin must be smaller than n_max")
        marginal = probs.sum(axis=1 - axis)
        worst = max(worst, float(marginal[-margin:].sum()))
    return worst


def diagnostics(states_amps: np.ndarray, hamiltonian: HermitianOperator, extra: dict | None = None):
    """Norm, energy and optional conserved-quantity drifts along a propagated run.

    ``extra`` maps names to diagonal observables (1-D arrays over the basis).
    """
    amps = np.asarray(states_amps)
    norms = np.linalg.norm(amps, axis=1)
    h = hamiltonian.matrix
    energies = np.real(np.einsum("ti,ti->t", amps.conj(), (h @ amps.T).T))
    e0 = energies[0]
    out = {
        "norm_drift": float(np.max(np.abs(norms - 1.0))),
        "energy_drift": float(np.max(np.abs(energies - e0)) / max(abs(e0), 1e-300)),
    }
    for name, diag in (extra or {}).items():
        vals = np.real(np.einsum("ti,i,ti->t", amps.conj(), diag, amps))
        out[f"{name}_drift"] = float(np.max(np.abs(vals - vals[0])))
    return out
