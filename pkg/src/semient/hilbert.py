"""Truncated Hilbert spaces, operators, states and reductions.

Composite spaces are always two-factor and use the row-major flat index
``i = i_a * dim_b + i_b``.  Every other module relies on this convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.sparse as sp

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class FockSpace:
    """Bosonic mode truncated at ``n_max`` quanta."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class SpinSpace:
    """Spin multiplet of size ``two_j + 1``, basis ordered m = -J..+J."""

    two_j: int

    def __post_init__(self):
        if self.two_j < 1:
            raise ValueError(f"two_j must be >= 1, got {self.two_j}")

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def j(self) -> float:
        return self.two_j / 2


Factor = Union[FockSpace, SpinSpace]


@dataclass(frozen=True)
class CompositeSpace:
    factor_a: Factor
    factor_b: Factor

    @property
    def dims(self) -> tuple[int, int]:
        return self.factor_a.dim, self.factor_b.dim

    @property
    def dim(self) -> int:
        return self.factor_a.dim * self.factor_b.dim

    def factor(self, which) -> Factor:
        return self.factor_a if _factor_index(which) == 0 else self.factor_b


def _factor_index(which) -> int:
    if which in ("a", 0):
        return 0
    if which in ("b", 1):
        return 1
    raise ValueError(f"invalid factor id {which!r}; use 'a'/'b' or 0/1")


@dataclass(frozen=True, eq=False)
class StateVector:
    space: CompositeSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise ValueError(
                f"amplitudes have shape {amps.shape}, space needs ({self.space.dim},)")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, space, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(space, amps / np.linalg.norm(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``(dim_a, dim_b)``."""
        return self.amplitudes.reshape(self.space.dims)

    def density(self) -> "DensityMatrix":
        psi = self.amplitudes
        return DensityMatrix(self.space, np.outer(psi, psi.conj()))

    def reduced(self, keep="a") -> "DensityMatrix":
        """Reduced density matrix of a pure state, without forming the full rho."""
        m = self.as_matrix()
        if _factor_index(keep) == 0:
            red = m @ m.conj().T
        else:
            red = m.T @ m.conj()
        return DensityMatrix(self.space.factor(keep), red)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense density matrix.  ``space`` is a CompositeSpace or a single factor."""

    space: Union[CompositeSpace, Factor]
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match dimension {d}")
        object.__setattr__(self, "matrix", mat)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Sparse operator on a composite space.

    ``hermitian`` is checked on construction when set; use ``hermitian=False``
    for ladder-type embeddings.
    """

    space: CompositeSpace
    matrix: sp.csr_matrix
    hermitian: bool = True
    label: str = field(default="", compare=False)

    def __post_init__(self):
        mat = sp.csr_matrix(self.matrix)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"operator shape {mat.shape} does not match dimension {self.space.dim}")
        object.__setattr__(self, "matrix", mat)
        if self.hermitian and hermiticity_error(mat) > HERMITIAN_TOL * max(
                1.0, abs(mat).max() if mat.nnz else 1.0):
            raise ValueError(f"operator {self.label!r} flagged Hermitian but is not")

    def __add__(self, other):
        _same_space(self, other)
        return HermitianOperator(self.space, self.matrix + other.matrix,
                                 self.hermitian and other.hermitian)

    def __matmul__(self, vec):
        return self.matrix @ vec

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_real(self) -> bool:
        return not np.any(np.iscomplex(self.matrix.data))


def _same_space(x, y):
    if x.space != y.space:
        raise ValueError("operators live on different spaces")


def hermiticity_error(mat) -> float:
    diff = mat - mat.conj().T
    if sp.issparse(diff):
        return float(abs(diff).max()) if diff.nnz else 0.0
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def ladder_ops(space: FockSpace):
    """Annihilation and creation matrices truncated at ``n_max``.

    Returns ``(a, a_dag)`` as CSR matrices with ``a|n> = sqrt(n)|n-1>``.
    """
    n = np.arange(1, space.dim)
    a = sp.diags(np.sqrt(n), offsets=1, shape=(space.dim, space.dim), format="csr",
                 dtype=complex)
    return a, sp.csr_matrix(a.T)


def number_op(space: FockSpace) -> sp.csr_matrix:
    return sp.diags(np.arange(space.dim, dtype=float), format="csr").astype(complex)


def spin_ops(space: SpinSpace, hbar: float = 1.0):
    """Spin matrices ``(J_plus, J_minus, J_z)`` in the m = -J..+J basis."""
    j = space.j
    m = np.arange(space.dim) - j
    jz = sp.diags(hbar * m, format="csr").astype(complex)
    # J+ |m> -> |m+1>: entries sit on the sub-diagonal of this ordering.
    mm = m[:-1]
    coef = hbar * np.sqrt(j * (j + 1) - mm * (mm + 1))
    jp = sp.diags(coef, offsets=-1, shape=(space.dim, space.dim), format="csr",
                  dtype=complex)
    return jp, sp.csr_matrix(jp.T), jz


def embed(op, which, composite: CompositeSpace, hermitian=None) -> HermitianOperator:
    """Kronecker-embed a single-factor operator into the composite space."""
    idx = _factor_index(which)
    op = sp.csr_matrix(op)
    target = composite.factor(idx).dim
    if op.shape != (target, target):
        raise ValueError(f"operator shape {op.shape} does not match factor dimension {target}")
    other = composite.factor(1 - idx).dim
    eye = sp.identity(other, dtype=complex, format="csr")
    full = sp.kron(op, eye, format="csr") if idx == 0 else sp.kron(eye, op, format="csr")
    if hermitian is None:
        hermitian = hermiticity_error(op) <= HERMITIAN_TOL
    return HermitianOperator(composite, full, hermitian)


def partial_trace(rho: DensityMatrix, keep="a") -> DensityMatrix:
    """Trace out one factor of a composite-space density matrix."""
    idx = _factor_index(keep)
    space = rho.space
    if not isinstance(space, CompositeSpace):
        raise ValueError("partial_trace needs a density matrix on a CompositeSpace")
    da, db = space.dims
    r = rho.matrix.reshape(da, db, da, db)
    red = np.einsum("ijkj->ik", r) if idx == 0 else np.einsum("ijil->jl", r)
    return DensityMatrix(space.factor(idx), red)


def purity(rho: DensityMatrix) -> float:
    # Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho.matrix) ** 2))


def rle(rho_reduced: DensityMatrix) -> float:
    """Reduced linear entropy ``1 - Tr[rho^2]`` of a reduced density matrix."""
    return 1.0 - purity(rho_reduced)


def expectation(op, state: StateVector) -> complex:
    mat = op.matrix if isinstance(op, HermitianOperator) else op
    psi = state.amplitudes
    return complex(np.vdot(psi, mat @ psi))
