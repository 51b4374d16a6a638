"""Hamiltonian builders and their classical counterparts.

Factor conventions: Dicke uses ``spin (a) x field (b)`` with phase-space
coordinates ``(q_a, p_a, q_f, p_f)``; the two-mode BEC and polynomial models use
``mode 1 (a) x mode 2 (b)`` with ``(q1, p1, q2, p2)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from math import comb
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .hilbert import (CompositeSpace, FockSpace, HermitianOperator, SpinSpace, embed,
                      ladder_ops, number_op, spin_ops)
from .states import SPIN_SHELL_FACTOR, as_points, coherent, product_state

MAX_WEYL_DEGREE = 6


@dataclass(frozen=True)
class DickeParams:
    epsilon: float = 1.0
    omega: float = 1.0
    G: float = 0.35
    G_prime: float = 0.35
    two_j: int = 7
    hbar: float = 1.0
    n_max: int = 40

    @property
    def j(self) -> float:
        return self.two_j / 2

    def space(self) -> CompositeSpace:
        return CompositeSpace(SpinSpace(self.two_j), FockSpace(self.n_max))


@dataclass(frozen=True)
class BecParams:
    omega: float = 1.0
    lam: float = 0.2
    g: float = 0.1
    hbar: float = 1.0
    n_max: int = 40

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("g must be non-negative")

    def space(self) -> CompositeSpace:
        return CompositeSpace(FockSpace(self.n_max), FockSpace(self.n_max))


@dataclass(frozen=True)
class PolynomialHamiltonian:
    """Sum of ``c * q_u^n p_u^m q_v^l p_v^k`` terms, given as (c, n, m, l, k)."""

    terms: tuple[tuple[float, int, int, int, int], ...]

    def __post_init__(self):
        terms = tuple((float(c), *map(int, e)) for c, *e in self.terms)
        for c, n, m, l, k in terms:
            if min(n, m, l, k) < 0:
                raise ValueError("exponents must be non-negative")
            if n + m > MAX_WEYL_DEGREE or l + k > MAX_WEYL_DEGREE:
                raise ValueError(
                    f"per-mode degree above {MAX_WEYL_DEGREE} is unsupported: {(n, m, l, k)}")
        object.__setattr__(self, "terms", terms)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        qu, pu, qv, pv = (x[..., i] for i in range(4))
        return sum(c * qu ** n * pu ** m * qv ** l * pv ** k for c, n, m, l, k in self.terms)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, *exps in self.terms:
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                term = c * e * x[..., i] ** (e - 1)
                for j, f in enumerate(exps):
                    if j != i:
                        term = term * x[..., j] ** f
                out[..., i] += term
        return out


@dataclass(frozen=True)
class ClassicalSystem:
    """Two-degree-of-freedom Hamiltonian flow on ``(q1, p1, q2, p2)``.

    ``bracket_scale`` rescales Hamilton's equations per degree of freedom for
    coordinates that are canonical only up to a constant factor.
    """

    hamiltonian: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    bracket_scale: tuple[float, float] = (1.0, 1.0)
    fd_step: float = 1e-6
    label: str = field(default="", compare=False)

    degrees = 2

    def energy(self, x) -> np.ndarray:
        return self.hamiltonian(np.asarray(x, dtype=float))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.gradient is not None:
            return self.gradient(x)
        out = np.empty_like(x)
        for i in range(x.shape[-1]):
            dx = np.zeros(x.shape[-1])
            dx[i] = self.fd_step
            out[..., i] = (self.hamiltonian(x + dx) - self.hamiltonian(x - dx)) / (2 * self.fd_step)
        return out

    def vector_field(self, x) -> np.ndarray:
        g = self.grad(x)
        f = np.empty_like(g)
        for k, s in enumerate(self.bracket_scale):
            f[..., 2 * k] = s * g[..., 2 * k + 1]
            f[..., 2 * k + 1] = -s * g[..., 2 * k]
        return f


# -- quantum builders ---------------------------------------------------------

def _check_space(composite, expected):
    if composite != expected:
        raise ValueError(f"composite space {composite} does not match model space {expected}")


def build_dicke(params: DickeParams, composite: CompositeSpace | None = None) -> HermitianOperator:
    """Dicke Hamiltonian without the rotating-wave approximation."""
    space = params.space()
    if composite is not None:
        _check_space(composite, space)
    jp, jm, jz = spin_ops(space.factor_a, params.hbar)
    a, ad = ladder_ops(space.factor_b)
    scale = 1.0 / np.sqrt(2 * params.j)
    h = params.epsilon * sp.kron(jz, sp.identity(space.factor_b.dim))
    h = h + params.hbar * params.omega * sp.kron(sp.identity(space.factor_a.dim), ad @ a)
    h = h + params.G * scale * (sp.kron(jp, a) + sp.kron(jm, ad))
    h = h + params.G_prime * scale * (sp.kron(jp, ad) + sp.kron(jm, a))
    return HermitianOperator(space, sp.csr_matrix(h), label="dicke")


def dicke_parity(params: DickeParams) -> np.ndarray:
    """Diagonal of exp{i pi (a^dag a + J_z/hbar + J)}, as +-1 entries."""
    space = params.space()
    m_plus_j = np.arange(space.factor_a.dim)
    n = np.arange(space.factor_b.dim)
    excitations = m_plus_j[:, None] + n[None, :]
    return np.where(excitations.ravel() % 2 == 0, 1.0, -1.0)


def dicke_excitations(params: DickeParams) -> np.ndarray:
    space = params.space()
    return (np.arange(space.factor_a.dim)[:, None] + np.arange(space.factor_b.dim)[None, :]).ravel()


def build_bec(params: BecParams, composite: CompositeSpace | None = None) -> HermitianOperator:
    """Two resonant modes with Josephson hopping and a number-squared term."""
    space = params.space()
    if composite is not None:
        _check_space(composite, space)
    hb = params.hbar
    a, ad = ladder_ops(space.factor_a)
    n_tot = total_number(space)
    one = sp.identity(space.dim, dtype=complex, format="csr")
    h = hb * params.omega * (n_tot + one)
    h = h + hb * params.lam * (sp.kron(ad, a) + sp.kron(a, ad))
    h = h + hb ** 2 * params.g * (n_tot + one) @ (n_tot + one)
    return HermitianOperator(space, sp.csr_matrix(h), label="bec")


def total_number(space: CompositeSpace) -> sp.csr_matrix:
    return (embed(number_op(space.factor_a), "a", space).matrix
            + embed(number_op(space.factor_b), "b", space).matrix)


def quadratures(space: FockSpace, hbar: float):
    """``(Q, P)`` with ``[Q, P] = i hbar`` away from the truncation edge."""
    a, ad = ladder_ops(space)
    s = np.sqrt(hbar / 2)
    return s * (a + ad), 1j * s * (ad - a)


def _power(mat, k):
    eye = sp.identity(mat.shape[0], dtype=complex, format="csr")
    return reduce(lambda x, _: x @ mat, range(k), eye)


def symmetric_monomial(n: int, m: int, hbar: float, space: FockSpace, method="mccoy"):
    """Weyl-ordered ``Q^n P^m`` on ``space``.

    Products are formed on a space padded by ``n + m`` levels and then cut
    back, so the retained block is free of truncation artefacts.
    """
    pad = FockSpace(space.n_max + n + m + 1)
    Q, P = quadratures(pad, hbar)
    if method == "mccoy":
        out = sum(comb(n, k) * (_power(Q, k) @ _power(P, m) @ _power(Q, n - k))
                  for k in range(n + 1)) / 2 ** n
    elif method == "orderings":
        out = _orderings_average(Q, P, n, m)
    else:
        raise ValueError(f"unknown ordering method {method!r}")
    out = sp.csr_matrix(out)
    return out[: space.dim, : space.dim]


def _orderings_average(Q, P, n, m):
    words = set(itertools.permutations("Q" * n + "P" * m))
    eye = sp.identity(Q.shape[0], dtype=complex, format="csr")
    total = 0
    for w in words:
        total = total + reduce(lambda acc, c: acc @ (Q if c == "Q" else P), w, eye)
    return total / len(words)


def weyl_quantize(poly: PolynomialHamiltonian, hbar: float, composite: CompositeSpace,
                  method="mccoy") -> HermitianOperator:
    """Symmetric-ordering quantization of a two-mode polynomial."""
    if not (isinstance(composite.factor_a, FockSpace) and isinstance(composite.factor_b, FockSpace)):
        raise ValueError("weyl_quantize needs two bosonic factors")
    cache = {}

    def mono(n, m, factor):
        key = (n, m, factor)
        if key not in cache:
            cache[key] = symmetric_monomial(n, m, hbar, factor, method)
        return cache[key]

    h = sp.csr_matrix((composite.dim, composite.dim), dtype=complex)
    for c, n, m, l, k in poly.terms:
        h = h + c * sp.kron(mono(n, m, composite.factor_a), mono(l, k, composite.factor_b),
                            format="csr")
    return HermitianOperator(composite, h, label="weyl")


def rescale_initial(r1, two_j: int) -> tuple[float, ...]:
    """Scale a J=1 reference initial condition to spin ``J = two_j / 2``."""
    j = two_j / 2
    if j <= 0:
        raise ValueError("J must be positive")
    return tuple(float(x) * np.sqrt(j) for x in np.ravel(r1))


# -- initial states -----------------------------------------------------------

def initial_state(params, coords):
    """Product coherent state ``|u0> (x) |v0>`` for a model, plus its factors."""
    space = params.space()
    pa, pb = as_points(coords)
    hb = params.hbar
    ua = coherent(pa, hb, space.factor_a)
    vb = coherent(pb, hb, space.factor_b)
    return product_state(ua, vb, space), ua, vb


# -- classical counterparts ---------------------------------------------------

def classical_counterpart(model, shell: float = SPIN_SHELL_FACTOR) -> ClassicalSystem:
    """Coherent-state expectation ``<z|H|z>`` as a phase-space function."""
    if isinstance(model, BecParams):
        return _bec_classical(model)
    if isinstance(model, DickeParams):
        return _dicke_classical(model, shell)
    if isinstance(model, PolynomialHamiltonian):
        return ClassicalSystem(model, model.gradient, label="polynomial")
    raise TypeError(f"no classical counterpart for {type(model).__name__}")


def _bec_classical(p: BecParams) -> ClassicalSystem:
    # <(N+1)^2> for a Poisson total number gives the hbar and hbar^2 corrections.
    w, lam, g, hb = p.omega, p.lam, p.g, p.hbar

    def ham(x):
        q1, p1, q2, p2 = (x[..., i] for i in range(4))
        action = 0.5 * (q1 ** 2 + p1 ** 2 + q2 ** 2 + p2 ** 2)
        return (w * (action + hb) + lam * (q1 * q2 + p1 * p2)
                + g * (action ** 2 + 3 * hb * action + hb ** 2))

    def grad(x):
        q1, p1, q2, p2 = (x[..., i] for i in range(4))
        action = 0.5 * (q1 ** 2 + p1 ** 2 + q2 ** 2 + p2 ** 2)
        radial = w + g * (2 * action + 3 * hb)
        return np.stack([radial * q1 + lam * q2, radial * p1 + lam * p2,
                         radial * q2 + lam * q1, radial * p2 + lam * p1], axis=-1)

    return ClassicalSystem(ham, grad, label="bec")


def _dicke_classical(p: DickeParams, shell: float) -> ClassicalSystem:
    hb, j = p.hbar, p.j
    radius2 = shell * hb * j
    # <J+> = (2/c)(q - ip) sqrt(c hbar J - r^2); <a> = (q + ip)/sqrt(2 hbar)
    pref = (2.0 / shell) * 2.0 / (np.sqrt(2 * j) * np.sqrt(2 * hb))

    def ham(x):
        qa, pa, qf, pf = (x[..., i] for i in range(4))
        ra2 = qa ** 2 + pa ** 2
        root = np.sqrt(radius2 - ra2)
        jz = -hb * j + 2.0 * ra2 / shell
        couple = p.G * (qf * qa + pf * pa) + p.G_prime * (qf * qa - pf * pa)
        return p.epsilon * jz + 0.5 * p.omega * (qf ** 2 + pf ** 2) + pref * root * couple

    def grad(x):
        qa, pa, qf, pf = (x[..., i] for i in range(4))
        ra2 = qa ** 2 + pa ** 2
        root = np.sqrt(radius2 - ra2)
        gp, gm = p.G + p.G_prime, p.G - p.G_prime
        couple = gp * qf * qa + gm * pf * pa
        droot = -1.0 / root
        d_qa = 4 * p.epsilon * qa / shell + pref * (droot * qa * couple + root * gp * qf)
        d_pa = 4 * p.epsilon * pa / shell + pref * (droot * pa * couple + root * gm * pf)
        d_qf = p.omega * qf + pref * root * gp * qa
        d_pf = p.omega * pf + pref * root * gm * pa
        return np.stack([d_qa, d_pa, d_qf, d_pf], axis=-1)

    return ClassicalSystem(ham, grad, bracket_scale=(shell / 4.0, 1.0), label="dicke")


def model_hamiltonian(params) -> HermitianOperator:
    if isinstance(params, DickeParams):
        return build_dicke(params)
    if isinstance(params, BecParams):
        return build_bec(params)
    raise TypeError(f"unknown model {type(params).__name__}")
