import numpy as np
import pytest
import scipy.sparse as sp

from semient.dynamics import (EntropySeries, Propagator, diagnostics, entropy_series, evolve,
                              leakage)
from semient.hilbert import CompositeSpace, FockSpace, HermitianOperator, StateVector
from semient.models import (BecParams, DickeParams, build_bec, build_dicke, dicke_parity,
                            initial_state, quadratures, total_number)
from semient.states import PhasePoint, bosonic_amplitudes, bosonic_coherent, product_state


def test_diagonal_phases():
    comp = CompositeSpace(FockSpace(2), FockSpace(1))
    energies = np.array([0.0, 0.3, -1.2, 2.0, 0.7, 1.1])
    H = HermitianOperator(comp, sp.diags(energies))
    rng = np.random.default_rng(0)
    psi = StateVector.normalized(comp, rng.standard_normal(6) + 1j * rng.standard_normal(6))
    t = np.array([0.0, 0.5, 3.0])
    for hbar in (1.0, 0.4):
        states = evolve(psi, Propagator(H, hbar), t)
        for ti, s in zip(t, states):
            assert np.allclose(s.amplitudes, psi.amplitudes * np.exp(-1j * energies * ti / hbar),
                               atol=1e-13)


@pytest.mark.parametrize("hbar", [1.0, 0.5])
def test_ehrenfest_harmonic(hbar):
    p = BecParams(lam=0.0, g=0.0, omega=1.3, hbar=hbar, n_max=40)
    q, pp = 1.0, -0.7
    psi, _, _ = initial_state(p, (q, pp, 0.2, 0.4))
    t = np.linspace(0, 6, 13)
    Q, _ = quadratures(p.space().factor_a, hbar)
    Q1 = sp.kron(Q, sp.identity(p.n_max + 1))
    amps = Propagator(build_bec(p), hbar).propagate(psi.amplitudes, t)
    got = np.real(np.einsum("ti,ti->t", amps.conj(), (Q1 @ amps.T).T))
    expected = q * np.cos(1.3 * t) + pp * np.sin(1.3 * t)
    assert np.max(np.abs(got - expected)) <= 1e-8


def test_spectral_vs_krylov_dicke():
    p = DickeParams(two_j=3, n_max=30)
    H = build_dicke(p)
    psi, _, _ = initial_state(p, (0.6, 0.2, 1.0, -0.5))
    spec = Propagator(H, method="spectral").propagate(psi.amplitudes, [10.0])[0]
    kry = Propagator(H, method="krylov").propagate(psi.amplitudes, [10.0])[0]
    assert np.linalg.norm(spec - kry) <= 1e-8


def test_krylov_grid_and_conservation():
    p = BecParams(n_max=20)
    H = build_bec(p)
    psi, _, _ = initial_state(p, (1, 1, 1, 1))
    t = np.linspace(0, 15, 31)
    spec = Propagator(H, method="spectral").propagate(psi.amplitudes, t)
    kry = Propagator(H, method="krylov").propagate(psi.amplitudes, t)
    assert np.max(np.linalg.norm(spec - kry, axis=1)) <= 1e-8
    d = diagnostics(kry, H, {"number": np.real(total_number(p.space()).diagonal())})
    assert d["norm_drift"] <= 1e-10 and d["energy_drift"] <= 1e-8 and d["number_drift"] <= 1e-8


def test_auto_method_threshold():
    small = Propagator(build_bec(BecParams(n_max=10)))
    assert small.method == "spectral"
    big = Propagator(build_bec(BecParams(n_max=60)))
    assert big.method == "krylov"


class TestEntropySeries:
    def test_uncoupled_zero(self):
        p = BecParams(lam=0.0, g=0.0, n_max=30)
        psi, _, _ = initial_state(p, (1, 1, -1, 0.5))
        s = entropy_series(psi, Propagator(build_bec(p)), np.linspace(0, 10, 21))
        assert np.max(np.abs(s.values)) <= 1e-12

    @pytest.mark.parametrize("model", ["bec", "dicke"])
    def test_keep_symmetry(self, model):
        if model == "bec":
            p = BecParams(n_max=30)
            H, coords = build_bec(p), (1, 1, 1, 1)
        else:
            p = DickeParams(two_j=5, n_max=30)
            H, coords = build_dicke(p), (0.5, 0.3, 0.8, 0.0)
        psi, _, _ = initial_state(p, coords)
        prop = Propagator(H, p.hbar)
        t = np.linspace(0, 20, 41)
        a = entropy_series(psi, prop, t, keep="a").values
        b = entropy_series(psi, prop, t, keep="b").values
        assert np.max(np.abs(a - b)) <= 1e-10

    def test_chunking_does_not_matter(self):
        p = BecParams(n_max=20)
        psi, _, _ = initial_state(p, (1, 1, 1, 1))
        prop = Propagator(build_bec(p))
        t = np.linspace(0, 30, 50)
        one = entropy_series(psi, prop, t, chunk=7).values
        two = entropy_series(psi, prop, t).values
        assert np.array_equal(one, two)

    def test_validation(self):
        with pytest.raises(ValueError):
            EntropySeries(np.array([0.0, 2.0, 1.0]), np.zeros(3))
        with pytest.raises(ValueError):
            EntropySeries(np.array([0.0, 1.0]), np.array([0.0, np.nan]))

    def test_window(self):
        s = EntropySeries(np.linspace(0, 1, 11), np.linspace(0, 1, 11) ** 2)
        w = s.window(0.2, 0.5)
        assert w.times[0] == pytest.approx(0.2) and w.times[-1] == pytest.approx(0.5)


class TestLeakage:
    def vacuum_product(self, n_max):
        comp = CompositeSpace(FockSpace(n_max), FockSpace(n_max))
        u = bosonic_coherent(PhasePoint(0, 0), 1, comp.factor_a)
        return product_state(u, u, comp)

    def test_vacuum(self):
        assert leakage(self.vacuum_product(20), 5) == 0.0

    def test_coherent_tail(self):
        comp = CompositeSpace(FockSpace(40), FockSpace(40))
        pt = PhasePoint(1.0, 1.0)                   # |v|^2 = 1 at hbar = 1
        u = bosonic_coherent(pt, 1.0, comp.factor_a)
        assert leakage(product_state(u, u, comp), 5) < 1e-12

    def test_monotone_in_nmax(self):
        # raw amplitudes: the smaller spaces are below the construction guard on purpose
        values = []
        for n_max in (40, 20, 10):
            comp = CompositeSpace(FockSpace(n_max), FockSpace(n_max))
            u = bosonic_amplitudes(1.0 + 0.0j, n_max, check_tail=False)
            values.append(leakage(StateVector(comp, np.kron(u, u)), 5))
        assert values[0] < values[1] < values[2]


def test_conservation_dicke_and_bec():
    t = np.linspace(0, 50, 26)
    p = DickeParams(two_j=5, n_max=30)
    H = build_dicke(p)
    psi, _, _ = initial_state(p, (0.5, 0.3, 0.8, 0.0))
    amps = Propagator(H).propagate(psi.amplitudes, t)
    d = diagnostics(amps, H, {"parity": dicke_parity(p)})
    assert d["norm_drift"] <= 1e-10 and d["energy_drift"] <= 1e-8 and d["parity_drift"] <= 1e-8

    q = BecParams(n_max=30)
    Hb = build_bec(q)
    psi, _, _ = initial_state(q, (1, 1, 1, 1))
    amps = Propagator(Hb).propagate(psi.amplitudes, t)
    d = diagnostics(amps, Hb, {"number": np.real(total_number(q.space()).diagonal())})
    assert d["norm_drift"] <= 1e-10 and d["energy_drift"] <= 1e-8 and d["number_drift"] <= 1e-8
