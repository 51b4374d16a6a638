import numpy as np
import pytest
import scipy.sparse as sp

from semient.dynamics import EntropySeries, Propagator, entropy_series
from semient.hilbert import CompositeSpace, FockSpace, HermitianOperator, SpinSpace
from semient.models import (BecParams, DickeParams, PolynomialHamiltonian, build_bec,
                            initial_state, weyl_quantize)
from semient.shorttime import (IllConditionedFit, correlation_coefficient, correlations,
                               entanglement_exists, hbar_scan, linear_onset_test,
                               model_factory, onset_derivatives, quad_coefficient_from_series,
                               spin_scan)
from semient.states import as_points, bosonic_coherent, product_state


def random_hermitian(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_factor(space, rng):
    from semient.states import FactorState
    z = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return FactorState(space, z / np.linalg.norm(z))


def qq_system(lam, hbar, n_max=50, coords=(1, 1, 1, 1)):
    comp = CompositeSpace(FockSpace(n_max), FockSpace(n_max))
    H = weyl_quantize(PolynomialHamiltonian(((lam, 1, 0, 1, 0),)), hbar, comp)
    pa, pb = as_points(coords)
    u = bosonic_coherent(pa, hbar, comp.factor_a)
    v = bosonic_coherent(pb, hbar, comp.factor_b)
    return H, u, v, product_state(u, v, comp)


class TestCorrelations:
    def test_separable_is_zero(self):
        rng = np.random.default_rng(4)
        comp = CompositeSpace(FockSpace(4), SpinSpace(3))
        A, B = random_hermitian(5, rng), random_hermitian(4, rng)
        H = HermitianOperator(comp, sp.kron(A, np.eye(4)) + sp.kron(np.eye(5), B))
        corr = correlations(H, random_factor(comp.factor_a, rng), random_factor(comp.factor_b, rng))
        assert abs(corr.combination) <= 1e-12
        assert not entanglement_exists(corr)

    def test_separable_evolution_is_zero(self):
        rng = np.random.default_rng(5)
        comp = CompositeSpace(FockSpace(4), FockSpace(3))
        A, B = random_hermitian(5, rng), random_hermitian(4, rng)
        H = HermitianOperator(comp, sp.kron(A, np.eye(4)) + sp.kron(np.eye(5), B))
        u, v = random_factor(comp.factor_a, rng), random_factor(comp.factor_b, rng)
        s = entropy_series(product_state(u, v, comp), Propagator(H), np.linspace(0, 10, 21))
        assert np.max(np.abs(s.values)) <= 1e-12

    @pytest.mark.parametrize("hbar", [1.0, 0.5, 0.1])
    def test_qq_coefficient(self, hbar):
        lam = 0.3
        H, u, v, _ = qq_system(lam, hbar)
        c = correlation_coefficient(H, u, v, hbar)
        assert c.value == pytest.approx(lam ** 2 / 2, abs=1e-8)
        assert entanglement_exists(correlations(H, u, v))

    def test_qq_zero_coupling(self):
        H, u, v, _ = qq_system(0.0, 1.0)
        assert not entanglement_exists(correlations(H, u, v))

    def test_qq_finite_difference_oracle(self):
        lam, hbar = 0.3, 0.5
        H, u, v, psi = qq_system(lam, hbar)
        s0, ds, curv = onset_derivatives(psi, Propagator(H, hbar), h=1e-3)
        assert curv == pytest.approx(lam ** 2 / 2, rel=1e-4)

    def test_variance(self):
        rng = np.random.default_rng(6)
        comp = CompositeSpace(FockSpace(3), FockSpace(2))
        for _ in range(5):
            Hd = random_hermitian(comp.dim, rng)
            H = HermitianOperator(comp, Hd)
            u, v = random_factor(comp.factor_a, rng), random_factor(comp.factor_b, rng)
            corr = correlations(H, u, v)
            psi = np.kron(u.amplitudes, v.amplitudes)
            var = np.vdot(psi, Hd @ Hd @ psi).real - np.vdot(psi, Hd @ psi).real ** 2
            assert corr.variance == pytest.approx(var, abs=1e-12)
            assert corr.variance >= 0

    def test_invariant_under_separable_terms(self):
        rng = np.random.default_rng(7)
        p = BecParams(n_max=20)
        H = build_bec(p)
        _, u, v = initial_state(p, (1, 1, 1, 1))
        A, B = random_hermitian(21, rng), random_hermitian(21, rng)
        extra = HermitianOperator(H.space, sp.kron(A, np.eye(21)) + sp.kron(np.eye(21), B))
        base = correlations(H, u, v).combination
        assert correlations(H + extra, u, v).combination == pytest.approx(base, abs=1e-8)


class TestQuadFit:
    def test_round_trip(self):
        t = np.linspace(0, 0.4, 41)
        s = EntropySeries(t, 0.05 * t ** 2)
        assert quad_coefficient_from_series(s, 0.4).value == pytest.approx(0.05, abs=1e-8)
        assert quad_coefficient_from_series(s, 0.4, degree=4).value == pytest.approx(0.05, abs=1e-8)

    def test_zero_series(self):
        t = np.linspace(0, 1, 21)
        assert quad_coefficient_from_series(EntropySeries(t, np.zeros(21)), 1.0).value == 0.0

    def test_too_few_points(self):
        t = np.linspace(0, 1, 5)
        with pytest.raises(IllConditionedFit):
            quad_coefficient_from_series(EntropySeries(t, t ** 2), 1.0)

    def test_bec_matches_correlations(self):
        p = BecParams(n_max=40)
        psi, u, v = initial_state(p, (1, 1, 1, 1))
        H = build_bec(p)
        corr = correlation_coefficient(H, u, v, 1.0).value
        t_hi = np.sqrt(0.01 / corr)
        s = entropy_series(psi, Propagator(H), np.linspace(0, t_hi, 41))
        fit = quad_coefficient_from_series(s, t_hi, degree=4).value
        assert fit == pytest.approx(corr, rel=0.01)


class TestOnset:
    @pytest.mark.parametrize("model", ["bec", "dicke", "qq"])
    def test_zero_value_and_slope(self, model):
        if model == "bec":
            p = BecParams(n_max=40)
            psi, u, v = initial_state(p, (1, 1, 1, 1))
            H, hb = build_bec(p), 1.0
        elif model == "dicke":
            from semient.models import build_dicke, rescale_initial
            p = DickeParams(two_j=7, n_max=30)
            psi, u, v = initial_state(p, rescale_initial((0.5, 0, 1, 0), 7))
            H, hb = build_dicke(p), 1.0
        else:
            H, u, v, psi = qq_system(0.3, 0.5)
            hb = 0.5
        prop = Propagator(H, hb)
        s0, ds, curv = onset_derivatives(psi, prop)
        assert abs(s0) <= 1e-12 and abs(ds) <= 1e-8
        expected = correlation_coefficient(H, u, v, hb).value
        assert curv == pytest.approx(expected, rel=0.01)
        t_hi = np.sqrt(0.01 / expected)
        series = entropy_series(psi, prop, np.linspace(0, t_hi, 41))
        slope, err = linear_onset_test(series, t_hi)
        assert abs(slope) <= 3 * err + 1e-12


def test_linear_term_is_detected():
    t = np.linspace(0, 0.4, 41)
    # exp(t) - 1 contributes a further unit slope times 1e-3
    s = EntropySeries(t, 1e-4 * t + 0.05 * t ** 2 + 1e-3 * np.expm1(t))
    slope, err = linear_onset_test(s, 0.4)
    assert slope == pytest.approx(1.1e-3, rel=1e-3)
    assert abs(slope) > 10 * err


class TestScans:
    def test_qq_scan(self):
        def factory(hb):
            H, u, v, _ = qq_system(0.3, hb)
            return H, u, v
        scan = hbar_scan(factory, [1.0, 0.5, 0.1])
        assert np.allclose(scan.values, 0.045, atol=1e-8)
        assert np.all(scan.differences <= 1e-8)

    def test_bec_fit_scan_converges(self):
        factory = model_factory(lambda hb: BecParams(hbar=hb, n_max=60 if hb < 0.3 else 40),
                                (1, 1, 1, 1))
        scan = hbar_scan(factory, [1.0, 0.5, 0.1], source="fit")
        d = scan.differences
        assert d[0] > d[1]

    def test_spin_scan(self):
        scan = spin_scan(DickeParams(n_max=40), (0.5, 0, 1, 0), [7, 13])
        a, b = scan.values
        assert abs(a - b) <= 0.02 * abs(a)
