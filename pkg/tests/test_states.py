import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semient.hilbert import (CompositeSpace, FockSpace, SpinSpace, ladder_ops, number_op, rle,
                             spin_ops)
from semient.states import (DomainError, PhasePoint, TruncationError, as_points,
                            bosonic_coherent, bosonic_label, husimi_initial_density,
                            product_state, spin_coherent, spin_label)


def expect(mat, amps):
    return complex(np.vdot(amps, mat @ amps))


class TestBosonic:
    def test_origin_is_vacuum(self):
        s = bosonic_coherent(PhasePoint(0, 0), 1.0, FockSpace(10))
        assert s.amplitudes[0] == 1 and np.all(s.amplitudes[1:] == 0)

    def test_mean_number(self):
        space = FockSpace(40)
        s = bosonic_coherent(PhasePoint(1, 1), 1.0, space)
        n = expect(number_op(space), s.amplitudes).real
        assert n == pytest.approx(1.0, abs=1e-8)
        assert np.sum(np.arange(41) * np.abs(s.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-8)

    def test_overlap(self):
        space = FockSpace(60)
        p1, p2 = PhasePoint(1.0, -0.5), PhasePoint(-0.3, 1.2)
        u = bosonic_coherent(p1, 0.7, space).amplitudes
        w = bosonic_coherent(p2, 0.7, space).amplitudes
        dv = bosonic_label(p1, 0.7) - bosonic_label(p2, 0.7)
        assert abs(np.vdot(u, w)) ** 2 == pytest.approx(np.exp(-abs(dv) ** 2), abs=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-2, 2), st.floats(-2, 2), st.sampled_from([0.1, 0.5, 1.0]),
           st.sampled_from([20, 40, 60]))
    def test_eigenvector(self, q, p, hbar, n_max):
        space = FockSpace(n_max)
        pt = PhasePoint(q, p)
        try:
            s = bosonic_coherent(pt, hbar, space)
        except TruncationError:
            return
        a, _ = ladder_ops(space)
        resid = a @ s.amplitudes - bosonic_label(pt, hbar) * s.amplitudes
        assert np.linalg.norm(resid) <= 1e-6
        assert s.norm() == pytest.approx(1.0, abs=1e-12)

    def test_tail_guard(self):
        with pytest.raises(TruncationError):
            bosonic_coherent(PhasePoint(5, 5), 1.0, FockSpace(20))
        # the guard tracks the exact eigenvalue residual
        with pytest.raises(TruncationError):
            bosonic_coherent(PhasePoint(0, 2), 0.1, FockSpace(60))
        bosonic_coherent(PhasePoint(0, 2), 0.1, FockSpace(70))


class TestSpin:
    def test_origin_is_bottom_state(self):
        space = SpinSpace(5)
        s = spin_coherent(PhasePoint(0, 0), 1.0, space)
        _, _, jz = spin_ops(space, 1.0)
        assert s.amplitudes[0] == 1
        assert expect(jz, s.amplitudes).real == pytest.approx(-space.j)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.floats(0, 0.95), st.floats(0, 2 * np.pi),
           st.sampled_from([0.5, 1.0]))
    def test_bloch_sphere(self, two_j, frac, phase, hbar):
        space = SpinSpace(two_j)
        r = np.sqrt(frac * hbar * space.j)
        s = spin_coherent(PhasePoint(r * np.cos(phase), r * np.sin(phase)), hbar, space)
        jp, jm, jz = spin_ops(space, hbar)
        jx = expect((jp + jm) / 2, s.amplitudes)
        jy = expect((jp - jm) / 2j, s.amplitudes)
        z = expect(jz, s.amplitudes)
        total = abs(jx) ** 2 + abs(jy) ** 2 + z.real ** 2
        assert total == pytest.approx((hbar * space.j) ** 2, abs=1e-10)
        assert s.norm() == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize("q,p", [(0.3, 0.1), (-0.2, 0.5), (0.05, -0.6)])
    def test_spin_half_closed_form(self, q, p):
        # 2x2 exponential of the generator, analytically: (|down> + v|up>)/sqrt(1+|v|^2)
        space = SpinSpace(1)
        v = spin_label(PhasePoint(q, p), 1.0, 1)
        expected = np.array([1.0, v]) / np.sqrt(1 + abs(v) ** 2)
        got = spin_coherent(PhasePoint(q, p), 1.0, space).amplitudes
        assert np.max(np.abs(got - expected)) <= 1e-12

    def test_pole_rejected(self):
        with pytest.raises(DomainError):
            spin_coherent(PhasePoint(2, 0), 1.0, SpinSpace(2))


class TestProduct:
    def test_single_amplitude(self):
        comp = CompositeSpace(FockSpace(4), SpinSpace(3))
        psi = product_state(bosonic_coherent(PhasePoint(0, 0), 1, comp.factor_a),
                            spin_coherent(PhasePoint(0, 0), 1, comp.factor_b), comp)
        assert np.count_nonzero(psi.amplitudes) == 1

    def test_unentangled_and_normalised(self):
        comp = CompositeSpace(FockSpace(30), SpinSpace(4))
        psi = product_state(bosonic_coherent(PhasePoint(1, -1), 1, comp.factor_a),
                            spin_coherent(PhasePoint(0.4, 0.2), 1, comp.factor_b), comp)
        assert abs(rle(psi.reduced("a"))) <= 1e-14
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)

    def test_dims_checked(self):
        comp = CompositeSpace(FockSpace(4), FockSpace(4))
        with pytest.raises(ValueError):
            product_state(bosonic_coherent(PhasePoint(0, 0), 1, FockSpace(3)),
                          bosonic_coherent(PhasePoint(0, 0), 1, FockSpace(4)), comp)


class TestHusimi:
    def test_peak_value(self):
        d = husimi_initial_density(as_points([1, 1, 1, 1]), 1.0)
        assert d.pdf(d.center_vector()) == pytest.approx((2 * np.pi) ** -2)

    @pytest.mark.parametrize("hbar", [0.1, 1.0])
    def test_marginal_purity_quadrature(self, hbar):
        d = husimi_initial_density(as_points([1, 1, 1, 1]), hbar)
        h = 0.02 * np.sqrt(hbar)
        x = np.arange(-8 * np.sqrt(hbar), 8 * np.sqrt(hbar), h)
        qq, pp = np.meshgrid(x, x)
        marg = np.exp(-(qq ** 2 + pp ** 2) / (2 * hbar)) / (2 * np.pi * hbar)
        assert np.sum(marg) * h * h == pytest.approx(1.0, rel=1e-8)
        assert np.sum(marg ** 2) * h * h == pytest.approx(d.marginal_purity(), rel=1e-8)
        assert d.marginal_purity() == pytest.approx(1 / (4 * np.pi * hbar))

    def test_monte_carlo_normalisation(self):
        hbar = 0.5
        d = husimi_initial_density(as_points([1, -1, 0.5, 2]), hbar)
        rng = np.random.default_rng(11)
        half = 5 * np.sqrt(hbar)
        x = d.center_vector() + rng.uniform(-half, half, size=(100_000, 4))
        vol = (2 * half) ** 4
        vals = vol * d.pdf(x)
        est, se = vals.mean(), vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(est - 1.0) <= 3 * se

    def test_needs_two_modes(self):
        with pytest.raises(ValueError):
            husimi_initial_density(as_points([1, 1]), 1.0)
