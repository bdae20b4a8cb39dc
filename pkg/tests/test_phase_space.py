import numpy as np
import pytest

import qtlab as qt
from qtlab.errors import DegreeOverflowError, ValidationError
from qtlab.phase_space import MAX_DEGREE, PolyObservable

from helpers import random_superposition, wigner_brute_force

X = PolyObservable.x
P = PolyObservable.p
ONE = PolyObservable.one


@pytest.fixture
def grid():
    return qt.Grid1D(n=256, x_min=-20.0, dx=40.0 / 256)


class TestWigner:
    def test_matches_analytic_gaussian(self, grid):
        # sigma^2 = 1/2 packet: F = exp(-X^2 - P^2)/pi, F(0, 0) = 1/pi
        psi = qt.make_gaussian(grid, 0.0, 0.0, 1.0 / np.sqrt(2.0))
        w = qt.wigner(psi)
        exact = np.exp(-w.x[:, None] ** 2 - w.p[None, :] ** 2) / np.pi
        assert np.max(np.abs(w.values - exact)) < 1e-8
        i0 = np.argmin(np.abs(w.x))
        j0 = np.argmin(np.abs(w.p))
        assert w.values[i0, j0] == pytest.approx(1.0 / np.pi, abs=1e-10)

    def test_matches_brute_force_quadrature(self):
        # independent O(n^3) direct-sum oracle on a small grid
        grid = qt.Grid1D(n=128, x_min=-16.0, dx=32.0 / 128)
        psi = qt.superpose([qt.make_gaussian(grid, -1.5, 0.5, 1.1),
                            qt.make_gaussian(grid, 1.0, -0.3, 0.9)])
        w = qt.wigner(psi)
        ref = wigner_brute_force(psi)
        assert np.max(np.abs(w.values - ref)) < 1e-10

    def test_marginals(self, grid):
        rng = np.random.default_rng(21)
        for _ in range(20):
            psi = random_superposition(grid, rng)
            w = qt.wigner(psi)
            l1_x = np.sum(np.abs(w.marginal_x() - psi.density())) * grid.dx
            phi = qt.to_momentum(psi)
            l1_p = np.sum(np.abs(w.marginal_p() - phi.density())) * grid.dp
            assert l1_x < 1e-7
            assert l1_p < 1e-7

    def test_total_integral_is_one(self, grid):
        psi = qt.make_gaussian(grid, 1.0, 0.5, 1.0)
        w = qt.wigner(psi)
        assert np.sum(w.values) * grid.dx * grid.dp == pytest.approx(1.0, abs=1e-8)

    def test_single_gaussian_nonnegative(self, grid):
        psi = qt.make_gaussian(grid, 1.0, -1.0, 0.8)
        w = qt.wigner(psi)
        assert w.values.min() >= -1e-10

    def test_superposition_goes_negative(self, grid):
        psi = qt.superpose([qt.make_gaussian(grid, -4.0, 0.0, 1.0),
                            qt.make_gaussian(grid, 4.0, 0.0, 1.0)])
        w = qt.wigner(psi)
        assert w.values.min() < -1e-2

    def test_boundary_leak_rejected(self, grid):
        amps = np.full(grid.n, 1.0 + 0j)
        psi = qt.WaveFunction(grid, amps / np.sqrt(grid.length))
        with pytest.raises(qt.BoundaryLeakError):
            qt.wigner(psi)


class TestConditionalMomentum:
    def test_boosted_gaussian_is_constant(self, grid):
        w = qt.wigner(qt.make_gaussian(grid, 0.0, 2.0, 1.0))
        pbar, ok = qt.conditional_momentum(w)
        assert np.max(np.abs(pbar[ok] - 2.0)) < 1e-8

    def test_ground_state_is_zero(self, grid):
        w = qt.wigner(qt.make_gaussian(grid, 0.0, 0.0, 1.0 / np.sqrt(2.0)))
        pbar, ok = qt.conditional_momentum(w)
        assert np.max(np.abs(pbar[ok])) < 1e-8

    def test_matches_bohm_momentum_on_two_slit_state(self, two_slit_run):
        grid, scenario, cfg, series, bundle = two_slit_run
        state = series.states[len(series) // 2]
        w = qt.wigner(state)
        pbar, ok = qt.conditional_momentum(w)
        fields = qt.decompose(state, cfg.mass)
        core = ok & (state.density() > 1e-4)
        assert np.max(np.abs(pbar[core] - fields.grad_s[core])) < 1e-6


class TestStarProduct:
    def test_x_star_p(self):
        # x * p = xp + i hbar/2
        for hbar in (1.0, 0.5, 2.0):
            out = star = qt.star(X(), P(), hbar)
            assert out == X() * P() + ONE().scaled(0.5j * hbar)

    def test_identity_element(self):
        a = X(2) * P() + X().scaled(3.0) - ONE().scaled(2.5)
        assert qt.star(a, ONE(), 1.0) == a
        assert qt.star(ONE(), a, 1.0) == a

    def test_associativity_instance(self):
        lhs = qt.star(qt.star(X(), P(), 1.0), P(), 1.0)
        rhs = qt.star(X(), qt.star(P(), P(), 1.0), 1.0)
        assert lhs == rhs

    def test_associativity_random_polynomials_exact(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            def rand_poly():
                coeffs = {}
                for _ in range(4):
                    ax, ap = int(rng.integers(0, 3)), int(rng.integers(0, 3))
                    coeffs[(ax, ap)] = complex(rng.integers(-9, 10),
                                               rng.integers(-9, 10))
                return PolyObservable(coeffs)
            a, b, c = rand_poly(), rand_poly(), rand_poly()
            hbar = 0.5
            assert qt.star(qt.star(a, b, hbar), c, hbar) \
                == qt.star(a, qt.star(b, c, hbar), hbar)

    def test_bilinearity(self):
        a, b, c = X(2), P(2), X() * P()
        left = qt.star(a + b.scaled(2.0), c, 1.0)
        right = qt.star(a, c, 1.0) + qt.star(b, c, 1.0).scaled(2.0)
        assert left == right

    def test_degree_overflow(self):
        with pytest.raises(DegreeOverflowError):
            qt.star(X(7), P(7), 1.0)
        with pytest.raises(DegreeOverflowError):
            PolyObservable({(MAX_DEGREE + 1, 0): 1.0})

    def test_negative_exponents_rejected(self):
        with pytest.raises(ValidationError):
            PolyObservable({(-1, 0): 1.0})


class TestBrackets:
    def test_quadratic_symbols_reduce_to_poisson(self):
        # no hbar corrections when either argument is quadratic
        a, b = X(2), P(2)
        pb = qt.poisson_bracket(a, b)
        assert pb == PolyObservable({(1, 1): 4.0})
        for hbar in (1.0, 0.25, 2.0):
            assert qt.moyal_bracket(a, b, hbar) == pb
        cubic = X(3) + P()
        assert qt.moyal_bracket(X(2), cubic, 0.5) == qt.poisson_bracket(X(2), cubic)

    def test_baker_of_x_and_p(self):
        # i hbar/2 terms cancel in the symmetric combination
        assert qt.baker_bracket(X(), P(), 1.0) == X() * P()

    def test_moyal_antisymmetry_baker_symmetry(self):
        a = X(3) + X() * P()
        b = P(2) + X(2).scaled(0.5)
        m_ab = qt.moyal_bracket(a, b, 0.5)
        m_ba = qt.moyal_bracket(b, a, 0.5)
        assert m_ab == m_ba.scaled(-1.0)
        assert qt.baker_bracket(a, b, 0.5) == qt.baker_bracket(b, a, 0.5)

    def test_cubic_correction_scales_as_hbar_squared(self):
        # moyal(x^3, p^3) - poisson(x^3, p^3) = -(3/2) hbar^2
        pb = qt.poisson_bracket(X(3), P(3))
        assert pb == PolyObservable({(2, 2): 9.0})
        mags = []
        hbars = (1.0, 0.5, 0.25, 0.125)
        for hbar in hbars:
            diff = qt.moyal_bracket(X(3), P(3), hbar) - pb
            assert diff == PolyObservable({(0, 0): -1.5 * hbar**2})
            mags.append(abs(diff.coefficient(0, 0)))
        slope = np.polyfit(np.log(hbars), np.log(mags), 1)[0]
        assert abs(slope - 2.0) < 1e-9

    def test_real_symbols_give_real_brackets(self):
        a = X(2) * P() + X().scaled(0.5)
        b = P(3) - X(2)
        assert qt.moyal_bracket(a, b, 1.0).has_real_coefficients()
        assert qt.baker_bracket(a, b, 1.0).has_real_coefficients()

    def test_moyal_rejects_zero_hbar(self):
        with pytest.raises(ValidationError):
            qt.moyal_bracket(X(), P(), 0.0)

    def test_poisson_canonical_pair_and_antisymmetry(self):
        assert qt.poisson_bracket(X(), P()) == ONE()
        a = X(2) * P(2)
        assert qt.poisson_bracket(a, a).is_zero()
