"""Unit library: activations, ridge-unit evaluation, sparse l1-ball covers, and
the randomized sparsification of dense parameter vectors onto the cover grid."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ridgepursuit import (
    Activation,
    CoverSizeError,
    RidgeUnit,
    SparseCover,
    cover_count_library,
    cover_count_log_bound,
    enumerate_cover,
    eval_unit,
    library_matrix,
    lift,
    sparsify_theta,
)

from conftest import three_se


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------


class TestActivation:
    def test_kinds_and_bounds(self):
        assert Activation("ramp").bound == 2.0
        assert Activation("sine").bound == 1.0
        assert Activation("tanh").bound == 1.0

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            Activation("step")

    def test_pointwise_values(self):
        ramp, sine, tanh = Activation("ramp"), Activation("sine"), Activation("tanh")
        u = np.array([-1.5, -0.2, 0.0, 0.7, 2.0])
        np.testing.assert_allclose(ramp(u), np.maximum(u, 0.0))
        np.testing.assert_allclose(sine(u), np.sin(u))
        np.testing.assert_allclose(tanh(u), np.tanh(u))

    def test_one_lipschitz_on_usage_range(self, rng):
        # 1e5 random scalar pairs per activation; exact inequality with only
        # float roundoff slack.
        u = rng.uniform(-8.0, 8.0, size=100_000)
        up = rng.uniform(-8.0, 8.0, size=100_000)
        for kind in ("ramp", "sine", "tanh"):
            act = Activation(kind)
            gap = np.abs(act(u) - act(up))
            assert np.all(gap <= np.abs(u - up) + 1e-12), kind

    def test_range_bound_on_domain(self, rng):
        # |phi(u)| <= bound(kind) for |u| <= 2 (the l1 budget on [-1,1]^d).
        u = rng.uniform(-2.0, 2.0, size=50_000)
        for kind in ("ramp", "sine", "tanh"):
            act = Activation(kind)
            assert np.max(np.abs(act(u))) <= act.bound + 1e-12

    def test_derivative_matches_finite_differences(self, rng):
        u = rng.uniform(-2.0, 2.0, size=200)
        u = u[np.abs(u) > 1e-3]  # keep away from the ramp kink
        h = 1e-6
        for kind in ("ramp", "sine", "tanh"):
            act = Activation(kind)
            fd = (act(u + h) - act(u - h)) / (2 * h)
            np.testing.assert_allclose(act.derivative(u), fd, atol=1e-6)

    def test_derivative_subgradient_at_kink(self):
        assert Activation("ramp").derivative(np.array([0.0]))[0] == 0.0


# ---------------------------------------------------------------------------
# Units and evaluation
# ---------------------------------------------------------------------------


class TestEvalUnit:
    def test_ramp_positive_part(self):
        unit = RidgeUnit(Activation("ramp"), np.array([1.0, 0.0]))
        assert eval_unit(unit, np.array([0.5])) == pytest.approx(0.5)

    def test_ramp_clips_negative(self):
        unit = RidgeUnit(Activation("ramp"), np.array([1.0, 0.0]))
        assert eval_unit(unit, np.array([-0.5])) == 0.0

    def test_sine_zero_parameter(self):
        unit = RidgeUnit(Activation("sine"), np.zeros(3))
        x = np.array([0.4, -0.9])
        assert eval_unit(unit, x) == 0.0

    def test_sign_flips_value(self):
        theta = np.array([1.0, 0.3])
        plus = RidgeUnit(Activation("ramp"), theta, sign=1)
        minus = RidgeUnit(Activation("ramp"), theta, sign=-1)
        x = np.array([0.5])
        assert eval_unit(minus, x) == -eval_unit(plus, x)

    def test_batch_matches_pointwise(self, rng):
        theta = np.array([0.7, -0.4, 0.5])
        unit = RidgeUnit(Activation("tanh"), theta)
        X = rng.uniform(-1, 1, size=(20, 2))
        batch = eval_unit(unit, X)
        single = np.array([eval_unit(unit, row) for row in X])
        np.testing.assert_allclose(batch, single)

    def test_dimension_mismatch_rejected(self):
        unit = RidgeUnit(Activation("ramp"), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            eval_unit(unit, np.array([0.5, 0.5]))

    def test_theta_is_immutable(self):
        theta = np.array([1.0, 0.0])
        unit = RidgeUnit(Activation("ramp"), theta)
        with pytest.raises(ValueError):
            unit.theta[0] = 5.0
        theta[0] = 5.0  # mutating the caller's array must not leak in
        assert unit.theta[0] == 1.0

    def test_bad_sign_rejected(self):
        with pytest.raises(ValueError):
            RidgeUnit(Activation("ramp"), np.array([1.0, 0.0]), sign=2)

    def test_lift_appends_ones(self, rng):
        X = rng.uniform(-1, 1, size=(7, 3))
        L = lift(X)
        assert L.shape == (7, 4)
        np.testing.assert_allclose(L[:, :3], X)
        np.testing.assert_allclose(L[:, 3], 1.0)

    def test_library_matrix_columns(self, rng):
        act = Activation("ramp")
        thetas = np.array([[1.0, 0.0], [0.5, 0.5], [-0.7, 0.2]])
        X = rng.uniform(-1, 1, size=(9, 1))
        mat = library_matrix(act, thetas, X)
        assert mat.shape == (9, 3)
        for j, theta in enumerate(thetas):
            unit = RidgeUnit(act, theta)
            np.testing.assert_allclose(mat[:, j], eval_unit(unit, X))

    def test_library_matrix_dimension_mismatch(self, rng):
        X = rng.uniform(-1, 1, size=(4, 3))
        with pytest.raises(ValueError):
            library_matrix(Activation("ramp"), np.array([[1.0, 0.0]]), X)


# ---------------------------------------------------------------------------
# Cover enumeration
# ---------------------------------------------------------------------------


class TestEnumerateCover:
    def test_d1_m1_elements(self):
        cover = enumerate_cover(1, 1, 2.0)
        assert cover.size == 3
        rows = {tuple(row) for row in cover.thetas}
        assert rows == {(2.0,), (-2.0,), (0.0,)}

    def test_d2_m2_count(self):
        assert enumerate_cover(2, 2, 2.0).size == 15

    def test_d3_m2_count(self):
        assert enumerate_cover(3, 2, 2.0).size == 28

    def test_multiset_count_formula_on_grid(self):
        for d in range(1, 13):
            for m in range(1, 7):
                expected = math.comb(2 * d + m, m)
                if expected > 100_000:
                    continue
                cover = enumerate_cover(d, m, 1.5)
                assert cover.size == expected, (d, m)
                assert len(cover) == expected

    def test_elements_respect_radius(self):
        cover = enumerate_cover(3, 3, 1.7)
        norms = np.abs(cover.thetas).sum(axis=1)
        assert np.all(norms <= 1.7 + 1e-12)

    def test_distinct_vectors_deduplicated_and_sorted(self):
        cover = enumerate_cover(2, 2, 2.0)
        # {+e1, -e1} and {0, 0} collide as vectors, so distinct < multiset count
        assert cover.n_distinct == 13
        assert cover.thetas.shape == (13, 2)
        as_tuples = [tuple(row) for row in cover.thetas]
        assert as_tuples == sorted(as_tuples)

    def test_cap_exceeded_raises(self):
        with pytest.raises(CoverSizeError):
            enumerate_cover(500, 4, 2.0, cap=10**6)

    def test_default_cap_is_million(self):
        # C(2*500+4, 4) > 1e6 — must refuse without an explicit cap too.
        with pytest.raises(CoverSizeError):
            enumerate_cover(500, 4, 2.0)

    def test_invalid_arguments(self):
        for bad in ((0, 1, 2.0), (1, 0, 2.0), (1, 1, 0.0)):
            with pytest.raises(ValueError):
                enumerate_cover(*bad)

    def test_contains_membership(self):
        cover = enumerate_cover(2, 2, 2.0)
        assert cover.contains(np.array([1.0, 1.0]))
        assert cover.contains(np.array([0.0, 0.0]))
        assert not cover.contains(np.array([0.3, 0.0]))


# ---------------------------------------------------------------------------
# Sparsification onto the cover
# ---------------------------------------------------------------------------


class TestSparsifyTheta:
    def test_full_mass_on_one_atom_is_fixed_point(self, rng):
        theta = np.array([2.0, 0.0, 0.0])
        for _ in range(50):
            out = sparsify_theta(theta, 3, 2.0, rng)
            np.testing.assert_array_equal(out, theta)

    def test_zero_vector_maps_to_zero(self, rng):
        theta = np.zeros(4)
        out = sparsify_theta(theta, 2, 2.0, rng)
        np.testing.assert_array_equal(out, np.zeros(4))

    def test_two_outcome_distribution(self, rng):
        # theta=(L/2, L/2), one grid draw: output is L*e1 or L*e2, each w.p. 1/2
        lam = 2.0
        theta = np.array([1.0, 1.0])
        outcomes = {(lam, 0.0): 0, (0.0, lam): 0}
        n_draws = 4000
        for _ in range(n_draws):
            out = sparsify_theta(theta, 1, lam, rng)
            key = tuple(out)
            assert key in outcomes, key
            outcomes[key] += 1
        # binomial(4000, 1/2): 3 sigma ~ 95
        half = n_draws / 2
        sigma = math.sqrt(n_draws * 0.25)
        assert abs(outcomes[(lam, 0.0)] - half) <= 3 * sigma

    def test_norm_violation_rejected(self, rng):
        with pytest.raises(ValueError):
            sparsify_theta(np.array([1.5, 1.0]), 2, 2.0, rng)

    def test_output_always_in_cover(self, rng):
        d, m_grid, lam = 3, 2, 2.0
        cover = enumerate_cover(d, m_grid, lam)
        for _ in range(200):
            theta = rng.uniform(-1, 1, size=d)
            theta *= rng.uniform(0, lam) / max(np.abs(theta).sum(), 1e-12)
            out = sparsify_theta(theta, m_grid, lam, rng)
            assert cover.contains(out)

    def test_unbiasedness(self, rng):
        # E[theta_tilde] = theta: each coordinate atom is drawn w.p.
        # |theta_j|/lam and contributes sign(theta_j)*lam/m per draw.
        theta = np.array([0.8, -0.5, 0.3])
        draws = np.stack(
            [sparsify_theta(theta, 4, 2.0, rng) for _ in range(20_000)]
        )
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - theta) <= 3 * se + 1e-12)

    def test_distortion_bound_monte_carlo(self, rng):
        # Mean empirical squared distortion of theta.x over the design is at
        # most lam*|theta|_1*max|x|^2/m_grid (+3 SE), for random dense thetas.
        d, n, m_grid, lam = 20, 200, 4, 2.0
        X = rng.uniform(-1, 1, size=(n, d))
        xmax_sq = float(np.max(np.abs(X)) ** 2)
        n_draws = 2000
        for _ in range(10):
            theta = rng.uniform(-1, 1, size=d)
            theta *= rng.uniform(0.2, 1.0) * lam / np.abs(theta).sum()
            base = X @ theta
            dist = np.empty(n_draws)
            for k in range(n_draws):
                tilde = sparsify_theta(theta, m_grid, lam, rng)
                dist[k] = np.mean((base - X @ tilde) ** 2)
            bound = lam * np.abs(theta).sum() * xmax_sq / m_grid
            mean, band = three_se(dist)
            assert mean <= bound + band


# ---------------------------------------------------------------------------
# Library cardinality accounting
# ---------------------------------------------------------------------------


class TestCoverCountLibrary:
    def test_choose_one_of_two(self):
        assert cover_count_library(2, 1) == 2

    def test_multisets_of_two_over_three(self):
        assert cover_count_library(3, 2) == 6

    def test_twenty_and_log_bound(self):
        count = cover_count_library(4, 3)
        assert count == 20
        bound = cover_count_log_bound(4, 3)
        assert math.log(20) <= bound
        assert bound == pytest.approx(3 * math.log(math.e * (4 / 3 + 1)))

    def test_exact_python_integers(self):
        # big inputs must not overflow (arbitrary precision)
        count = cover_count_library(10**6, 50)
        assert isinstance(count, int)
        assert count == math.comb(10**6 - 1 + 50, 50)

    def test_invalid_inputs(self):
        for M, m in ((0, 1), (1, 0), (-2, 3)):
            with pytest.raises(ValueError):
                cover_count_library(M, m)

    @given(st.integers(1, 40), st.integers(1, 40))
    def test_log_bound_dominates(self, M, m):
        assert math.log(cover_count_library(M, m)) <= cover_count_log_bound(M, m) + 1e-12


class TestSparseCoverType:
    def test_size_vs_distinct_and_contains_tolerance(self):
        cover = enumerate_cover(1, 2, 2.0)
        # multisets of 2 over {+e1,-e1,0}: C(4,2)=6 ; vectors {2,1,0,-1,-2}: 5
        assert cover.size == 6
        assert cover.n_distinct == 5
        assert cover.contains(np.array([1.0 + 1e-10]))

    def test_fields_frozen(self):
        cover = enumerate_cover(1, 1, 2.0)
        assert isinstance(cover, SparseCover)
        with pytest.raises(AttributeError):
            cover.size = 99
