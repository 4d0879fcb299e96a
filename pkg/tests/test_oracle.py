import math

import numpy as np
import pytest

import dense_reference as dense
from voxfpt.formulas import nsteps_2d
from voxfpt.model import (Boundary, DiffusionRates, Dimension, DomainSpec,
                          RateScaling, ReactionScheme, ValidationError,
                          Variant)
from voxfpt.oracle import (InitMode, OracleCapError, ReachabilityError,
                           _build_3walkers_1d, expected_steps_discrete_2d,
                           mean_reaction_time_3walkers_1d,
                           mfpt_collision_2walkers,
                           mfpt_collision_3walkers_1d,
                           mfpt_pseudo_walker_trimol)

PER = Boundary.PERIODIC
REF = Boundary.REFLECTIVE


def chain(K, bc, L=1.0):
    return DomainSpec(L=L, K=K, dimension=Dimension.CHAIN_1D, boundary=bc)


def square(K, bc, L=1.0):
    return DomainSpec(L=L, K=K, dimension=Dimension.SQUARE_2D, boundary=bc)


def scheme_1d(k):
    return ReactionScheme(Variant.U_PLUS_V_PLUS_W, k, RateScaling.ONE_D)


class TestThreeWalkers:
    def test_analytic_k2(self):
        r = DiffusionRates(0.1, 0.1, 0.1)
        assert mfpt_collision_3walkers_1d(chain(2, REF), r).expected_time == \
            pytest.approx(1.875, rel=1e-10)
        assert mfpt_collision_3walkers_1d(chain(2, PER), r).expected_time == \
            pytest.approx(0.9375, rel=1e-10)

    def test_k1_always_collided(self):
        r = DiffusionRates(0.1, 0.1, 0.1)
        assert mfpt_collision_3walkers_1d(chain(1, REF), r).expected_time == 0.0

    @pytest.mark.parametrize("K,bc,rates", [
        (2, PER, (0.5, 0.2, 0.1)),
        (3, REF, (0.5, 0.2, 0.1)),
        (4, PER, (1.0, 1.0, 0.0)),
        (4, REF, (0.3, 0.7, 0.2)),
    ])
    def test_against_dense_reference(self, K, bc, rates):
        got = mfpt_collision_3walkers_1d(chain(K, bc), DiffusionRates(*rates))
        want = dense.mfpt_walkers_1d(K, 1.0, rates, bc is PER)
        assert got.expected_time == pytest.approx(want, rel=1e-9)
        assert got.residual_norm <= 1e-10
        assert got.n_states == K**3

    def test_init_mode_factor(self):
        r = DiffusionRates(0.5, 0.2, 0.1)
        d = chain(5, PER)
        both = [mfpt_collision_3walkers_1d(d, r, mode).expected_time
                for mode in (InitMode.UNIFORM_ALL, InitMode.UNIFORM_NON_TARGET)]
        n_states, n_target = 125, 5
        assert both[0] == pytest.approx(both[1] * (1 - n_target / n_states), rel=1e-12)

    def test_scaling_law(self):
        d = chain(6, REF)
        base = mfpt_collision_3walkers_1d(d, DiffusionRates(0.5, 0.2, 0.1)).expected_time
        scaled = mfpt_collision_3walkers_1d(
            d, DiffusionRates(0.5 * 3.7, 0.2 * 3.7, 0.1 * 3.7)).expected_time
        assert scaled == pytest.approx(base / 3.7, rel=1e-10)

    def test_monotone_in_k(self):
        r = DiffusionRates(0.5, 0.2, 0.1)
        for bc in (PER, REF):
            values = [mfpt_collision_3walkers_1d(chain(K, bc), r).expected_time
                      for K in (2, 4, 8, 16)]
            assert all(a < b for a, b in zip(values, values[1:]))

    def test_translation_invariance_periodic(self):
        K = 5
        problem = _build_3walkers_1d(chain(K, PER), DiffusionRates(0.5, 0.2, 0.1))
        vec, _ = problem.solve_vector()
        s = np.arange(K**3)
        u, v, w = s // (K * K), (s // K) % K, s % K
        shifted = ((u + 1) % K) * K * K + ((v + 1) % K) * K + (w + 1) % K
        assert np.allclose(vec, vec[shifted], rtol=1e-9, atol=1e-12)

    def test_reflective_exceeds_periodic(self):
        r = DiffusionRates(0.5, 0.2, 0.1)
        for K in (4, 8, 16):
            assert mfpt_collision_3walkers_1d(chain(K, REF), r).expected_time > \
                mfpt_collision_3walkers_1d(chain(K, PER), r).expected_time

    def test_cap_and_validation(self):
        r = DiffusionRates(0.5, 0.2, 0.1)
        with pytest.raises(OracleCapError):
            mfpt_collision_3walkers_1d(chain(65, PER), r)
        with pytest.raises(ValidationError):
            mfpt_collision_3walkers_1d(chain(8, PER), DiffusionRates(1.0, 0.0, 0.0))
        with pytest.raises(ValidationError):
            mfpt_collision_3walkers_1d(square(4, PER), r)


class TestReactionOracle:
    def test_k1_pure_exponential(self):
        d = chain(1, REF)
        r = DiffusionRates(0.5, 0.2, 0.1)
        got = mean_reaction_time_3walkers_1d(d, r, scheme_1d(5.0))
        assert got.expected_time == pytest.approx(1.0 / 5.0, rel=1e-12)

    def test_against_dense_reference(self):
        K, k1d = 3, 4.0
        d = chain(K, REF)
        alpha = k1d / d.h**2
        got = mean_reaction_time_3walkers_1d(d, DiffusionRates(0.5, 0.2, 0.1), scheme_1d(k1d))
        want = dense.mfpt_walkers_1d(K, 1.0, (0.5, 0.2, 0.1), False, alpha=alpha)
        assert got.expected_time == pytest.approx(want, rel=1e-9)

    def test_infinite_rate_is_collision(self):
        d = chain(6, PER)
        r = DiffusionRates(0.5, 0.2, 0.1)
        got = mean_reaction_time_3walkers_1d(d, r, scheme_1d(math.inf))
        want = mfpt_collision_3walkers_1d(d, r)
        assert got.expected_time == want.expected_time

    def test_k20_regression_fixture(self):
        d = chain(20, REF)
        r = DiffusionRates(0.5, 0.2, 0.1)
        got = mean_reaction_time_3walkers_1d(d, r, scheme_1d(5.0)).expected_time
        assert got == pytest.approx(2.0117031723616914, rel=1e-8)
        coll = mfpt_collision_3walkers_1d(d, r).expected_time
        assert got > coll
        assert abs(got - 2.008176206763368) / 2.008176206763368 < 0.15

    def test_rejects_zero_rate(self):
        with pytest.raises(ValidationError):
            mean_reaction_time_3walkers_1d(
                chain(4, REF), DiffusionRates(0.5, 0.2, 0.1), scheme_1d(0.0))


class TestTwoWalkers:
    def test_chain_analytic_k2(self):
        got = mfpt_collision_2walkers(chain(2, REF), 0.25, 0.25)
        assert got.expected_time == pytest.approx(0.25, rel=1e-10)  # h^2/(4D)

    @pytest.mark.parametrize("K,bc,Da,Db", [
        (2, PER, 1.0, 1.0), (3, REF, 0.4, 0.9), (5, PER, 0.7, 0.1),
    ])
    def test_chain_against_dense(self, K, bc, Da, Db):
        got = mfpt_collision_2walkers(chain(K, bc), Da, Db)
        want = dense.mfpt_walkers_1d(K, 1.0, (Da, Db), bc is PER)
        assert got.expected_time == pytest.approx(want, rel=1e-9)

    def test_square_k2_analytic(self):
        # hand-solved 16-state chain: uniform-start mean is 5/(8d), d = D/h^2
        got = mfpt_collision_2walkers(square(2, REF), 1.0, 1.0)
        assert got.expected_time == pytest.approx(0.15625, rel=1e-10)

    @pytest.mark.parametrize("K,bc,Da,Db", [
        (2, REF, 1.0, 1.0), (3, REF, 2.0, 1.0), (3, PER, 1.0, 3.0),
    ])
    def test_square_against_dense(self, K, bc, Da, Db):
        got = mfpt_collision_2walkers(square(K, bc), Da, Db)
        want = dense.mfpt_pair_2d(K, 1.0, Da, Db, bc is PER)
        assert got.expected_time == pytest.approx(want, rel=1e-9)

    def test_periodic_reduction_matches_full_product(self):
        d = square(8, PER)
        reduced = mfpt_collision_2walkers(d, 2.0, 1.0)
        full = mfpt_collision_2walkers(d, 2.0, 1.0, reduce_periodic=False)
        assert reduced.expected_time == pytest.approx(full.expected_time, rel=1e-8)
        assert reduced.n_states == 64 and full.n_states == 4096

    def test_pair_chain_reflective_coefficient(self):
        # K=64, L=0.1: the dimensionless constant of the h-independent
        # reflective pair time sits within 2% of 0.140
        d = chain(64, REF, L=0.1)
        got = mfpt_collision_2walkers(d, 0.5, 0.5).expected_time
        coefficient = got * 1.0 / d.L**2
        assert abs(coefficient - 0.140) <= 0.02 * 0.140

    def test_caps(self):
        with pytest.raises(OracleCapError):
            mfpt_collision_2walkers(square(17, REF), 1.0, 1.0)
        with pytest.raises(OracleCapError):
            mfpt_collision_2walkers(chain(513, PER), 1.0, 1.0)


class TestPseudoWalker:
    @pytest.mark.parametrize("rates", [(0.5, 0.2, 0.1), (0.1, 0.1, 0.1), (2.5, 0.5, 0.1)])
    def test_matches_three_walker_solve(self, rates):
        for K in (4, 8, 16, 20):
            d = chain(K, PER)
            r = DiffusionRates(*rates)
            full = mfpt_collision_3walkers_1d(d, r).expected_time
            reduced = mfpt_pseudo_walker_trimol(d, r).expected_time
            assert abs(reduced - full) / full < 1e-8

    def test_against_dense(self):
        K = 5
        h2 = (1.0 / K) ** 2
        moves = [(1, 0, 0.5 / h2), (-1, 0, 0.5 / h2), (0, 1, 0.2 / h2),
                 (0, -1, 0.2 / h2), (1, 1, 0.1 / h2), (-1, -1, 0.1 / h2)]
        want = dense.mfpt_torus_walker(K, 1.0, moves)
        got = mfpt_pseudo_walker_trimol(chain(K, PER), DiffusionRates(0.5, 0.2, 0.1))
        assert got.expected_time == pytest.approx(want, rel=1e-9)

    def test_frozen_third_matches_pair_reduction(self):
        # with the diagonal rate zero the walker is the relative coordinate
        # of a square-lattice pair whose second molecule is frozen
        d = chain(12, PER)
        got = mfpt_pseudo_walker_trimol(d, DiffusionRates(0.7, 0.7, 0.0)).expected_time
        pair = mfpt_collision_2walkers(square(12, PER), 0.7, 0.0).expected_time
        assert got == pytest.approx(pair, rel=1e-10)

    def test_rejects_reflective(self):
        with pytest.raises(ValidationError):
            mfpt_pseudo_walker_trimol(chain(8, REF), DiffusionRates(0.5, 0.2, 0.1))


class TestDiscreteSteps:
    def test_one_apart_is_n_minus_1(self):
        for K in (4, 8):
            got = expected_steps_discrete_2d(K, (0.5, 0.5, 0.0), start=(1, 0))
            assert got.expected_steps == pytest.approx(K * K - 1, rel=1e-8)

    def test_uniform_simple_walk_fixture(self):
        got = expected_steps_discrete_2d(8, (0.5, 0.5, 0.0))
        assert got.expected_steps == pytest.approx(98.64070072473383, rel=1e-9)
        # the N log N estimate is ~1.4 steps (the O(1) remainder) below truth
        assert abs(got.expected_steps - nsteps_2d(64)) < 2.0

    def test_against_dense_with_diagonal(self):
        probs = (0.5, 0.3, 0.2)
        want = dense.steps_torus_walker(5, probs)
        got = expected_steps_discrete_2d(5, probs)
        assert got.expected_steps == pytest.approx(want, rel=1e-9)

    def test_pure_diagonal_unreachable(self):
        with pytest.raises(ReachabilityError):
            expected_steps_discrete_2d(8, (0.0, 0.0, 1.0))

    def test_validates_probabilities(self):
        with pytest.raises(ValidationError):
            expected_steps_discrete_2d(8, (0.5, 0.4, 0.0))
        with pytest.raises(ValidationError):
            expected_steps_discrete_2d(8, (0.5, 0.5, 0.0), start=(9, 0))
        with pytest.raises(OracleCapError):
            expected_steps_discrete_2d(257, (0.5, 0.5, 0.0))
