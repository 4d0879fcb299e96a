import math

import pytest
from hypothesis import given, strategies as st

from voxfpt.model import (Boundary, DiffusionRates, Dimension, DomainSpec,
                          RateScaling, ReactionScheme, ValidationError,
                          Variant, WalkerState, general_propensity,
                          propensity_single_triplet)


def scheme_1d(k):
    return ReactionScheme(Variant.U_PLUS_V_PLUS_W, k, RateScaling.ONE_D)


class TestDomainSpec:
    def test_h_is_derived(self):
        d = DomainSpec(L=1.0, K=20)
        assert d.h == 0.05
        assert d.n_sites == 20

    def test_square_site_count(self):
        d = DomainSpec(L=1.0, K=8, dimension=Dimension.SQUARE_2D)
        assert d.n_sites == 64

    @given(st.floats(min_value=1e-6, max_value=1e6),
           st.integers(min_value=1, max_value=10_000))
    def test_h_times_k_roundtrip(self, L, K):
        d = DomainSpec(L=L, K=K)
        assert math.isclose(d.h * K, L, rel_tol=1e-15)

    @pytest.mark.parametrize("L,K", [(0.0, 4), (-1.0, 4), (1.0, 0), (1.0, -3)])
    def test_rejects_bad_geometry(self, L, K):
        with pytest.raises(ValidationError):
            DomainSpec(L=L, K=K)

    def test_rejects_non_integer_k(self):
        with pytest.raises(ValidationError):
            DomainSpec(L=1.0, K=2.5)  # type: ignore[arg-type]


class TestDiffusionRates:
    def test_jump_rates(self):
        r = DiffusionRates(0.5, 0.2, 0.1)
        assert r.jump_rates(0.05) == pytest.approx((200.0, 80.0, 40.0), rel=1e-14)
        assert r.total == pytest.approx(0.8, rel=1e-15)
        assert r.sorted_descending() == (0.5, 0.2, 0.1)
        assert r.n_positive == 3

    def test_rejects_all_zero_and_negative(self):
        with pytest.raises(ValidationError):
            DiffusionRates(0.0, 0.0, 0.0)
        with pytest.raises(ValidationError):
            DiffusionRates(-0.1, 1.0)
        with pytest.raises(ValidationError):
            DiffusionRates(math.nan, 1.0)


class TestPropensity:
    def test_single_triplet_h_one(self):
        d = DomainSpec(L=1.0, K=1)
        assert propensity_single_triplet(scheme_1d(5.0), d) == 5.0

    def test_single_triplet_k20(self):
        d = DomainSpec(L=1.0, K=20)
        assert propensity_single_triplet(scheme_1d(5.0), d) == pytest.approx(2000.0, rel=1e-15)

    def test_scaling_consistency_exact_h(self):
        # h = 0.25 is a power of two, so both routes are exact
        d = DomainSpec(L=1.0, K=4)
        k3d = ReactionScheme(Variant.U_PLUS_V_PLUS_W, 5.0 * d.h**4, RateScaling.MACRO_3D)
        assert propensity_single_triplet(k3d, d) == propensity_single_triplet(scheme_1d(5.0), d)

    @given(st.integers(min_value=1, max_value=500),
           st.floats(min_value=1e-3, max_value=1e3))
    def test_scaling_equivalence(self, K, k1d):
        d = DomainSpec(L=1.0, K=K)
        macro = ReactionScheme(Variant.U_PLUS_V_PLUS_W, k1d * d.h**4, RateScaling.MACRO_3D)
        a = propensity_single_triplet(macro, d)
        b = propensity_single_triplet(scheme_1d(k1d), d)
        assert math.isclose(a, b, rel_tol=1e-14)

    def test_general_single_triplet_reduces_to_alpha(self):
        d = DomainSpec(L=1.0, K=20)
        alpha = propensity_single_triplet(scheme_1d(5.0), d)
        assert general_propensity(scheme_1d(5.0), (1, 1, 1), d) == alpha
        three_u = ReactionScheme(Variant.THREE_U, 5.0, RateScaling.ONE_D)
        assert general_propensity(three_u, (3, 0, 0), d) == pytest.approx(alpha)
        two_uv = ReactionScheme(Variant.TWO_U_PLUS_V, 5.0, RateScaling.ONE_D)
        assert general_propensity(two_uv, (2, 1, 0), d) == pytest.approx(alpha)

    def test_below_stoichiometry_is_zero(self):
        d = DomainSpec(L=1.0, K=20)
        three_u = ReactionScheme(Variant.THREE_U, 5.0, RateScaling.ONE_D)
        assert general_propensity(three_u, (2, 9, 9), d) == 0.0
        assert general_propensity(scheme_1d(5.0), (2, 1, 0), d) == 0.0

    def test_multiple_copies(self):
        d = DomainSpec(L=1.0, K=20)
        assert general_propensity(scheme_1d(5.0), (2, 1, 1), d) == pytest.approx(4000.0, rel=1e-15)

    @given(st.tuples(st.integers(0, 12), st.integers(0, 12), st.integers(0, 12)),
           st.sampled_from(list(Variant)))
    def test_monotone_in_counts(self, counts, variant):
        d = DomainSpec(L=1.0, K=10)
        scheme = ReactionScheme(variant, 2.0, RateScaling.ONE_D)
        base = general_propensity(scheme, counts, d)
        for axis in range(3):
            bumped = list(counts)
            bumped[axis] += 1
            assert general_propensity(scheme, tuple(bumped), d) >= base

    def test_rejects_negative_counts(self):
        d = DomainSpec(L=1.0, K=10)
        with pytest.raises(ValidationError):
            general_propensity(scheme_1d(1.0), (-1, 0, 0), d)

    def test_rejects_negative_rate(self):
        with pytest.raises(ValidationError):
            ReactionScheme(Variant.THREE_U, -1.0, RateScaling.ONE_D)

    def test_infinite_rate_allowed(self):
        s = ReactionScheme(Variant.U_PLUS_V_PLUS_W, math.inf, RateScaling.ONE_D)
        assert math.isinf(s.rate_value)


class TestWalkerState:
    def test_collision_predicate(self):
        s = WalkerState(positions=((3,), (3,), (3,)), species=("U", "V", "W"))
        assert s.collided
        s = WalkerState(positions=((3,), (3,), (4,)), species=("U", "V", "W"))
        assert not s.collided

    def test_domain_check(self):
        d = DomainSpec(L=1.0, K=4)
        WalkerState(positions=((1,), (4,)), species=("U", "V")).check_in_domain(d)
        with pytest.raises(ValidationError):
            WalkerState(positions=((1,), (5,)), species=("U", "V")).check_in_domain(d)
        sq = DomainSpec(L=1.0, K=4, dimension=Dimension.SQUARE_2D)
        with pytest.raises(ValidationError):
            WalkerState(positions=((1,), (2,)), species=("U", "V")).check_in_domain(sq)

    def test_rejects_bad_positions(self):
        with pytest.raises(ValidationError):
            WalkerState(positions=((0,), (1,)), species=("U", "V"))
        with pytest.raises(ValidationError):
            WalkerState(positions=((1,), (1, 2)), species=("U", "V"))
        with pytest.raises(ValidationError):
            WalkerState(positions=((1,),), species=("U", "V"))
