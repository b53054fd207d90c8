"""Distance-formula arithmetic: thresholds, horoball distances, sandwiches."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stathyp import coarse
from stathyp.errors import DomainError, ParameterError


class TestLogPlus:
    def test_examples(self):
        assert coarse.log_plus(0.5) == 0.0
        assert coarse.log_plus(1.0) == 0.0
        assert coarse.log_plus(math.e) == pytest.approx(1.0)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            coarse.log_plus(-0.1)

    @given(st.floats(min_value=0.0, max_value=1e300))
    def test_nonnegative_and_flat_below_one(self, a):
        v = coarse.log_plus(a)
        assert v >= 0.0
        if a <= 1.0:
            assert v == 0.0
        else:
            assert v == math.log(a)


class TestThreshold:
    def test_examples(self):
        assert coarse.threshold(5.0, 10.0) == 0.0
        assert coarse.threshold(15.0, 10.0) == 15.0
        assert coarse.threshold(10.0, 10.0) == 10.0

    @given(st.floats(min_value=0, max_value=1e300),
           st.floats(min_value=1e-300, max_value=1e300))
    def test_pass_through_or_zero(self, value, m0):
        assert coarse.threshold(value, m0) == (value if value >= m0 else 0.0)

    def test_rejects_bad_m0(self):
        with pytest.raises(ParameterError):
            coarse.threshold(1.0, 0.0)


class TestHoroballDistance:
    def test_identical_projections(self):
        assert coarse.horoball_distance(coarse.HoroballPair(1.0, 1.0, 0.0)) == 0.0

    def test_vertical(self):
        # (0, e^5) to (0, 1) along the imaginary axis
        pair = coarse.HoroballPair(math.exp(-5.0), 1.0, 0.0)
        assert coarse.horoball_distance(pair) == pytest.approx(5.0, abs=1e-12)

    def test_horizontal_arccosh(self):
        pair = coarse.HoroballPair(1.0, 1.0, 2.0)
        assert coarse.horoball_distance(pair) == pytest.approx(math.acosh(3.0), abs=1e-12)

    def test_matches_naive_formula_in_safe_range(self):
        import numpy as np
        rng = np.random.default_rng(0)
        for _ in range(200):
            lx, ly = math.exp(rng.uniform(-5, 1)), math.exp(rng.uniform(-5, 1))
            dc = math.exp(rng.uniform(-3, 4))
            pair = coarse.HoroballPair(lx, ly, dc)
            h1, h2 = max(1, 1 / lx), max(1, 1 / ly)
            naive = math.acosh(1 + (dc ** 2 + (h2 - h1) ** 2) / (2 * h1 * h2))
            assert coarse.horoball_distance(pair) == pytest.approx(naive, rel=1e-9)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(DomainError):
            coarse.HoroballPair(0.0, 1.0, 0.0)


class TestLogMaxProxy:
    def test_length_term_dominates(self):
        assert coarse.log_max_proxy(coarse.HoroballPair(math.exp(-5), 1.0, 0.0)) == pytest.approx(5.0)

    def test_twist_term_dominates(self):
        assert coarse.log_max_proxy(coarse.HoroballPair(1.0, 1.0, math.exp(3))) == pytest.approx(3.0)

    def test_all_terms_vanish(self):
        assert coarse.log_max_proxy(coarse.HoroballPair(1.0, 1.0, 0.5)) == 0.0


class TestDistanceFormulas:
    def test_uniform_example(self):
        profile = coarse.ProjectionProfile(7.0, (
            coarse.ProfileEntry("V1", "non-annular", d_value=12.0),
            coarse.ProfileEntry("V2", "non-annular", d_value=3.0),
        ))
        assert coarse.distance_formula_uniform(profile, 10.0) == 19.0

    def test_empty_profile(self):
        assert coarse.distance_formula_uniform(coarse.ProjectionProfile(), 10.0) == 0.0
        assert coarse.distance_formula_split(coarse.ProjectionProfile(), math.e ** 4, 0.1) == 0.0

    def test_all_below_threshold(self):
        profile = coarse.ProjectionProfile(2.5, (
            coarse.ProfileEntry("V1", "non-annular", d_value=9.0),
        ))
        assert coarse.distance_formula_uniform(profile, 100.0) == 2.5

    def test_split_single_annular(self):
        pair = coarse.HoroballPair(math.exp(-5.0), 1.0, 0.0)
        profile = coarse.ProjectionProfile(0.0, (
            coarse.ProfileEntry("A", "annular", pair=pair),
        ))
        # the curve is not short on both sides, so the proxy branch applies:
        # threshold(max(0, 5, 0), log(e^4)) = threshold(5, 4) = 5
        assert coarse.distance_formula_split(profile, math.e ** 4, 0.1) == pytest.approx(5.0)

    def test_split_equals_uniform_without_annuli(self):
        for seed in range(30):
            profile = coarse.random_profile(seed)
            flat = coarse.ProjectionProfile(profile.d_s, tuple(
                e for e in profile.entries if e.kind == "non-annular"))
            m0 = 50.0
            assert coarse.distance_formula_split(flat, m0, 0.1) == \
                coarse.distance_formula_uniform(flat, m0)

    def test_monotone_in_threshold(self):
        for seed in range(50):
            profile = coarse.random_profile(seed)
            values = [coarse.distance_formula_uniform(profile, m0)
                      for m0 in (1.0, 5.0, 50.0, 5e3, 5e8)]
            assert all(a >= b for a, b in zip(values, values[1:]))

    def test_unique_labels_enforced(self):
        with pytest.raises(ParameterError):
            coarse.ProjectionProfile(0.0, (
                coarse.ProfileEntry("A", "non-annular", d_value=1.0),
                coarse.ProfileEntry("A", "non-annular", d_value=2.0),
            ))


class TestMaxLogIdentity:
    def test_all_zero(self):
        lhs, rhs, ok = coarse.max_log_identity(0.0, 0.0, 0.0, math.e ** 2)
        assert (lhs, rhs, ok) == (0.0, 0.0, True)

    def test_single_active_term(self):
        lhs, rhs, ok = coarse.max_log_identity(math.e ** 5, 0.0, 0.0, math.e ** 2)
        assert lhs == pytest.approx(5.0)
        assert rhs == pytest.approx(5.0)
        assert ok

    @given(st.tuples(*[st.floats(min_value=0, max_value=1e280)] * 3))
    def test_factor_three_property(self, fgh):
        f, g, h = fgh
        _, _, ok = coarse.max_log_identity(f, g, h, math.e ** 3)
        assert ok

    def test_sweep_no_failures(self):
        import numpy as np
        rng = np.random.default_rng(7)
        m0 = math.e ** 3
        for _ in range(20000):
            f, g, h = np.exp(rng.uniform(-7, 20, size=3))
            assert coarse.max_log_identity(f, g, h, m0)[2]


class TestSandwiches:
    def test_proxy_sandwich_above_floor(self):
        eps0 = math.exp(-10.0)
        floor = coarse.threshold_floor(eps0)
        assert floor == pytest.approx(360.0)
        pairs = coarse.random_pairs(20000, seed=3, eps0=eps0)
        tested = 0
        for pair in pairs:
            if max(coarse.horoball_distance(pair), coarse.log_max_proxy(pair)) < floor:
                continue
            tested += 1
            assert coarse.proxy_sandwich_holds(pair), pair
        assert tested > 1000  # the generator must actually reach the regime

    def test_twist_log_bounds(self):
        import numpy as np
        rng = np.random.default_rng(11)
        for _ in range(20000):
            d_c = math.exp(rng.uniform(-5.0, 300.0))
            b = coarse.twist_only_distance(d_c)
            if b >= 3.0 or d_c >= 3.0:
                lp = coarse.log_plus(d_c)
                assert lp <= b + 1e-12
                assert b <= 4.0 * lp + 1e-12

    def test_chain_inequality(self):
        eps0 = math.exp(-10.0)
        m0 = 400.0
        assert m0 >= coarse.threshold_floor(eps0)
        for seed in range(300):
            pairs = coarse.random_pairs(40, seed=seed, eps0=eps0)
            assert coarse.chain_inequality_holds(pairs, m0)


class TestProfileFiles:
    def test_round_trip(self):
        for seed in range(20):
            profile = coarse.random_profile(seed)
            text = coarse.dump_profile(profile)
            back = coarse.load_profile(text, eps0=coarse.EPS0_DEFAULT)
            assert back.d_s == profile.d_s
            assert len(back.entries) == len(profile.entries)
            for a, b in zip(profile.entries, back.entries):
                assert (a.label, a.kind, a.d_value) == (b.label, b.kind, b.d_value)
                if a.kind == "annular":
                    assert (a.pair.l_x, a.pair.l_y, a.pair.d_c) == \
                        (b.pair.l_x, b.pair.l_y, b.pair.d_c)

    def test_comments_and_blanks(self):
        text = "# fixture\n\nd_S 3.0\nnonannular V 12.0  # tail comment\n"
        profile = coarse.load_profile(text)
        assert profile.d_s == 3.0
        assert profile.entries[0].d_value == 12.0

    def test_bad_record(self):
        with pytest.raises(ParameterError):
            coarse.load_profile("frobnicate A 1.0\n")
