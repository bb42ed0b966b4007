import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from app.errors import FamilyMismatchError, MeasureError, WindowError
from app.geometry.windows import FolnerSchedule, Window, interval, window_from_box
from app.measures.entropy import (
    BRACKET_TOLERANCE,
    bracket_interval,
    conditional_entropy,
    entropy_rate,
    entropy_subadditivity_check,
    level_entropy_rate,
    partition_entropy,
)
from app.measures.marginals import level_marginal, marginal, pushforward
from app.measures.objective import integrate_potential, weighted_objective
from app.measures.specs import (
    Bernoulli,
    FiniteSupport,
    Markov,
    check_family,
    closed_form_entropy,
    parry_measure,
    random_bernoulli,
    random_markov,
)
from app.pressure.potentials import zero_potential
from app.pressure.weights import ExponentVector
from app.symbolic.patterns import Pattern
from app.symbolic.subshift import full_shift, golden_mean_shift

LOG_PHI = math.log((1.0 + math.sqrt(5.0)) / 2.0)


class TestMeasureSpecs:
    """Test suite for measure parameters."""

    def test_bernoulli_must_sum_to_one(self):
        """Probabilities off by more than 1e-12 are refused."""
        with pytest.raises(MeasureError):
            Bernoulli.of([0.5, 0.6])
        with pytest.raises(MeasureError):
            Bernoulli.of([-0.5, 1.5])

    def test_markov_must_be_stationary(self):
        """An initial law that is not stationary is refused."""
        with pytest.raises(MeasureError, match="stationary"):
            Markov(stationary=(1.0, 0.0), transition=((0.5, 0.5), (0.5, 0.5)))

    def test_from_transition(self):
        """The stationary law is computed from the transition matrix."""
        m = Markov.from_transition([[0.5, 0.5], [1.0, 0.0]])
        assert m.stationary == pytest.approx((2 / 3, 1 / 3))

    def test_closed_forms(self):
        """Uniform Bernoulli has log k; the Parry measure of the golden mean has log φ."""
        assert closed_form_entropy(Bernoulli.uniform(4)) == pytest.approx(math.log(4.0))
        assert closed_form_entropy(parry_measure(golden_mean_shift())) == pytest.approx(LOG_PHI, abs=1e-12)

    def test_family_mismatch(self):
        """Markov measures need d=1 and every family needs the right alphabet size."""
        with pytest.raises(FamilyMismatchError, match="family/system mismatch"):
            check_family(Markov.from_transition([[0.5, 0.5], [0.5, 0.5]]), full_shift(2, dimension=2))
        with pytest.raises(FamilyMismatchError):
            check_family(Bernoulli.uniform(3), full_shift(2))

    def test_random_measures(self):
        """Random draws are valid and respect forbidden transitions."""
        rng = np.random.default_rng(0)
        assert random_bernoulli(3, rng).size == 3
        m = random_markov(golden_mean_shift(), rng)
        assert m.transition[1][1] == 0.0


class TestMarginals:
    """Test suite for exact marginals and pushforwards."""

    def test_bernoulli_marginal(self):
        """Cylinder probabilities are products of symbol probabilities."""
        s = full_shift(2)
        table = marginal(Bernoulli.of([0.25, 0.75]), s, interval(0, 2))
        assert table.probability(Pattern.from_word(s.alphabet, "01")) == pytest.approx(0.1875)
        assert table.mass == pytest.approx(1.0)

    def test_markov_marginal_on_gapped_window(self):
        """A Markov marginal on {0, 2} sums over the hidden middle site."""
        s = golden_mean_shift()
        m = parry_measure(s)
        table = marginal(m, s, Window.of([0, 2], dimension=1))
        assert table.mass == pytest.approx(1.0)
        assert len(table) == 4

    def test_markov_forbids_word(self):
        """The Parry measure gives no mass to 11."""
        s = golden_mean_shift()
        table = marginal(parry_measure(s), s, interval(0, 2))
        assert table.probability(Pattern.from_word(s.alphabet, "11")) == 0.0

    def test_inadmissible_support(self):
        """Uniform Bernoulli leaks mass onto forbidden words of the golden mean."""
        with pytest.raises(MeasureError, match="inadmissible support"):
            marginal(Bernoulli.uniform(2), golden_mean_shift(), interval(0, 2))

    def test_finite_support_completion(self):
        """A support pattern is completed by the least admissible symbol."""
        s = golden_mean_shift()
        nu = FiniteSupport.from_patterns([(Pattern.from_word(s.alphabet, "1"), 1.0)])
        table = marginal(nu, s, interval(0, 3))
        assert table.as_mapping() == {(1, 0, 0): 1.0}

    def test_pushforward(self, full4_to_2):
        """Uniform on 4 symbols collapses to uniform on 2."""
        table = marginal(Bernoulli.uniform(4), full4_to_2.system(1), interval(0, 2))
        image = pushforward(table, full4_to_2.code(1), interval(0, 2))
        assert np.allclose(image.probs, 0.25)

    def test_pushforward_needs_domain(self, full4_to_2):
        """The source marginal must cover E ⊕ D."""
        table = marginal(Bernoulli.uniform(4), full4_to_2.system(1), interval(0, 1))
        with pytest.raises(WindowError, match="missing source marginal"):
            pushforward(table, full4_to_2.code(1), interval(0, 2))

    def test_level_marginal(self, three_level_chain):
        """Two codes down, every pattern lands on the point."""
        table = level_marginal(Bernoulli.uniform(4), list(three_level_chain.codes), interval(0, 3))
        assert table.as_mapping() == {(0, 0, 0): pytest.approx(1.0)}

    def test_total_variation(self):
        """TV between two Bernoulli one-site marginals."""
        s = full_shift(2)
        p = marginal(Bernoulli.of([0.5, 0.5]), s, interval(0, 1))
        q = marginal(Bernoulli.of([0.25, 0.75]), s, interval(0, 1))
        assert p.total_variation(q) == pytest.approx(0.5)


class TestEntropy:
    """Test suite for partition entropies and entropy-rate brackets."""

    @pytest.fixture
    def schedule(self):
        return FolnerSchedule("origin", 1, 1, 5)

    def test_partition_and_conditional_entropy(self):
        """Independent uniform bits: H = 2 log 2 and H(x_1 | x_0) = log 2."""
        table = marginal(Bernoulli.uniform(2), full_shift(2), interval(0, 2))
        assert partition_entropy(table) == pytest.approx(2 * math.log(2.0))
        assert conditional_entropy(table, interval(0, 1)) == pytest.approx(math.log(2.0))

    def test_bernoulli_bracket_is_tight(self, schedule):
        """For i.i.d. symbols every bound equals H(p)."""
        m = Bernoulli.of([0.1, 0.2, 0.7])
        bounds = entropy_rate(m, full_shift(3), schedule, interval(0, 1))
        h = closed_form_entropy(m)
        assert bounds.interval[0] == pytest.approx(h, abs=1e-9)
        assert bounds.interval[1] == pytest.approx(h, abs=1e-9)

    def test_markov_bracket_contains_closed_form(self, schedule):
        """The Parry measure's entropy lies inside the bracket."""
        s = golden_mean_shift()
        bounds = entropy_rate(parry_measure(s), s, schedule, interval(0, 1))
        lo, hi = bounds.interval
        assert lo - 1e-9 <= LOG_PHI <= hi + 1e-9
        assert bounds.gap <= 1e-9

    def test_image_bracket(self, full4_to_2, schedule):
        """The image of a Bernoulli measure under a single-site code is Bernoulli."""
        m = Bernoulli.of([0.1, 0.2, 0.3, 0.4])
        bounds = level_entropy_rate(m, full4_to_2.system(1), [full4_to_2.code(1)], schedule, interval(0, 1))
        expected = -(0.3 * math.log(0.3) + 0.7 * math.log(0.7))
        assert bounds.closed_form == pytest.approx(expected)
        assert bounds.interval[0] - 1e-9 <= expected <= bounds.interval[1] + 1e-9

    @pytest.fixture
    def two_words(self):
        """Half on 0000, half on 0111: not shift-invariant."""
        s = full_shift(2)
        return FiniteSupport.from_patterns(
            [(Pattern.from_word(s.alphabet, "0000"), 0.5), (Pattern.from_word(s.alphabet, "0111"), 0.5)]
        )

    def test_finite_support_has_no_entropy_rate(self, two_words):
        """Its upper and lower sequences would cross by log 2."""
        with pytest.raises(MeasureError, match="needs an invariant measure"):
            entropy_rate(two_words, full_shift(2), FolnerSchedule("origin", 1, 1, 3), interval(0, 1))

    def test_finite_support_has_no_objective(self, to_point_chain, step_f, two_words):
        with pytest.raises(MeasureError, match="needs an invariant measure"):
            weighted_objective(
                to_point_chain, two_words, step_f, ExponentVector.of([0.5]), FolnerSchedule("origin", 1, 1, 3)
            )

    def test_finite_support_has_no_subadditivity_check(self, two_words):
        with pytest.raises(MeasureError, match="needs an invariant measure"):
            entropy_subadditivity_check(two_words, full_shift(2), interval(0, 4), interval(0, 2))

    def test_rounding_crossing_is_clamped(self):
        """A crossing within tolerance collapses onto the upper end."""
        lo, hi = bracket_interval([0.7, 0.6931], [0.6931], [0.6931 + 1e-12])
        assert lo == hi == 0.6931

    def test_real_crossing_is_reported(self):
        """Bounds that cross by log 2 raise instead of averaging."""
        with pytest.raises(MeasureError, match="entropy bounds cross"):
            bracket_interval([0.0, 0.3466, 0.2310], [None, None, None], [math.log(2.0), 0.0, 0.0])

    def test_bracket_keeps_lower_below_upper(self, schedule):
        """lower <= upper at every index for the Parry measure."""
        s = golden_mean_shift()
        m = parry_measure(s)
        bounds = entropy_rate(m, s, schedule, interval(0, 1))
        assert all(lo <= up + BRACKET_TOLERANCE for lo, up in zip(bounds.lower, bounds.upper))
        assert bounds.interval[0] <= bounds.interval[1]
        assert bounds.interval[0] == pytest.approx(max(bounds.lower), abs=1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @hsettings(max_examples=60, deadline=None)
    def test_subadditivity_slack(self, seed):
        """H(α_F) stays below the averaged A-entropies plus the boundary term."""
        rng = np.random.default_rng(seed)
        s = golden_mean_shift() if rng.random() < 0.5 else full_shift(2)
        m = random_markov(s, rng) if rng.random() < 0.5 else (
            parry_measure(s) if not s.is_full else random_bernoulli(2, rng)
        )
        F = Window.of([x for x in range(8) if rng.random() < 0.5] or [0], dimension=1)
        A = Window.of([0] + [x for x in (1, 2) if rng.random() < 0.5], dimension=1)
        assert entropy_subadditivity_check(m, s, F, A) >= -1e-10


class TestWeightedObjective:
    """Test suite for Σ w_i h_{μ_i} + w_1 ∫f dμ."""

    def test_uniform_on_full_four_to_two(self, full4_to_2, half):
        """Uniform Bernoulli reaches (1 + a_1) log 2."""
        obj = weighted_objective(
            full4_to_2, Bernoulli.uniform(4), zero_potential(full4_to_2.system(1)), half,
            FolnerSchedule("origin", 1, 1, 3),
        )
        assert obj.lower == pytest.approx(1.5 * math.log(2.0), abs=1e-9)
        assert obj.width <= 1e-9
        assert obj.weights == [0.5, 0.5]

    def test_zero_weight_levels_skipped(self, to_point_chain, step_f):
        """With a_1 = 1 the top level carries no weight."""
        m = Bernoulli.of([0.5, 0.5])
        obj = weighted_objective(to_point_chain, m, step_f, ExponentVector.of([1.0]), FolnerSchedule("origin", 1, 1, 3))
        assert obj.levels[1] is None
        assert obj.integral == pytest.approx(0.5)
        assert obj.lower == pytest.approx(math.log(2.0) + 0.5, abs=1e-9)

    def test_integral(self, to_point_chain, step_f):
        """∫f dμ for f = 1[x_0 = 1]."""
        assert integrate_potential(Bernoulli.of([0.3, 0.7]), to_point_chain, step_f) == pytest.approx(0.7)

    def test_planar_objective(self, planar_to_point):
        """On Z^2 a Bernoulli measure has its closed-form entropy at the base level."""
        obj = weighted_objective(
            planar_to_point, Bernoulli.uniform(2), zero_potential(planar_to_point.system(1)),
            ExponentVector.of([1.0]), FolnerSchedule("origin", 2, 1, 2),
        )
        assert obj.upper == pytest.approx(math.log(2.0), abs=1e-9)
        assert obj.lower == pytest.approx(math.log(2.0), abs=1e-9)
