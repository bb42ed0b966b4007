import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings as hsettings, strategies as st
from scipy.special import logsumexp

from app.errors import EmptyFiberError, SchemeCompatibilityError
from app.geometry.windows import FolnerSchedule, interval, translate_window, union_window
from app.pressure.partition import (
    CylinderScheme,
    build_fiber_tree,
    grouped_logsumexp,
    level_sums,
    nested_partition_function,
    pressure_estimate,
    pressure_sweep,
    weighted_entropy_estimate,
)
from app.pressure.potentials import zero_potential
from app.pressure.weights import ExponentVector
from app.symbolic.codes import SystemChain, symbol_map_code
from app.symbolic.subshift import full_shift

LOG2 = math.log(2.0)
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def _values(chain, f, a, n_max=8, kind="origin", refinement=1):
    schedule = FolnerSchedule(kind, chain.dimension, 1, n_max)
    return pressure_estimate(chain, f, ExponentVector.of(a), schedule, CylinderScheme.refined(chain, refinement))


class TestClosedFormPressure:
    """Test suite for chains whose pressure is known exactly at every scale."""

    @pytest.mark.parametrize("a1", [0.0, 0.25, 0.5, 1.0])
    def test_full_four_to_two(self, full4_to_2, a1):
        """Every fiber has 2^n points, so each n gives (1 + a_1) log 2."""
        est = _values(full4_to_2, zero_potential(full4_to_2.system(1)), [a1])
        for v in est.values:
            assert abs(v - (1.0 + a1) * LOG2) <= 1e-9

    @pytest.mark.parametrize("a1", [0.0, 0.3, 1.0])
    def test_identity_chain(self, identity_chain, zero_f, a1):
        """The identity code gives log 2 for every exponent."""
        est = _values(identity_chain, zero_f, [a1])
        assert abs(est.estimate - LOG2) <= 1e-9

    @pytest.mark.parametrize("a1", [0.0, 0.5, 1.0])
    def test_collapse_to_point(self, to_point_chain, zero_f, a1):
        """Collapsing the full 2-shift to a point gives a_1 log 2."""
        est = _values(to_point_chain, zero_f, [a1])
        for v in est.values:
            assert abs(v - a1 * LOG2) <= 1e-9

    def test_classical_pressure(self, to_point_chain, step_f):
        """a_1 = 1 onto a point recovers log(1 + e) for f = (0, 1)."""
        est = _values(to_point_chain, step_f, [1.0], n_max=10)
        for v in est.values:
            assert abs(v - math.log1p(math.e)) <= 1e-9

    def test_full_three_to_two(self, full3_to_2):
        """Fibers of size 2^{#zeros} give log(1 + 2^{a_1})."""
        est = _values(full3_to_2, zero_potential(full3_to_2.system(1)), [0.5], n_max=7)
        for v in est.values:
            assert abs(v - math.log(1.0 + math.sqrt(2.0))) <= 1e-9

    def test_three_levels(self, three_level_chain):
        """Full 4 → full 2 → point gives a_2 (1 + a_1) log 2."""
        est = _values(three_level_chain, zero_potential(three_level_chain.system(1)), [0.5, 0.5], n_max=6)
        for v in est.values:
            assert abs(v - 0.75 * LOG2) <= 1e-9

    def test_planar_chain(self, planar_to_point):
        """On Z^2 the collapse to a point still gives a_1 log 2."""
        est = _values(planar_to_point, zero_potential(planar_to_point.system(1)), [0.5], n_max=3)
        for v in est.values:
            assert abs(v - 0.5 * LOG2) <= 1e-9

    def test_centered_schedule(self, full4_to_2):
        """Centered boxes give the same value on a full-shift chain."""
        est = _values(full4_to_2, zero_potential(full4_to_2.system(1)), [0.25], n_max=4, kind="centered")
        assert abs(est.estimate - 1.25 * LOG2) <= 1e-9

    def test_refined_scheme(self, full4_to_2):
        """At refinement m the cylinders live on [0, n + m − 1)."""
        est = _values(full4_to_2, zero_potential(full4_to_2.system(1)), [0.5], n_max=5, refinement=2)
        for n, v in zip(est.indices, est.values):
            assert abs(v - 1.5 * LOG2 * (n + 1) / n) <= 1e-9


class TestGoldenMeanPressure:
    """Test suite for the golden-mean chain, where finite scales approach the limit from above."""

    def test_running_infimum_approaches_log_phi(self, golden_to_point):
        """a_1 = 1 gives the topological entropy log φ in the limit."""
        est = _values(golden_to_point, zero_potential(golden_to_point.system(1)), [1.0], n_max=14)
        assert est.running_inf == sorted(est.running_inf, reverse=True)
        assert est.estimate >= math.log(GOLDEN) - 1e-12
        assert est.estimate - math.log(GOLDEN) < 0.02

    def test_entropy_estimate_is_zero_potential_pressure(self, golden_to_point):
        """The weighted entropy estimate is the pressure of f = 0."""
        chain = golden_to_point
        schedule = FolnerSchedule("origin", 1, 1, 6)
        scheme = CylinderScheme.refined(chain, 1)
        a = ExponentVector.of([0.5])
        h = weighted_entropy_estimate(chain, a, schedule, scheme)
        p = pressure_estimate(chain, zero_potential(chain.system(1)), a, schedule, scheme)
        assert h.values == p.values


class TestNestedSums:
    """Test suite for the fiber tree and nested log-sums."""

    def test_grouped_logsumexp(self):
        """Groups are summed in the log domain; empty groups give -inf."""
        out = grouped_logsumexp(np.array([0.0, 0.0, 1.0]), np.array([0, 0, 2]), 3)
        assert out[0] == pytest.approx(math.log(2.0))
        assert out[1] == -np.inf
        assert out[2] == pytest.approx(1.0)

    def test_level_sums_structure(self, three_level_chain):
        """log Z^(1) sits on level-2 cylinders and log Z^(2) on level-3 cylinders."""
        chain = three_level_chain
        tree = build_fiber_tree(chain, zero_potential(chain.system(1)), interval(0, 3), CylinderScheme.refined(chain, 1))
        sums = level_sums(tree, ExponentVector.of([0.5, 0.5]))
        assert len(sums.log_z_levels[0]) == 8
        assert len(sums.log_z_levels[1]) == 1
        assert np.allclose(sums.log_z_levels[0], 3 * LOG2)
        assert sums.log_z == pytest.approx(0.5 * 4.5 * LOG2)

    def test_push_masses(self, full4_to_2):
        """Pushed masses keep their total at every level."""
        tree = build_fiber_tree(
            full4_to_2, zero_potential(full4_to_2.system(1)), interval(0, 2), CylinderScheme.refined(full4_to_2, 1)
        )
        masses = np.full(16, 1 / 16)
        pushed = tree.push_masses(masses)
        assert [len(m) for m in pushed] == [16, 4]
        assert np.allclose(pushed[1], 0.25)
        assert np.all(tree.ancestors(2) == tree.fibers[0].parent)

    def test_wrong_exponent_length(self, full4_to_2):
        """The exponent vector must match the chain length."""
        tree = build_fiber_tree(
            full4_to_2, zero_potential(full4_to_2.system(1)), interval(0, 2), CylinderScheme.refined(full4_to_2, 1)
        )
        with pytest.raises(ValueError):
            level_sums(tree, ExponentVector.of([0.5, 0.5]))

    def test_empty_fiber(self):
        """A target symbol without preimages is reported."""
        source, target = full_shift(2), full_shift(3)
        chain = SystemChain(systems=(source, target), codes=(symbol_map_code(source, target, {0: 0, 1: 1}),))
        with pytest.raises(EmptyFiberError):
            nested_partition_function(
                chain, zero_potential(source), ExponentVector.of([0.5]), interval(0, 2), CylinderScheme.refined(chain, 1)
            )

    def test_incompatible_scheme(self, full4_to_2):
        """A scheme whose top window is larger than the base is refused."""
        scheme = CylinderScheme(windows=(interval(0, 1), interval(0, 2)))
        with pytest.raises(SchemeCompatibilityError):
            scheme.validate(full4_to_2)

    def test_sweep_rows(self, full4_to_2):
        """One estimate per refinement with CSV-ready rows."""
        schedule = FolnerSchedule("origin", 1, 1, 3)
        estimates = pressure_sweep(
            full4_to_2, zero_potential(full4_to_2.system(1)), ExponentVector.of([0.5]), schedule, [1, 2]
        )
        assert [e.refinement for e in estimates] == [1, 2]
        row = estimates[0].rows()[0]
        assert set(row) == {"n", "size", "refinement", "log_Z", "value", "running_inf"}


EXPONENT_PAIRS = [(0.0, 0.3), (0.5, 0.5), (1.0, 0.7)]


def _log_z(chain, f, a, F, refinement=1):
    return nested_partition_function(chain, f, ExponentVector.of(a), F, CylinderScheme.refined(chain, refinement))


def _xor_cylinders(n):
    """(x on [0, n+1), its XOR image on [0, n)) for every binary word x."""
    for x in itertools.product((0, 1), repeat=n + 1):
        yield x, tuple(x[i] ^ x[i + 1] for i in range(n))


def _pair_sum(f, x):
    return sum(f.table[(x[i], x[i + 1])] for i in range(len(x) - 1))


class TestPartitionInvariants:
    """Test suite for subadditivity, translation invariance and monotonicity of log Z."""

    @pytest.mark.parametrize("a", EXPONENT_PAIRS)
    @pytest.mark.parametrize("n, m, gap", [(2, 3, 0), (3, 3, 0), (2, 2, 2), (4, 1, 1)])
    def test_subadditive_over_disjoint_boxes(self, xor_chain, pair_f, a, n, m, gap):
        """log Z over two disjoint boxes is at most the sum of the parts."""
        F = interval(0, n)
        G = interval(n + gap, n + gap + m)
        joint = _log_z(xor_chain, pair_f, a, union_window(F, G))
        assert joint <= _log_z(xor_chain, pair_f, a, F) + _log_z(xor_chain, pair_f, a, G) + 1e-9

    @pytest.mark.parametrize("n, m", [(2, 3), (4, 2)])
    def test_subadditive_with_forbidden_words(self, golden_to_point, step_f, n, m):
        F, G = interval(0, n), interval(n, n + m)
        joint = _log_z(golden_to_point, step_f, [0.6], union_window(F, G))
        assert joint <= _log_z(golden_to_point, step_f, [0.6], F) + _log_z(golden_to_point, step_f, [0.6], G) + 1e-9

    @pytest.mark.parametrize("a", EXPONENT_PAIRS)
    @pytest.mark.parametrize("g", [-3, 1, 5])
    def test_translation_invariance(self, xor_chain, pair_f, a, g):
        """log Z_{F+g} = log Z_F."""
        F = interval(0, 4)
        moved = _log_z(xor_chain, pair_f, a, translate_window(F, (g,)))
        assert moved == pytest.approx(_log_z(xor_chain, pair_f, a, F), abs=1e-9)

    @pytest.mark.parametrize("g", [-2, 3])
    def test_translation_invariance_with_forbidden_words(self, golden_to_point, step_f, g):
        F = interval(0, 5)
        moved = _log_z(golden_to_point, step_f, [0.4], translate_window(F, (g,)))
        assert moved == pytest.approx(_log_z(golden_to_point, step_f, [0.4], F), abs=1e-9)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=2),
        st.integers(min_value=0, max_value=1),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
    )
    @hsettings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_monotone_in_each_exponent(self, xor_chain, base, i, x, y):
        """With f = 0, raising one exponent never lowers log Z."""
        f = zero_potential(xor_chain.system(1))
        lo, hi = list(base), list(base)
        lo[i], hi[i] = min(x, y), max(x, y)
        F = interval(0, 4)
        assert _log_z(xor_chain, f, lo, F) <= _log_z(xor_chain, f, hi, F) + 1e-12

    def test_monotone_along_a_sweep(self, xor_chain):
        """log Z_[0,5) rises with a_1 at a_2 = 1."""
        f = zero_potential(xor_chain.system(1))
        values = [_log_z(xor_chain, f, [a1, 1.0], interval(0, 5)) for a1 in np.linspace(0.0, 1.0, 6)]
        assert all(later >= earlier - 1e-12 for earlier, later in zip(values, values[1:]))
        assert values[-1] > values[0]


class TestExponentDegeneracies:
    """Test suite for a_i ∈ {0, 1} against sums coded out by hand."""

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("a2", [0.3, 1.0])
    def test_zero_exponent_counts_fibers(self, xor_chain, pair_f, n, a2):
        """a_1 = 0 makes every nonempty level-1 fiber count once."""
        images = {y for _, y in _xor_cylinders(n)}
        assert _log_z(xor_chain, pair_f, [0.0, a2], interval(0, n)) == pytest.approx(a2 * math.log(len(images)), abs=1e-9)

    def test_zero_top_exponent(self, xor_chain, pair_f):
        """a_2 = 0 leaves one term per point cylinder."""
        assert _log_z(xor_chain, pair_f, [0.6, 0.0], interval(0, 3)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_unit_exponents_give_plain_sum(self, xor_chain, pair_f, n):
        """a = (1, 1) is the classical partition sum over level-1 cylinders."""
        expected = logsumexp([_pair_sum(pair_f, x) for x, _ in _xor_cylinders(n)])
        assert _log_z(xor_chain, pair_f, [1.0, 1.0], interval(0, n)) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("a2", [0.0, 0.25, 0.7])
    def test_unit_first_exponent(self, xor_chain, pair_f, a2):
        """a_1 = 1 merges the two lower levels into one plain sum."""
        n = 3
        plain = logsumexp([_pair_sum(pair_f, x) for x, _ in _xor_cylinders(n)])
        assert _log_z(xor_chain, pair_f, [1.0, a2], interval(0, n)) == pytest.approx(a2 * plain, abs=1e-9)

    @pytest.mark.parametrize("a1", [0.0, 0.4, 0.9])
    def test_unit_top_exponent(self, xor_chain, pair_f, a1):
        """a_2 = 1 sums the level-2 terms without a power."""
        n = 4
        fibers = {}
        for x, y in _xor_cylinders(n):
            fibers.setdefault(y, []).append(_pair_sum(pair_f, x))
        expected = logsumexp([a1 * logsumexp(v) for v in fibers.values()])
        assert _log_z(xor_chain, pair_f, [a1, 1.0], interval(0, n)) == pytest.approx(expected, abs=1e-9)


class TestSchemeRefinement:
    """Test suite for refining the cylinder scheme."""

    @pytest.mark.parametrize("a", EXPONENT_PAIRS)
    def test_refinement_never_lowers_the_estimate(self, xor_chain, pair_f, a):
        """Finer cylinders give per-n values and estimates at least as large."""
        schedule = FolnerSchedule("origin", 1, 1, 4)
        sweep = pressure_sweep(xor_chain, pair_f, ExponentVector.of(a), schedule, [1, 2, 3])
        for coarse, fine in zip(sweep, sweep[1:]):
            assert all(v_fine >= v_coarse - 1e-9 for v_coarse, v_fine in zip(coarse.values, fine.values))
            assert fine.estimate >= coarse.estimate - 1e-9

    def test_refinement_with_forbidden_words(self, golden_to_point, step_f):
        schedule = FolnerSchedule("origin", 1, 1, 6)
        coarse, fine = pressure_sweep(golden_to_point, step_f, ExponentVector.of([0.5]), schedule, [1, 2])
        assert fine.estimate >= coarse.estimate - 1e-9
