import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from app.errors import DimensionMismatchError, EnumerationBudgetError, SchemeCompatibilityError, WindowError
from app.geometry.windows import interval, window_from_box
from app.oracle.brute_force import transfer_matrix_count
from app.symbolic.codes import (
    BlockCode,
    SystemChain,
    apply_code,
    build_fiber_map,
    check_compatible,
    fiber_decomposition,
    identity_code,
    point_code,
)
from app.symbolic.patterns import Alphabet, Pattern, PatternSet, match_rows, unique_rows
from app.symbolic.subshift import (
    Subshift,
    enumerate_patterns,
    full_shift,
    golden_mean_shift,
    one_point_shift,
)


class TestPatterns:
    """Test suite for alphabets, patterns and pattern sets."""

    def test_alphabet_codes(self):
        """Symbols map to their position and back."""
        a = Alphabet(("x", "y", "z"))
        assert a.code("z") == 2
        assert a.symbol(1) == "y"
        with pytest.raises(ValueError):
            a.code("w")
        with pytest.raises(ValueError):
            Alphabet(("x", "x"))

    def test_pattern_from_word(self):
        """Words are split per character or on spaces."""
        a = Alphabet.of_size(4)
        p = Pattern.from_word(a, "0 2 3")
        assert p.window == interval(0, 3)
        assert p.values == (0, 2, 3)
        assert Pattern.from_word(a, "023", start=2).window == interval(2, 5)

    def test_pattern_restrict_and_translate(self):
        """Restriction keeps the values of the sub-window; translation keeps all values."""
        p = Pattern.from_word(Alphabet.of_size(4), "0123")
        assert p.restrict(interval(1, 3)).values == (1, 2)
        assert p.translate((3,)).window == interval(3, 7)
        assert p[(2,)] == 2

    def test_unique_rows_lexicographic(self):
        """Distinct rows come back sorted with a consistent inverse."""
        rows = np.array([[1, 0], [0, 1], [1, 0], [0, 0]], dtype=np.uint8)
        uniq, inverse = unique_rows(rows)
        assert uniq.tolist() == [[0, 0], [0, 1], [1, 0]]
        assert np.array_equal(uniq[inverse], rows)

    def test_match_rows(self):
        """Missing rows map to -1."""
        ref = np.array([[0, 0], [0, 1]], dtype=np.uint8)
        rows = np.array([[0, 1], [1, 1]], dtype=np.uint8)
        assert match_rows(ref, rows).tolist() == [1, -1]

    def test_pattern_set_restrict(self):
        """Restricting all words of length 3 to [0,2) gives all words of length 2."""
        words = enumerate_patterns(full_shift(2), interval(0, 3))
        assert len(words.restrict(interval(0, 2))) == 4


class TestSubshift:
    """Test suite for subshift enumeration."""

    def test_full_shift_count(self):
        """A full k-shift has k^|E| patterns, listed in lexicographic order."""
        words = enumerate_patterns(full_shift(3), interval(0, 3))
        assert len(words) == 27
        assert words.rows[0].tolist() == [0, 0, 0]
        assert words.rows[-1].tolist() == [2, 2, 2]

    def test_golden_mean_counts(self):
        """Golden-mean words of length n are counted by Fibonacci numbers."""
        s = golden_mean_shift()
        assert [len(enumerate_patterns(s, interval(0, n))) for n in range(1, 7)] == [2, 3, 5, 8, 13, 21]
        assert s.is_nearest_neighbor

    @given(st.integers(min_value=1, max_value=10))
    @hsettings(max_examples=10, deadline=None)
    def test_enumeration_matches_transfer_matrix(self, n):
        """Enumerated word counts agree with exact transfer-matrix counts."""
        s = golden_mean_shift()
        assert len(enumerate_patterns(s, interval(0, n))) == transfer_matrix_count(s, n)

    def test_planar_forbidden_pattern(self):
        """Forbidding horizontal 11 on a 2x2 box leaves 3 choices per row pair."""
        a = Alphabet.of_size(2)
        hard = Pattern.from_mapping({(0, 0): 1, (1, 0): 1}, dimension=2)
        s = Subshift(alphabet=a, dimension=2, forbidden=(hard,), name="hard-rows")
        assert len(enumerate_patterns(s, window_from_box(0, 2, 2))) == 9
        assert not s.is_nearest_neighbor

    def test_budget_enforced(self):
        """Enumeration beyond the budget raises with the bound."""
        with pytest.raises(EnumerationBudgetError) as exc:
            enumerate_patterns(full_shift(4), interval(0, 8), budget=1000)
        assert exc.value.budget == 1000

    def test_dimension_mismatch(self):
        """A 2-d window cannot be enumerated in a 1-d subshift."""
        with pytest.raises(DimensionMismatchError):
            enumerate_patterns(full_shift(2), window_from_box(0, 2, 2))

    def test_local_admissibility(self):
        """11 is not locally admissible in the golden-mean shift."""
        s = golden_mean_shift()
        assert s.is_locally_admissible(Pattern.from_word(s.alphabet, "010"))
        assert not s.is_locally_admissible(Pattern.from_word(s.alphabet, "0110"))


class TestBlockCodes:
    """Test suite for block codes and chains."""

    @pytest.fixture
    def xor_code(self):
        """2-block code x_0 XOR x_1 on the full 2-shift."""
        s = full_shift(2)
        rule = {(i, j): i ^ j for i in range(2) for j in range(2)}
        return BlockCode(source=s, target=s, window=interval(0, 2), rule=rule, name="xor")

    def test_single_site_code(self, full4_to_2):
        """The collapse code maps 0123 to 0011."""
        p = Pattern.from_word(full_shift(4).alphabet, "0123")
        assert apply_code(full4_to_2.code(1), p).values == (0, 0, 1, 1)

    def test_sliding_code(self, xor_code):
        """A 2-block code shortens the window by one."""
        p = Pattern.from_word(full_shift(2).alphabet, "0110")
        image = apply_code(xor_code, p)
        assert image.window == interval(0, 3)
        assert image.values == (1, 0, 1)

    def test_code_window_too_large(self, xor_code):
        """Coding onto a window not covered by the source raises."""
        p = Pattern.from_word(full_shift(2).alphabet, "01")
        with pytest.raises(WindowError):
            apply_code(xor_code, p, interval(0, 2))

    def test_rule_must_be_total(self):
        """A rule missing an admissible D-pattern is rejected."""
        s = full_shift(2)
        with pytest.raises(ValueError, match="not total"):
            BlockCode(source=s, target=s, window=interval(0, 1), rule={(0,): 0}, name="partial")

    def test_chain_links_checked(self, full4_to_2):
        """Codes must connect consecutive systems."""
        with pytest.raises(ValueError):
            SystemChain(systems=(full_shift(2), full_shift(2)), codes=full4_to_2.codes)

    def test_composed_window(self, xor_code):
        """The composed window of two 2-block codes is [0,3)."""
        s = full_shift(2)
        chain = SystemChain(systems=(s, s, s), codes=(xor_code, xor_code))
        assert chain.composed_window(1) == interval(0, 1)
        assert chain.composed_window(3) == interval(0, 3)

    def test_fiber_decomposition(self, full4_to_2):
        """Every binary word of length 2 has four preimages."""
        fibers = fiber_decomposition(full4_to_2, 1, interval(0, 2), interval(0, 2))
        assert len(fibers) == 4
        assert all(len(v) == 4 for v in fibers.values())

    def test_incompatible_windows(self, xor_code):
        """E_i must contain E_{i+1} ⊕ D_i."""
        with pytest.raises(SchemeCompatibilityError):
            check_compatible(xor_code, interval(0, 2), interval(0, 2))

    def test_fiber_map_sizes(self, to_point_chain):
        """Collapsing onto a point puts every word into one fiber."""
        source = enumerate_patterns(to_point_chain.system(1), interval(0, 3))
        target = enumerate_patterns(to_point_chain.system(2), interval(0, 3))
        fmap = build_fiber_map(to_point_chain.code(1), source, target)
        assert fmap.fiber_sizes().tolist() == [8]
        assert len(fmap.empty_fibers()) == 0

    def test_identity_and_point_codes(self):
        """The identity code fixes patterns; the point code lands in the one-point system."""
        s = full_shift(3)
        p = Pattern.from_word(s.alphabet, "210")
        assert apply_code(identity_code(s), p).values == p.values
        assert point_code(s).target == one_point_shift()
