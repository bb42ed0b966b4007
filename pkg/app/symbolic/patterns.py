from typing import Dict, Iterable, List, Optional, Sequence, Tuple
from dataclasses import dataclass
import logging

import numpy as np

from app.errors import DimensionMismatchError, WindowError
from app.geometry.windows import GroupPoint, Window, interval, translate_window

logger = logging.getLogger(__name__)

# Symbols are stored as their position in the alphabet; 256 symbols at most.
SYMBOL_DTYPE = np.uint8


@dataclass(frozen=True)
class Alphabet:
    """Finite ordered symbol set; the order drives every lexicographic tie-break."""
    symbols: Tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"duplicate symbols in alphabet {self.symbols}")
        if len(self.symbols) > np.iinfo(SYMBOL_DTYPE).max + 1:
            raise ValueError(f"alphabet of size {len(self.symbols)} is too large")

    @classmethod
    def of_size(cls, k: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(k)))

    def __len__(self) -> int:
        return len(self.symbols)

    def code(self, symbol: str) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise ValueError(f"symbol '{symbol}' not in alphabet {self.symbols}") from None

    def symbol(self, code: int) -> str:
        return self.symbols[code]


@dataclass(frozen=True)
class Pattern:
    """Assignment of symbol codes to every point of a window (values follow window column order)."""
    window: Window
    values: Tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.window):
            raise WindowError(
                f"pattern has {len(self.values)} values for a window of {len(self.window)} points"
            )

    @classmethod
    def from_word(cls, alphabet: Alphabet, word: str, start: int = 0) -> "Pattern":
        """
        d=1 pattern from a word; symbols separated by spaces, or one character each.

        Example: ``Pattern.from_word(A, "0 2 3")`` is the pattern 0,2,3 on [0,3).
        """
        tokens = word.split() if " " in word.strip() else list(word.strip())
        values = tuple(alphabet.code(t) for t in tokens)
        return cls(window=interval(start, start + len(values)), values=values)

    @classmethod
    def from_mapping(cls, mapping: Dict[GroupPoint, int], dimension: int) -> "Pattern":
        window = Window.of(mapping.keys(), dimension=dimension)
        return cls(window=window, values=tuple(int(mapping[p]) for p in window.points))

    def __getitem__(self, point: GroupPoint) -> int:
        return self.values[self.window.index[point]]

    def as_mapping(self) -> Dict[GroupPoint, int]:
        return dict(zip(self.window.points, self.values))

    def restrict(self, sub: Window) -> "Pattern":
        cols = self.window.columns(sub.points)
        return Pattern(window=sub, values=tuple(self.values[c] for c in cols))

    def translate(self, g: GroupPoint) -> "Pattern":
        return Pattern(window=translate_window(self.window, g), values=self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=SYMBOL_DTYPE)

    def word(self, alphabet: Alphabet) -> str:
        return " ".join(alphabet.symbol(v) for v in self.values)


@dataclass(frozen=True)
class PatternSet:
    """
    Patterns on a common window stored as rows of a symbol array.

    Rows are kept in lexicographic order (column 0 most significant).
    """
    window: Window
    rows: np.ndarray

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.window):
            raise WindowError(
                f"rows of shape {self.rows.shape} do not fit a window of {len(self.window)} points"
            )

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def pattern(self, i: int) -> Pattern:
        return Pattern(window=self.window, values=tuple(int(v) for v in self.rows[i]))

    def patterns(self) -> List[Pattern]:
        return [self.pattern(i) for i in range(len(self))]

    def restrict_rows(self, sub: Window) -> np.ndarray:
        """Rows restricted to ``sub`` (duplicates kept, original order)."""
        return self.rows[:, self.window.columns(sub.points)]

    def restrict(self, sub: Window) -> "PatternSet":
        uniq, _ = unique_rows(self.restrict_rows(sub))
        return PatternSet(window=sub, rows=uniq)

    def index_of(self, rows: np.ndarray) -> np.ndarray:
        """Position of each row in this set, -1 where absent."""
        return match_rows(self.rows, rows)


def lexicographic_order(rows: np.ndarray) -> np.ndarray:
    """Stable permutation sorting rows lexicographically."""
    if rows.shape[1] == 0:
        return np.arange(rows.shape[0])
    # np.lexsort treats the last key as primary
    return np.lexsort(rows.T[::-1])


def unique_rows(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distinct rows in lexicographic order, plus the inverse index.

    Args:
        rows: 2-D array

    Returns:
        (unique rows, inverse) with ``unique[inverse] == rows``
    """
    n = rows.shape[0]
    if n == 0:
        return rows.copy(), np.zeros(0, dtype=np.int64)
    order = lexicographic_order(rows)
    ordered = rows[order]
    if rows.shape[1] == 0:
        starts = np.zeros(n, dtype=bool)
        starts[0] = True
    else:
        starts = np.empty(n, dtype=bool)
        starts[0] = True
        starts[1:] = np.any(ordered[1:] != ordered[:-1], axis=1)
    group = np.cumsum(starts) - 1
    inverse = np.empty(n, dtype=np.int64)
    inverse[order] = group
    return ordered[starts], inverse


def match_rows(reference: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """
    Index of every row of ``rows`` inside ``reference`` (rows assumed distinct).

    Returns -1 for rows that do not occur in ``reference``.
    """
    if reference.shape[1] != rows.shape[1]:
        raise DimensionMismatchError("row widths differ")
    combined = np.concatenate([reference, rows]) if len(rows) else reference
    _, inverse = unique_rows(combined)
    group_count = int(inverse.max()) + 1 if len(inverse) else 0
    lookup = np.full(group_count, -1, dtype=np.int64)
    lookup[inverse[: len(reference)]] = np.arange(len(reference))
    return lookup[inverse[len(reference):]]


def mixed_radix(rows: np.ndarray, base: int) -> np.ndarray:
    """Encode short rows as integers (column 0 most significant)."""
    codes = np.zeros(rows.shape[0], dtype=np.int64)
    for c in range(rows.shape[1]):
        codes = codes * base + rows[:, c].astype(np.int64)
    return codes
