"""
Edgewords over the alphabet {0, 2, ..., n-2}.

Letter 0 is a unit edge along a metatile side, letter 2m a rhombus of angle
2m*pi/n bisected along the side. This module builds the Sub Rosa words,
the billiard word and its palindromic candidates, and the counting
functions used by the tileability criterion.
"""

import heapq
import json
import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property
from itertools import islice
from typing import Iterator, List, Tuple, Union

import numpy as np

from .config import PRECISION, TOLERANCES, check_n
from .errors import InvalidParameter, OrderingTie
from .geometry import AlgebraicReal, Ordering, compare_exact

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\((\d+)\)|(\d)")

Count = Union[int, float]


@dataclass(frozen=True)
class Edgeword:
    """A finite word over {0, 2, ..., n-2}."""
    n: int
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        check_n(self.n)
        letters = tuple(int(x) for x in self.letters)
        for letter in letters:
            if letter < 0 or letter > self.n - 2 or letter % 2:
                raise InvalidParameter(
                    f"letter {letter} is not in the alphabet {{0, 2, ..., {self.n - 2}}}",
                    {"n": self.n, "letter": letter},
                )
        object.__setattr__(self, 'letters', letters)

    @classmethod
    def parse(cls, text: str, n: int) -> "Edgeword":
        """Read a digit string such as "02(10)4" or a JSON integer array."""
        text = text.strip()
        if text.startswith('['):
            try:
                return cls(n, tuple(json.loads(text)))
            except (ValueError, TypeError) as e:
                raise InvalidParameter(f"bad edgeword JSON {text!r}: {e}")
        letters = []
        position = 0
        for match in _TOKEN.finditer(text):
            if match.start() != position:
                break
            letters.append(int(match.group(1) or match.group(2)))
            position = match.end()
        if position != len(text):
            raise InvalidParameter(f"cannot parse edgeword {text!r}", {"text": text})
        return cls(n, tuple(letters))

    def __str__(self) -> str:
        return ''.join(str(x) if x < 10 else f"({x})" for x in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return Edgeword(self.n, self.letters[index])
        return self.letters[index]

    def __add__(self, other: "Edgeword") -> "Edgeword":
        if other.n != self.n:
            raise InvalidParameter(f"cannot concatenate words for n={self.n} and n={other.n}")
        return Edgeword(self.n, self.letters + other.letters)

    def reversed(self) -> "Edgeword":
        return Edgeword(self.n, self.letters[::-1])

    def is_palindrome(self) -> bool:
        return self.letters == self.letters[::-1]

    def to_json(self) -> List[int]:
        return list(self.letters)

    @cached_property
    def prefix_counts(self) -> np.ndarray:
        """Row x holds the letter counts of the prefix of length x."""
        counts = np.zeros((len(self.letters) + 1, self.n // 2), dtype=np.int64)
        if self.letters:
            onehot = np.zeros((len(self.letters), self.n // 2), dtype=np.int64)
            onehot[np.arange(len(self.letters)), np.array(self.letters) // 2] = 1
            counts[1:] = np.cumsum(onehot, axis=0)
        return counts


@dataclass(frozen=True)
class AbelianVector:
    """Occurrence counts; entry i counts letter 2i."""
    counts: Tuple[int, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


@dataclass(frozen=True)
class FrequencyVector:
    """gamma = (cos(i pi/n)) for 0 <= i < n/2."""
    gamma: Tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.gamma)


def _even_run(k: int) -> Tuple[int, ...]:
    """s(k) = 0 2 4 ... (k-2)."""
    return tuple(range(0, k, 2))


def subrosa_edgeword(n: int) -> Edgeword:
    """
    Sub Rosa edgeword Sigma(n).

    The first half is s(n) followed by the mirrored runs ~s(2) ... ~s(n-2);
    the second half is its mirror image.
    """
    check_n(n)
    half = list(_even_run(n))
    for k in range(2, n, 2):
        half.extend(reversed(_even_run(k)))
    return Edgeword(n, tuple(half) + tuple(reversed(half)))


def abelianize(u: Edgeword) -> AbelianVector:
    """Letter counts of u, indexed by letter / 2."""
    return AbelianVector(tuple(int(x) for x in u.prefix_counts[-1]))


def optimal_frequency(n: int) -> FrequencyVector:
    """gamma = (cos(i pi / n))_i, the letter frequencies of a planar edgeword up to scale."""
    check_n(n)
    return FrequencyVector(tuple(math.cos(i * math.pi / n) for i in range(n // 2)))


class _Crossing:
    """Heap entry for a hyperplane crossing; ties are never silently broken."""

    __slots__ = ('time', 'family', 'k', 'max_bits', 'float_tol')

    def __init__(self, time: AlgebraicReal, family: int, k: int, max_bits: int, float_tol: float):
        self.time = time
        self.family = family
        self.k = k
        self.max_bits = max_bits
        self.float_tol = float_tol

    def __lt__(self, other: "_Crossing") -> bool:
        order = compare_exact(self.time, other.time, self.max_bits, self.float_tol)
        if order == Ordering.EQUAL:
            raise OrderingTie(
                f"families {self.family} and {other.family} cross at the same time",
                {"families": [self.family, other.family], "k": [self.k, other.k]},
            )
        return order == Ordering.LESS


def crossing_time(n: int, family: int, k: int) -> AlgebraicReal:
    """Parameter t = (k - 1/2) / cos(family*pi/n) where the billiard meets x_family = k."""
    return (AlgebraicReal.const(k) - AlgebraicReal.const(1) / 2) / AlgebraicReal.cos_pi(family, n)


def billiard_letters(n: int, max_bits: int = PRECISION['max_bits'],
                     float_tol: float = TOLERANCES['float']) -> Iterator[int]:
    """
    Infinite billiard word of span(gamma) + (1/2, ..., 1/2).

    Crossings with x_i = k, k >= 1, are ordered by their exact parameter;
    crossing family i emits letter 2i.
    """
    check_n(n)
    heap = [_Crossing(crossing_time(n, i, 1), i, 1, max_bits, float_tol) for i in range(n // 2)]
    heapq.heapify(heap)
    while True:
        event = heapq.heappop(heap)
        yield 2 * event.family
        heapq.heappush(heap, _Crossing(crossing_time(n, event.family, event.k + 1), event.family,
                                       event.k + 1, max_bits, float_tol))


def billiard_prefix(n: int, length: int, max_bits: int = PRECISION['max_bits'],
                    float_tol: float = TOLERANCES['float']) -> Edgeword:
    """The first length letters of the billiard word."""
    if length < 0:
        raise InvalidParameter(f"prefix length must be >= 0, got {length}")
    return Edgeword(n, tuple(islice(billiard_letters(n, max_bits, float_tol), length)))


def candidate_edgeword(n: int, i: int, max_bits: int = PRECISION['max_bits'],
                       float_tol: float = TOLERANCES['float']) -> Edgeword:
    """P_i = pref_i(w) followed by its mirror image."""
    if i < 0:
        raise InvalidParameter(f"candidate index must be >= 0, got {i}")
    prefix = billiard_prefix(n, i, max_bits, float_tol)
    return prefix + prefix.reversed()


def billiard_point(n: int, i: int) -> np.ndarray:
    """Lattice point reached by the billiard after i crossings."""
    return abelianize(billiard_prefix(n, i)).as_array()


def billiard_line_distance(n: int, i: int) -> float:
    """Distance of billiard_point(n, i) from span(gamma) + (1/2, ..., 1/2)."""
    gamma = optimal_frequency(n).as_array()
    offset = billiard_point(n, i) - 0.5
    along = offset @ gamma / (gamma @ gamma)
    return float(np.linalg.norm(offset - along * gamma))


def _check_letter(u: Edgeword, j: int) -> int:
    if j < 0 or j > u.n - 2 or j % 2:
        raise InvalidParameter(f"letter {j} is not in the alphabet for n={u.n}")
    return j // 2


def counting(u: Edgeword, j: int, x: int) -> int:
    """f_j(x): occurrences of letter j in the prefix of length x."""
    column = _check_letter(u, j)
    if not 0 <= x <= len(u):
        raise InvalidParameter(f"prefix length {x} outside [0, {len(u)}]")
    return int(u.prefix_counts[x, column])


def counting_inverse(u: Edgeword, j: int, y: int) -> Count:
    """f_j^{-1}(y): length of the shortest prefix with at least y letters j, or inf."""
    column = _check_letter(u, j)
    if y <= 0:
        return 0
    x = int(np.searchsorted(u.prefix_counts[:, column], y, side='left'))
    return x if x <= len(u) else math.inf


def letter_trend(u: Edgeword, j1: int, j2: int, x: int) -> Count:
    """
    g_{j1,j2}(x) = f_{|j1-2|}^{-1}(f_{j1}(x)) - f_{|j2-2|}^{-1}(f_{j2}(x)).

    For j1 < j2 this grows roughly like x * trend_slope(n, j1, j2).
    """
    first = counting_inverse(u, abs(j1 - 2), counting(u, j1, x))
    second = counting_inverse(u, abs(j2 - 2), counting(u, j2, x))
    if math.isinf(first) and math.isinf(second):
        return math.nan
    return first - second


def trend_slope(n: int, j1: int, j2: int) -> float:
    """Asymptotic slope of letter_trend(u, j1, j2, x) in x for u a prefix of the billiard word."""
    gamma = optimal_frequency(n).gamma
    return gamma[j1 // 2] / gamma[abs(j1 - 2) // 2] - gamma[j2 // 2] / gamma[abs(j2 - 2) // 2]


def frequency_ordered(u: Edgeword) -> bool:
    """Whether no letter occurs more often in u than a smaller letter."""
    counts = abelianize(u).counts
    return all(a >= b for a, b in zip(counts, counts[1:]))


def balance_constant(u: Edgeword) -> int:
    """
    Smallest k such that u is k-almost-balanced.

    Letters are taken as ordered by frequency through their value: letter 2a
    is the more frequent one of any pair 2a < 2b. For each pair the minimum of
    |v|_{2a} - |v|_{2b} over all factors v is min_e (D[e] - max_{s<e} D[s]) with
    D the prefix difference.
    """
    if len(u) == 0:
        return 0
    counts = u.prefix_counts
    worst = 0
    for a in range(u.n // 2):
        for b in range(a + 1, u.n // 2):
            diff = counts[:, a] - counts[:, b]
            running_max = np.maximum.accumulate(diff)[:-1]
            deficit = int(np.min(diff[1:] - running_max))
            worst = min(worst, deficit)
    return -worst
