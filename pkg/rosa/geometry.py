"""
Geometry of the 2n'th-root directions.

Covers direction vectors, lifting into Z^n, the invariant planes E_n^k,
projections, the pi/n rotation acting on lifted points and tiles, and
exact sign comparison of reals in the ring generated by cos(j*pi/n).
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional, Tuple, Union

import mpmath
import numpy as np

from .config import PRECISION, TOLERANCES, check_n
from .errors import InvalidParameter, PrecisionExhausted

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Direction:
    """One of the 2n unit directions, written as sign * v_i with 0 <= i < n."""
    i: int
    sign: int = 1

    def __post_init__(self):
        if self.i < 0:
            raise InvalidParameter(f"direction index must be >= 0, got {self.i}")
        if self.sign not in (1, -1):
            raise InvalidParameter(f"direction sign must be +1 or -1, got {self.sign}")

    @classmethod
    def from_index(cls, d: int, n: int) -> "Direction":
        d %= 2 * n
        return cls(d, 1) if d < n else cls(d - n, -1)

    def index(self, n: int) -> int:
        """Position in [0, 2n) with v_{i+n} = -v_i."""
        return self.i if self.sign > 0 else self.i + n


class Tile(NamedTuple):
    """A lifted rhombus: unit square of Z^n at `pos` spanned by e_i, e_j (i < j)."""
    pos: Tuple[int, ...]
    type: Tuple[int, int]


@dataclass(frozen=True)
class PlaneBasis:
    """Generators of the plane E_n^k."""
    n: int
    k: int
    cos_row: np.ndarray = field(repr=False, compare=False)
    sin_row: np.ndarray = field(repr=False, compare=False)

    def orthonormal(self) -> np.ndarray:
        """The two generators scaled to unit length, as a 2 x n array."""
        return np.vstack([self.cos_row, self.sin_row]) / math.sqrt(self.n / 2)


def _as_index(d: Union[int, Direction], n: int) -> int:
    return d.index(n) if isinstance(d, Direction) else int(d) % (2 * n)


def direction_vector(n: int, d: Union[int, Direction]) -> np.ndarray:
    """Return sign * (cos(i pi/n), sin(i pi/n)) for a direction."""
    check_n(n)
    index = _as_index(d, n)
    angle = index * math.pi / n
    return np.array([math.cos(angle), math.sin(angle)])


def direction_table(n: int) -> np.ndarray:
    """All 2n direction vectors as a (2n, 2) array."""
    angles = np.arange(2 * n) * math.pi / n
    return np.column_stack([np.cos(angles), np.sin(angles)])


def lift_direction(n: int, d: Union[int, Direction]) -> np.ndarray:
    """Lift of a direction: e_d for d < n, -e_{d-n} otherwise."""
    index = _as_index(d, n)
    vector = np.zeros(n, dtype=np.int64)
    if index < n:
        vector[index] = 1
    else:
        vector[index - n] = -1
    return vector


def embed(n: int, points) -> np.ndarray:
    """Project lifted points (shape (..., n)) to the tiling plane: sum x_i v_i."""
    points = np.asarray(points, dtype=float)
    return points @ direction_table(n)[:n]


def plane_basis(n: int, k: int) -> PlaneBasis:
    """Generators cos((2k+1) i pi/n) and sin((2k+1) i pi/n) of E_n^k."""
    check_n(n)
    if not 0 <= k < n // 2:
        raise InvalidParameter(f"plane index k must lie in [0, {n // 2}), got {k}", {"n": n, "k": k})
    angles = (2 * k + 1) * np.arange(n) * math.pi / n
    return PlaneBasis(n, k, np.cos(angles), np.sin(angles))


def perp_projector(n: int) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of E_n^0."""
    return np.vstack([plane_basis(n, k).orthonormal() for k in range(1, n // 2)])


def slope_distance(p, basis: PlaneBasis) -> float:
    """Euclidean distance from p to span(basis)."""
    p = np.asarray(p, dtype=float)
    frame = basis.orthonormal()
    projection = frame.T @ (frame @ p)
    return float(np.linalg.norm(p - projection))


def plane_components(points, n: int) -> np.ndarray:
    """
    Norm of the projection of each point onto every plane E_n^k.

    Returns an array of shape (len(points), n/2).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    columns = []
    for k in range(n // 2):
        coords = points @ plane_basis(n, k).orthonormal().T
        columns.append(np.linalg.norm(coords, axis=1))
    return np.column_stack(columns)


def rotate_lifted(p, steps: int = 1) -> np.ndarray:
    """
    Apply the lifted pi/n rotation `steps` times.

    One step sends e_i to e_{i+1} for i < n-1 and e_{n-1} to -e_0. Works on a
    single point or on an array of points along the last axis.
    """
    p = np.asarray(p)
    n = p.shape[-1]
    s = steps % (2 * n)
    sign = 1
    if s >= n:
        s -= n
        sign = -1
    rotated = np.roll(p, s, axis=-1) * sign
    if s:
        rotated[..., :s] *= -1
    return rotated


def rotate_tiles(positions: np.ndarray, types: np.ndarray, steps: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Rotate arrays of tiles; type (i, n-1) at x becomes (0, i+1) at rho(x) - e_0."""
    positions = np.asarray(positions, dtype=np.int64)
    types = np.asarray(types, dtype=np.int64)
    n = positions.shape[-1]
    for _ in range(steps % (2 * n)):
        positions = rotate_lifted(positions, 1)
        wrap = types[:, 1] == n - 1
        new_types = types + 1
        new_types[wrap, 0] = 0
        new_types[wrap, 1] = types[wrap, 0] + 1
        positions = positions.copy()
        positions[wrap, 0] -= 1
        types = new_types
    return positions, types


def rotate_tile(tile: Tile, steps: int = 1) -> Tile:
    """The tile turned by steps * pi/n about the origin."""
    positions, types = rotate_tiles(np.array([tile.pos]), np.array([tile.type]), steps)
    return Tile(tuple(int(x) for x in positions[0]), (int(types[0, 0]), int(types[0, 1])))


def tile_from_edges(n: int, start, d1: int, d2: int) -> Tile:
    """The lifted tile with a vertex at `start` and edges along directions d1, d2."""
    a, b = lift_direction(n, d1), lift_direction(n, d2)
    i, j = sorted((d1 % n, d2 % n))
    if i == j:
        raise InvalidParameter(f"directions {d1} and {d2} are parallel")
    pos = np.asarray(start, dtype=np.int64) + np.minimum(a, 0) + np.minimum(b, 0)
    return Tile(tuple(int(x) for x in pos), (i, j))


def tile_vertices(n: int, tile: Tile) -> np.ndarray:
    """Counter-clockwise lifted vertices pos, pos+e_i, pos+e_i+e_j, pos+e_j."""
    base = np.asarray(tile.pos, dtype=np.int64)
    ei, ej = lift_direction(n, tile.type[0]), lift_direction(n, tile.type[1])
    return np.array([base, base + ei, base + ei + ej, base + ej])


def angle_class(n: int, tile_type: Tuple[int, int]) -> int:
    """Metatile class in 1..n/2: the smaller angle of the rhombus in units of pi/n."""
    d = tile_type[1] - tile_type[0]
    return min(d, n - d)


def tile_area(n: int, tile_type: Tuple[int, int]) -> float:
    """sin((j - i) pi / n)."""
    return math.sin((tile_type[1] - tile_type[0]) * math.pi / n)


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


_MP_LOCK = threading.Lock()


@lru_cache(maxsize=8192)
def _cos_enclosure(j: int, n: int, bits: int) -> Tuple[Fraction, Fraction]:
    with _MP_LOCK:
        with mpmath.workprec(bits + 10):
            value = mpmath.cos(mpmath.pi * j / n)
            sign = -1 if value < 0 else 1
            man, exp = value.man_exp
    centre = sign * Fraction(int(man)) * Fraction(2) ** int(exp)
    margin = Fraction(1, 2 ** max(bits - 2, 1))
    return max(centre - margin, Fraction(-1)), min(centre + margin, Fraction(1))


Number = Union[int, Fraction, "AlgebraicReal"]


@dataclass(frozen=True)
class AlgebraicReal:
    """
    Expression over rationals and cos(j*pi/n), closed under + - * /.

    Equality is syntactic identity of the (canonicalised) expression tree.
    Values are refined on demand through rational interval enclosures.
    """
    op: str
    args: tuple
    approx: float = field(default=float('nan'), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'approx', self._float())

    @classmethod
    def const(cls, value) -> "AlgebraicReal":
        return cls('const', (Fraction(value),))

    @classmethod
    def cos_pi(cls, j: int, n: int) -> "AlgebraicReal":
        """cos(j*pi/n), with the exactly known values folded to rationals."""
        if n <= 0:
            raise InvalidParameter(f"cos_pi denominator must be positive, got {n}")
        j %= 2 * n
        if j > n:
            j = 2 * n - j
        g = math.gcd(j, n)
        j, n = j // g, n // g
        if j == 0:
            return cls.const(1)
        if j == n:
            return cls.const(-1)
        if 2 * j == n:
            return cls.const(0)
        if 3 * j == n:
            return cls.const(Fraction(1, 2))
        if 3 * j == 2 * n:
            return cls.const(Fraction(-1, 2))
        if 2 * j > n:
            return -cls.cos_pi(n - j, n)
        return cls('cos', (j, n))

    @property
    def is_const(self) -> bool:
        return self.op == 'const'

    def _float(self) -> float:
        try:
            if self.op == 'const':
                return float(self.args[0])
            if self.op == 'cos':
                return math.cos(self.args[0] * math.pi / self.args[1])
            if self.op == 'neg':
                return -self.args[0].approx
            a, b = self.args[0].approx, self.args[1].approx
            if self.op == 'add':
                return a + b
            if self.op == 'sub':
                return a - b
            if self.op == 'mul':
                return a * b
            if self.op == 'div':
                return a / b
        except ZeroDivisionError:
            return float('nan')
        raise InvalidParameter(f"unknown algebraic operation {self.op!r}")

    def __float__(self) -> float:
        return self.approx

    def enclosure(self, bits: int) -> Optional[Tuple[Fraction, Fraction]]:
        """Rational interval containing the value, or None if a divisor is not yet separated from 0."""
        if self.op == 'const':
            return self.args[0], self.args[0]
        if self.op == 'cos':
            return _cos_enclosure(self.args[0], self.args[1], bits)
        if self.op == 'neg':
            inner = self.args[0].enclosure(bits)
            return None if inner is None else (-inner[1], -inner[0])
        left, right = self.args[0].enclosure(bits), self.args[1].enclosure(bits)
        if left is None or right is None:
            return None
        (a, b), (c, d) = left, right
        if self.op == 'add':
            return a + c, b + d
        if self.op == 'sub':
            return a - d, b - c
        if self.op == 'mul':
            products = (a * c, a * d, b * c, b * d)
            return min(products), max(products)
        if c <= 0 <= d:
            return None
        quotients = (a / c, a / d, b / c, b / d)
        return min(quotients), max(quotients)

    def _binary(self, op: str, other: Number, reflected: bool = False) -> "AlgebraicReal":
        other = _coerce(other)
        left, right = (other, self) if reflected else (self, other)
        if left.is_const and right.is_const:
            x, y = left.args[0], right.args[0]
            if op == 'add':
                return AlgebraicReal.const(x + y)
            if op == 'sub':
                return AlgebraicReal.const(x - y)
            if op == 'mul':
                return AlgebraicReal.const(x * y)
            if y == 0:
                raise InvalidParameter("division by exact zero")
            return AlgebraicReal.const(x / y)
        if op == 'div' and right.is_const and right.args[0] == 0:
            raise InvalidParameter("division by exact zero")
        return AlgebraicReal(op, (left, right))

    def __add__(self, other):
        return self._binary('add', other)

    def __radd__(self, other):
        return self._binary('add', other, reflected=True)

    def __sub__(self, other):
        return self._binary('sub', other)

    def __rsub__(self, other):
        return self._binary('sub', other, reflected=True)

    def __mul__(self, other):
        return self._binary('mul', other)

    def __rmul__(self, other):
        return self._binary('mul', other, reflected=True)

    def __truediv__(self, other):
        return self._binary('div', other)

    def __rtruediv__(self, other):
        return self._binary('div', other, reflected=True)

    def __neg__(self):
        if self.is_const:
            return AlgebraicReal.const(-self.args[0])
        if self.op == 'neg':
            return self.args[0]
        return AlgebraicReal('neg', (self,))


def _coerce(value: Number) -> AlgebraicReal:
    if isinstance(value, AlgebraicReal):
        return value
    if isinstance(value, (int, Fraction)):
        return AlgebraicReal.const(value)
    raise InvalidParameter(f"cannot use {type(value).__name__} as an exact real")


def compare_exact(a: Number, b: Number, max_bits: int = PRECISION['max_bits'],
                  float_tol: float = TOLERANCES['float']) -> Ordering:
    """
    Decide the order of two algebraic reals.

    This function:
    1. Returns EQUAL only for syntactically identical expressions
    2. Settles values whose floats differ by more than float_tol (relative)
    3. Otherwise doubles the enclosure precision until the sign of a - b is
       known, raising PrecisionExhausted past max_bits
    """
    a, b = _coerce(a), _coerce(b)
    if a == b:
        return Ordering.EQUAL
    fa, fb = a.approx, b.approx
    if abs(fa - fb) > float_tol * (1 + abs(fa) + abs(fb)):
        return Ordering.LESS if fa < fb else Ordering.GREATER

    difference = a - b
    bits = PRECISION['start_bits']
    while bits <= max_bits:
        bounds = difference.enclosure(bits)
        if bounds is not None:
            low, high = bounds
            if low > 0:
                return Ordering.GREATER
            if high < 0:
                return Ordering.LESS
        logger.debug(f"Refining comparison beyond {bits} bits")
        bits *= 2
    raise PrecisionExhausted(
        f"could not separate {fa!r} and {fb!r} within {max_bits} bits",
        {"a": repr(a), "b": repr(b), "max_bits": max_bits},
    )


def as_tiles(items: Iterable) -> Tuple[Tile, ...]:
    """Normalise (pos, type) pairs to Tile tuples of plain ints."""
    return tuple(Tile(tuple(int(x) for x in pos), (int(t[0]), int(t[1]))) for pos, t in items)
