"""
De Bruijn multigrid G_n(1/2) and its dual rhombus tiling.

Family j consists of the lines <z, v_j> = k - 1/2, k in Z, for
0 <= j < n. A cell is labelled by K_j = floor(<z, v_j> + 1/2), which is
its lifted vertex; every intersection of a line of family r with one of
family s is dual to the rhombus of type (r, s).
"""

import heapq
import logging
import math
from itertools import islice
from typing import Iterator, List, Optional

import numpy as np

from .config import LIMITS, PRECISION, TOLERANCES, check_n
from .edgeword import Edgeword
from .errors import DegenerateMultigrid, InvalidParameter, PatchTooLarge
from .geometry import AlgebraicReal, Ordering, compare_exact, direction_table, rotate_lifted, rotate_tiles
from .patch import LiftedPatch, row_view

logger = logging.getLogger(__name__)

OFFSET = 0.5


class _Event:
    """A crossing of the positive horizontal ray with one grid line; ties are allowed."""

    __slots__ = ('time', 'family', 'k', 'max_bits', 'float_tol')

    def __init__(self, time: AlgebraicReal, family: int, k: int, max_bits: int, float_tol: float):
        self.time = time
        self.family = family
        self.k = k
        self.max_bits = max_bits
        self.float_tol = float_tol

    def __lt__(self, other: "_Event") -> bool:
        return compare_exact(self.time, other.time, self.max_bits, self.float_tol) == Ordering.LESS

    def same_time(self, other: "_Event") -> bool:
        return compare_exact(self.time, other.time, self.max_bits, self.float_tol) == Ordering.EQUAL


def _event_time(n: int, family: int, k: int) -> AlgebraicReal:
    # families past n/2 meet the ray at the mirrored family's parameter
    base = family if 2 * family < n else n - family
    return (AlgebraicReal.const(k) - AlgebraicReal.const(1) / 2) / AlgebraicReal.cos_pi(base, n)


def _halfline_letters(n: int, max_bits: int, float_tol: float) -> Iterator[int]:
    families = [j for j in range(n) if 2 * j != n]
    heap = [_Event(_event_time(n, j, 1), j, 1, max_bits, float_tol) for j in families]
    heapq.heapify(heap)
    while True:
        first = heapq.heappop(heap)
        group = [first]
        while heap and heap[0].same_time(first):
            group.append(heapq.heappop(heap))
        for event in group:
            heapq.heappush(heap, _Event(_event_time(n, event.family, event.k + 1), event.family,
                                        event.k + 1, max_bits, float_tol))
        members = sorted(event.family for event in group)
        if members == [0]:
            yield 0
        elif len(members) == 2 and members[0] + members[1] == n:
            yield 2 * members[0]
        else:
            raise DegenerateMultigrid(f"grid lines of families {members} meet on the half-line",
                                      {"families": members})


def halfline_word(n: int, length: int, max_bits: int = PRECISION['max_bits'],
                  float_tol: float = TOLERANCES['float']) -> Edgeword:
    """
    Word read along the positive horizontal ray of G_n(1/2).

    A vertical line emits 0; the simultaneous crossing of families i and
    n - i emits 2i.
    """
    check_n(n)
    if length < 0:
        raise InvalidParameter(f"length must be >= 0, got {length}")
    return Edgeword(n, tuple(islice(_halfline_letters(n, max_bits, float_tol), length)))


def dual_patch(n: int, radius: float, max_tiles: int = LIMITS['max_tiles']) -> LiftedPatch:
    """Rhombi dual to every grid intersection within the given radius of the origin."""
    check_n(n)
    if radius <= 0:
        raise InvalidParameter(f"radius must be positive, got {radius}")
    lines = np.arange(math.ceil(-radius + OFFSET), math.floor(radius + OFFSET) + 1)
    pairs = n * (n - 1) // 2
    if pairs * len(lines) ** 2 > 4 * max_tiles:
        raise PatchTooLarge(f"radius {radius} needs about {pairs * len(lines) ** 2} intersections",
                            {"radius": radius, "max_tiles": max_tiles})

    normals = direction_table(n)[:n]
    positions: List[np.ndarray] = []
    types: List[np.ndarray] = []
    for r in range(n):
        for s in range(r + 1, n):
            kr, ks = np.meshgrid(lines, lines, indexing='ij')
            kr, ks = kr.ravel(), ks.ravel()
            rhs = np.column_stack([kr - OFFSET, ks - OFFSET])
            points = np.linalg.solve(np.vstack([normals[r], normals[s]]), rhs.T).T
            inside = np.linalg.norm(points, axis=1) <= radius
            points, kr, ks = points[inside], kr[inside], ks[inside]
            if len(points) == 0:
                continue
            values = points @ normals.T + OFFSET
            others = np.ones(n, dtype=bool)
            others[[r, s]] = False
            gap = np.abs(values[:, others] - np.round(values[:, others]))
            if np.any(gap < 1e-9):
                logger.error(f"degenerate intersection of families {r}, {s} and another family")
                raise DegenerateMultigrid(f"three grid lines meet near an intersection of families {r} and {s}",
                                          {"families": [r, s]})
            cells = np.floor(values).astype(np.int64)
            cells[:, r] = kr - 1
            cells[:, s] = ks - 1
            positions.append(cells)
            types.append(np.tile([r, s], (len(cells), 1)))

    if not positions:
        return LiftedPatch.empty(n)
    patch = LiftedPatch(n, np.vstack(positions), np.vstack(types), {"seed": "multigrid", "radius": radius})
    logger.info(f"multigrid patch of radius {radius}: {len(patch)} tiles")
    return patch


def _cone_side(n: int, word: Edgeword, depth: int):
    """Edges and tiles the word demands along the positive horizontal ray."""
    eye = np.eye(n, dtype=np.int64)
    current = np.zeros(n, dtype=np.int64)
    edges, tiles = [], []
    for letter in word.letters[:depth]:
        if letter == 0:
            edges.append(np.append(current, 0))
            current = current + eye[0]
        else:
            i = letter // 2
            tiles.append(np.concatenate([current - eye[n - i], [i, n - i]]))
            current = current + eye[i] - eye[n - i]
    return (np.array(edges, dtype=np.int64).reshape(-1, n + 1),
            np.array(tiles, dtype=np.int64).reshape(-1, n + 2))


def cone_check(patch: LiftedPatch, word: Edgeword, depth: Optional[int] = None) -> bool:
    """
    Whether the word is carried on both sides of the cone of angle pi/n at the origin.

    The second side is the first one rotated by one step.
    """
    n = patch.n
    depth = len(word) if depth is None else depth
    edges, tiles = _cone_side(n, word, depth)

    rotated_edges = edges.copy()
    rotated_edges[:, :n] = rotate_lifted(edges[:, :n], 1)
    rotated_edges[:, n] = 1
    rot_pos, rot_types = rotate_tiles(tiles[:, :n], tiles[:, n:], 1)
    rotated_tiles = np.hstack([rot_pos, rot_types])

    all_edges = np.vstack([edges, rotated_edges])
    all_tiles = np.vstack([tiles, rotated_tiles])
    edge_ok = np.isin(row_view(all_edges), row_view(patch.edge_rows())) if len(all_edges) else np.ones(0, bool)
    tile_ok = np.isin(row_view(all_tiles), row_view(patch.rows)) if len(all_tiles) else np.ones(0, bool)
    if not (np.all(edge_ok) and np.all(tile_ok)):
        logger.debug(f"cone check failed: {int(np.count_nonzero(~edge_ok))} edges and "
                     f"{int(np.count_nonzero(~tile_ok))} rhombi missing")
        return False
    return True
