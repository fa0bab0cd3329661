"""
Metatile polygons and their rhombus tilings.

A metatile for angle class k is the polygon whose four sides run along
v_0, v_k, -v_0, -v_k and each carry the edgeword: letter 0 is a single
edge, letter 2m the inner half-path v_{d+m}, v_{d-m} of a rhombus bisected
by the side. Tileability is decided by the counting-function criterion;
tilings are built from the Kenyon matching by chain peeling, with a
backtracking search as fallback and oracle.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import LIMITS, TOLERANCES, check_n
from .edgeword import Edgeword, abelianize, balance_constant, counting, counting_inverse, frequency_ordered
from .errors import (ConsistencyError, CornerConditionFailed, InvalidParameter, LimitExceeded, NoMatching,
                     PreconditionFailed, Stuck)
from .geometry import Tile, direction_table, lift_direction, tile_area, tile_from_edges
from .patch import LiftedPatch

logger = logging.getLogger(__name__)

EPS = 1e-9

# Irrational-slope ray for the crossing-number test
_RAY_ANGLE = 0.3819660113


@dataclass(frozen=True)
class EdgeOrigin:
    """Where a polygon edge comes from: side 0-3, index in the side's word, letter."""
    side: int
    position: int
    letter: int


@dataclass(frozen=True)
class BoundaryRhombus:
    """The full rhombus of a nonzero letter on a metatile side."""
    tile: Tile
    origin: EdgeOrigin
    start: Tuple[int, ...]


@dataclass(frozen=True)
class BoundaryPolygon:
    n: int
    k: int
    edgeword: Edgeword
    dirs: Tuple[int, ...]
    origins: Tuple[EdgeOrigin, ...]
    side_starts: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.dirs)

    @property
    def side_directions(self) -> Tuple[int, ...]:
        return (0, self.k, self.n, self.n + self.k)

    @cached_property
    def lifted_vertices(self) -> np.ndarray:
        """Start vertex of every edge, the first one at the origin."""
        lifts = _lift_table(self.n)[list(self.dirs)]
        vertices = np.zeros((len(self.dirs), self.n), dtype=np.int64)
        vertices[1:] = np.cumsum(lifts, axis=0)[:-1]
        return vertices

    @cached_property
    def plane_vertices(self) -> np.ndarray:
        return self.lifted_vertices @ direction_table(self.n)[:self.n]

    def side_displacement(self, side: int) -> np.ndarray:
        start = self.side_starts[side]
        end = self.side_starts[side + 1] if side < 3 else len(self.dirs)
        return _lift_table(self.n)[list(self.dirs[start:end])].sum(axis=0)

    def corner_angles(self) -> Tuple[int, ...]:
        """Interior angle at the start of each side, in units of pi/n."""
        sides = self.side_directions
        return tuple(self.n - (sides[c] - sides[c - 1]) % (2 * self.n) for c in range(4))

    def area(self) -> float:
        return polygon_area(self)


@dataclass(frozen=True)
class TileabilityResult:
    ok: bool
    witness: Optional[Tuple[int, int, int]] = None

    def to_json(self) -> Dict:
        return {"ok": self.ok, "witness": list(self.witness) if self.witness else None}


@dataclass(frozen=True)
class KenyonMatching:
    polygon: BoundaryPolygon
    partner: Tuple[int, ...]

    def pairs(self) -> List[Tuple[int, int]]:
        return [(a, b) for a, b in enumerate(self.partner) if a < b]


@dataclass(frozen=True)
class InteriorTiling:
    n: int
    tiles: Tuple[Tile, ...]
    method: str = "peel"
    nodes: int = 0

    def __len__(self) -> int:
        return len(self.tiles)

    def area(self) -> float:
        return sum(tile_area(self.n, t.type) for t in self.tiles)

    def to_patch(self, meta: Optional[Dict] = None) -> LiftedPatch:
        return LiftedPatch.from_tiles(self.n, self.tiles, meta)


@dataclass(frozen=True)
class BruteForceResult:
    status: str
    tiling: Optional[InteriorTiling] = None
    nodes: int = 0

    @property
    def tileable(self) -> bool:
        return self.status == "tiled"


def _lift_table(n: int) -> np.ndarray:
    return np.vstack([lift_direction(n, d) for d in range(2 * n)])


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def boundary_polygon(n: int, u: Edgeword, k: int) -> BoundaryPolygon:
    """
    Boundary of the metatile of angle k*pi/n.

    Sides 0 and 1 read u forwards, the returning sides 2 and 3 read it
    backwards, so that the edge shared by two neighbouring metatiles carries
    the same rhombi from both sides.
    """
    check_n(n)
    if u.n != n:
        raise InvalidParameter(f"edgeword alphabet is for n={u.n}, not n={n}")
    if not 1 <= k <= n // 2:
        raise InvalidParameter(f"angle class k must lie in [1, {n // 2}], got {k}", {"k": k})
    if len(u) == 0:
        raise PreconditionFailed("boundary_polygon needs a nonempty edgeword")

    dirs: List[int] = []
    origins: List[EdgeOrigin] = []
    starts: List[int] = []
    words = (u.letters, u.letters, u.letters[::-1], u.letters[::-1])
    for side, (d, word) in enumerate(zip((0, k, n, n + k), words)):
        starts.append(len(dirs))
        for position, letter in enumerate(word):
            origin = EdgeOrigin(side, position, letter)
            if letter == 0:
                dirs.append(d)
                origins.append(origin)
            else:
                m = letter // 2
                dirs.extend([(d + m) % (2 * n), (d - m) % (2 * n)])
                origins.extend([origin, origin])

    polygon = BoundaryPolygon(n, k, u, tuple(dirs), tuple(origins), tuple(starts))
    total = _lift_table(n)[dirs].sum(axis=0)
    if np.any(total):
        raise ConsistencyError(f"metatile boundary does not close: {total.tolist()}", {"k": k, "edgeword": str(u)})
    return polygon


def polygon_vertices(p: BoundaryPolygon, lifted: bool = True) -> np.ndarray:
    """Polygon corners, in Z^n or in the plane."""
    return p.lifted_vertices if lifted else p.plane_vertices


def polygon_area(p: BoundaryPolygon) -> float:
    """Area enclosed by the boundary in the plane."""
    xy = p.plane_vertices
    x, y = xy[:, 0], xy[:, 1]
    return float(0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def boundary_rhombi(p: BoundaryPolygon) -> List[BoundaryRhombus]:
    """Full rhombi of the nonzero letters. Each sits just outside the polygon, against its zigzag."""
    rhombi = []
    vertices = p.lifted_vertices
    index = 0
    while index < len(p.dirs):
        origin = p.origins[index]
        if origin.letter == 0:
            index += 1
            continue
        d = p.side_directions[origin.side]
        m = origin.letter // 2
        start = vertices[index]
        rhombi.append(BoundaryRhombus(tile_from_edges(p.n, start, d + m, d - m), origin,
                                      tuple(int(x) for x in start)))
        index += 2
    return rhombi


def tileability_criterion(n: int, u: Edgeword) -> TileabilityResult:
    """
    Counting-function test for all metatiles induced by u.

    Fails at position x and letter j > u_x when
    f_{|j-2|}^{-1}(f_j(x+1)) >= f_{|u_x-2|}^{-1}(f_{u_x}(x+1)); an infinite
    right-hand side only fails against an infinite left-hand side.
    """
    check_n(n)
    if u.n != n:
        raise InvalidParameter(f"edgeword alphabet is for n={u.n}, not n={n}")
    missing = sorted(set(range(0, n - 1, 2)) - set(u.letters))
    if missing:
        raise PreconditionFailed(f"edgeword lacks letters {missing}", {"missing": missing})
    if not frequency_ordered(u):
        counts = list(abelianize(u).counts)
        raise PreconditionFailed(f"letter counts {counts} of {u} increase with the letter value",
                                 {"counts": counts})
    balance = balance_constant(u)
    if balance > 2:
        raise PreconditionFailed(f"edgeword is only {balance}-almost-balanced", {"balance": balance})

    for x, letter in enumerate(u.letters):
        reference = counting_inverse(u, abs(letter - 2), counting(u, letter, x + 1))
        for j in range(letter + 2, n, 2):
            value = counting_inverse(u, abs(j - 2), counting(u, j, x + 1))
            if not value < reference:
                logger.debug(f"criterion fails for {u} at x={x}, u_x={letter}, j={j}")
                return TileabilityResult(False, (x, letter, j))
    return TileabilityResult(True)


def corner_crossing_check(n: int, u: Edgeword, k: int) -> bool:
    """Whether the chains of the first edge 0 and the first rhombus 2 cross in the corner of angle k*pi/n."""
    check_n(n)
    if not 1 <= k < n:
        raise InvalidParameter(f"corner angle k must lie in [1, {n - 1}], got {k}")
    if u.letters[:2] != (0, 2):
        raise PreconditionFailed(f"edgeword {u} does not start with 02")
    half = n // 2
    if k < half:
        return counting_inverse(u, 2 * k - 2, 1) < counting_inverse(u, 2 * k, 1)
    if k == half:
        return True
    if k == half + 1:
        return counting_inverse(u, 2, 1) < counting_inverse(u, 0, 2)
    kk = n - k
    total = len(u)
    return counting_inverse(u, 0, counting(u, 2 * kk, total) + 1) > \
        counting_inverse(u, 2, counting(u, 2 * kk + 2, total) + 1)


def _matching_failure(p: BoundaryPolygon, partner: Sequence[int]) -> Optional[str]:
    """Name of the first Kenyon property the pairing breaks, or None."""
    n = p.n
    dirs = np.array(p.dirs)
    partner = np.array(partner)
    index = np.arange(len(dirs))
    if np.any(partner[partner] != index) or np.any(partner == index):
        return "K1"
    if np.any((dirs[partner] - dirs) % (2 * n) != n):
        return "K1"

    lo = np.minimum(index, partner)
    hi = np.maximum(index, partner)
    keep = index < partner
    lo, hi = lo[keep], hi[keep]
    types = dirs[lo] % n
    crossing = (lo[:, None] < lo[None, :]) & (lo[None, :] < hi[:, None]) & (hi[:, None] < hi[None, :])
    if np.any(crossing & (types[:, None] == types[None, :])):
        return "K2"

    vectors = direction_table(n)[dirs]
    mids = p.plane_vertices + vectors / 2
    if np.any(_cross(vectors, mids[partner] - mids) <= EPS):
        return "K3"

    a, b = np.nonzero(crossing)
    if len(a) and np.any(_cross(vectors[lo[a]], vectors[lo[b]]) <= EPS):
        return "K4"
    return None


def build_matching(p: BoundaryPolygon) -> KenyonMatching:
    """
    Per-type nearest non-crossing pairing of the polygon edges.

    Edges of a type are read as brackets, the positive direction opening; the
    cyclic sequence is rotated to start after its lowest prefix sum so that
    it becomes well nested. The result is then checked against K1-K4.
    """
    n = p.n
    m = len(p.dirs)
    partner = [-1] * m
    for t in range(n):
        positions = [q for q, d in enumerate(p.dirs) if d % n == t]
        if not positions:
            continue
        signs = [1 if p.dirs[q] < n else -1 for q in positions]
        if sum(signs):
            raise NoMatching("K1", f"edge type {t} has unbalanced orientations", {"type": t})
        prefix = np.cumsum(signs)
        shift = (int(np.argmin(prefix)) + 1) % len(positions)
        stack: List[int] = []
        for offset in range(len(positions)):
            slot = (shift + offset) % len(positions)
            if signs[slot] > 0:
                stack.append(positions[slot])
            else:
                mate = stack.pop()
                partner[mate] = positions[slot]
                partner[positions[slot]] = mate

    failure = _matching_failure(p, partner)
    if failure is not None:
        logger.debug(f"matching for k={p.k} breaks {failure}")
        raise NoMatching(failure, f"canonical matching violates {failure}", {"k": p.k})
    return KenyonMatching(p, tuple(partner))


class _Peeler:
    """Shrinking boundary walk with its chain pairing."""

    def __init__(self, polygon: BoundaryPolygon, matching: KenyonMatching):
        self.n = polygon.n
        self.lifts = _lift_table(self.n)
        self.vectors = direction_table(self.n)
        self.dirs = list(polygon.dirs)
        self.partner = list(matching.partner)
        self.verts = [v.copy() for v in polygon.lifted_vertices]
        self.tiles: List[Tile] = []

    def ready(self, p: int) -> bool:
        m = len(self.dirs)
        q = (p + 1) % m
        if self.partner[p] == q:
            return False
        if _cross(self.vectors[self.dirs[p]], self.vectors[self.dirs[q]]) <= EPS:
            return False
        return (self.partner[p] - p) % m < (self.partner[q] - p) % m

    def place(self, p: int) -> None:
        m = len(self.dirs)
        q = (p + 1) % m
        a, b = self.dirs[p], self.dirs[q]
        self.tiles.append(tile_from_edges(self.n, self.verts[p], a, b))
        mate_p, mate_q = self.partner[p], self.partner[q]
        self.dirs[p], self.dirs[q] = b, a
        self.partner[p], self.partner[q] = mate_q, mate_p
        self.partner[mate_q] = p
        self.partner[mate_p] = q
        self.verts[q] = self.verts[p] + self.lifts[b]

    def remove_spikes(self) -> None:
        while self.dirs:
            m = len(self.dirs)
            removed = set()
            for q in range(m):
                if self.partner[q] == (q + 1) % m:
                    removed.update((q, (q + 1) % m))
            if not removed:
                return
            keep = [i for i in range(m) if i not in removed]
            index = {old: new for new, old in enumerate(keep)}
            self.partner = [index[self.partner[i]] for i in keep]
            self.dirs = [self.dirs[i] for i in keep]
            self.verts = [self.verts[i] for i in keep]

    def symmetry_order(self) -> int:
        m = len(self.dirs)
        for s in (4, 2):
            if m % s or m // s < 2:
                continue
            shift, turn = m // s, 2 * self.n // s
            if all(self.dirs[(q + shift) % m] == (self.dirs[q] + turn) % (2 * self.n)
                   and self.partner[(q + shift) % m] == (self.partner[q] + shift) % m for q in range(m)):
                return s
        return 1

    def first_ready(self) -> Optional[int]:
        return next((p for p in range(len(self.dirs)) if self.ready(p)), None)

    def peel(self) -> bool:
        """Place tiles until the region is empty; False when no crossing is ready."""
        while self.dirs:
            p = self.first_ready()
            if p is None:
                return False
            m = len(self.dirs)
            s = self.symmetry_order()
            orbit = [(p + t * (m // s)) % m for t in range(s)]
            if s > 1 and all(self.ready(e) for e in orbit):
                for e in orbit:
                    if self.ready(e):
                        self.place(e)
            else:
                self.place(p)
            self.remove_spikes()
        return True


def _force_corners(polygon: BoundaryPolygon, peeler: _Peeler) -> None:
    m = len(polygon.dirs)
    ears = []
    for c, angle in enumerate(polygon.corner_angles()):
        start = polygon.side_starts[c]
        if angle == 1:
            ears.append((c, (start - 1) % m))
        else:
            ears.extend([(c, (start - 2) % m), (c, start)])
    for corner, ear in ears:
        if not peeler.ready(ear):
            raise CornerConditionFailed(
                f"no narrow rhombus fits at corner {corner} of the k={polygon.k} metatile",
                {"corner": corner, "k": polygon.k, "edge": ear},
            )
        peeler.place(ear)
    peeler.remove_spikes()


def tile_interior(p: BoundaryPolygon, m: Optional[KenyonMatching] = None, force_corners: bool = True,
                  node_limit: int = LIMITS['node_limit']) -> InteriorTiling:
    """
    Tile a metatile polygon by chain peeling.

    A crossing between the chains of two consecutive boundary edges is ready
    when it sits at a convex turn and the chains leave in the right order;
    its rhombus is placed and the walk shrinks. Ready crossings are placed
    together with their images under the walk's rotational symmetry. With
    force_corners the narrow rhombi on both sides of every corner go first.
    """
    matching = m if m is not None else build_matching(p)
    peeler = _Peeler(p, matching)
    if force_corners:
        _force_corners(p, peeler)

    method = "peel"
    nodes = 0
    if not peeler.peel():
        logger.warning(f"chain peeling stuck with {len(peeler.dirs)} boundary edges left (k={p.k}); "
                       f"searching the remaining region")
        start = peeler.verts[0]
        rest, nodes = _search(p.n, tuple(peeler.dirs), start, node_limit)
        if rest is None:
            raise Stuck(f"remaining region of the k={p.k} metatile cannot be tiled",
                        {"k": p.k, "edges": len(peeler.dirs)})
        peeler.tiles.extend(rest)
        method = "peel+search"

    tiling = InteriorTiling(p.n, tuple(peeler.tiles), method, nodes)
    validate_tiling(p, tiling)
    logger.debug(f"tiled k={p.k} metatile with {len(tiling)} rhombi ({method})")
    return tiling


def validate_tiling(p: BoundaryPolygon, tiling: InteriorTiling) -> None:
    """Area equality, oriented edge-to-edge cover and boundary match."""
    area = tiling.area()
    target = polygon_area(p)
    if abs(area - target) > TOLERANCES['area'] * (1 + abs(target)):
        raise ConsistencyError(f"tiles cover area {area}, polygon has {target}", {"k": p.k})

    edges: Counter = Counter()
    eye = np.eye(p.n, dtype=np.int64)
    for tile in tiling.tiles:
        base = np.asarray(tile.pos, dtype=np.int64)
        ei, ej = eye[tile.type[0]], eye[tile.type[1]]
        corners = [base, base + ei, base + ei + ej, base + ej]
        for a, b in zip(corners, corners[1:] + corners[:1]):
            edges[(tuple(a.tolist()), tuple(b.tolist()))] += 1

    vertices = [tuple(v.tolist()) for v in p.lifted_vertices]
    outline = set(zip(vertices, vertices[1:] + vertices[:1]))
    for edge in outline:
        if edges[edge] != 1 or edges[(edge[1], edge[0])] != 0:
            raise ConsistencyError("tiling does not match the polygon boundary", {"edge": [list(edge[0])]})
    for edge, count in edges.items():
        if edge in outline:
            continue
        if count != 1 or edges[(edge[1], edge[0])] != 1:
            raise ConsistencyError("tiles overlap or leave a gap", {"edge": [list(edge[0]), list(edge[1])]})


def _cancel(dirs: List[int], start: np.ndarray, n: int, lifts: np.ndarray) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Remove back-and-forth edge pairs; the start vertex follows a removed wrap pair."""
    out: List[int] = []
    for d in dirs:
        if out and (out[-1] - d) % (2 * n) == n:
            out.pop()
        else:
            out.append(d)
    start = np.array(start, dtype=np.int64)
    while len(out) >= 2 and (out[-1] - out[0]) % (2 * n) == n:
        start = start + lifts[out[0]]
        out = out[1:-1]
    return tuple(out), start


def _canonical(dirs: Tuple[int, ...], start: np.ndarray, lifts: np.ndarray, plane: np.ndarray):
    """Rotate the walk to begin at its lowest, then leftmost, vertex."""
    if not dirs:
        return dirs, start
    steps = lifts[list(dirs)]
    vertices = np.vstack([start, start + np.cumsum(steps, axis=0)[:-1]])
    xy = vertices @ plane
    first = int(np.lexsort((np.round(xy[:, 0], 9), np.round(xy[:, 1], 9)))[0])
    return dirs[first:] + dirs[:first], vertices[first]


def _tile_fits(corners: np.ndarray, seg_start: np.ndarray, seg_dir: np.ndarray) -> bool:
    """True when no boundary segment enters the open rhombus."""
    edges = np.roll(corners, -1, axis=0) - corners
    normals = np.column_stack([-edges[:, 1], edges[:, 0]])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    num = EPS - np.einsum('sec,ec->se', seg_start[:, None, :] - corners[None, :, :], normals)
    den = seg_dir @ normals.T
    t0 = np.zeros(len(seg_start))
    t1 = np.ones(len(seg_start))
    entering = den > 1e-15
    leaving = den < -1e-15
    ratio = np.divide(num, den, out=np.zeros_like(num), where=entering | leaving)
    t0 = np.maximum(t0, np.max(np.where(entering, ratio, -np.inf), axis=1))
    t1 = np.minimum(t1, np.min(np.where(leaving, ratio, np.inf), axis=1))
    blocked = np.any(~(entering | leaving) & (num > 0), axis=1)
    return not np.any(~blocked & (t1 - t0 > EPS))


def _point_inside(point: np.ndarray, seg_start: np.ndarray, seg_dir: np.ndarray) -> bool:
    ray = np.array([math.cos(_RAY_ANGLE), math.sin(_RAY_ANGLE)])
    denom = _cross(ray, seg_dir)
    ok = np.abs(denom) > 1e-15
    offset = seg_start - point
    s = np.divide(_cross(offset, seg_dir), denom, out=np.zeros_like(denom), where=ok)
    t = np.divide(_cross(offset, ray), denom, out=np.zeros_like(denom), where=ok)
    hits = ok & (s > 0) & (t >= 0) & (t < 1)
    return bool(np.count_nonzero(hits) % 2)


def _search(n: int, dirs: Tuple[int, ...], start, node_limit: int):
    """
    Backtracking tiler for a closed boundary walk.

    Always fills the wedge at the lowest-leftmost vertex, trying each rhombus
    that has the outgoing edge as a side. Failed regions are remembered.
    Returns (tiles or None, nodes visited).
    """
    lifts = _lift_table(n)
    table = direction_table(n)
    plane = table[:n]
    failed = set()
    nodes = 0

    def children(state):
        walk, origin = state
        vertices = np.vstack([origin, origin + np.cumsum(lifts[list(walk)], axis=0)[:-1]])
        xy = vertices @ plane
        seg_dir = table[list(walk)]
        q, r = walk[0], walk[-1]
        angle = (r + n - q) % (2 * n)
        for t in range(1, min(angle, n - 1) + 1):
            b = (q + t) % (2 * n)
            v = xy[0]
            corners = np.array([v, v + table[q], v + table[q] + table[b], v + table[b]])
            if not _tile_fits(corners, xy, seg_dir):
                continue
            if not _point_inside(corners.mean(axis=0), xy, seg_dir):
                continue
            tile = tile_from_edges(n, origin, q, b)
            reduced, new_origin = _cancel([b, q, (b + n) % (2 * n)] + list(walk[1:]), origin, n, lifts)
            reduced, new_origin = _canonical(reduced, new_origin, lifts, plane)
            yield tile, (reduced, new_origin)

    def key(state):
        return state[0], tuple(int(x) for x in state[1])

    walk, origin = _cancel(list(dirs), np.asarray(start, dtype=np.int64), n, lifts)
    root = _canonical(walk, origin, lifts, plane)
    if not root[0]:
        return [], 0
    path: List[Tile] = []
    stack = [(root, children(root))]
    while stack:
        state, pending = stack[-1]
        child = next(pending, None)
        if child is None:
            failed.add(key(state))
            stack.pop()
            if stack:
                path.pop()
            continue
        tile, nxt = child
        if not nxt[0]:
            return path + [tile], nodes
        if key(nxt) in failed:
            continue
        nodes += 1
        if nodes > node_limit:
            raise LimitExceeded(f"tiling search exceeded {node_limit} nodes", {"node_limit": node_limit})
        path.append(tile)
        stack.append((nxt, children(nxt)))
    return None, nodes


def brute_force_tile(p: BoundaryPolygon, node_limit: int = LIMITS['node_limit']) -> BruteForceResult:
    """Exhaustive search for any tiling of the polygon."""
    tiles, nodes = _search(p.n, p.dirs, np.zeros(p.n, dtype=np.int64), node_limit)
    if tiles is None:
        logger.debug(f"search proved the k={p.k} metatile of {p.edgeword} untileable after {nodes} nodes")
        return BruteForceResult("untileable", None, nodes)
    tiling = InteriorTiling(p.n, tuple(tiles), "search", nodes)
    validate_tiling(p, tiling)
    return BruteForceResult("tiled", tiling, nodes)
