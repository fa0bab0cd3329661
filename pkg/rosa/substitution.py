"""
Substitution rules built from edgewords.

A rule stores, for every angle class k = 1..n/2, the canonical metatile of
the narrow tile (0, k) at the origin: the chain-peeled interior plus the
full rhombi sitting on its four sides. Every other tile type is reached by
a power of the lifted pi/n rotation, so a tile (x, tau) with
tau at p = rho^r((0, k) at 0) is replaced by phi(x) - phi(p) + rho^r(metatile).
"""

import copy
import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse
from tqdm import tqdm

from .config import LIMITS, PRECISION, TOLERANCES, check_n
from .edgeword import Edgeword, candidate_edgeword
from .errors import (ConflictError, ConsistencyError, NotFound, PatchTooLarge, PreconditionFailed, RosaError)
from .geometry import Tile, direction_table, rotate_tile, rotate_tiles, tile_from_edges
from .kenyon import (BoundaryPolygon, boundary_polygon, boundary_rhombi, build_matching, corner_crossing_check,
                     tile_interior, tileability_criterion)
from .patch import LiftedPatch, row_view
from .spectral import Planarity, PseudoCirculant, Spectrum, classify_planarity, expansion_matrix, spectrum

logger = logging.getLogger(__name__)


def tile_types(n: int) -> List[Tuple[int, int]]:
    """Every tile type (i, j), 0 <= i < j < n, in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class Metatile:
    k: int
    polygon: BoundaryPolygon
    interior: LiftedPatch
    boundary: LiftedPatch

    @property
    def tiles(self) -> LiftedPatch:
        return self.interior.union(self.boundary)


@dataclass(frozen=True)
class Placement:
    """How tiles of one type are substituted: class k, rotation r and the relative tile offsets."""
    k: int
    rotation: int
    anchor: Tuple[int, ...]
    interior_positions: np.ndarray = field(repr=False)
    interior_types: np.ndarray = field(repr=False)
    boundary_positions: np.ndarray = field(repr=False)
    boundary_types: np.ndarray = field(repr=False)

    @property
    def positions(self) -> np.ndarray:
        return np.vstack([self.interior_positions, self.boundary_positions])

    @property
    def types(self) -> np.ndarray:
        return np.vstack([self.interior_types, self.boundary_types])


@dataclass(frozen=True)
class SubstitutionRule:
    n: int
    edgeword: Edgeword
    matrix: PseudoCirculant
    metatiles: Dict[int, Metatile]
    placements: Dict[Tuple[int, int], Placement]

    @property
    def types(self) -> List[Tuple[int, int]]:
        return tile_types(self.n)

    @property
    def dense(self) -> np.ndarray:
        return self.matrix.dense()

    @property
    def scale(self) -> float:
        """Length ratio of the expansion on the tiling plane."""
        return float(np.linalg.norm(self.dense[:, 0] @ direction_table(self.n)[:self.n]))


@dataclass
class CensusRow:
    iteration: int
    counts: Dict[Tuple[int, int], int]
    boundary: Dict[int, int]

    @property
    def tiles(self) -> int:
        return sum(self.counts.values())

    @property
    def boundary_edges(self) -> int:
        return sum(self.boundary.values())

    @property
    def edges(self) -> int:
        # each tile has four edges, interior ones shared by two tiles
        return (4 * self.tiles + self.boundary_edges) // 2

    @property
    def vertices(self) -> int:
        return 1 + self.tiles + self.boundary_edges // 2


@dataclass(frozen=True)
class TypeCensus:
    """Linear maps of the census recursion, indexed by tile_types(n) and edge type."""
    n: int
    interior: np.ndarray
    rhombi: np.ndarray
    outer: np.ndarray


SELECTION_CHECKS = ("letters", "criterion", "corners", "planar", "primitive")


@dataclass
class CandidateDiagnostics:
    i: int
    edgeword: str
    checks: Dict[str, bool] = field(default_factory=dict)
    lambdas: Optional[List[float]] = None
    error: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return all(self.checks.get(name) is True for name in SELECTION_CHECKS)

    def to_json(self) -> Dict:
        return {"i": self.i, "edgeword": self.edgeword, "checks": self.checks,
                "lambdas": self.lambdas, "error": self.error}


@dataclass(frozen=True)
class Selection:
    i: int
    edgeword: Edgeword
    rule: SubstitutionRule
    spectrum: Spectrum
    log: Tuple[CandidateDiagnostics, ...]

    def to_json(self) -> Dict:
        return {
            "i": self.i,
            "edgeword": str(self.edgeword),
            "lambdas": list(self.spectrum.lambdas),
            "checks": self.log[-1].checks,
            "log": [entry.to_json() for entry in self.log],
        }


def build_substitution(n: int, u: Edgeword, force_corners: bool = True,
                       node_limit: int = LIMITS['node_limit']) -> SubstitutionRule:
    """Tile the n/2 metatiles of u and derive the placement of every tile type."""
    check_n(n)
    verdict = tileability_criterion(n, u)
    if not verdict.ok:
        raise PreconditionFailed(f"edgeword {u} fails the tileability criterion at {verdict.witness}",
                                 {"witness": list(verdict.witness)})
    matrix = expansion_matrix(n, u)
    dense = matrix.dense()

    metatiles: Dict[int, Metatile] = {}
    for k in range(1, n // 2 + 1):
        polygon = boundary_polygon(n, u, k)
        if not np.array_equal(polygon.side_displacement(0), dense[:, 0]):
            raise ConsistencyError(f"metatile side does not match the expansion for k={k}")
        interior = tile_interior(polygon, build_matching(polygon), force_corners=force_corners,
                                 node_limit=node_limit)
        rhombi = boundary_rhombi(polygon)
        metatiles[k] = Metatile(k, polygon, interior.to_patch(),
                                LiftedPatch.from_tiles(n, [r.tile for r in rhombi]))
        logger.debug(f"metatile k={k}: {len(interior)} interior tiles, {len(rhombi)} boundary rhombi")

    placements: Dict[Tuple[int, int], Placement] = {}
    origin = tuple([0] * n)
    for k in range(1, n // 2 + 1):
        meta = metatiles[k]
        for r in range(2 * n):
            image = rotate_tile(Tile(origin, (0, k)), r)
            if image.type in placements:
                continue
            shift = dense @ np.array(image.pos, dtype=np.int64)
            ipos, itypes = rotate_tiles(meta.interior.positions, meta.interior.types, r)
            bpos, btypes = rotate_tiles(meta.boundary.positions, meta.boundary.types, r)
            placements[image.type] = Placement(k, r, image.pos, ipos - shift, itypes, bpos - shift, btypes)

    missing = set(tile_types(n)) - set(placements)
    if missing:
        raise ConsistencyError(f"no placement for tile types {sorted(missing)}")
    rule = SubstitutionRule(n, u, matrix, metatiles, placements)
    logger.info(f"Built substitution for n={n}, edgeword {u} "
                f"({sum(len(m.tiles) for m in metatiles.values())} metatile tiles)")
    return rule


def expansion_vector(rule: SubstitutionRule, i: int) -> np.ndarray:
    """phi(e_i)."""
    if not 0 <= i < rule.n:
        raise PreconditionFailed(f"index {i} outside [0, {rule.n})")
    return rule.dense[:, i].copy()


def star_pattern(n: int) -> LiftedPatch:
    """The 2n rhombi of angle pi/n around the origin."""
    check_n(n)
    origin = np.zeros(n, dtype=np.int64)
    tiles = [tile_from_edges(n, origin, d, d + 1) for d in range(2 * n)]
    return LiftedPatch.from_tiles(n, tiles, {"seed": "star"})


def single_tile(n: int, tile_type: Tuple[int, int]) -> LiftedPatch:
    """One tile of the given type at the origin."""
    return LiftedPatch(n, np.zeros((1, n), np.int64), np.array([tile_type]), {"seed": f"tile:{tile_type[0]},{tile_type[1]}"})


def image_size(rule: SubstitutionRule, patch: LiftedPatch) -> int:
    """Number of tile placements apply will generate, before merging."""
    return sum(count * len(rule.placements[t].types) for t, count in patch.type_counts().items())


def apply(rule: SubstitutionRule, patch: LiftedPatch, max_tiles: int = LIMITS['max_tiles'],
          check_conflicts: bool = True) -> LiftedPatch:
    """
    One substitution step.

    Placements sharing a lifted key are merged; two different lifted tiles
    landing on the same plane position raise ConflictError.
    """
    if patch.n != rule.n:
        raise PreconditionFailed(f"patch is for n={patch.n}, rule for n={rule.n}")
    estimate = image_size(rule, patch)
    if estimate > max_tiles:
        raise PatchTooLarge(f"substitution would place {estimate} tiles, cap is {max_tiles}",
                            {"estimate": estimate, "max_tiles": max_tiles})
    dense = rule.dense
    positions, types = [], []
    for tile_type in patch.type_counts():
        mask = np.all(patch.types == np.array(tile_type), axis=1)
        images = patch.positions[mask] @ dense.T
        placement = rule.placements[tile_type]
        offsets = placement.positions
        positions.append((images[:, None, :] + offsets[None, :, :]).reshape(-1, rule.n))
        types.append(np.tile(placement.types, (len(images), 1)))
    if not positions:
        return LiftedPatch.empty(rule.n)
    result = LiftedPatch(rule.n, np.vstack(positions), np.vstack(types), dict(patch.meta))
    if check_conflicts:
        _check_conflicts(result)
    return result


def _check_conflicts(patch: LiftedPatch) -> None:
    centres = np.round(patch.centres(), 6)
    _, counts = np.unique(centres, axis=0, return_counts=True)
    clashes = int(np.count_nonzero(counts > 1))
    if clashes:
        logger.error(f"{clashes} plane positions carry more than one tile")
        raise ConflictError(f"{clashes} plane positions carry more than one tile", {"clashes": clashes})


class PatchCache:
    """Compressed numpy archives of iterated patches under a directory."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, n: int, u: Edgeword, seed: str, k: int) -> Path:
        digest = hashlib.sha256(str(u).encode()).hexdigest()[:16]
        safe_seed = seed.replace(':', '-').replace(',', '_')
        return self.directory / f"n{n}-{digest}-{safe_seed}-k{k}.npz"

    def get(self, n: int, u: Edgeword, seed: str, k: int) -> Optional[LiftedPatch]:
        path = self.path(n, u, seed, k)
        if not path.exists():
            return None
        try:
            with np.load(path) as data:
                patch = LiftedPatch(n, data["positions"], data["types"],
                                    {"edgeword": str(u), "iterations": k, "seed": seed})
        except (OSError, KeyError, ValueError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path}: {e}")
            return None
        logger.debug(f"cache hit {path.name}")
        return patch

    def put(self, u: Edgeword, seed: str, k: int, patch: LiftedPatch) -> None:
        path = self.path(patch.n, u, seed, k)
        np.savez_compressed(path, positions=patch.positions, types=patch.types)


def iterate(rule: SubstitutionRule, seed: LiftedPatch, k: int, max_tiles: int = LIMITS['max_tiles'],
            cache: Optional[PatchCache] = None, progress: bool = False) -> LiftedPatch:
    """sigma^k(seed)."""
    if k < 0:
        raise PreconditionFailed(f"iteration count must be >= 0, got {k}")
    seed_name = str(seed.meta.get("seed", "custom"))
    # only the named seeds are reproducible from their name alone
    cache_key = seed_name
    if seed_name != "star" and not seed_name.startswith("tile:"):
        digest = hashlib.sha256(seed.positions.tobytes() + seed.types.tobytes()).hexdigest()[:12]
        cache_key = f"{seed_name}-{digest}"
    patch = seed
    for step in tqdm(range(1, k + 1), desc="iterate", disable=not progress):
        cached = cache.get(rule.n, rule.edgeword, cache_key, step) if cache else None
        if cached is not None:
            patch = cached
            continue
        patch = apply(rule, patch, max_tiles)
        if cache:
            cache.put(rule.edgeword, cache_key, step, patch)
        logger.info(f"iteration {step}: {len(patch)} tiles")
    result = copy.copy(patch)
    result.meta = {"edgeword": str(rule.edgeword), "iterations": k, "seed": seed_name}
    return result


def count_matrix(rule: SubstitutionRule) -> np.ndarray:
    """C[a, b] = number of tiles of the b-th type in sigma of the a-th type."""
    types = rule.types
    index = {t: a for a, t in enumerate(types)}
    counts = np.zeros((len(types), len(types)), dtype=np.int64)
    for a, t in enumerate(types):
        for row in rule.placements[t].types:
            counts[a, index[(int(row[0]), int(row[1]))]] += 1
    return counts


def is_primitive_order(rule: SubstitutionRule, m: int) -> bool:
    """Whether sigma^m of every prototile contains every tile type."""
    if m < 1:
        raise PreconditionFailed(f"order must be >= 1, got {m}")
    step = (count_matrix(rule) > 0).astype(np.int64)
    reach = step.copy()
    for _ in range(m - 1):
        reach = ((reach @ step) > 0).astype(np.int64)
    return bool(np.all(reach > 0))


def type_census(rule: SubstitutionRule) -> TypeCensus:
    """
    Per-type interior counts and, per edge direction, the boundary rhombi and
    outer edges the edgeword puts on that edge.
    """
    n = rule.n
    types = rule.types
    index = {t: a for a, t in enumerate(types)}
    interior = np.zeros((len(types), len(types)), dtype=np.int64)
    for a, t in enumerate(types):
        for row in rule.placements[t].interior_types:
            interior[a, index[(int(row[0]), int(row[1]))]] += 1

    rhombi = np.zeros((n, len(types)), dtype=np.int64)
    outer = np.zeros((n, n), dtype=np.int64)
    origin = np.zeros(n, dtype=np.int64)
    for s in range(n):
        for letter in rule.edgeword:
            if letter == 0:
                outer[s, s] += 1
                continue
            m = letter // 2
            rhombi[s, index[tile_from_edges(n, origin, s + m, s - m).type]] += 1
            outer[s, (s + m) % n] += 1
            outer[s, (s - m) % n] += 1
    return TypeCensus(n, interior, rhombi, outer)


def _edge_type_counts(patch: LiftedPatch) -> Dict[int, int]:
    edges = patch.boundary_edges()
    kinds, counts = np.unique(edges[:, -1], return_counts=True)
    return {int(a): int(b) for a, b in zip(kinds, counts)}


def census_sequence(rule: SubstitutionRule, seed: LiftedPatch, k: int) -> List[CensusRow]:
    """Exact tile and boundary counts of sigma^0..k(seed) without building the patches."""
    census = type_census(rule)
    types = rule.types
    tiles = np.array([seed.type_counts().get(t, 0) for t in types], dtype=object)
    boundary = np.zeros(rule.n, dtype=object)
    for s, c in _edge_type_counts(seed).items():
        boundary[s] = c

    incidence = np.zeros((rule.n, len(types)), dtype=object)
    for a, (i, j) in enumerate(types):
        incidence[i, a] = 1
        incidence[j, a] = 1

    rows = [CensusRow(0, _as_counts(types, tiles), _as_boundary(boundary))]
    for step in range(1, k + 1):
        edges = incidence.dot(tiles) + boundary // 2
        tiles = census.interior.astype(object).T.dot(tiles) + census.rhombi.astype(object).T.dot(edges)
        boundary = census.outer.astype(object).T.dot(boundary)
        rows.append(CensusRow(step, _as_counts(types, tiles), _as_boundary(boundary)))
    return rows


def _as_counts(types, tiles) -> Dict[Tuple[int, int], int]:
    return {t: int(c) for t, c in zip(types, tiles)}


def _as_boundary(boundary) -> Dict[int, int]:
    return {s: int(c) for s, c in enumerate(boundary) if c}


def area_audit(rule: SubstitutionRule, before: LiftedPatch, after: LiftedPatch,
               tol: float = TOLERANCES['area']) -> bool:
    """area(after) = scale^2 area(before) + half a boundary rhombus per outer edge and letter."""
    n = rule.n
    per_edge = sum(math.sin(letter * math.pi / n) for letter in rule.edgeword if letter)
    outer = len(before.boundary_edges())
    expected = rule.scale ** 2 * before.area() + 0.5 * per_edge * outer
    actual = after.area()
    ok = abs(actual - expected) <= tol * max(1.0, abs(expected))
    if not ok:
        logger.warning(f"area audit failed: {actual} != {expected}")
    return ok


def edge_audit(patch: LiftedPatch) -> bool:
    """Edges used at most twice and distinct lifted vertices at distinct plane points."""
    _, counts = patch.edge_counts()
    if np.any(counts > 2):
        return False
    vertices = patch.vertices()
    plane = np.round(vertices @ direction_table(patch.n)[:patch.n], 6)
    return len(np.unique(plane, axis=0)) == len(vertices)


def _adjacent_pair_keys(patch: LiftedPatch) -> np.ndarray:
    """Translation-normalised rows (type a, type b, pos b - pos a) of edge-adjacent tile pairs."""
    if len(patch) < 2:
        return np.zeros((0, patch.n + 4), np.int64)
    rows = patch.edge_rows()
    owner = np.tile(np.arange(len(patch)), 4)
    _, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    order = np.argsort(inverse, kind='stable')
    same = inverse[order][1:] == inverse[order][:-1]
    a, b = owner[order[:-1][same]], owner[order[1:][same]]
    delta = patch.positions[b] - patch.positions[a]
    forward = np.hstack([patch.types[a], patch.types[b], delta])
    backward = np.hstack([patch.types[b], patch.types[a], -delta])
    differ = forward != backward
    first = np.argmax(differ, axis=1)
    pick = np.arange(len(forward))
    keep_forward = ~differ.any(axis=1) | (forward[pick, first] < backward[pick, first])
    return np.where(keep_forward[:, None], forward, backward)


def legality_closure(rule: SubstitutionRule, patch: LiftedPatch, max_tiles: int = LIMITS['max_tiles']) -> bool:
    """Every edge-adjacent tile pair of the patch occurs inside sigma^2 of some prototile."""
    legal = [
        _adjacent_pair_keys(iterate(rule, single_tile(rule.n, t), 2, max_tiles)) for t in rule.types
    ]
    legal_keys = np.unique(np.vstack(legal), axis=0)
    keys = _adjacent_pair_keys(patch)
    if len(keys) == 0:
        return True
    found = np.isin(row_view(keys), row_view(legal_keys))
    if not np.all(found):
        logger.debug(f"{int(np.count_nonzero(~found))} adjacent pairs are not legal")
    return bool(np.all(found))


def contains_star(patch: LiftedPatch, star: Optional[LiftedPatch] = None) -> bool:
    """Whether some translate of the star pattern lies in the patch."""
    star = star if star is not None else star_pattern(patch.n)
    first_type = star.types[0]
    anchors = patch.positions[np.all(patch.types == first_type, axis=1)] - star.positions[0]
    if len(anchors) == 0:
        return False
    present = np.ones(len(anchors), dtype=bool)
    target = row_view(patch.rows)
    for pos, kind in zip(star.positions, star.types):
        rows = np.hstack([anchors + pos, np.tile(kind, (len(anchors), 1))])
        present &= np.isin(row_view(rows), target)
    return bool(np.any(present))


def _vertex_rings(patch: LiftedPatch) -> sparse.csr_matrix:
    """Boolean tile-by-tile matrix: tiles sharing at least one vertex."""
    corners = patch.tile_vertices().reshape(-1, patch.n)
    _, vertex_ids = np.unique(corners, axis=0, return_inverse=True)
    vertex_ids = np.asarray(vertex_ids).ravel()
    owners = np.repeat(np.arange(len(patch)), 4)
    incidence = sparse.csr_matrix((np.ones(len(owners)), (owners, vertex_ids)),
                                  shape=(len(patch), int(vertex_ids.max()) + 1))
    return (incidence @ incidence.T).tocsr()


def _ring_table(patch: LiftedPatch, centres: Optional[np.ndarray] = None) -> Dict[bytes, LiftedPatch]:
    """Translation classes of 1-rings (a tile and its vertex neighbours), keyed by content."""
    if len(patch) == 0:
        return {}
    adjacency = _vertex_rings(patch)
    rows = patch.rows
    chosen = range(len(patch)) if centres is None else np.nonzero(centres)[0]
    table: Dict[bytes, LiftedPatch] = {}
    for c in chosen:
        members = adjacency.indices[adjacency.indptr[c]:adjacency.indptr[c + 1]]
        ring = rows[members].copy()
        ring[:, :patch.n] -= rows[c, :patch.n]
        ring = ring[np.lexsort(ring.T[::-1])]
        key = rows[c, patch.n:].tobytes() + ring.tobytes()
        if key not in table:
            centre = np.hstack([np.zeros(patch.n, np.int64), rows[c, patch.n:]])
            table[key] = LiftedPatch(patch.n, ring[:, :patch.n], ring[:, patch.n:], {"centre": centre.tolist()})
    return table


def vertex_atlas(rule: SubstitutionRule, rings: Dict[bytes, LiftedPatch]) -> Dict[bytes, LiftedPatch]:
    """
    1-rings one substitution level further.

    The ring of a tile produced by a centre tile is read off the image of the
    centre's ring.
    """
    grown: Dict[bytes, LiftedPatch] = {}
    for ring in rings.values():
        centre = LiftedPatch(rule.n, np.zeros((1, rule.n), np.int64), [ring.meta["centre"][rule.n:]])
        image = apply(rule, ring, check_conflicts=False)
        produced = apply(rule, centre, check_conflicts=False)
        grown.update(_ring_table(image, produced.contains_mask(image)))
    return grown


def find_star(rule: SubstitutionRule, max_level: int, max_tiles: int = LIMITS['max_tiles'],
              progress: bool = False) -> Optional[Tuple[Tuple[int, int], int]]:
    """Smallest level m <= max_level and a prototile t with the star inside sigma^m(t)."""
    star = star_pattern(rule.n)
    best = None
    for t in tqdm(rule.types, desc="star search", disable=not progress):
        patch = single_tile(rule.n, t)
        rings = None
        for level in range(1, max_level + 1):
            if best is not None and level >= best[1]:
                break
            if rings is None and image_size(rule, patch) <= max_tiles:
                patch = apply(rule, patch, max_tiles, check_conflicts=False)
                found = contains_star(patch, star)
            else:
                if rings is None:
                    rings = _ring_table(patch)
                rings = vertex_atlas(rule, rings)
                found = any(contains_star(ring, star) for ring in rings.values())
            if found:
                best = (t, level)
                break
    return best


def _boundary_clearance(patch: LiftedPatch) -> float:
    """Distance from the origin to the outer boundary of the patch in the plane."""
    edges = patch.boundary_edges()
    table = direction_table(patch.n)
    starts = edges[:, :patch.n] @ table[:patch.n]
    steps = table[edges[:, -1]]
    t = np.clip(-np.einsum('ij,ij->i', starts, steps) / np.einsum('ij,ij->i', steps, steps), 0.0, 1.0)
    return float(np.min(np.linalg.norm(starts + t[:, None] * steps, axis=1)))


def star_seed_report(rule: SubstitutionRule, max_tiles: int = LIMITS['max_tiles'],
                     progress: bool = False) -> Dict[str, object]:
    """Star seed conditions of rule, with the boundary clearance and the first supertile holding a star."""
    star = star_pattern(rule.n)
    image = apply(rule, star, max_tiles)
    centred = star.issubset(image)
    radius = 2 * math.cos(math.pi / (2 * rule.n))
    clearance = _boundary_clearance(image)
    occurrence = find_star(rule, rule.n // 2 + 1, max_tiles, progress)
    report = {
        "centred": centred,
        "clearance": clearance,
        "encloses": clearance > radius,
        "occurs": occurrence is not None,
        "occurrence": None if occurrence is None else {"type": list(occurrence[0]), "level": occurrence[1]},
    }
    logger.debug(f"star seed report: {report}")
    return report


def verify_star_seed(rule: SubstitutionRule, max_tiles: int = LIMITS['max_tiles']) -> bool:
    """All three star seed conditions of star_seed_report."""
    report = star_seed_report(rule, max_tiles)
    return bool(report["centred"] and report["encloses"] and report["occurs"])


def _corner_checks(n: int, u: Edgeword) -> bool:
    try:
        return all(corner_crossing_check(n, u, k) for k in range(1, n))
    except PreconditionFailed:
        return False


def select_planar_rosa(n: int, max_i: int = LIMITS['max_i'], node_limit: int = LIMITS['node_limit'],
                       classify_tol: float = TOLERANCES['classify'], progress: bool = False,
                       max_bits: int = PRECISION['max_bits'], float_tol: float = TOLERANCES['float']) -> Selection:
    """
    Smallest i whose candidate P_i passes letter coverage, the tileability
    criterion, every corner check, planarity of slope E_n^0 and primitivity
    of order 2. Checks run cheapest first and stop at the first failure.
    """
    check_n(n)
    log: List[CandidateDiagnostics] = []
    letters = set(range(0, n - 1, 2))
    for i in tqdm(range(1, max_i + 1), desc="select", disable=not progress):
        u = candidate_edgeword(n, i, max_bits, float_tol)
        entry = CandidateDiagnostics(i, str(u))
        log.append(entry)

        entry.checks["letters"] = letters <= set(u.letters)
        if not entry.checks["letters"]:
            continue
        try:
            entry.checks["criterion"] = tileability_criterion(n, u).ok
        except PreconditionFailed as e:
            entry.checks["criterion"] = False
            entry.error = e.message
        if not entry.checks["criterion"]:
            continue
        entry.checks["corners"] = _corner_checks(n, u)
        if not entry.checks["corners"]:
            continue
        s = spectrum(n, u)
        entry.lambdas = list(s.lambdas)
        entry.checks["planar"] = classify_planarity(s, classify_tol) == Planarity.PLANAR_SLOPE0
        if not entry.checks["planar"]:
            continue
        try:
            rule = build_substitution(n, u, node_limit=node_limit)
        except RosaError as e:
            entry.checks["substitution"] = False
            entry.error = e.message
            logger.debug(f"candidate {i}: {entry.checks}")
            continue
        entry.checks["primitive"] = is_primitive_order(rule, 2)
        logger.debug(f"candidate {i}: {entry.checks}")
        if entry.accepted:
            logger.info(f"Selected i={i} for n={n}: {u}")
            return Selection(i, u, rule, s, tuple(log))

    logger.error(f"No Planar Rosa candidate for n={n} up to i={max_i}")
    raise NotFound(max_i, [entry.to_json() for entry in log])
