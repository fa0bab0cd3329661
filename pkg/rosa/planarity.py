"""
Empirical discrete-plane checks.

The deviation of a lifted patch is the largest distance of its vertices
from the slope E_n^0, i.e. the largest norm of their projection onto the
orthogonal planes E_n^k, k >= 1. A profile follows the deviation along
sigma^0(seed), ..., sigma^k(seed); verdicts from it are heuristic evidence.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull
from tqdm import tqdm

from .config import LIMITS, TOLERANCES
from .errors import InsufficientData, InvalidParameter
from .geometry import perp_projector
from .patch import LiftedPatch
from .substitution import SubstitutionRule, apply, census_sequence

logger = logging.getLogger(__name__)

MODES = ("patch", "hull", "auto")


@dataclass
class ProfileRow:
    iteration: int
    vertices: int
    deviation: float
    components: List[float] = field(default_factory=list)
    mode: str = "patch"


@dataclass
class DeviationProfile:
    n: int
    rows: List[ProfileRow]

    @property
    def deviations(self) -> List[float]:
        return [row.deviation for row in self.rows]

    @property
    def ratios(self) -> List[float]:
        out = []
        for before, after in zip(self.deviations, self.deviations[1:]):
            if before > 0:
                out.append(after / before)
            else:
                out.append(math.inf if after > 0 else 1.0)
        return out

    def to_json(self) -> List[Dict]:
        ratios = [None] + self.ratios
        return [
            {"iteration": row.iteration, "vertices": row.vertices, "deviation": row.deviation,
             "ratio": ratio, "components": row.components, "mode": row.mode}
            for row, ratio in zip(self.rows, ratios)
        ]


@dataclass(frozen=True)
class GrowthEvidence:
    rate: float
    ratios: Tuple[float, ...]

    def to_json(self) -> Dict:
        return {"verdict": "GrowthEvidence", "rate": self.rate, "ratios": list(self.ratios), "heuristic": True}


@dataclass(frozen=True)
class BoundedEvidence:
    max_deviation: float
    ratios: Tuple[float, ...]
    rate: float = 0.0

    def to_json(self) -> Dict:
        return {"verdict": "BoundedEvidence", "max_deviation": self.max_deviation,
                "ratios": list(self.ratios), "rate": self.rate, "heuristic": True}


Verdict = Union[GrowthEvidence, BoundedEvidence]


def _plane_blocks(n: int) -> np.ndarray:
    return perp_projector(n).reshape(n // 2 - 1, 2, n)


def patch_deviation(patch: LiftedPatch) -> Tuple[float, List[float], int]:
    """Maximum perp norm over the patch vertices, per-plane maxima and the vertex count."""
    vertices = patch.vertices().astype(float)
    if len(vertices) == 0:
        return 0.0, [0.0] * (patch.n // 2 - 1), 0
    perp = vertices @ perp_projector(patch.n).T
    blocks = _plane_blocks(patch.n)
    components = [float(np.max(np.linalg.norm(vertices @ b.T, axis=1))) for b in blocks]
    return float(np.max(np.linalg.norm(perp, axis=1))), components, len(vertices)


def _hull_points(points: np.ndarray) -> np.ndarray:
    points = np.unique(points, axis=0)
    if len(points) <= points.shape[1] + 1:
        return points
    try:
        hull = ConvexHull(points, qhull_options="QJ")
    except (RuntimeError, ValueError) as e:
        logger.warning(f"convex hull failed ({e}); keeping all {len(points)} points")
        return points
    return points[hull.vertices]


class _HullState:
    """Hulls of the perp-projected positions of each tile type."""

    def __init__(self, rule: SubstitutionRule, seed: LiftedPatch):
        self.rule = rule
        self.n = rule.n
        self.projector = perp_projector(self.n)
        self.phi = self.projector @ rule.dense @ self.projector.T
        self.hulls: Dict[Tuple[int, int], np.ndarray] = {}
        for t in rule.types:
            mask = np.all(seed.types == np.array(t), axis=1)
            if np.any(mask):
                self.hulls[t] = _hull_points(seed.positions[mask] @ self.projector.T)
        self.corners = {t: self._corners(t) for t in rule.types}

    def _corners(self, t: Tuple[int, int]) -> np.ndarray:
        eye = np.eye(self.n)
        lifted = np.array([np.zeros(self.n), eye[t[0]], eye[t[0]] + eye[t[1]], eye[t[1]]])
        return lifted @ self.projector.T

    def step(self) -> None:
        gathered: Dict[Tuple[int, int], List[np.ndarray]] = {}
        for t, points in self.hulls.items():
            images = points @ self.phi.T
            placement = self.rule.placements[t]
            offsets = placement.positions @ self.projector.T
            for target in {(int(a), int(b)) for a, b in placement.types}:
                mask = np.all(placement.types == np.array(target), axis=1)
                moved = (images[:, None, :] + offsets[mask][None, :, :]).reshape(-1, images.shape[1])
                gathered.setdefault(target, []).append(moved)
        self.hulls = {t: _hull_points(np.vstack(chunks)) for t, chunks in gathered.items()}

    def deviation(self) -> Tuple[float, List[float]]:
        best = 0.0
        components = np.zeros(self.n // 2 - 1)
        for t, points in self.hulls.items():
            shifted = (points[:, None, :] + self.corners[t][None, :, :]).reshape(-1, points.shape[1])
            best = max(best, float(np.max(np.linalg.norm(shifted, axis=1))))
            per_plane = np.linalg.norm(shifted.reshape(len(shifted), -1, 2), axis=2).max(axis=0)
            components = np.maximum(components, per_plane)
        return best, [float(x) for x in components]


def deviation_profile(rule: SubstitutionRule, seed: LiftedPatch, k_max: int, mode: str = "auto",
                      max_tiles: int = LIMITS['max_tiles'], progress: bool = False) -> DeviationProfile:
    """
    Deviations of sigma^0(seed) .. sigma^k_max(seed).

    "patch" materialises every level, "hull" propagates per-type convex hulls
    of perp positions, "auto" switches to hulls once the census predicts more
    than max_tiles tiles.
    """
    if mode not in MODES:
        raise InvalidParameter(f"mode must be one of {MODES}, got {mode!r}")
    if k_max < 1:
        raise InvalidParameter(f"k_max must be >= 1, got {k_max}")
    census = census_sequence(rule, seed, k_max)

    deviation, components, count = patch_deviation(seed)
    rows = [ProfileRow(0, count, deviation, components, "patch")]
    patch: Optional[LiftedPatch] = seed
    hulls: Optional[_HullState] = _HullState(rule, seed) if mode == "hull" else None

    for k in tqdm(range(1, k_max + 1), desc="deviation", disable=not progress):
        if hulls is None and (mode == "patch" or census[k].tiles <= max_tiles):
            patch = apply(rule, patch, max_tiles)
            deviation, components, count = patch_deviation(patch)
            rows.append(ProfileRow(k, count, deviation, components, "patch"))
        else:
            if hulls is None:
                logger.info(f"switching to hull propagation at iteration {k} "
                            f"({census[k].tiles} tiles predicted)")
                hulls = _HullState(rule, patch)
            hulls.step()
            deviation, components = hulls.deviation()
            rows.append(ProfileRow(k, census[k].vertices, deviation, components, "hull"))
        logger.debug(f"iteration {k}: deviation {deviation:.6g}")
    return DeviationProfile(rule.n, rows)


def profile_patches(patches: Iterable[LiftedPatch]) -> DeviationProfile:
    """Profile of an externally built sequence of patches."""
    rows = []
    n = None
    for k, patch in enumerate(patches):
        n = patch.n
        deviation, components, count = patch_deviation(patch)
        rows.append(ProfileRow(k, count, deviation, components, "patch"))
    if n is None:
        raise InsufficientData("no patches given")
    return DeviationProfile(n, rows)


def fitted_rate(deviations: List[float], window: int = 4) -> float:
    """
    Growth factor lambda of a fit dev_k ~ a * lambda^k + b over the last window deviations.

    Successive increments of such a sequence have ratio lambda, so the rate is
    the geometric mean of the increment ratios. Returns 0.0 when the last
    increment is not positive. With no usable increment ratio it falls back to
    the geometric mean of the plain deviation ratios.
    """
    tail = list(deviations[-window:])
    steps = np.diff(tail)
    if len(steps) == 0 or steps[-1] <= 0:
        return 0.0
    quotients = [b / a for a, b in zip(steps, steps[1:]) if a > 0 and b > 0]
    if not quotients:
        quotients = [b / a for a, b in zip(tail, tail[1:]) if a > 0 and b > 0]
    if not quotients:
        return 0.0
    return float(np.exp(np.mean(np.log(quotients))))


def planarity_verdict(profile: DeviationProfile, growth_tol: float = TOLERANCES['growth']) -> Verdict:
    """
    Growth when the last three deviation ratios all exceed 1 + growth_tol
    and the fitted rate of dev_k ~ a * lambda^k + b does too.

    Deviations approaching a constant from below have ratios above 1 for
    a while; the fit catches them. The reported rate is the fitted lambda.
    This is evidence, not a proof.
    """
    if len(profile.rows) < 3:
        raise InsufficientData(f"need at least 3 iterations, got {len(profile.rows)}",
                               {"iterations": len(profile.rows)})
    recent = tuple(profile.ratios[-3:])
    rate = fitted_rate(profile.deviations)
    logger.debug(f"ratios {recent}, fitted rate {rate:.4g}")
    if all(r > 1 + growth_tol for r in recent) and rate > 1 + growth_tol:
        return GrowthEvidence(rate, recent)
    return BoundedEvidence(max(profile.deviations), recent, rate)
