"""
Pseudo-circulant expansion matrices and their spectra.

A pseudo-circulant is stored by its first column (m_0, ..., m_{n-1}); entry
(i, j) is m_{i-j} below the diagonal and -m_{i-j+n} above it. It acts on
every plane E_n^k as the scalar lambda_k.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np
from scipy.fft import dct

from .config import TOLERANCES, check_n
from .edgeword import Edgeword, abelianize
from .errors import InvalidParameter, PreconditionFailed, SchemaError

logger = logging.getLogger(__name__)


class Planarity(str, Enum):
    PLANAR_SLOPE0 = "PlanarSlope0"
    NON_PLANAR = "NonPlanar"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class PseudoCirculant:
    """Pseudo-circulant n x n integer matrix given by its first column."""
    n: int
    first_column: Tuple[int, ...]

    def __post_init__(self):
        check_n(self.n)
        column = tuple(int(x) for x in self.first_column)
        if len(column) != self.n:
            raise InvalidParameter(f"first column must have {self.n} entries, got {len(column)}")
        object.__setattr__(self, 'first_column', column)

    def dense(self) -> np.ndarray:
        m = np.array(self.first_column, dtype=np.int64)
        rows, cols = np.indices((self.n, self.n))
        offset = rows - cols
        return np.where(offset >= 0, m[offset % self.n], -m[(offset + self.n) % self.n])

    def column(self, i: int) -> np.ndarray:
        """Image of e_i."""
        return self.dense()[:, i]

    def __add__(self, other: "PseudoCirculant") -> "PseudoCirculant":
        return PseudoCirculant(self.n, tuple(a + b for a, b in zip(self.first_column, other.first_column)))

    def scaled(self, factor: int) -> "PseudoCirculant":
        return PseudoCirculant(self.n, tuple(factor * a for a in self.first_column))


@dataclass(frozen=True)
class EigenvalueMatrix:
    """Q_n with Q[i][j] = eta_j cos((2i+1) j pi/n), eta_0 = 1 and eta_j = 2 otherwise."""
    n: int
    entries: np.ndarray

    def cosine_matrix(self) -> np.ndarray:
        """D[i][j] = cos((2i+1) j pi/n)."""
        half = self.n // 2
        i, j = np.indices((half, half))
        return np.cos((2 * i + 1) * j * math.pi / self.n)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue lambda_k of an expansion on each plane E_n^k."""
    n: int
    first_column: Tuple[int, ...]
    lambdas: Tuple[float, ...]

    def to_json(self, tol: float = TOLERANCES['classify']) -> Dict[str, Any]:
        return {
            "n": self.n,
            "firstColumn": list(self.first_column),
            "lambdas": [float(x) for x in self.lambdas],
            "classification": classify_planarity(self, tol).value,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Spectrum":
        try:
            return cls(int(data["n"]), tuple(int(x) for x in data["firstColumn"]),
                       tuple(float(x) for x in data["lambdas"]))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"not a spectrum document: {e}")


def elementary_matrix(n: int, i: int) -> PseudoCirculant:
    """Identity for i = 0; otherwise m_i = 1 and m_{n-i} = -1."""
    check_n(n)
    if not 0 <= i < n // 2:
        raise InvalidParameter(f"elementary index must lie in [0, {n // 2}), got {i}", {"n": n, "i": i})
    column = [0] * n
    if i == 0:
        column[0] = 1
    else:
        column[i] = 1
        column[n - i] = -1
    return PseudoCirculant(n, tuple(column))


def expansion_matrix(n: int, u: Edgeword) -> PseudoCirculant:
    """Expansion induced by an edgeword: sum_i [u]_i * elementary_matrix(n, i)."""
    check_n(n)
    if u.n != n:
        raise InvalidParameter(f"edgeword alphabet is for n={u.n}, not n={n}")
    counts = abelianize(u).counts
    column = [0] * n
    column[0] = counts[0]
    for i in range(1, n // 2):
        column[i] = counts[i]
        column[n - i] = -counts[i]
    return PseudoCirculant(n, tuple(column))


def eigenvalue_matrix(n: int) -> EigenvalueMatrix:
    """Q_n with Q[k, j] = eta_j cos((2k+1) j pi / n), eta_0 = 1 and eta_j = 2 otherwise."""
    check_n(n)
    half = n // 2
    i, j = np.indices((half, half))
    eta = np.where(j == 0, 1.0, 2.0)
    return EigenvalueMatrix(n, eta * np.cos((2 * i + 1) * j * math.pi / n))


def spectrum(n: int, u: Edgeword) -> Spectrum:
    """lambda = Q_n [u]^T, the eigenvalues of expansion_matrix(n, u) on E_n^0, ..., E_n^{n/2-1}."""
    if len(u) == 0:
        raise PreconditionFailed("spectrum needs a nonempty edgeword")
    counts = abelianize(u).as_array().astype(float)
    lambdas = eigenvalue_matrix(n).entries @ counts
    return Spectrum(n, expansion_matrix(n, u).first_column, tuple(float(x) for x in lambdas))


def spectrum_dct(n: int, u: Edgeword) -> np.ndarray:
    """The same eigenvalues as a type-III discrete cosine transform of [u]."""
    counts = abelianize(u).as_array().astype(float)
    return dct(counts, type=3)


def elementary_eigenvalue(n: int, i: int, k: int) -> float:
    """Eigenvalue of elementary_matrix(n, i) on E_n^k."""
    if i == 0:
        return 1.0
    return 2 * math.cos(i * (2 * k + 1) * math.pi / n)


def subrosa_eigenvalue(n: int, k: int) -> float:
    """Closed form 1 / sin^2((2k+1) pi / (2n))."""
    check_n(n)
    if not 0 <= k < n // 2:
        raise InvalidParameter(f"plane index k must lie in [0, {n // 2}), got {k}")
    return 1.0 / math.sin((2 * k + 1) * math.pi / (2 * n)) ** 2


def pseudo_circulant_eigenvalue(matrix: PseudoCirculant, k: int) -> float:
    """Real part of sum_j m_j zeta^{-j}, zeta = exp(i pi (2k+1)/n); the whole value for expansion matrices."""
    angles = (2 * k + 1) * np.arange(matrix.n) * math.pi / matrix.n
    return float(np.array(matrix.first_column) @ np.cos(angles))


def eigenvector_residual(matrix: PseudoCirculant, k: int) -> float:
    """
    Residual of M v - lambda v for v = (1, zeta, ..., zeta^{n-1}).

    Real and imaginary parts are carried as separate real vectors, with
    lambda = a - ib = sum_j m_j zeta^{-j} computed from the first column.
    """
    n = matrix.n
    angles = (2 * k + 1) * np.arange(n) * math.pi / n
    re_v, im_v = np.cos(angles), np.sin(angles)
    column = np.array(matrix.first_column, dtype=float)
    a, b = column @ re_v, column @ im_v
    dense = matrix.dense().astype(float)
    re_res = dense @ re_v - (a * re_v + b * im_v)
    im_res = dense @ im_v - (a * im_v - b * re_v)
    return float(np.sqrt(np.sum(re_res ** 2) + np.sum(im_res ** 2)))


def classify_planarity(s: Spectrum, tol: float = TOLERANCES['classify']) -> Planarity:
    """
    Spectral planarity classification.

    PlanarSlope0 when E_n^0 expands and every other plane strictly contracts;
    NonPlanar when at least two planes expand; Indeterminate otherwise.
    """
    if tol <= 0:
        raise InvalidParameter(f"tolerance must be positive, got {tol}")
    magnitudes = np.abs(np.array(s.lambdas))
    if s.lambdas[0] > 1 + tol and np.all(magnitudes[1:] < 1 - tol):
        return Planarity.PLANAR_SLOPE0
    if np.count_nonzero(magnitudes > 1 + tol) >= 2:
        return Planarity.NON_PLANAR
    return Planarity.INDETERMINATE
