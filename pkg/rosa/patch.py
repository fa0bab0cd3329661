"""
Lifted patches: finite sets of rhombus tiles stored in Z^n coordinates.

A patch keeps two int64 arrays, positions (N x n) and types (N x 2), with
rows deduplicated and sorted lexicographically so that equal patches have
identical arrays. The JSON patch schema is

    {"n": int, "tiles": [{"pos": [int x n], "type": [i, j]}], "meta": {...}}
"""

import json
import logging
import math
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, Iterator, Optional

import numpy as np

from .config import check_n
from .errors import SchemaError
from .geometry import Tile, direction_table, rotate_tiles

logger = logging.getLogger(__name__)


def row_view(rows: np.ndarray) -> np.ndarray:
    """View each row of a 2-D integer array as one opaque scalar, for set operations."""
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    if rows.ndim != 2:
        raise ValueError("row_view expects a 2-D array")
    return rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()


class LiftedPatch:
    """An immutable set of lifted tiles."""

    def __init__(self, n: int, positions, types, meta: Optional[Dict[str, Any]] = None):
        check_n(n)
        positions = np.asarray(positions, dtype=np.int64).reshape(-1, n)
        types = np.asarray(types, dtype=np.int64).reshape(-1, 2)
        if len(positions) != len(types):
            raise SchemaError("positions and types must have the same number of rows")
        if len(types) and (np.any(types[:, 0] >= types[:, 1]) or np.any(types < 0) or np.any(types >= n)):
            raise SchemaError(f"tile types must satisfy 0 <= i < j < {n}")
        combined = np.unique(np.hstack([positions, types]), axis=0) if len(types) else np.zeros((0, n + 2), np.int64)
        self.n = n
        self.positions = combined[:, :n]
        self.types = combined[:, n:]
        self.positions.setflags(write=False)
        self.types.setflags(write=False)
        self.meta = dict(meta or {})

    @classmethod
    def empty(cls, n: int) -> "LiftedPatch":
        return cls(n, np.zeros((0, n), np.int64), np.zeros((0, 2), np.int64))

    @classmethod
    def from_tiles(cls, n: int, tiles: Iterable[Tile], meta: Optional[Dict[str, Any]] = None) -> "LiftedPatch":
        tiles = list(tiles)
        if not tiles:
            return cls.empty(n)
        return cls(n, [t.pos for t in tiles], [t.type for t in tiles], meta)

    def __len__(self) -> int:
        return len(self.types)

    def __iter__(self) -> Iterator[Tile]:
        for pos, t in zip(self.positions, self.types):
            yield Tile(tuple(int(x) for x in pos), (int(t[0]), int(t[1])))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LiftedPatch):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.types, other.types))

    def __hash__(self) -> int:
        return hash((self.n, self.positions.tobytes(), self.types.tobytes()))

    def __repr__(self) -> str:
        return f"LiftedPatch(n={self.n}, tiles={len(self)})"

    @property
    def rows(self) -> np.ndarray:
        return np.hstack([self.positions, self.types])

    @cached_property
    def keys(self) -> FrozenSet[Tile]:
        return frozenset(self)

    def __contains__(self, tile: Tile) -> bool:
        return Tile(tuple(tile.pos), tuple(tile.type)) in self.keys

    def contains_mask(self, other: "LiftedPatch") -> np.ndarray:
        """Boolean mask over other's tiles telling which ones belong to self."""
        if len(other) == 0:
            return np.zeros(0, dtype=bool)
        if len(self) == 0:
            return np.zeros(len(other), dtype=bool)
        return np.isin(row_view(other.rows), row_view(self.rows))

    def issubset(self, other: "LiftedPatch") -> bool:
        return bool(np.all(other.contains_mask(self)))

    def union(self, other: "LiftedPatch") -> "LiftedPatch":
        return LiftedPatch(self.n, np.vstack([self.positions, other.positions]),
                           np.vstack([self.types, other.types]), self.meta)

    def translate(self, vector) -> "LiftedPatch":
        vector = np.asarray(vector, dtype=np.int64)
        return LiftedPatch(self.n, self.positions + vector, self.types, self.meta)

    def rotate(self, steps: int = 1) -> "LiftedPatch":
        positions, types = rotate_tiles(self.positions, self.types, steps)
        return LiftedPatch(self.n, positions, types, self.meta)

    def select(self, mask: np.ndarray) -> "LiftedPatch":
        return LiftedPatch(self.n, self.positions[mask], self.types[mask], self.meta)

    def tile_vertices(self) -> np.ndarray:
        """Lifted vertices of every tile, shape (N, 4, n), counter-clockwise."""
        eye = np.eye(self.n, dtype=np.int64)
        ei, ej = eye[self.types[:, 0]], eye[self.types[:, 1]]
        base = self.positions
        return np.stack([base, base + ei, base + ei + ej, base + ej], axis=1)

    def vertices(self) -> np.ndarray:
        if len(self) == 0:
            return np.zeros((0, self.n), np.int64)
        return np.unique(self.tile_vertices().reshape(-1, self.n), axis=0)

    def edge_rows(self) -> np.ndarray:
        """
        Every tile edge as a row (start vertex, edge type), four per tile.

        An edge of type t starting at x joins x and x + e_t.
        """
        eye = np.eye(self.n, dtype=np.int64)
        i, j = self.types[:, 0], self.types[:, 1]
        base = self.positions
        starts = np.vstack([base, base, base + eye[i], base + eye[j]])
        kinds = np.concatenate([i, j, j, i])
        return np.hstack([starts, kinds[:, None]])

    def edge_counts(self):
        """Unique edge rows and how many tiles use each."""
        if len(self) == 0:
            return np.zeros((0, self.n + 1), np.int64), np.zeros(0, np.int64)
        return np.unique(self.edge_rows(), axis=0, return_counts=True)

    def boundary_edges(self) -> np.ndarray:
        edges, counts = self.edge_counts()
        return edges[counts == 1]

    def area(self) -> float:
        return float(np.sum(np.sin((self.types[:, 1] - self.types[:, 0]) * math.pi / self.n)))

    def centres(self) -> np.ndarray:
        """Plane centres of the tiles."""
        table = direction_table(self.n)[:self.n]
        base = self.positions @ table
        return base + (table[self.types[:, 0]] + table[self.types[:, 1]]) / 2

    def plane_vertices(self) -> np.ndarray:
        return self.tile_vertices() @ direction_table(self.n)[:self.n]

    def type_counts(self) -> Dict[tuple, int]:
        if len(self) == 0:
            return {}
        kinds, counts = np.unique(self.types, axis=0, return_counts=True)
        return {(int(a), int(b)): int(c) for (a, b), c in zip(kinds, counts)}

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "tiles": [{"pos": [int(x) for x in pos], "type": [int(t[0]), int(t[1])]}
                      for pos, t in zip(self.positions, self.types)],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "LiftedPatch":
        try:
            n = int(data["n"])
            tiles = data["tiles"]
            meta = data.get("meta", {})
            if not isinstance(meta, dict):
                raise SchemaError("meta must be an object")
            if not tiles:
                patch = cls.empty(n)
                patch.meta = dict(meta)
                return patch
            positions = [tile["pos"] for tile in tiles]
            types = [tile["type"] for tile in tiles]
            if any(len(p) != n for p in positions) or any(len(t) != 2 for t in types):
                raise SchemaError(f"every tile needs {n} coordinates and a 2-entry type")
            return cls(n, positions, types, meta)
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"not a patch document: {e}")

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(',', ':'))

    def save(self, path: Path) -> None:
        Path(path).write_text(self.dumps())
        logger.info(f"Wrote {len(self)} tiles to {path}")

    @classmethod
    def load(cls, path: Path) -> "LiftedPatch":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as e:
            logger.error(f"Failed to read patch {path}: {e}")
            raise SchemaError(f"cannot read patch file {path}: {e}")
        return cls.from_json(data)
