"""Point clouds, Vietoris-Rips complexes and simplicial boundary matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fieldlin import FieldMatrix

Simplex = tuple[int, ...]


class PointCloud:
    """A finite set of points in R^m, stored as an ``(N, m)`` float64 array."""

    def __init__(self, points):
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError("points must form a 2-d array")
        arr = arr.copy()
        arr.setflags(write=False)
        self.points = arr

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_csv(cls, path, columns: Sequence[int] | None = None) -> "PointCloud":
        """Read one point per row.  A non-numeric first row is taken as a header."""
        rows = []
        width = None
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                    continue
                if columns is not None:
                    try:
                        row = [row[c] for c in columns]
                    except IndexError:
                        raise ValueError(f"{path}:{lineno}: expected at least {max(columns) + 1} columns") from None
                try:
                    vals = [float(c) for c in row]
                except ValueError:
                    if not rows and width is None:
                        width = len(row)
                        continue
                    raise ValueError(f"{path}:{lineno}: cannot parse {row!r} as numbers") from None
                if rows and len(vals) != len(rows[0]):
                    raise ValueError(f"{path}:{lineno}: expected {len(rows[0])} coordinates, found {len(vals)}")
                if not all(np.isfinite(vals)):
                    raise ValueError(f"{path}:{lineno}: non-finite coordinate")
                rows.append(vals)
        if not rows:
            raise ValueError(f"{path}: no points found")
        return cls(rows)

    def to_csv(self, path, header: Sequence[str] | None = None, comments: Iterable[str] = ()):
        with open(path, "w", newline="") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header or [f"x{k}" for k in range(self.m)])
            for pt in self.points:
                w.writerow([repr(float(x)) for x in pt])


def pairwise_distances(cloud: PointCloud | np.ndarray) -> np.ndarray:
    x = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


@dataclass(frozen=True)
class FiltrationGrid:
    """Increasing scale parameters; ``cutoff`` is L once the grid is truncated."""

    values: tuple[float, ...]
    cutoff: int | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(v < 0 for v in vals):
            raise ValueError("grid values must be nonnegative")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("grid values must be strictly increasing")
        if self.cutoff is not None and not 0 <= self.cutoff <= len(vals):
            raise ValueError("cutoff out of range")

    def __len__(self) -> int:
        return len(self.values)

    def eps(self, i: int) -> float:
        """Scale value at the 1-based index i."""
        return self.values[i - 1]

    def birth_index(self, diameter: float) -> int:
        """Smallest 1-based i with diameter <= eps_i (len+1 if none)."""
        return int(np.searchsorted(self.values, diameter, side="left")) + 1

    def truncated(self, eps_star: float) -> "FiltrationGrid":
        L = int(np.searchsorted(self.values, eps_star, side="left"))
        return FiltrationGrid(self.values, L)

    @property
    def L(self) -> int:
        return len(self.values) if self.cutoff is None else self.cutoff


def uniform_grid(eps_max: float, N: int) -> FiltrationGrid:
    if eps_max <= 0 or N < 2:
        raise ValueError("need eps_max > 0 and N >= 2")
    # rounding hides binary noise such as 0.30000000000000004 in outputs
    return FiltrationGrid(tuple(float(f"{k * eps_max / N:.12g}") for k in range(1, N + 1)))


class SimplicialComplex:
    """Simplices grouped by dimension, each list in lexicographic order."""

    def __init__(self, simplices_by_dim: Sequence[Iterable[Simplex]]):
        layers = [tuple(sorted(tuple(s) for s in layer)) for layer in simplices_by_dim]
        while len(layers) > 1 and not layers[-1]:
            layers.pop()
        self.simplices_by_dim = tuple(layers)
        self._index: list[dict[Simplex, int]] | None = None

    @property
    def vertex_labels(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices_by_dim[0]) if self.simplices_by_dim else ()

    @property
    def dim(self) -> int:
        return len(self.simplices_by_dim) - 1

    def simplices(self, k: int) -> tuple[Simplex, ...]:
        if 0 <= k < len(self.simplices_by_dim):
            return self.simplices_by_dim[k]
        return ()

    def count(self, k: int) -> int:
        return len(self.simplices(k))

    def index(self, k: int) -> dict[Simplex, int]:
        if self._index is None:
            self._index = [{s: j for j, s in enumerate(layer)} for layer in self.simplices_by_dim]
        return self._index[k] if 0 <= k < len(self._index) else {}

    def __contains__(self, s) -> bool:
        s = tuple(s)
        return s in self.index(len(s) - 1)

    def __iter__(self):
        for layer in self.simplices_by_dim:
            yield from layer

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        return all(s in other for s in self)

    def is_closed(self) -> bool:
        for k in range(1, self.dim + 1):
            idx = self.index(k - 1)
            for s in self.simplices(k):
                if any(s[:j] + s[j + 1:] not in idx for j in range(len(s))):
                    return False
        return True

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self.simplices_by_dim == other.simplices_by_dim

    def __repr__(self):
        counts = ", ".join(str(len(layer)) for layer in self.simplices_by_dim)
        return f"SimplicialComplex(counts=[{counts}])"


def _clique_layers(vertices: Sequence[int], dist: np.ndarray, eps: float, max_dim: int):
    """Cliques of the eps-graph on ``vertices`` with their diameters."""
    verts = sorted(int(v) for v in vertices)
    if not verts:
        return [[]], [[]]
    sub = dist[np.ix_(verts, verts)]
    higher = {}
    for a, v in enumerate(verts):
        nbrs = np.flatnonzero(sub[a, a + 1:] <= eps) + a + 1
        higher[v] = frozenset(verts[b] for b in nbrs)
    layers = [[(v,) for v in verts]]
    diams = [[0.0] * len(verts)]
    frontier = [((v,), 0.0, higher[v]) for v in verts]
    for _ in range(max_dim):
        nxt = []
        for s, d, cand in frontier:
            for w in sorted(cand):
                dw = max(float(dist[w, u]) for u in s)
                nxt.append((s + (w,), max(d, dw), cand & higher[w]))
        if not nxt:
            break
        layers.append([t[0] for t in nxt])
        diams.append([t[1] for t in nxt])
        frontier = nxt
    return layers, diams


def rips_complex(cloud: PointCloud | np.ndarray, vertex_subset: Iterable[int] | None, eps: float,
                 max_dim: int, dist: np.ndarray | None = None) -> SimplicialComplex:
    """Cliques of the graph ``d(p, q) <= eps`` on ``vertex_subset``, up to ``max_dim``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if dist is None:
        dist = pairwise_distances(cloud)
    if vertex_subset is None:
        vertex_subset = range(dist.shape[0])
    layers, _ = _clique_layers(list(vertex_subset), dist, eps, max_dim)
    return SimplicialComplex(layers)


def boundary_matrix(K: SimplicialComplex, k: int, p: int) -> FieldMatrix:
    """Matrix of the boundary C_k -> C_{k-1}; the face omitting vertex j gets (-1)^j."""
    if k < 1:
        raise ValueError("boundary degree must be >= 1")
    rows = K.count(k - 1)
    simplices = K.simplices(k)
    idx = K.index(k - 1)
    neg = p - 1
    cols = []
    for s in simplices:
        col = {}
        for j in range(len(s)):
            col[idx[s[:j] + s[j + 1:]]] = 1 if j % 2 == 0 else neg
        cols.append(col)
    return FieldMatrix(rows, len(cols), p, columns=cols)


@dataclass
class FilteredComplex:
    """A Rips filtration on a vertex subset, truncated at a grid index.

    Simplices of each dimension are ordered by (birth index, lexicographic),
    so the complex at grid index i is a prefix of every list.
    """

    simplices: list[list[Simplex]]
    births: list[np.ndarray]
    max_dim: int
    _index: list[dict[Simplex, int]] = field(default=None, repr=False)

    def __post_init__(self):
        self._index = [{s: j for j, s in enumerate(layer)} for layer in self.simplices]

    def index(self, k: int) -> dict[Simplex, int]:
        return self._index[k] if 0 <= k < len(self._index) else {}

    def count_at(self, k: int, i: int) -> int:
        if k < 0 or k >= len(self.simplices):
            return 0
        return int(np.searchsorted(self.births[k], i, side="right"))

    def complex_at(self, i: int) -> SimplicialComplex:
        return SimplicialComplex([layer[: self.count_at(k, i)] for k, layer in enumerate(self.simplices)])

    def boundary_columns(self, k: int, p: int) -> list[dict[int, int]]:
        """Columns of the boundary C_k -> C_{k-1} in filtration order."""
        if k < 1 or k >= len(self.simplices):
            return []
        idx = self._index[k - 1]
        neg = p - 1
        out = []
        for s in self.simplices[k]:
            out.append({idx[s[:j] + s[j + 1:]]: (1 if j % 2 == 0 else neg) for j in range(len(s))})
        return out


def filtered_rips(dist: np.ndarray, vertex_subset: Iterable[int], grid: FiltrationGrid, upto: int,
                  max_dim: int) -> FilteredComplex:
    """Rips filtration on ``vertex_subset`` over grid indices ``1..upto``."""
    eps = grid.eps(upto) if upto >= 1 else -1.0
    layers, diams = _clique_layers(list(vertex_subset), dist, eps, max_dim) if upto >= 1 else ([[]], [[]])
    simplices, births = [], []
    for layer, dlayer in zip(layers, diams):
        b = np.searchsorted(grid.values, np.asarray(dlayer, dtype=np.float64), side="left") + 1
        b = np.maximum(b, 1)
        order = sorted(range(len(layer)), key=lambda j: (b[j], layer[j]))
        simplices.append([layer[j] for j in order])
        births.append(np.asarray([b[j] for j in order], dtype=np.int64))
    while len(simplices) <= max_dim:
        simplices.append([])
        births.append(np.zeros(0, dtype=np.int64))
    return FilteredComplex(simplices, births, max_dim)
