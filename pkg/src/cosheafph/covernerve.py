"""Scalar fields, interval covers with a path nerve, the covering scale bound
and the system of local Rips filtrations over the nerve."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .fieldlin import FieldMatrix
from .ripscomplex import (
    FilteredComplex,
    FiltrationGrid,
    PointCloud,
    SimplicialComplex,
    filtered_rips,
    pairwise_distances,
)


class CoverError(ValueError):
    """The cover does not have a path nerve, or misses points."""


class GridError(ValueError):
    """No grid value lies below the covering bound."""


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.values)


def density_field(cloud: PointCloud, r: float, dist: np.ndarray | None = None) -> ScalarField:
    """Number of points within distance r of each point, the point itself included."""
    if r <= 0:
        raise ValueError("density radius must be positive")
    if dist is None:
        dist = pairwise_distances(cloud)
    return ScalarField((dist <= r).sum(axis=1).astype(np.float64))


@dataclass(frozen=True)
class Cover:
    """Ordered point-index sets whose nerve is a path."""

    elements: tuple[tuple[int, ...], ...]
    n_points: int
    source_intervals: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        els = tuple(tuple(sorted(int(x) for x in e)) for e in self.elements)
        object.__setattr__(self, "elements", els)
        validate_cover(els, self.n_points)

    @property
    def k(self) -> int:
        return len(self.elements)

    def intersection(self, j: int) -> tuple[int, ...]:
        """Points of U_j and U_{j+1}."""
        return tuple(sorted(set(self.elements[j]) & set(self.elements[j + 1])))

    def memberships(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_points)]
        for j, e in enumerate(self.elements):
            for x in e:
                out[x].append(j)
        return out


def validate_cover(elements: Sequence[Sequence[int]], n_points: int) -> None:
    if not elements:
        raise CoverError("cover has no elements")
    member = [[] for _ in range(n_points)]
    for j, e in enumerate(elements):
        if not e:
            raise CoverError(f"cover element {j} is empty")
        for x in e:
            if not 0 <= x < n_points:
                raise CoverError(f"cover element {j} contains unknown point {x}")
            member[x].append(j)
    for x, js in enumerate(member):
        if not js:
            raise CoverError(f"point {x} lies in no cover element")
        if len(js) > 2:
            raise CoverError(f"point {x} lies in elements {js}; only two consecutive elements may overlap "
                             "(the nerve must be one-dimensional)")
        if len(js) == 2 and js[1] - js[0] != 1:
            raise CoverError(f"point {x} lies in non-consecutive elements {js[0]} and {js[1]}; "
                             "the nerve would not be a path")
    for j in range(len(elements) - 1):
        if not set(elements[j]) & set(elements[j + 1]):
            raise CoverError(f"consecutive elements {j} and {j + 1} do not intersect; the nerve is disconnected")


def cover_from_intervals(f: ScalarField, intervals: Sequence[Sequence[float]]) -> Cover:
    """Element j is the set of points with value in the half-open interval [lo_j, hi_j)."""
    ivs = [(float(a), float(b)) for a, b in intervals]
    if not ivs:
        raise CoverError("no intervals given")
    for j, (a, b) in enumerate(ivs):
        if not a < b:
            raise CoverError(f"interval {j} = [{a}, {b}) is empty")
    for j in range(len(ivs) - 1):
        if ivs[j + 1][0] < ivs[j][0]:
            raise CoverError(f"intervals {j} and {j + 1} are not ordered by left endpoint")
        if ivs[j + 1][0] >= ivs[j][1]:
            raise CoverError(f"intervals {j} = [{ivs[j][0]}, {ivs[j][1]}) and {j + 1} = "
                             f"[{ivs[j + 1][0]}, {ivs[j + 1][1]}) do not overlap")
    vals = f.values
    elements = []
    for a, b in ivs:
        elements.append(tuple(int(x) for x in np.flatnonzero((vals >= a) & (vals < b))))
    for x, v in enumerate(vals):
        if not any(a <= v < b for a, b in ivs):
            raise CoverError(f"point {x} (value {v:g}) lies in no interval")
    for j in range(len(elements) - 1):
        if not set(elements[j]) & set(elements[j + 1]):
            raise CoverError(f"intervals {j} and {j + 1} overlap but no point has a value in the overlap")
    return Cover(tuple(elements), len(vals), tuple(ivs))


def suggest_two_intervals(f: ScalarField, bins: int | None = None) -> tuple[tuple[float, float], ...]:
    """Two overlapping intervals centred on the deepest histogram valley between the two main peaks."""
    vals = np.asarray(f.values, dtype=np.float64)
    lo, hi = float(vals.min()), float(vals.max())
    top = float(np.nextafter(hi, math.inf))
    if hi == lo:
        return ((lo, top),)
    nb = bins or int(min(30, max(5, round(math.sqrt(len(vals))))))
    counts, edges = np.histogram(vals, bins=nb, range=(lo, hi))
    centers = (edges[:-1] + edges[1:]) / 2
    width = float(edges[1] - edges[0])
    a = int(np.argmax(counts))
    far = [j for j in range(nb) if abs(j - a) >= 2]
    if not far:
        return ((lo, top),)
    b = max(far, key=lambda j: (counts[j], -j))
    left, right = sorted((a, b))
    # values strictly between the two peak bins; one of them anchors the overlap
    interior = vals[(vals >= edges[left + 1]) & (vals < edges[right])]
    if interior.size == 0:
        return ((lo, top),)
    mid = (centers[left] + centers[right]) / 2
    valley = min(range(left + 1, right), key=lambda j: (counts[j], abs(centers[j] - mid), j))
    t = float(centers[valley])
    v0 = float(interior[np.argmin(np.abs(interior - t) + 1e-12 * interior)])
    h = width / 2
    return ((lo, v0 + h), (v0 - h, top))


@dataclass(frozen=True)
class PathNerve:
    """Path v_0 - e_0 - v_1 - ... with [v_j : e_j] = -1 and [v_{j+1} : e_j] = +1 (``flip`` negates both)."""

    k: int
    flip: bool = False

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(j, j + 1) for j in range(self.k - 1)]

    @property
    def left_sign(self) -> int:
        return 1 if self.flip else -1

    @property
    def right_sign(self) -> int:
        return -1 if self.flip else 1

    def incidence(self, v: int, e: int) -> int:
        if v == e:
            return self.left_sign
        if v == e + 1:
            return self.right_sign
        return 0


@dataclass
class EpsilonStarReport:
    """Per-point covering bounds; ``inf`` encodes a minimum over an empty set."""

    epsilon_star: float
    K: np.ndarray
    K_prime: np.ndarray
    K_double_prime: np.ndarray
    argmin_point: int

    def to_dict(self) -> dict:
        def enc(x):
            x = float(x)
            return None if math.isnan(x) else ("inf" if math.isinf(x) else x)

        return {
            "epsilon_star": enc(self.epsilon_star),
            "argmin_point": self.argmin_point,
            "per_point": [
                {"K": enc(k), "K_prime": enc(a), "K_double_prime": enc(b)}
                for k, a, b in zip(self.K, self.K_prime, self.K_double_prime)
            ],
        }


def epsilon_star(cloud: PointCloud, cover: Cover, dist: np.ndarray | None = None) -> EpsilonStarReport:
    """Scale below which the local Rips complexes cover the global one."""
    if dist is None:
        dist = pairwise_distances(cloud)
    n = cover.n_points
    inside = np.zeros((cover.k, n), dtype=bool)
    for j, e in enumerate(cover.elements):
        inside[j, list(e)] = True
    K = np.full(n, np.inf)
    K1 = np.full(n, np.nan)
    K2 = np.full(n, np.nan)
    for x, js in enumerate(cover.memberships()):
        row = dist[x]
        if len(js) == 1:
            out = ~inside[js[0]]
            K[x] = row[out].min() if out.any() else np.inf
            continue
        u, w = js
        out_both = ~(inside[u] | inside[w])
        kp = row[out_both].min() if out_both.any() else np.inf
        near = row < kp
        qs = np.flatnonzero(near & ~inside[u])
        qps = np.flatnonzero(near & ~inside[w])
        kpp = float(dist[np.ix_(qs, qps)].min()) if len(qs) and len(qps) else np.inf
        K1[x], K2[x] = kp, kpp
        K[x] = min(kp, kpp)
    arg = int(np.argmin(K))
    return EpsilonStarReport(float(K[arg]), K, K1, K2, arg)


class Cell(NamedTuple):
    kind: str  # "v" or "e"
    j: int

    def __str__(self):
        return f"{self.kind}{self.j}"


@dataclass
class RipsSystem:
    """Local Rips filtrations on every nerve cell over grid indices 1..L.

    Each cell's filtration stores simplices in (birth, lexicographic) order, so
    the complex at index i is a prefix and the maps iota/kappa between indices
    are identity embeddings of prefixes.  ``edge_maps[(j, side)][k]`` sends the
    filtration index of a k-simplex in the edge cell e_j to its index in the
    vertex cell v_{j+side}.
    """

    cloud: PointCloud
    cover: Cover
    nerve: PathNerve
    grid: FiltrationGrid
    n: int
    dist: np.ndarray
    cells: dict[Cell, FilteredComplex]
    edge_maps: dict[tuple[int, int], list[np.ndarray]] = field(default_factory=dict)

    @property
    def L(self) -> int:
        return self.grid.L

    @property
    def max_dim(self) -> int:
        return self.n + 1

    @property
    def vertex_cells(self) -> list[Cell]:
        return [Cell("v", j) for j in range(self.cover.k)]

    @property
    def edge_cells(self) -> list[Cell]:
        return [Cell("e", j) for j in range(self.cover.k - 1)]

    def vertices_of(self, cell: Cell) -> tuple[int, ...]:
        return self.cover.elements[cell.j] if cell.kind == "v" else self.cover.intersection(cell.j)

    def complex(self, cell: Cell, i: int) -> SimplicialComplex:
        """R^i_cell with lexicographically ordered simplices."""
        return self.cells[cell].complex_at(i)

    # chain maps as selection matrices in the lexicographic bases --------

    def _selection(self, src: SimplicialComplex, dst: SimplicialComplex, k: int, p: int) -> FieldMatrix:
        idx = dst.index(k)
        return FieldMatrix(dst.count(k), src.count(k), p, columns=[{idx[s]: 1} for s in src.simplices(k)])

    def e_map(self, j: int, side: int, i: int, k: int, p: int) -> FieldMatrix:
        """Inclusion C_k(R^i_{e_j}) -> C_k(R^i_{v_{j+side}})."""
        return self._selection(self.complex(Cell("e", j), i), self.complex(Cell("v", j + side), i), k, p)

    def iota(self, j: int, i: int, k: int, p: int) -> FieldMatrix:
        """Inclusion C_k(R^i_{v_j}) -> C_k(R^{i+1}_{v_j})."""
        return self._selection(self.complex(Cell("v", j), i), self.complex(Cell("v", j), i + 1), k, p)

    def kappa(self, j: int, i: int, k: int, p: int) -> FieldMatrix:
        """Inclusion C_k(R^i_{e_j}) -> C_k(R^{i+1}_{e_j})."""
        return self._selection(self.complex(Cell("e", j), i), self.complex(Cell("e", j), i + 1), k, p)

    def check_inclusions_commute(self, p: int = 2) -> None:
        """Assert iota e = e kappa and that inclusions commute with boundaries."""
        from .ripscomplex import boundary_matrix

        for j in range(self.cover.k - 1):
            for side in (0, 1):
                for i in range(1, self.L):
                    for k in range(self.max_dim + 1):
                        lhs = self.iota(j + side, i, k, p) @ self.e_map(j, side, i, k, p)
                        rhs = self.e_map(j, side, i + 1, k, p) @ self.kappa(j, i, k, p)
                        if lhs != rhs:
                            raise AssertionError(f"iota e != e kappa at edge {j}, side {side}, index {i}, degree {k}")
                for i in range(1, self.L + 1):
                    e_c, v_c = self.complex(Cell("e", j), i), self.complex(Cell("v", j + side), i)
                    for k in range(1, self.max_dim + 1):
                        lhs = boundary_matrix(v_c, k, p) @ self.e_map(j, side, i, k, p)
                        rhs = self.e_map(j, side, i, k - 1, p) @ boundary_matrix(e_c, k, p)
                        if lhs != rhs:
                            raise AssertionError(f"boundary does not commute with e at edge {j}, index {i}")


def build_rips_system(cloud: PointCloud, cover: Cover, grid: FiltrationGrid, n: int, *,
                      nerve: PathNerve | None = None, dist: np.ndarray | None = None,
                      threads: int = 1, debug: bool = False) -> RipsSystem:
    """Local filtrations for all cells, up to dimension n+1 and grid index ``grid.L``."""
    if n < 0:
        raise ValueError("homology degree must be >= 0")
    if dist is None:
        dist = pairwise_distances(cloud)
    nerve = nerve or PathNerve(cover.k)
    if nerve.k != cover.k:
        raise ValueError("nerve and cover sizes differ")
    L = grid.L
    cells = [Cell("v", j) for j in range(cover.k)] + [Cell("e", j) for j in range(cover.k - 1)]

    def vertices(c: Cell):
        return cover.elements[c.j] if c.kind == "v" else cover.intersection(c.j)

    def build(c: Cell) -> FilteredComplex:
        return filtered_rips(dist, vertices(c), grid, L, n + 1)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            built = list(ex.map(build, cells))
    else:
        built = [build(c) for c in cells]
    system = RipsSystem(cloud, cover, nerve, grid, n, dist, dict(zip(cells, built)))
    for j in range(cover.k - 1):
        e_fc = system.cells[Cell("e", j)]
        for side in (0, 1):
            v_fc = system.cells[Cell("v", j + side)]
            maps = []
            for k in range(n + 2):
                idx = v_fc.index(k)
                maps.append(np.asarray([idx[s] for s in e_fc.simplices[k]], dtype=np.int64))
            system.edge_maps[(j, side)] = maps
    if debug:
        system.check_inclusions_commute()
    return system


def truncate_grid(grid: FiltrationGrid, report: EpsilonStarReport) -> FiltrationGrid:
    """Keep indices with eps_i < eps*; warn about the dropped range, fail if nothing is left."""
    out = grid.truncated(report.epsilon_star)
    if out.L == 0:
        raise GridError(f"every grid value is >= eps* = {report.epsilon_star:.6g}; nothing to compute")
    if out.L < len(grid):
        warnings.warn(f"grid truncated below eps* = {report.epsilon_star:.6g}: indices {out.L + 1}..{len(grid)} "
                      f"(eps {grid.eps(out.L + 1):.6g}..{grid.eps(len(grid)):.6g}) are handled only by the "
                      "global barcode", stacklevel=2)
    return out


def validate_covering(global_complex: SimplicialComplex, system: RipsSystem, i: int):
    """Return ``None`` if every global simplex lies in some R^i_cell, else one uncovered simplex."""
    local = [system.complex(c, i) for c in system.vertex_cells]
    for s in global_complex:
        if len(s) - 1 > system.max_dim:
            continue
        if not any(s in K for K in local):
            return s
    return None
