"""End-to-end runs: cloud and cover in, annotated barcode out."""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .barcodes import (
    AnnotatedBarcode,
    Bar,
    annotate,
    config_hash,
    mark_significant,
    relabel_by_indecomposables,
    transfer,
)
from .connecting import DistributedResult, compute_distributed
from .fieldlin import check_prime
from .covernerve import (
    Cover,
    EpsilonStarReport,
    PathNerve,
    ScalarField,
    build_rips_system,
    cover_from_intervals,
    density_field,
    epsilon_star,
    suggest_two_intervals,
    truncate_grid,
)
from .oracle import standard_barcode
from .ripscomplex import FiltrationGrid, PointCloud, pairwise_distances, uniform_grid


@dataclass
class RunConfig:
    """Everything that determines a run; serialized into output metadata."""

    p: int = 2
    n: int = 1
    grid_max: float | None = None
    grid_steps: int | None = None
    grid_values: list[float] | None = None
    intervals: list[list[float]] | None = None
    elements: list[list[int]] | None = None
    names: list[str] | None = None
    field: str = "density"  # "density", "x<k>" for a coordinate, or "column"
    field_values: list[float] | None = None
    density_radius: float | None = None
    policy: str = "none"
    threshold: float = math.inf
    tag: str | None = None
    tag_threshold: float | None = None
    naive: bool = False
    flip: bool = False
    seed: int = 0
    threads: int = 1

    def validate(self) -> None:
        check_prime(self.p)
        if self.n < 0:
            raise ValueError("homology degree must be >= 0")
        if self.grid_values is None and (self.grid_max is None or self.grid_steps is None):
            raise ValueError("give either grid values or both grid max and grid steps")
        if self.policy not in ("none", "left", "right"):
            raise ValueError(f"unknown annotation policy {self.policy!r}")
        if self.field == "density" and self.density_radius is None and self.field_values is None:
            raise ValueError("the density field needs a density radius")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def grid(self) -> FiltrationGrid:
        if self.grid_values is not None:
            return FiltrationGrid(tuple(self.grid_values))
        return uniform_grid(self.grid_max, self.grid_steps)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["threshold"] == math.inf:
            d["threshold"] = "inf"
        d.pop("threads")
        return d


def default_threads() -> int:
    env = os.environ.get("COSHEAFPH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def scalar_field(cfg: RunConfig, cloud: PointCloud, dist: np.ndarray) -> ScalarField:
    if cfg.field_values is not None:
        if len(cfg.field_values) != len(cloud):
            raise ValueError(f"{len(cfg.field_values)} field values for {len(cloud)} points")
        return ScalarField(np.asarray(cfg.field_values, dtype=np.float64))
    if cfg.field == "density":
        return density_field(cloud, cfg.density_radius, dist)
    if cfg.field.startswith("x") and cfg.field[1:].isdigit():
        k = int(cfg.field[1:])
        if k >= cloud.m:
            raise ValueError(f"field {cfg.field} needs at least {k + 1} coordinates")
        return ScalarField(cloud.points[:, k])
    raise ValueError(f"unknown scalar field {cfg.field!r}")


@dataclass
class RunResult:
    config: RunConfig
    cloud: PointCloud
    cover: Cover
    eps_report: EpsilonStarReport
    grid: FiltrationGrid
    distributed: DistributedResult
    star_bars: list[Bar]
    global_bars: list[Bar]
    barcode: AnnotatedBarcode
    metadata: dict = field(default_factory=dict)

    @property
    def L(self) -> int:
        return self.grid.L


def make_cover(cfg: RunConfig, f: ScalarField) -> tuple[Cover, list[list[float]] | None]:
    if cfg.elements is not None:
        return Cover(tuple(tuple(e) for e in cfg.elements), len(f)), None
    intervals = cfg.intervals
    if intervals is None:
        intervals = [list(iv) for iv in suggest_two_intervals(f)]
    return cover_from_intervals(f, intervals), [list(map(float, iv)) for iv in intervals]


def run(cloud: PointCloud, cfg: RunConfig) -> RunResult:
    """Cover, eps*, local filtrations, the distributed module and the annotated barcode."""
    cfg.validate()
    dist = pairwise_distances(cloud)
    f = scalar_field(cfg, cloud, dist)
    cover, used_intervals = make_cover(cfg, f)
    nerve = PathNerve(cover.k, cfg.flip)
    report = epsilon_star(cloud, cover, dist)
    full = cfg.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grid = truncate_grid(full, report)
    system = build_rips_system(cloud, cover, grid, cfg.n, nerve=nerve, dist=dist, threads=cfg.threads)
    res = compute_distributed(system, cfg.p, naive=cfg.naive, threads=cfg.threads)
    V_star = relabel_by_indecomposables(res)
    star = annotate(V_star, cfg.policy, cfg.names)
    glob = standard_barcode(dist, FiltrationGrid(full.values), cfg.n, cfg.p)
    if cfg.naive:
        # the naive module need not match the global barcode, so nothing is transferred
        bars = [Bar(b.birth, b.death, b.multiplicity) for b in glob]
    else:
        bars = transfer(star, glob, grid.L)
    bars = mark_significant(bars, full, cfg.threshold, cfg.tag, cfg.tag_threshold)
    meta = {
        "config_hash": config_hash(cfg.to_dict()),
        "epsilon_star": report.epsilon_star if math.isfinite(report.epsilon_star) else "inf",
        "L": grid.L,
        "p": cfg.p,
        "n": cfg.n,
        "intervals": used_intervals,
        "cover_sizes": [len(e) for e in cover.elements],
    }
    bc = AnnotatedBarcode(bars, full, cfg.n, cfg.policy, meta)
    return RunResult(cfg, cloud, cover, report, grid, res, star, glob, bc, meta)


def star_barcode(result: RunResult) -> AnnotatedBarcode:
    """The annotated barcode of the distributed module (indices 1..L)."""
    g = FiltrationGrid(result.grid.values[: result.L])
    bars = mark_significant(result.star_bars, g, result.config.threshold, result.config.tag,
                            result.config.tag_threshold)
    return AnnotatedBarcode(bars, g, result.config.n, result.config.policy, dict(result.metadata))


def cosheaf_dump(result: RunResult) -> str:
    """Per index: stalk dimensions, cosheaf homology and the interval summands."""
    blocks = []
    for d in result.distributed.data:
        blocks.append(f"== index {d.i} (eps = {result.grid.eps(d.i):.12g}) ==")
        blocks.append(d.top.summary())
        if d.low is not None:
            blocks.append(d.low.summary())
    return "\n".join(blocks) + "\n"


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"
