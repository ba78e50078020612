"""Synthetic point clouds used by the demos, the CLI and the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covernerve import ScalarField, cover_from_intervals, density_field, epsilon_star
from .ripscomplex import FiltrationGrid, PointCloud, uniform_grid


@dataclass
class SyntheticCase:
    """A cloud with the scalar field, cover intervals and grid meant for it."""

    name: str
    cloud: PointCloud
    field: np.ndarray
    intervals: list[tuple[float, float]]
    grid: FiltrationGrid
    n: int = 1
    p: int = 2
    names: list[str] | None = None
    params: dict | None = None


def three_arc(step_deg: float = 5.0, tail_step: float = 0.1) -> SyntheticCase:
    """A unit circle with a straight tail, covered by three overlapping x-bands.

    The left band and the middle band meet in two separate arcs, so at small
    scales the loop is only visible through the overlap (an H1 class of the
    degree-0 cosheaf).  The middle band's arc has a gap of 40 degrees; once the
    scale exceeds the chord 2 sin(20 deg) ~ 0.684 the loop closes inside the
    middle band and becomes an H0 class of the degree-1 cosheaf instead.
    """
    ang = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    ring = np.c_[np.cos(ang), np.sin(ang)]
    xs = np.round(np.arange(1.0 + tail_step, 4.0 + 1e-9, tail_step), 10)
    tail = np.c_[xs, np.zeros_like(xs)]
    pts = np.vstack([ring, tail])
    c80, c20 = math.cos(math.radians(80)), math.cos(math.radians(20))
    intervals = [(-2.0, -c80), (-c20, 2.6), (1.4, 5.0)]
    return SyntheticCase("three-arc", PointCloud(pts), pts[:, 0].copy(), intervals, uniform_grid(0.95, 19),
                         names=["U1", "U2", "U3"], params={"step_deg": step_deg, "tail_step": tail_step})


def two_density(k: int = 8, seed: int = 0, ring_points: int = 32, small_points: int = 12,
                small_radius: float = 0.08, gap: float = 0.3, jitter: float = 0.003,
                density_radius: float = 0.1, hexagon_side: float = 0.15) -> SyntheticCase:
    """One sparse unit circle, a sparse hexagon, k small dense circles and a 3-point clump.

    The density (neighbours within ``density_radius``) is 1 on the big circle
    and the hexagon, about 5 on the small circles and 3 on the clump, so the
    bands [0, 4) and [2, 100) separate sparse from dense points and overlap
    exactly on the clump.  The hexagon gives a second, short-lived sparse loop.
    The first small circle sits ``gap`` away from the big one, which fixes the
    covering bound eps* at roughly ``gap``.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(ring_points) * 2 * np.pi / ring_points
    rad = 1.0 + rng.uniform(-jitter, jitter, ring_points)
    parts = [np.c_[rad * np.cos(t), rad * np.sin(t)]]
    centres = []
    if k >= 1:
        centres.append((1.0 + gap + small_radius, 0.0))
    for j in range(1, k):
        a = 2 * np.pi * j / max(k - 1, 1) + 0.3
        centres.append((2.6 * math.cos(a), 2.6 * math.sin(a)))
    s = np.arange(small_points) * 2 * np.pi / small_points
    for cx, cy in centres:
        r = small_radius + rng.uniform(-jitter, jitter, small_points)
        parts.append(np.c_[cx + r * np.cos(s), cy + r * np.sin(s)])
    if hexagon_side > 0:
        h = np.arange(6) * np.pi / 3
        parts.append(np.c_[-3.2 + hexagon_side * np.cos(h), 3.2 + hexagon_side * np.sin(h)])
    parts.append(np.array([[4.0, 4.0], [4.05, 4.0], [4.0, 4.05]]))
    pts = np.vstack(parts)
    cloud = PointCloud(pts)
    f = density_field(cloud, density_radius).values
    return SyntheticCase("two-density", cloud, np.asarray(f), [(0.0, 4.0), (2.0, 100.0)], uniform_grid(1.0, 100),
                         names=["U_s", "U_d"],
                         params={"k": k, "seed": seed, "ring_points": ring_points, "small_points": small_points,
                                 "small_radius": small_radius, "gap": gap, "jitter": jitter,
                                 "density_radius": density_radius, "hexagon_side": hexagon_side})


def random_case(seed: int) -> SyntheticCase:
    """A random planar cloud with an x-band cover and loops placed across band overlaps.

    Circles are centred near the overlaps so that their loops are first seen
    through the nerve and later close inside a single band, which is where the
    connecting map does its work.  For degree 2 a hexagon is planted as well,
    since random planar clouds rarely carry 2-cycles.  Field prime, homology
    degree, point count, number of bands and grid size all come from the seed.
    """
    rng = np.random.default_rng(seed)
    p = int(rng.choice([2, 3]))
    n = int(rng.choice([1, 2]))
    npts = int(rng.integers(40, 71)) if n == 2 else int(rng.integers(40, 121))
    k = int(rng.integers(2, 5))
    width = 1.2
    ov = float(rng.uniform(0.5, 0.8)) if n == 1 else float(rng.uniform(0.3, 0.45))
    intervals = []
    for j in range(k):
        a = j * width - (ov / 2 if j else 1.0)
        b = (j + 1) * width + (ov / 2 if j < k - 1 else 1.0)
        intervals.append((a, b))
    # one point inside every overlap keeps the nerve a path
    parts = [np.c_[width * np.arange(1, k), rng.uniform(0, 1.5, k - 1)]]
    left = npts - (k - 1)
    for _ in range(int(rng.integers(1, 4))):
        r = ov / 2 * float(rng.uniform(1.05, 1.3))
        m = max(10, int(round(2 * np.pi * r / 0.12)))
        if m > left - 6:
            break
        cx = width * int(rng.integers(1, k)) + float(rng.uniform(-0.1, 0.1))
        cy = float(rng.uniform(0.3, 1.2))
        a = np.arange(m) * 2 * np.pi / m + rng.normal(0, 0.06, m)
        rr = r + rng.normal(0, 0.015, m)
        parts.append(np.c_[cx + rr * np.cos(a), cy + rr * np.sin(a)])
        left -= m
    if n == 2 and left >= 6:
        # a hexagon spans an octahedron for sqrt(3) r <= eps < 2 r; its two extreme
        # vertices sit just outside the overlap, so the 2-sphere is split by the
        # cover, and sqrt(3) r < ov <= eps* puts its birth inside the grid
        r = ov * float(rng.uniform(0.53, 0.565))
        c = (width * int(rng.integers(1, k)), float(rng.uniform(0.3, 1.2)))
        a = np.arange(6) * np.pi / 3 + rng.uniform(-0.05, 0.05)
        parts.append(np.c_[c[0] + r * np.cos(a), c[1] + r * np.sin(a)] + rng.normal(0, 0.002, (6, 2)))
        left -= 6
    parts.append(rng.uniform([-0.3, -0.3], [k * width + 0.3, 1.8], (left, 2)))
    pts = np.vstack(parts)
    x = pts[:, 0]
    steps = int(rng.integers(8, 21))
    scale = float(rng.uniform(1.0, 1.4))
    cloud = PointCloud(pts)
    es = epsilon_star(cloud, cover_from_intervals(ScalarField(x), intervals)).epsilon_star
    # the grid overshoots eps* a little so that truncation is exercised
    top = float(f"{es * scale:.6g}") if math.isfinite(es) else 1.0
    return SyntheticCase(f"random-{seed}", cloud, x.copy(), intervals, uniform_grid(top, steps), n=n, p=p,
                         params={"seed": seed, "points": len(pts), "bands": k, "steps": steps, "scale": scale})
