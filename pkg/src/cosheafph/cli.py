"""Command line: ``run``, ``verify``, ``gen`` and ``density``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .barcodes import config_hash, metadata_lines
from .covernerve import CoverError, GridError, density_field, ScalarField, suggest_two_intervals
from .pipeline import RunConfig, cosheaf_dump, default_threads, dumps_json, run
from .ripscomplex import PointCloud, pairwise_distances

log = logging.getLogger("cosheafph")

EXIT_OK, EXIT_FAIL, EXIT_COVER, EXIT_GRID = 0, 1, 2, 3


def _intervals(text: str) -> list[list[float]]:
    out = []
    for part in text.split(","):
        lo, hi = part.split(":")
        out.append([float(lo), float(hi)])
    return out


def _grid_values(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cosheafph", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="JSON file with run settings; flags override it")
        sp.add_argument("--dim", type=int, dest="n", help="homology degree n")
        sp.add_argument("--field-prime", "-p", type=int, dest="p", help="prime p of the coefficient field")
        sp.add_argument("--grid-max", type=float)
        sp.add_argument("--grid-steps", type=int)
        sp.add_argument("--grid", type=_grid_values, dest="grid_values", help="explicit comma-separated grid")
        sp.add_argument("--cover", type=Path, help="cover JSON: {'intervals': [[lo, hi], ...]} or "
                                                    "{'elements': [[point, ...], ...]}, optional 'names'")
        sp.add_argument("--intervals", type=_intervals, help="cover intervals as lo:hi,lo:hi,...")
        sp.add_argument("--field", help="scalar field: density, x<k> (coordinate k) or column:<k> "
                                        "(input CSV column k, removed from the coordinates)")
        sp.add_argument("--density-radius", type=float)
        sp.add_argument("--policy", choices=("none", "left", "right"))
        sp.add_argument("--threshold", type=float, help="global bar-length significance threshold")
        sp.add_argument("--tag", help="annotation that gets its own significance threshold")
        sp.add_argument("--tag-threshold", type=float)
        sp.add_argument("--inject-naive", action="store_true", help="replace the connecting map by zero")
        sp.add_argument("--flip", action="store_true", help="use the opposite nerve orientation")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, help="worker threads (default: COSHEAFPH_THREADS or CPU count)")
        sp.add_argument("--quiet", action="store_true")
        sp.add_argument("--debug", action="store_true", help="extra in-loop consistency checks")

    r = sub.add_parser("run", help="annotated barcode of a point cloud")
    r.add_argument("input", type=Path, help="point CSV")
    common(r)
    r.add_argument("--out", type=Path, help="barcode CSV (default: stdout)")
    r.add_argument("--plot", type=Path, help="SVG barcode plot")
    r.add_argument("--eps-report", type=Path, help="per-point covering bound report (JSON)")
    r.add_argument("--dump-ledger", type=Path)
    r.add_argument("--dump-cosheaves", type=Path)

    v = sub.add_parser("verify", help="check the distributed module against the global computation")
    v.add_argument("input", type=Path, nargs="?", help="point CSV; without it a seeded random suite runs")
    common(v)
    v.add_argument("--suite", type=int, default=30, help="number of random clouds in the suite")
    v.add_argument("--json", type=Path, dest="json_out", help="machine-readable report")
    v.add_argument("--no-diagrams", action="store_true", help="skip the total-complex comparisons")

    g = sub.add_parser("gen", help="write a synthetic point cloud")
    g.add_argument("kind", choices=("two-density", "three-arc", "random"))
    g.add_argument("--k", type=int, default=8, help="number of small circles (two-density)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--config-out", type=Path, help="matching run configuration (JSON)")

    d = sub.add_parser("density", help="density field and a suggested two-interval cover")
    d.add_argument("input", type=Path)
    d.add_argument("--radius", type=float, required=True)
    d.add_argument("--bins", type=int)
    d.add_argument("--out", type=Path, help="write per-point densities as CSV")
    return ap


# --------------------------------------------------------------------------


def _load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
    cfg = RunConfig(**{k: v for k, v in data.items() if k in RunConfig.__dataclass_fields__})
    for name in ("n", "p", "grid_max", "grid_steps", "grid_values", "intervals", "field", "density_radius",
                 "policy", "threshold", "tag", "tag_threshold", "seed"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "grid_values", None) is not None:
        cfg.grid_max = cfg.grid_steps = None
    if args.cover:
        given = json.loads(Path(args.cover).read_text())
        if "intervals" in given:
            cfg.intervals, cfg.elements = [list(map(float, iv)) for iv in given["intervals"]], None
        elif "elements" in given:
            cfg.elements, cfg.intervals = [list(map(int, e)) for e in given["elements"]], None
        else:
            raise CoverError("cover JSON needs 'intervals' or 'elements'")
        if "names" in given:
            cfg.names = list(given["names"])
    if args.inject_naive:
        cfg.naive = True
    if args.flip:
        cfg.flip = True
    cfg.threads = args.threads or default_threads()
    if cfg.threshold is None:
        cfg.threshold = math.inf
    return cfg


def _load_cloud(path: Path, cfg: RunConfig) -> PointCloud:
    cloud = PointCloud.from_csv(path)
    if cfg.field and cfg.field.startswith("column:"):
        k = int(cfg.field.split(":", 1)[1])
        pts = cloud.points
        if not 0 <= k < pts.shape[1]:
            raise ValueError(f"column {k} not present in {path}")
        cfg.field_values = [float(x) for x in pts[:, k]]
        cloud = PointCloud(np.delete(pts, k, axis=1))
    return cloud


def _write(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _setup_logging(args):
    level = logging.WARNING if args.quiet else (logging.DEBUG if args.debug else logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    cloud = _load_cloud(args.input, cfg)
    res = run(cloud, cfg)
    if args.debug:
        res.distributed.system.check_inclusions_commute(cfg.p)
    meta = res.metadata
    if res.L < len(cfg.grid()):
        log.info("grid truncated to %d of %d indices below eps* = %.6g", res.L, len(cfg.grid()),
                 res.eps_report.epsilon_star)
    _write(args.out, res.barcode.to_csv())
    if args.plot:
        args.plot.write_text(res.barcode.to_svg())
    if args.eps_report:
        args.eps_report.write_text(dumps_json({"metadata": meta, "report": res.eps_report.to_dict()}))
    if args.dump_ledger:
        args.dump_ledger.write_text(dumps_json({"metadata": meta, "ledger": res.distributed.ledger_dump()}))
    if args.dump_cosheaves:
        header = "".join(f"# {line}\n" for line in metadata_lines(meta))
        args.dump_cosheaves.write_text(header + cosheaf_dump(res))
    return EXIT_OK


def _suite_cases(count: int, seed: int, n_override: int | None):
    from .synth import random_case, three_arc

    yield three_arc()
    for s in range(seed, seed + count):
        c = random_case(s)
        if n_override is not None:
            c.n = n_override
        yield c


def cmd_verify(args) -> int:
    from .connecting import compute_distributed
    from .covernerve import PathNerve, build_rips_system, cover_from_intervals, epsilon_star, truncate_grid
    from .oracle import VerificationReport, verify_all

    cfg = _load_config(args)
    full = VerificationReport()
    header = {"naive": cfg.naive, "flip": cfg.flip}
    if args.input is not None:
        cloud = _load_cloud(args.input, cfg)
        res = run(cloud, cfg)
        rep = verify_all(res.distributed, cfg.seed, diagrams=not args.no_diagrams)
        for row in rep.rows:
            row.check = f"input/{row.check}"
        full.extend(rep)
        header.update(res.metadata)
    else:
        import warnings

        seed = cfg.seed or 0
        header.update({"suite": args.suite, "seed": seed, "n_override": args.n})
        for case in _suite_cases(args.suite, seed, args.n):
            if args.p is not None:
                case.p = args.p
            cover = cover_from_intervals(ScalarField(case.field), case.intervals)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                grid = truncate_grid(case.grid, epsilon_star(case.cloud, cover))
            system = build_rips_system(case.cloud, cover, grid, case.n, nerve=PathNerve(cover.k, cfg.flip))
            res = compute_distributed(system, case.p, naive=cfg.naive, threads=cfg.threads)
            rep = verify_all(res, seed, diagrams=not args.no_diagrams)
            for row in rep.rows:
                row.check = f"{case.name}/{row.check}"
            full.extend(rep)
            log.info("%s (p=%d, n=%d, L=%d): %s", case.name, case.p, case.n, grid.L, "pass" if rep.ok else "FAIL")
    header["config_hash"] = config_hash(cfg.to_dict())
    text = "".join(f"# {line}\n" for line in metadata_lines(header)) + full.to_text()
    bad = full.first_failure()
    first = None
    if bad is not None:
        where = "" if bad.i is None else f" at index {bad.i}"
        first = f"{bad.check}{where}: {bad.detail}".rstrip(": ")
        text += f"first failure: {first}\n"
    sys.stdout.write(text)
    if args.json_out:
        args.json_out.write_text(dumps_json({"metadata": header, "first_failure": first,
                                             **json.loads(full.to_json())}))
    if bad is not None:
        log.error("first failure: %s", first)
        return EXIT_FAIL
    return EXIT_OK


def cmd_gen(args) -> int:
    from .synth import random_case, three_arc, two_density

    if args.kind == "two-density":
        case = two_density(args.k, args.seed)
        cfg = {"field": "density", "density_radius": case.params["density_radius"], "intervals": case.intervals,
               "names": case.names, "grid_max": 1.0, "grid_steps": 100, "n": 1, "p": 2,
               "threshold": 0.4, "tag": "U_d", "tag_threshold": 0.05}
    elif args.kind == "three-arc":
        case = three_arc()
        cfg = {"field": "x0", "intervals": case.intervals, "names": case.names, "grid_max": 0.95,
               "grid_steps": 19, "n": 1, "p": 2}
    else:
        case = random_case(args.seed)
        cfg = {"field": "x0", "intervals": case.intervals, "grid_values": list(case.grid.values),
               "n": case.n, "p": case.p}
    cfg = {k: ([list(iv) for iv in v] if k == "intervals" else v) for k, v in cfg.items()}
    meta = {"generator": args.kind, "params": case.params, "seed": args.seed, "config_hash": config_hash(cfg)}
    comments = metadata_lines(meta)
    case.cloud.to_csv(args.out, header=[f"x{k}" for k in range(case.cloud.m)], comments=comments)
    if args.config_out:
        args.config_out.write_text(dumps_json(cfg))
    return EXIT_OK


def cmd_density(args) -> int:
    cloud = PointCloud.from_csv(args.input)
    f = density_field(cloud, args.radius, pairwise_distances(cloud))
    ivs = suggest_two_intervals(f, args.bins)
    meta = {"input": str(args.input), "radius": args.radius, "bins": args.bins}
    if args.out:
        lines = [f"# {line}" for line in metadata_lines(meta)] + ["density"]
        lines += [f"{v:.12g}" for v in f.values]
        args.out.write_text("\n".join(lines) + "\n")
    sys.stdout.write(dumps_json({"metadata": meta, "suggested_intervals": [list(iv) for iv in ivs],
                                 "min": float(f.values.min()), "max": float(f.values.max())}))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "quiet"):
        _setup_logging(args)
    try:
        return {"run": cmd_run, "verify": cmd_verify, "gen": cmd_gen, "density": cmd_density}[args.command](args)
    except CoverError as exc:
        print(f"error: invalid cover: {exc}", file=sys.stderr)
        return EXIT_COVER
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
