"""Command-line interface: generate, detect, evaluate, project, plot, replay.

Every command writes ``<output>.manifest.json`` recording its arguments and
the SHA-256 of its inputs and outputs; ``replay`` re-runs a manifest and
checks the outputs are byte-identical. Errors print one line
``error[<kind>]: <message>`` to stderr and exit with 2 (usage), 3 (I/O)
or 4 (data integrity).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend
from .datasets import (
    SHAPES,
    GeneratorSpec,
    HennebergParams,
    generate,
    load_cloud,
    load_ground_truth,
    save_cloud,
    save_ground_truth,
)
from .detector import LABELS, DetectorConfig, Partition, detect, evaluate
from .errors import DataIntegrityError, LocalPHError, ParameterError
from .geometry import PointCloud
from .projection import pca_project
from .svgplot import scatter_svg

log = logging.getLogger("localph")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 2, 3, 4


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def write_manifest(command, argv, out, inputs, outputs, extra=None) -> Path:
    manifest = {
        "tool": "localph",
        "version": __version__,
        "backend": backend(),
        "command": command,
        "argv": list(argv),
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": {str(p): sha256(p) for p in outputs},
    }
    manifest.update(extra or {})
    path = _manifest_path(out)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x)}")


def _default_truth_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".truth.csv")


def _read_cloud(path, skip_header=False) -> PointCloud:
    if not Path(path).exists():
        raise FileNotFoundError(f"no such file: {path}")
    return load_cloud(path, skip_header=skip_header)


def _read_partition(path) -> Partition:
    return Partition.from_csv(Path(path).read_text())


def _read_subset(path, label=None) -> np.ndarray:
    text = Path(path).read_text()
    first = text.splitlines()[0] if text.strip() else ""
    if first.startswith("index,label"):
        part = Partition.from_csv(text)
        if label is None:
            return part.point_index
        return part.indices(label)
    try:
        return np.array([int(t) for t in text.split()], dtype=np.int64)
    except ValueError:
        raise DataIntegrityError(f"{path}: subset file must list integer indices") from None


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args, argv):
    spec = GeneratorSpec(args.shape, args.count, args.noise, args.seed, args.proximity)
    henneberg = None
    if args.shape == "henneberg":
        henneberg = HennebergParams(
            n_beta=args.n_beta, n_phi=args.n_phi, mode=args.henneberg_mode, seed=args.seed,
            proximity_radius=args.proximity, noise=args.noise,
        )
    cloud = generate(spec, henneberg)
    truth = Path(args.truth) if args.truth else _default_truth_path(args.out)
    save_cloud(args.out, cloud)
    save_ground_truth(truth, cloud.ground_truth)
    near = int(cloud.ground_truth.near_singularity.sum())
    print(f"wrote {len(cloud)} points ({cloud.ambient_dim}-d, {args.shape}) to {args.out}; "
          f"{near} within {args.proximity} of the singular locus; truth in {truth}")
    write_manifest("generate", argv, args.out, [], [args.out, truth], {"seed": args.seed, "points": len(cloud)})


def cmd_detect(args, argv):
    cloud = _read_cloud(args.input, args.skip_header)
    subset = None
    if args.subset:
        subset = _read_subset(args.subset, args.subset_label)
        if subset.size and (subset.min() < 0 or subset.max() >= len(cloud)):
            raise DataIntegrityError(f"{args.subset}: index out of range for {len(cloud)} points")
        cloud = cloud.subset(subset)
    cfg = DetectorConfig(
        r=args.r, s=args.s, k=args.k, t_max=args.t_max, max_dim=args.max_dim,
        min_annulus_size=args.min_annulus, threads=args.threads,
    )
    timings: dict = {}
    t0 = time.perf_counter()
    part = detect(cloud, cfg, timings=timings)
    timings["total"] = time.perf_counter() - t0
    if subset is not None:
        part = Partition(part.labels, part.n_long_bars, part.annulus_size, part.flags, point_index=subset)
    Path(args.out).write_text(part.to_csv())
    counts = part.counts()
    print(" ".join(f"{lab}={counts[lab]}" for lab in LABELS) + f" ({timings['total']:.2f}s, {backend()})")
    inputs = [args.input] + ([args.subset] if args.subset else [])
    write_manifest("detect", argv, args.out, inputs, [args.out], {
        "config": cfg.to_dict(), "counts": counts,
        "timings": {k: round(v, 6) for k, v in timings.items()},
        "sparse_annuli": int(sum(1 for f in part.flags if f)),
    })


def cmd_evaluate(args, argv):
    cloud = _read_cloud(args.input, args.skip_header)
    truth = load_ground_truth(args.truth, proximity_radius=args.proximity)
    if len(truth) != len(cloud):
        raise DataIntegrityError(f"truth has {len(truth)} rows but the cloud has {len(cloud)} points")
    cloud = PointCloud(cloud.points, truth)
    part = _read_partition(args.labels)
    report = evaluate(part, cloud, args.proximity, args.boundary_radius)
    out = Path(args.out)
    out.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=_jsonable) + "\n")
    print(" ".join(f"{lab}: P={report.precision[lab]:.3f} R={report.recall[lab]:.3f}" for lab in LABELS))
    write_manifest("evaluate", argv, out, [args.input, args.truth, args.labels], [out])


def cmd_project(args, argv):
    cloud = _read_cloud(args.input, args.skip_header)
    coords, captured = pca_project(cloud.points, args.dim)
    save_cloud(args.out, PointCloud(coords))
    print(f"projected {len(cloud)} points to {args.dim}-d, variance captured {captured:.3f}")
    write_manifest("project", argv, args.out, [args.input], [args.out], {"variance_captured": captured})


def cmd_plot(args, argv):
    cloud = _read_cloud(args.input, args.skip_header)
    part = _read_partition(args.labels)
    pts = cloud.points[part.point_index] if part.point_index.size else cloud.points[:0]
    if part.point_index.size and part.point_index.max() >= len(cloud):
        raise DataIntegrityError("label file refers to points beyond the cloud")
    Path(args.out).write_text(scatter_svg(pts, part.labels))
    print(f"wrote {args.out}")
    write_manifest("plot", argv, args.out, [args.input, args.labels], [args.out])


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.manifest).read_text())
    for path, digest in manifest.get("inputs", {}).items():
        if sha256(path) != digest:
            raise DataIntegrityError(f"input {path} changed since the manifest was written")
    expected = manifest.get("outputs", {})
    code = main(manifest["argv"])
    if code != EXIT_OK:
        return code
    bad = [p for p, d in expected.items() if sha256(p) != d]
    if bad:
        raise DataIntegrityError("replay output differs: " + ", ".join(bad))
    print(f"replay ok: {len(expected)} output(s) identical")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="localph", description="Local persistent homology singularity detection.")
    p.add_argument("--version", action="version", version=f"localph {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic point cloud with ground truth")
    g.add_argument("--shape", choices=SHAPES, required=True)
    g.add_argument("--count", type=int, default=4000, help="points (ignored for henneberg)")
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--proximity", type=float, default=None,
                   help="ground-truth radius (default 1.5 for henneberg, else 0.05)")
    g.add_argument("--henneberg-mode", choices=("lattice", "grid", "area"), default="lattice")
    g.add_argument("--n-beta", type=int, default=62)
    g.add_argument("--n-phi", type=int, default=88)
    g.add_argument("--truth", help="ground truth path (default <out stem>.truth.csv)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("detect", help="label every point boundary / manifold / intersection")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--r", type=float, required=True, help="inner annulus radius")
    d.add_argument("--s", type=float, required=True, help="outer annulus radius")
    d.add_argument("--k", type=int, default=2, help="intrinsic dimension")
    d.add_argument("--t-max", type=float, default=None)
    d.add_argument("--max-dim", type=int, default=None)
    d.add_argument("--min-annulus", type=int, default=None)
    d.add_argument("--threads", type=int, default=1)
    d.add_argument("--subset", help="indices file, or a previous label CSV")
    d.add_argument("--subset-label", choices=LABELS, help="with a label CSV, keep only this label")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("evaluate", help="score a label file against ground truth")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--proximity", type=float, required=True)
    e.add_argument("--boundary-radius", type=float, default=None)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    pr = sub.add_parser("project", help="PCA projection")
    pr.add_argument("--in", dest="input", required=True)
    pr.add_argument("--dim", type=int, default=2)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_project)

    pl = sub.add_parser("plot", help="SVG scatter coloured by label")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--labels", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    r = sub.add_parser("replay", help="re-run a manifest and verify outputs")
    r.add_argument("--manifest", required=True)
    r.set_defaults(func=cmd_replay)

    for sp in (d, e, pr, pl):
        sp.add_argument("--skip-header", action="store_true", help="input CSV has a header row")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "generate" and args.proximity is None:
        args.proximity = 1.5 if args.shape == "henneberg" else 0.05
    try:
        return args.func(args, argv) or EXIT_OK
    except ParameterError as exc:
        _fail("usage", exc)
        return EXIT_USAGE
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        _fail("io", exc)
        return EXIT_IO
    except DataIntegrityError as exc:
        _fail("data", exc)
        return EXIT_DATA
    except (LocalPHError, ValueError) as exc:
        _fail("usage", exc)
        return EXIT_USAGE


def _fail(kind, exc):
    msg = str(exc).replace("\n", " ").strip() or type(exc).__name__
    print(f"error[{kind}]: {msg}", file=sys.stderr)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
