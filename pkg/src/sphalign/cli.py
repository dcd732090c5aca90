"""Command-line harness: dataset generation, batch alignment, scaling
benchmarks, registration, image alignment, and evaluation tables.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend, datagen, fileio
from .align import FrsOptions, SpmcOptions, frs_align, hybrid_align, spmc_align
from .errors import SphalignError
from .pcr import PointCloud, register
from .so3 import geodesic_angle_deg, sample_rotations
from .sphimage import estimate_rotation_images, resize_equirect

WORKERS_ENV = "SPHALIGN_WORKERS"
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_CONFIG_RE = re.compile(r"^(A\d+)(B\d+)R(\d+)$")


@dataclass(frozen=True)
class RunRecord:
    config_id: str
    method: str
    geodesic_error_deg: float
    elapsed_seconds: float
    iterations: int

    def to_dict(self):
        return {
            "config_id": self.config_id,
            "method": self.method,
            "geodesic_error_deg": float(self.geodesic_error_deg),
            "elapsed_seconds": float(self.elapsed_seconds),
            "iterations": int(self.iterations),
        }


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_usage(message))

    def exit_usage(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return EXIT_USAGE


def _aligner(method, spmc_opts=None, frs_opts=None):
    if method == "spmc":
        return lambda t, s: spmc_align(t, s, spmc_opts)
    if method == "frs":
        return lambda t, s: frs_align(t, s, frs_opts)
    return lambda t, s: hybrid_align(t, s, spmc_opts, frs_opts)


def _parse_patterns(text):
    if text.strip().lower() == "all":
        return list(datagen.FAMILIES)
    labels = {f"A{i + 1}": fam for i, fam in enumerate(datagen.FAMILIES)}
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in labels:
            out.append(labels[tok])
        elif tok in datagen.FAMILIES:
            out.append(tok)
        else:
            raise ValueError(f"unknown pattern {tok!r}")
    return out


def _parse_stages(text):
    if text.strip().lower() == "all":
        return list(datagen.STAGES)
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok not in datagen.STAGES:
            raise ValueError(f"unknown stage {tok!r}")
        out.append(tok)
    return out


def cmd_generate(args, parser):
    if args.rotations < 1:
        return parser.exit_usage("--rotations must be >= 1")
    if args.points < 100:
        return parser.exit_usage("--points must be >= 100")
    try:
        families = _parse_patterns(args.patterns)
        stage_names = _parse_stages(args.stages)
    except ValueError as exc:
        return parser.exit_usage(str(exc))
    patterns = [
        datagen.PatternSpec(family=f, n_points=args.points, seed=args.seed)
        for f in families
    ]
    stages = [datagen.stage_spec(s) for s in stage_names]
    manifest = datagen.build_dataset(
        patterns,
        stages,
        args.rotations,
        args.seed,
        args.out,
        noise_model=args.noise_model,
    )
    print(f"wrote {len(manifest['entries'])} configurations under {args.out}")
    return EXIT_OK


def _workers(args):
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV, "").strip()
    return max(1, int(env)) if env.isdigit() else 1


def cmd_align(args, parser):
    manifest_path = os.path.join(args.dataset, "manifest.json")
    try:
        manifest = fileio.read_json(manifest_path)
        truths = fileio.read_rotations_csv(
            os.path.join(args.dataset, manifest["ground_truth_file"])
        )
    except (OSError, ValueError, KeyError, SphalignError) as exc:
        print(f"cannot read dataset: {exc}", file=sys.stderr)
        return EXIT_DATA
    frs_opts = FrsOptions(k=args.k, max_iterations=args.max_iterations)
    spmc_opts = SpmcOptions(binarize_threshold=args.binarize_threshold)
    run = _aligner(args.method, spmc_opts, frs_opts)

    templates = {}

    def template_for(entry):
        key = entry["template_file"]
        if key not in templates:
            templates[key] = fileio.read_xyz(os.path.join(args.dataset, key))
        return templates[key]

    def process(entry):
        config_id = entry["config_id"]
        try:
            template = template_for(entry)
            source = fileio.read_xyz(os.path.join(args.dataset, entry["source_file"]))
            truth = truths[config_id]
        except (SphalignError, OSError, KeyError) as exc:
            print(f"{config_id}: skipped ({exc})", file=sys.stderr)
            return None
        result = run(template, source)
        # ground truth maps template onto source; the aligner estimates the
        # inverse direction
        error = geodesic_angle_deg(result.rotation, truth.T)
        return RunRecord(
            config_id=config_id,
            method=args.method,
            geodesic_error_deg=error,
            elapsed_seconds=result.elapsed_seconds,
            iterations=result.iterations,
        )

    entries = manifest.get("entries", [])
    n_workers = _workers(args)
    if n_workers > 1:
        for entry in entries:  # warm template cache before sharing across threads
            template_for(entry)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            records = [r for r in pool.map(process, entries) if r is not None]
    else:
        records = [r for r in map(process, entries) if r is not None]

    payload = "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in records)
    if args.out:
        with open(args.out, "w") as fh:
            if payload:
                fh.write(payload + "\n")
    elif payload:
        print(payload)
    if not records:
        print("no configuration could be aligned", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def run_bench_scaling(sizes, rotations, methods, seed, family="SmallIslands", stage="B3"):
    """Time each method at each size; returns (rows, slopes).

    rows: (n_points, method, rotation_index, elapsed_seconds) tuples;
    slopes: {method: fitted log-log slope} (empty for a single size).
    Elapsed times come from the aligners themselves and exclude all
    generation and I/O work.
    """
    backend.warmup()
    stage_spec = datagen.stage_spec(stage)
    rots = sample_rotations(rotations, np.random.SeedSequence([int(seed), 2]))
    rows = []
    runners = {m: _aligner(m) for m in methods}
    warm = None
    for size_idx, n in enumerate(sorted(sizes)):
        template = datagen.generate_template(
            datagen.PatternSpec(family=family, n_points=int(n), seed=int(seed))
        )
        staged = datagen.apply_stage(template, stage_spec, [int(seed), 9, size_idx])
        if warm is None:
            # first-touch compile/caches must not pollute the timed runs
            warm = staged @ rots[0].T
            for runner in runners.values():
                runner(template, warm)
        for r_idx in range(rotations):
            source = staged @ rots[r_idx].T
            for method in methods:
                result = runners[method](template, source)
                rows.append((int(n), method, r_idx, result.elapsed_seconds))
    slopes = {}
    uniq_sizes = sorted(set(int(n) for n in sizes))
    if len(uniq_sizes) >= 2:
        for method in methods:
            medians = [
                float(
                    np.median(
                        [e for n, m, _, e in rows if m == method and n == size]
                    )
                )
                for size in uniq_sizes
            ]
            slopes[method] = float(
                np.polyfit(np.log(uniq_sizes), np.log(medians), 1)[0]
            )
    return rows, slopes


def _write_csv(stream, header, rows):
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)


def cmd_bench_scaling(args, parser):
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        return parser.exit_usage("--sizes must be a comma-separated integer list")
    if not sizes or min(sizes) < 100:
        return parser.exit_usage("--sizes needs values >= 100")
    if args.rotations < 1:
        return parser.exit_usage("--rotations must be >= 1")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("spmc", "frs", "hybrid"):
            return parser.exit_usage(f"unknown method {m!r}")
    rows, slopes = run_bench_scaling(sizes, args.rotations, methods, args.seed)
    timing_rows = [(n, m, r, "%.9f" % e) for n, m, r, e in rows]
    header = ["n_points", "method", "rotation_index", "elapsed_seconds"]
    slope_rows = [(m, "%.6f" % s) for m, s in sorted(slopes.items())]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            _write_csv(fh, header, timing_rows)
        _write_csv(sys.stdout, ["method", "slope"], slope_rows)
    else:
        _write_csv(sys.stdout, header, timing_rows)
        _write_csv(sys.stderr, ["method", "slope"], slope_rows)
    return EXIT_OK


def _load_cloud(path):
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ply":
        points, normals = fileio.read_ply(path)
        return PointCloud(points=points, normals=normals)
    if ext == ".xyz":
        return PointCloud(points=fileio.read_xyz(path))
    raise fileio.FormatError(f"{path}: unsupported cloud extension {ext!r}")


def cmd_register(args, parser):
    try:
        source = _load_cloud(args.source)
        target = _load_cloud(args.target)
        result = register(
            source,
            target,
            embedding=args.embedding,
            aligner=args.aligner,
            voxel_size=args.voxel_size,
            source_is_partial=args.partial_source,
            neighborhood_radius=args.radius,
            min_neighbors=args.min_neighbors,
        )
    except (SphalignError, OSError, ValueError) as exc:
        print(f"registration failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    payload = json.dumps(result.to_dict(), sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def cmd_image_align(args, parser):
    if not 0.0 < args.threshold < 1.0:
        return parser.exit_usage("--threshold must lie strictly between 0 and 1")
    try:
        template = resize_equirect(fileio.load_image_gray(args.template))
        source = resize_equirect(fileio.load_image_gray(args.source))
        result = estimate_rotation_images(template, source, args.threshold)
    except (SphalignError, OSError, ValueError) as exc:
        print(f"image alignment failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    payload = json.dumps(result.to_dict(), sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def summarize_records(records):
    """Group records by (pattern, stage, method); median and quartiles."""
    groups = {}
    for rec in records:
        match = _CONFIG_RE.match(str(rec.get("config_id", "")))
        if match:
            pattern, stage = match.group(1), match.group(2)
        else:
            pattern, stage = str(rec.get("config_id", "")), ""
        key = (pattern, stage, str(rec.get("method", "")))
        groups.setdefault(key, []).append(float(rec["geodesic_error_deg"]))
    rows = []
    for (pattern, stage, method) in sorted(groups):
        errs = np.array(groups[(pattern, stage, method)])
        q1, med, q3 = np.percentile(errs, [25.0, 50.0, 75.0])
        rows.append(
            (
                pattern,
                stage,
                method,
                len(errs),
                "%.6f" % med,
                "%.6f" % q1,
                "%.6f" % q3,
            )
        )
    return rows


def cmd_eval(args, parser):
    try:
        if args.records:
            records = fileio.read_jsonl(args.records)
        else:
            records = fileio.read_jsonl(sys.stdin)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read records: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        rows = summarize_records(records)
    except (KeyError, ValueError) as exc:
        print(f"malformed record: {exc}", file=sys.stderr)
        return EXIT_DATA
    header = ["pattern", "stage", "method", "count", "median_deg", "q1_deg", "q3_deg"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            _write_csv(fh, header, rows)
    else:
        _write_csv(sys.stdout, header, rows)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="sphalign", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a pattern/stage/rotation dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--rotations", type=int, required=True)
    p.add_argument("--points", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patterns", default="all", help="'all' or e.g. A1,A3")
    p.add_argument("--stages", default="all", help="'all' or e.g. B1,B7")
    p.add_argument("--noise-model", choices=datagen.NOISE_MODELS, default="ambient")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("align", help="align every dataset entry, one JSON record per line")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=("spmc", "frs", "hybrid"), required=True)
    p.add_argument("--out", help="JSON-lines output file (default stdout)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker threads (default ${WORKERS_ENV} or 1)")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--binarize-threshold", type=int, default=0)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("bench-scaling", help="time methods across point-set sizes")
    p.add_argument("--sizes", required=True, help="comma-separated point counts")
    p.add_argument("--rotations", type=int, default=5)
    p.add_argument("--methods", default="spmc,frs,hybrid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="timings CSV file (slopes then print to stdout)")
    p.set_defaults(func=cmd_bench_scaling)

    p = sub.add_parser("register", help="register two point clouds")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--embedding", choices=("case", "egi"), default="case")
    p.add_argument("--aligner", choices=("spmc", "frs", "hybrid"), default="spmc")
    p.add_argument("--voxel-size", type=float, default=0.2)
    p.add_argument("--partial-source", action="store_true")
    p.add_argument("--radius", type=float, default=0.1,
                   help="EGI neighborhood radius (scene units)")
    p.add_argument("--min-neighbors", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("image-align", help="rotation between two equirectangular images")
    p.add_argument("--template", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--threshold", type=float, default=0.21)
    p.add_argument("--out")
    p.set_defaults(func=cmd_image_align)

    p = sub.add_parser("eval", help="summarize run records into a quartile table")
    p.add_argument("--records", help="JSON-lines file (default stdin)")
    p.add_argument("--out", help="CSV output file (default stdout)")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args, parser)
    except SphalignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
