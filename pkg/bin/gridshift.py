"""
Command-line entry point for the GridShift toolkit.

Usage:
    uv run python bin/gridshift.py cluster data/iris.csv --h 0.78 --label-col 4
    uv run python bin/gridshift.py cluster iris --tune --label-col 4
    uv run python bin/gridshift.py cluster prnn --h 0.43 --label-col 2
    uv run python bin/gridshift.py tune data/prnn.csv --label-col 2
    uv run python bin/gridshift.py segment photo.png --h 0.1 --mode rgbxy --output out/
    uv run python bin/gridshift.py track frames/ --center 40,40 --length 24 --width 24 --h 0.25
    uv run python bin/gridshift.py bench --generator gmm:n=1000000,d=3,k=10 --h 0.1 --repeats 3
    uv run python bin/gridshift.py theory --n 1000000 --d 1 --s 1 --h 0.5

Artifacts go to --output (a file, or a directory for segment/track) or to
stdout; logs go to stderr. Exit codes: 0 success, 2 parse error, 3 invalid
input or arguments, 4 no convergence (artifact still written), 5 I/O error,
1 anything else.
"""

import argparse
import json
import logging
import logging.config
import sys
from pathlib import Path
from typing import Optional

# Ensure project root is on sys.path so gridshift.* imports work when
# the script is run directly (uv run python bin/gridshift.py).
_PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(_PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(_PROJECT_ROOT))

from gridshift.errors import EXIT_CONVERGENCE  # noqa: E402

_LOGGING_CONFIG = _PROJECT_ROOT / "gridshift" / "logging_config.json"

log = logging.getLogger("gridshift.cli")


def _setup_logging(log_level: str = "INFO", log_file: Optional[Path] = None, quiet: bool = False) -> None:
    with _LOGGING_CONFIG.open(encoding="utf-8") as fh:
        logging.config.dictConfig(json.load(fh))
    level = "WARNING" if quiet else log_level.upper()
    logging.getLogger("gridshift").setLevel(level)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s [%(name)s] %(message)s"))
        logging.getLogger("gridshift").addHandler(file_handler)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _point(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return values[0], values[1]


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Seed for generators and subsampling.")
    common.add_argument("--output", "-o", metavar="PATH", default=None,
                        help="Output file (cluster, tune, bench, theory, track CSV) or directory (segment).")
    common.add_argument("--quiet", "-q", action="store_true", help="Only log warnings and errors.")
    common.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Log verbosity (default: GRIDSHIFT_LOG_LEVEL or INFO).")
    common.add_argument("--log-file", metavar="PATH", default=None, help="Also write logs to this file.")
    common.add_argument("--no-timings", action="store_true",
                        help="Write null runtimes so repeated runs produce identical artifacts.")

    parser = argparse.ArgumentParser(
        prog="gridshift",
        description="Grid-based mean shift clustering, segmentation, tracking and benchmarks.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def dataset_args(p):
        p.add_argument("input",
                       help="CSV file, or a preset name (iris; prnn reads synth.tr from the data directory).")
        p.add_argument("--label-col", default=None,
                       help="Ground-truth column (0-based index or header name); excluded from features.")
        p.add_argument("--no-normalize", action="store_true",
                       help="Use raw features (skip min-max or the preset's scaling).")

    p = sub.add_parser("cluster", parents=[common], help="Cluster a CSV dataset with GridShift.")
    dataset_args(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--h", type=float, help="Bandwidth (cell side length).")
    group.add_argument("--tune", action="store_true", help="Pick h by silhouette over --h-grid.")
    p.add_argument("--h-grid", type=_float_list, default=None, help="Comma-separated bandwidths for --tune.")

    p = sub.add_parser("tune", parents=[common], help="Silhouette sweep over a bandwidth grid.")
    dataset_args(p)
    p.add_argument("--h-grid", type=_float_list, default=None, help="Comma-separated bandwidths in (0, 1].")
    p.add_argument("--algorithm", choices=["gridshift", "mspp"], default="gridshift")

    p = sub.add_parser("segment", parents=[common], help="Segment a PNG/PPM image.")
    p.add_argument("image", help="PNG or binary PPM image.")
    p.add_argument("--h", type=float, required=True, help="Color bandwidth on RGB/255 features.")
    p.add_argument("--mode", choices=["rgb", "rgbxy"], default="rgb")
    p.add_argument("--label-format", choices=["pgm", "csv"], default="pgm")
    p.add_argument("--ground-truth", metavar="PATH", default=None,
                   help="Reference label map (PGM, PNG or CSV) to score against.")

    p = sub.add_parser("track", parents=[common], help="Track an object through a frame directory.")
    p.add_argument("frames", help="Directory of zero-padded PNG/PPM frames.")
    p.add_argument("--center", type=_point, required=True, help="Initial window centre X,Y in pixels.")
    p.add_argument("--length", type=float, required=True, help="Initial window x-extent in pixels.")
    p.add_argument("--width", type=float, required=True, help="Initial window y-extent in pixels.")
    p.add_argument("--h", type=float, required=True, help="Color bandwidth.")
    p.add_argument("--f", type=float, default=None, help="Search-region shrink factor (>= 1).")
    p.add_argument("--eta", type=float, default=None, help="Centre convergence tolerance in pixels.")
    p.add_argument("--select", default="top_1", help="'top_k' or comma-separated cluster ids.")
    p.add_argument("--max-inner-iters", type=int, default=None)
    p.add_argument("--annotate", metavar="DIR", default=None, help="Write frames with the window drawn.")

    p = sub.add_parser("bench", parents=[common], help="Time GridShift against the baselines.")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--generator", help="Synthetic data, e.g. gmm:n=1000000,d=3,k=10.")
    source.add_argument("--csv", help="CSV dataset (min-max normalized before timing).")
    p.add_argument("--label-col", default=None, help="Ground-truth column for --h-grid profiles.")
    p.add_argument("--h", type=float, default=None, help="Bandwidth for the timing run.")
    p.add_argument("--h-grid", type=_float_list, default=None,
                   help="Report ARI/AMI/runtime per bandwidth instead of a single timing run.")
    p.add_argument("--algos", default="gridshift,mspp", help="Comma-separated: gridshift,mspp,vanilla_ms.")
    p.add_argument("--repeats", type=int, default=1)

    p = sub.add_parser("theory", parents=[common], help="Gaussian shrinkage experiment.")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--s", type=_float_list, default=[1.0], help="Per-axis stddev (one value broadcasts).")
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--kernel-variance", type=float, default=2.25, metavar="V",
                   help="Kernel variance in units of h^2 for the predictions (0.75 matches the flat grid neighborhood).")
    p.add_argument("--descent-seeds", type=int, default=0, metavar="K",
                   help="Also check loss descent on K seeded 50-point datasets per dimension 1..3.")

    return parser.parse_args(argv)


def _label_col(value: Optional[str]):
    if value is None:
        return None
    return int(value) if value.lstrip("-").isdigit() else value


def _load_dataset(source: str, label_col, settings):
    """Load a CSV path or a preset name; returns the dataset and its feature scaling."""
    from gridshift.config.presets import PRESETS
    from gridshift.services import datasets

    path = Path(source)
    if not path.exists() and source in PRESETS:
        ds = datasets.load_preset(source, settings.data_path)
        if label_col is None:
            ds.labels = None
        return ds, PRESETS[source].scaling
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {source}")
    return datasets.load_csv(path, label_col=label_col), "minmax"


def _features(ds, scaling: str, args):
    from gridshift.services import datasets

    return datasets.scale_features(ds.X, "none" if args.no_normalize else scaling)


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("Wrote %s", path)


def _dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _runtime(ms: float, record: bool) -> Optional[float]:
    return round(ms, 3) if record else None


def _run_config(args, settings):
    from gridshift.models.reports import RunConfig

    inputs = [getattr(args, name) for name in ("input", "image", "frames", "csv") if getattr(args, name, None)]
    return RunConfig(
        subcommand=args.subcommand,
        inputs=inputs,
        h=getattr(args, "h", None),
        h_grid=getattr(args, "h_grid", None),
        tune=getattr(args, "tune", False),
        mode=getattr(args, "mode", None),
        seed=settings.seed,
        output=args.output,
        label_col=getattr(args, "label_col", None),
        normalize=not getattr(args, "no_normalize", False),
        record_timings=settings.record_timings,
    )


def cmd_cluster(args, settings) -> int:
    from gridshift.services import engine, metrics
    from gridshift.services.grid import validate_bandwidth
    from gridshift.utils.timing import Stopwatch

    ds, scaling = _load_dataset(args.input, _label_col(args.label_col), settings)
    X = _features(ds, scaling, args)

    payload: dict = {}
    if args.tune:
        sweep = metrics.tune_bandwidth(X, engine.cluster, h_grid=args.h_grid, seed=settings.seed,
                                       progress=not args.quiet)
        h = sweep.best_h
        payload["tuning"] = sweep.model_dump()
    else:
        h = validate_bandwidth(args.h)

    with Stopwatch() as sw:
        labeling = engine.cluster(X, h)

    payload.update({
        "h": h,
        "n_clusters": labeling.n_clusters,
        "labels": labeling.labels.tolist(),
        "centroids": labeling.centroids.tolist(),
        "iterations": labeling.iterations,
        "converged": labeling.converged,
        "runtime_ms": _runtime(sw.elapsed_ms, settings.record_timings),
    })
    if ds.labels is not None:
        payload.update(metrics.agreement(ds.labels, labeling.labels).model_dump())
        log.info("ARI=%.4f AMI=%.4f FM=%.4f", payload["ari"], payload["ami"], payload["fm"])

    _emit(_dumps(payload), args.output)
    return 0 if labeling.converged else EXIT_CONVERGENCE


def cmd_tune(args, settings) -> int:
    from gridshift.services import baselines, engine, metrics

    ds, scaling = _load_dataset(args.input, _label_col(args.label_col), settings)
    X = _features(ds, scaling, args)
    clusterer = engine.cluster if args.algorithm == "gridshift" else baselines.mspp_run
    sweep = metrics.tune_bandwidth(X, clusterer, h_grid=args.h_grid, seed=settings.seed, progress=not args.quiet)

    payload = {"algorithm": args.algorithm, **sweep.model_dump()}
    if ds.labels is not None:
        best = clusterer(X, sweep.best_h)
        payload["best"] = metrics.agreement(ds.labels, best.labels).model_dump()
    _emit(_dumps(payload), args.output)
    return 0


def cmd_segment(args, settings) -> int:
    from gridshift.services import segmentation
    from gridshift.utils import image_io

    img = image_io.load_image(args.image)
    result = segmentation.segment(img, args.h, mode=args.mode)

    out_dir = Path(args.output) if args.output else settings.output_path / "segment"
    stem = Path(args.image).stem
    image_io.save_image(segmentation.render(result, img), out_dir / f"{stem}_render.png")
    image_io.save_label_map(result.label_map, out_dir / f"{stem}_labels.{args.label_format}")

    sidecar = result.sidecar(record_timings=settings.record_timings)
    if args.ground_truth:
        reference = image_io.load_label_map(args.ground_truth)
        scores = segmentation.score_segmentation(result, reference)
        sidecar.update({"ari": scores.ari, "fm": scores.fm})
    (out_dir / f"{stem}.json").write_text(_dumps(sidecar), encoding="utf-8")
    log.info("Wrote segmentation of %s to %s", args.image, out_dir)
    return 0 if result.converged else EXIT_CONVERGENCE


def cmd_track(args, settings) -> int:
    from gridshift.models.tracking import TrackerConfig, TrackWindow
    from gridshift.services import tracker
    from gridshift.utils import image_io

    frames = [image_io.load_image(p) for p in image_io.list_frames(args.frames)]
    cfg = TrackerConfig(
        h=args.h,
        f=args.f if args.f is not None else settings.tracker_f,
        eta=args.eta if args.eta is not None else settings.tracker_eta,
        selection=args.select,
        max_inner_iters=args.max_inner_iters or settings.tracker_max_inner_iters,
    )
    window = TrackWindow(cx=args.center[0], cy=args.center[1], l=args.length, w=args.width)
    run = tracker.track_sequence(frames, window, cfg)

    _emit(run.to_csv(), args.output)
    if args.annotate:
        tracker.write_annotated_frames(frames, run, args.annotate)
    return 0


def cmd_bench(args, settings) -> int:
    from gridshift.errors import InvalidParameterError
    from gridshift.services import bench, datasets

    if args.generator:
        spec = datasets.parse_generator_spec(args.generator)
        ds = datasets.generate(spec, seed=settings.seed)
        seed = spec.seed if spec.seed is not None else settings.seed
    else:
        ds = datasets.load_csv(args.csv, label_col=_label_col(args.label_col))
        seed = settings.seed
    X = datasets.min_max_normalize(ds.X)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]

    if args.h_grid:
        if ds.labels is None:
            raise InvalidParameterError("--h-grid profiles need ground truth (--label-col or a generator)")
        entries = bench.bandwidth_profile(X, ds.labels, args.h_grid, algos, record_timings=settings.record_timings)
        _emit(_dumps({"profile": [e.model_dump() for e in entries]}), args.output)
        return 0
    report = bench.run_bench(X, args.h, algos, repeats=args.repeats, seed=seed,
                             record_timings=settings.record_timings)
    _emit(_dumps(report.model_dump()), args.output)
    return 0 if all(r.converged for r in report.results) else EXIT_CONVERGENCE


def cmd_theory(args, settings) -> int:
    from gridshift.models.clustering import EngineConfig
    from gridshift.services import engine, theory
    from gridshift.services.datasets import gaussian_sample
    from gridshift.utils.timing import Stopwatch

    record = theory.gaussian_experiment(args.n, args.d, args.s, args.h, seed=settings.seed,
                                         kernel_variance=args.kernel_variance)
    if not record.k_non_increasing:
        log.warning("Active cell count increased during the experiment")

    if args.descent_seeds:
        violations = 0
        with Stopwatch() as sw:
            for d in (1, 2, 3):
                for seed in range(settings.seed, settings.seed + args.descent_seeds):
                    X = gaussian_sample(50, [1.0] * d, seed=seed)
                    _, trace = engine.run_traced(X, EngineConfig(h=args.h))
                    violations += len(theory.check_descent(trace).violations)
        log.info("Descent sweep: %d violations over %d datasets (%.0f ms)",
                 violations, 3 * args.descent_seeds, sw.elapsed_ms)
        if violations:
            log.warning("Loss increased in %d cell updates", violations)

    _emit(theory.experiment_csv(record), args.output)
    return 0


COMMANDS = {
    "cluster": cmd_cluster,
    "tune": cmd_tune,
    "segment": cmd_segment,
    "track": cmd_track,
    "bench": cmd_bench,
    "theory": cmd_theory,
}


def _main(argv: list[str] | None = None) -> int:
    args = _parse_args(argv)

    # Import after path setup
    from pydantic import ValidationError

    from gridshift.config.settings import get_settings
    from gridshift.errors import EXIT_IO, EXIT_VALIDATION, GridShiftError

    settings = get_settings()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.no_timings:
        updates["record_timings"] = False
    if updates:
        settings = settings.model_copy(update=updates)

    log_file = Path(args.log_file) if args.log_file else settings.log_file
    _setup_logging(args.log_level or settings.log_level, log_file, args.quiet)

    try:
        run_config = _run_config(args, settings)
        log.debug("Run config: %s", run_config.model_dump_json())
        return COMMANDS[args.subcommand](args, settings)
    except GridShiftError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except ValidationError as exc:
        log.error("Invalid arguments: %s", exc.errors()[0]["msg"])
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except Exception as exc:
        log.error("%s failed: %s", args.subcommand, exc, exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(_main())
