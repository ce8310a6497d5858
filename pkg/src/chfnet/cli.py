"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 training divergence.
"""
import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ExperimentConfig
from .dataset import compute_stats, read_csv, write_csv
from .errors import ChfnetError, TrainingDiverged, ValidationError
from .experiment import (Predictor, PipelineError, compare_variants, export_predictions, resolve_lut_path,
                         run_experiment)
from .lut import FEATURE_NAMES, QueryPoint, correct_diameter, flatten, interpolate, load_lut
from .metrics import evaluate

EXIT_OK, EXIT_VALIDATION, EXIT_DIVERGED = 0, 2, 3

# Published descriptive statistics of the flattened 2006 table: (min, max, mean, sd, cv)
LUT2006_REFERENCE_STATS = {
    "pressure_mpa": (0.100, 21.0, 8.660, 7.414, 0.856),
    "mass_flux_kg_m2s": (0.0, 8000.0, 3295.238, 2642.460, 0.802),
    "quality": (-0.500, 1.0, 0.220, 0.403, 1.834),
    "chf_kw_m2": (0.0, 39744.0, 3868.244, 5419.593, 1.401),
}
LUT2006_NODE_COUNTS = (7245, 7225)

log = logging.getLogger("chfnet")


def _stats_table(stats):
    fields = ("min", "max", "mean", "sd", "cv")
    lines = [f"{'column':<18}" + "".join(f"{f:>12}" for f in fields) + "   max |rel diff| vs 2006 reference"]
    for name, st in stats.items():
        vals = [getattr(st, f) for f in fields]
        cells = "".join(f"{v:>12.4f}" if v is not None else f"{'-':>12}" for v in vals)
        ref = LUT2006_REFERENCE_STATS.get(name)
        diffs = [abs(v - r) / abs(r) for v, r in zip(vals, ref) if v is not None and r != 0] if ref else []
        lines.append(f"{name:<18}{cells}   {max(diffs):.4f}" if diffs else f"{name:<18}{cells}")
    return "\n".join(lines)


def cmd_ingest(args):
    grid = load_lut(resolve_lut_path(args.lut), require_full_span=not args.partial)
    ds = flatten(grid)
    print(f"{args.lut}: {len(ds)} nodes, axes {grid.shape[0]} P x {grid.shape[1]} G x {grid.shape[2]} x")
    if len(ds) not in LUT2006_NODE_COUNTS:
        print(f"note: node count differs from the 2006 table ({' or '.join(map(str, LUT2006_NODE_COUNTS))})")
    print(_stats_table(compute_stats(ds)))
    if args.csv:
        write_csv(ds, args.csv)
        print(f"flattened dataset written to {args.csv}")
    return EXIT_OK


def _config(args):
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {f.name: getattr(args, f.name, None) for f in dataclasses.fields(ExperimentConfig)}
    return cfg.override(**overrides)


def _run(cfg):
    report = run_experiment(cfg)
    print(report.table(), end="")
    if len(report.variants) >= 2:
        print()
        print(compare_variants(report).format(), end="")
    print(f"\nartifacts written to {cfg.output_dir}")
    return EXIT_OK


def cmd_run(args):
    return _run(_config(args))


def cmd_train(args):
    cfg = _config(args).override(variants=args.variant)
    return _run(cfg)


def _read_base_dataset(path):
    ds = read_csv(path)
    if tuple(ds.feature_names) != FEATURE_NAMES:
        raise ValidationError(f"{path}: expected feature columns {FEATURE_NAMES}, got {ds.feature_names}")
    return ds


def cmd_evaluate(args):
    pred, _ = Predictor.load(args.model)
    ds = _read_base_dataset(args.dataset)
    report = evaluate(ds.targets, pred.predict_features(ds))
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_predict(args):
    pred, meta = Predictor.load(args.model)
    q = QueryPoint(args.p, args.g, args.x, args.d)
    model_8mm = float(pred.predict_raw(q.pressure, q.mass_flux, q.quality)[0])
    out = {"query": dataclasses.asdict(q), "variant": pred.variant,
           "model_chf_8mm": model_8mm, "model_chf": correct_diameter(max(model_8mm, 0.0), q.diameter)}
    lut_path = args.lut or meta.get("lut_path")
    if lut_path:
        grid = load_lut(resolve_lut_path(lut_path), require_full_span=False)
        lut_8mm = interpolate(grid, q.pressure, q.mass_flux, q.quality)
        out.update(lut_chf_8mm=lut_8mm, lut_chf=correct_diameter(lut_8mm, q.diameter))
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_export(args):
    pred, _ = Predictor.load(args.model)
    ds = _read_base_dataset(args.dataset)
    out = args.out or Path(args.model).with_name(Path(args.model).stem + "_predictions.csv")
    export_predictions(pred, ds, out, args.tag)
    print(f"wrote {len(ds)} rows to {out}")
    return EXIT_OK


def _add_config_flags(p):
    p.add_argument("config", nargs="?", help="key = value config file (defaults apply when omitted)")
    for f in dataclasses.fields(ExperimentConfig):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None, metavar="VALUE",
                       help=f"override config key {f.name}")


def build_parser():
    ap = argparse.ArgumentParser(prog="chfnet", description="CHF look-up table surrogates")
    ap.add_argument("--version", action="version", version=f"chfnet {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a LUT CSV and print column statistics")
    p.add_argument("lut", help="LUT CSV path, or 'sample' for the shipped synthetic grid")
    p.add_argument("--partial", action="store_true", help="allow grids not covering the full 2006 span")
    p.add_argument("--csv", default=None, help="also write the flattened dataset CSV here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="train and evaluate all configured variants")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train", help="train and evaluate a single variant")
    _add_config_flags(p)
    p.add_argument("--variant", required=True, choices=("base", "A1", "A2", "A3"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="metrics of a saved model on a dataset CSV")
    p.add_argument("model")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="model prediction next to LUT interpolation")
    p.add_argument("model")
    p.add_argument("--p", type=float, required=True, help="pressure [MPa]")
    p.add_argument("--g", type=float, required=True, help="mass flux [kg/m2/s]")
    p.add_argument("--x", type=float, required=True, help="thermodynamic quality [-]")
    p.add_argument("--d", type=float, default=8.0, help="tube diameter [mm] (default 8)")
    p.add_argument("--lut", default=None, help="LUT CSV (default: the one the model was trained on)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("export-predictions", help="measured vs predicted CSV for a dataset")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("--out", default=None)
    p.add_argument("--tag", default="all", help="split_tag column value")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TrainingDiverged as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except PipelineError as exc:
        if isinstance(exc.__cause__, TrainingDiverged):
            print(f"error: training diverged: {exc}", file=sys.stderr)
            return EXIT_DIVERGED
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ChfnetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
