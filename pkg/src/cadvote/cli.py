"""Command-line driver for the whole toolkit.

One executable, one subcommand per pipeline stage: stats, outliers, smote,
select, train, evaluate, benchmark, predict, serve.  Every run writes its
artifacts under --out together with a manifest (resolved config, seed,
tool/library versions, input checksums — no timestamps), so identical
configs produce byte-identical outputs.

Exit codes: 0 success, 1 usage error, 2 data/bundle error, 3 internal error.
Diagnostics go to stderr; artifact paths are echoed to stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bundle import load_bundle, save_bundle, verify_canary
from .dataset import Dataset, load_dataset, save_csv, summarize
from .errors import CadError, DataError
from .evaluation import (
    PipelineConfig,
    TUNED_HYPERPARAMS,
    benchmark_pipelines,
    benchmark_report,
    cross_validate,
    prepare_training_data,
    report_csv,
    report_to_dict,
    roc_csv,
    roc_svg,
    stratified_folds,
    sub_seed,
    train_pipeline_model,
    tune_families,
)
from .fixture import synthetic_dataset
from .preprocess import SmoteConfig, iqr_flag, smote
from .registry import HYPERPARAM_TYPES, hyperparams_from_dict, hyperparams_to_dict
from .selection import score_features, scores_to_csv

FIXTURE_SIZE = 300
MODEL_KINDS = ("voting", "mlp", "forest", "adaboost", "tree", "naive_bayes", "knn")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", metavar="CSV", help="labeled dataset to load")
    p.add_argument(
        "--fixture",
        action="store_true",
        help=f"use the seeded synthetic dataset ({FIXTURE_SIZE} records) "
        "instead of --data",
    )
    p.add_argument(
        "--impute-median",
        action="store_true",
        help="fill missing numeric cells with column medians instead of rejecting",
    )


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument(
        "--out",
        metavar="DIR",
        default="cadvote-out",
        help="artifact directory (default ./cadvote-out)",
    )


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--mode",
        choices=("default", "paper"),
        default="default",
        help="preprocessing placement: leakage-safe per-fold (default) or "
        "whole-dataset-first reproduction (paper)",
    )
    p.add_argument("--k", type=int, default=10, help="cross-validation folds")
    p.add_argument(
        "--selection-k",
        type=int,
        default=12,
        help="keep the top-k gain-ratio features; 0 keeps all (default 12)",
    )
    p.add_argument(
        "--no-smote",
        action="store_true",
        help="skip minority oversampling (kept on by default)",
    )
    p.add_argument(
        "--smote-k", type=int, default=5, help="SMOTE neighbor count (default 5)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cadvote", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cadvote {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("stats", help="per-feature summary table as CSV")
    _add_data_args(p)
    _add_common_args(p)

    p = sub.add_parser("outliers", help="IQR outlier/extreme percentages as CSV")
    _add_data_args(p)
    _add_common_args(p)

    p = sub.add_parser("smote", help="write the class-balanced dataset")
    _add_data_args(p)
    _add_common_args(p)
    p.add_argument("--smote-k", type=int, default=5, help="neighbor count (default 5)")

    p = sub.add_parser("select", help="rank features by gain ratio")
    _add_data_args(p)
    _add_common_args(p)
    p.add_argument(
        "--selection-k",
        type=int,
        default=12,
        help="report the top-k cut in the manifest (default 12)",
    )

    p = sub.add_parser("train", help="train a model and save its bundle")
    _add_data_args(p)
    _add_common_args(p)
    _add_pipeline_args(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="voting")
    p.add_argument(
        "--hp",
        metavar="JSON",
        help='hyperparameter overrides for single-model kinds, e.g. \'{"k": 7}\'',
    )
    p.add_argument(
        "--skip-cv",
        action="store_true",
        help="do not record cross-validation metrics in the bundle",
    )

    p = sub.add_parser("evaluate", help="cross-validate one pipeline")
    _add_data_args(p)
    _add_common_args(p)
    _add_pipeline_args(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="voting")
    p.add_argument("--hp", metavar="JSON", help="hyperparameter overrides")

    p = sub.add_parser(
        "benchmark", help="cross-validate the full roster; report + ROC files"
    )
    _add_data_args(p)
    _add_common_args(p)
    _add_pipeline_args(p)
    p.add_argument(
        "--tune",
        action="store_true",
        help="grid-search each family first (seeded) instead of using the "
        "shipped tuned hyperparameters",
    )

    p = sub.add_parser("predict", help="predict one record from a JSON file")
    _add_common_args(p)
    p.add_argument("--bundle", required=True, metavar="CADM", help="model bundle")
    p.add_argument(
        "--record", required=True, metavar="JSON", help="file with feature values"
    )
    p.add_argument(
        "--allow-out-of-range",
        action="store_true",
        help="accept out-of-range values (echoed as warnings)",
    )

    p = sub.add_parser("serve", help="run the HTTP inference service")
    _add_common_args(p)
    p.add_argument("--bundle", metavar="CADM", help="model bundle (or $CAD_BUNDLE)")
    p.add_argument(
        "--bind", metavar="HOST:PORT", help="listen address (or $CAD_BIND)"
    )
    p.add_argument(
        "--allow-origin",
        action="append",
        default=[],
        metavar="ORIGIN",
        help="CORS origin to allow (repeatable)",
    )

    return parser


# ---------------------------------------------------------------------------
# shared plumbing


def _load(args: argparse.Namespace) -> Dataset:
    if getattr(args, "fixture", False):
        return synthetic_dataset(FIXTURE_SIZE, seed=args.seed)
    if not getattr(args, "data", None):
        raise _UsageError("no dataset: pass --data CSV or --fixture")
    return load_dataset(args.data, impute_median=args.impute_median)


def _outdir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _input_checksums(args: argparse.Namespace) -> dict[str, Any]:
    inputs: dict[str, Any] = {}
    if getattr(args, "fixture", False):
        inputs["fixture"] = {"n": FIXTURE_SIZE, "seed": args.seed}
    if getattr(args, "data", None):
        digest = hashlib.sha256(Path(args.data).read_bytes()).hexdigest()
        inputs[args.data] = f"sha256:{digest}"
    for key in ("record", "bundle"):
        path = getattr(args, key, None)
        if path:
            digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
            inputs[path] = f"sha256:{digest}"
    return inputs


def _write_manifest(args: argparse.Namespace, out: Path) -> None:
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in {"command"} and not callable(v)
    }
    manifest = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "versions": {
            "cadvote": __version__,
            "python": ".".join(map(str, sys.version_info[:3])),
            "numpy": np.__version__,
        },
        "inputs": _input_checksums(args),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    print(f"wrote {path}")


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, "utf-8")
    print(f"wrote {path}")
    return path


def _parse_hp(args: argparse.Namespace) -> Any:
    kind = args.model
    if args.hp is not None:
        if kind == "voting":
            raise _UsageError(
                "--hp applies to single-model kinds; the voting ensemble "
                "takes its members' tuned hyperparameters"
            )
        try:
            overrides = json.loads(args.hp)
        except json.JSONDecodeError as e:
            raise _UsageError(f"--hp is not valid JSON: {e}") from None
        if not isinstance(overrides, dict):
            raise _UsageError("--hp must be a JSON object")
        base = dict(TUNED_HYPERPARAMS.get(kind, {}))
        base.update(overrides)
        return hyperparams_from_dict(kind, base)
    if kind == "voting":
        return None
    return hyperparams_from_dict(kind, dict(TUNED_HYPERPARAMS.get(kind, {})))


def _pipeline(args: argparse.Namespace) -> PipelineConfig:
    hp = _parse_hp(args)
    common = dict(
        mode=args.mode,
        seed=args.seed,
        use_smote=not args.no_smote,
        smote_k=args.smote_k,
        selection_k=None if args.selection_k == 0 else args.selection_k,
    )
    if args.model == "voting":
        members = tuple(
            (kind, hyperparams_from_dict(kind, dict(TUNED_HYPERPARAMS[kind])))
            for kind in ("mlp", "forest", "adaboost")
        )
        return PipelineConfig(
            name="voting", kind="voting", member_specs=members, **common
        )
    return PipelineConfig(name=args.model, kind=args.model, hyperparams=hp, **common)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_stats(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    _write(out, "stats.csv", summarize(d).to_csv())
    _write_manifest(args, out)
    return 0


def _cmd_outliers(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    _write(out, "outliers.csv", iqr_flag(d).to_csv())
    _write_manifest(args, out)
    return 0


def _cmd_smote(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    before = d.class_counts()
    balanced = smote(
        d, SmoteConfig(k_neighbors=args.smote_k, seed=sub_seed("smote", args.seed))
    )
    after = balanced.class_counts()
    save_csv(balanced, out / "balanced.csv")
    print(f"wrote {out / 'balanced.csv'}")
    print(
        "class counts: before 0={} 1={} -> after 0={} 1={}".format(
            before.get(0, 0), before.get(1, 0), after.get(0, 0), after.get(1, 0)
        )
    )
    _write_manifest(args, out)
    return 0


def _cmd_select(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    scores = score_features(d)
    _write(out, "selection.csv", scores_to_csv(scores))
    if args.selection_k:
        kept = [s.feature for s in scores[: args.selection_k]]
        print(f"top {args.selection_k}: {', '.join(kept)}")
    _write_manifest(args, out)
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    pipeline = _pipeline(args)
    metrics = None
    if not args.skip_cv:
        plan = stratified_folds(d, args.k, seed=args.seed)
        result = cross_validate(d, pipeline, plan)
        metrics = report_to_dict(result.report)
        metrics["cv"] = {"k": args.k, "seed": args.seed, "mode": args.mode}
        acc = result.report.accuracy
        print(f"cv accuracy: {'NA' if acc is None else f'{100 * acc:.2f}%'}")
    prepared = prepare_training_data(pipeline, d, fold=None)
    model = train_pipeline_model(pipeline, prepared, seed=sub_seed("train", args.seed))
    path = out / "model.cadm"
    save_bundle(model, path, metrics=metrics)
    print(f"wrote {path}")
    _write_manifest(args, out)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    pipeline = _pipeline(args)
    plan = stratified_folds(d, args.k, seed=args.seed)
    result = cross_validate(d, pipeline, plan)
    doc = report_to_dict(result.report)
    doc["n_evaluated"] = result.n_evaluated
    doc["selected_features"] = list(result.selected_features)
    if result.member_reports:
        doc["members"] = {
            name: report_to_dict(rep) for name, rep in result.member_reports.items()
        }
    _write(out, "metrics.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    for metric in ("accuracy", "precision", "recall", "specificity", "f_measure"):
        v = getattr(result.report, metric)
        print(f"{metric}: {'NA' if v is None else f'{100 * v:.2f}%'}")
    _write_manifest(args, out)
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    d = _load(args)
    out = _outdir(args)
    tuned = None
    if args.tune:
        base = PipelineConfig(
            name="grid",
            kind="tree",
            mode=args.mode,
            seed=args.seed,
            use_smote=not args.no_smote,
            smote_k=args.smote_k,
            selection_k=None if args.selection_k == 0 else args.selection_k,
        )
        tuned = tune_families(d, seed=args.seed, base_pipeline=base)
        for kind, hp in sorted(tuned.items()):
            print(f"tuned {kind}: {hyperparams_to_dict(hp)}")
    pipelines = benchmark_pipelines(
        tuned=tuned,
        mode=args.mode,
        seed=args.seed,
        use_smote=not args.no_smote,
        smote_k=args.smote_k,
        selection_k=None if args.selection_k == 0 else args.selection_k,
    )
    plan = stratified_folds(d, args.k, seed=args.seed)
    rows = benchmark_report(d, pipelines, plan)
    csv_text = report_csv(rows)
    _write(out, "report.csv", csv_text)
    for row in rows:
        if row.result is None:
            print(f"'{row.name}' failed: {row.error}", file=sys.stderr)
            continue
        _write(out, f"roc_{row.name}.csv", roc_csv(row.result.report))
    _write(out, "roc.svg", roc_svg(rows))
    sys.stdout.write(csv_text)
    _write_manifest(args, out)
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    from .service import _field_vector, _predict_payload, _RequestError

    bundle = load_bundle(args.bundle)
    verify_canary(bundle)
    record_path = Path(args.record)
    if not record_path.exists():
        raise DataError(f"record file not found: {record_path}")
    try:
        fields = json.loads(record_path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"record file is not valid JSON: {e}") from None
    if not isinstance(fields, dict):
        raise DataError("record file must hold a JSON object of feature values")
    try:
        values, warnings = _field_vector(
            bundle.schema, fields, args.allow_out_of_range
        )
        payload = _predict_payload(bundle, values, warnings)
    except _RequestError as e:
        raise DataError(e.error) from None
    out = _outdir(args)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    _write(out, "prediction.json", text)
    _write_manifest(args, out)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceConfig, serve

    out = _outdir(args)
    _write_manifest(args, out)
    serve(
        bundle_path=args.bundle,
        bind_address=args.bind,
        config=ServiceConfig(allowed_origins=tuple(args.allow_origin)),
    )
    return 0


_COMMANDS = {
    "stats": _cmd_stats,
    "outliers": _cmd_outliers,
    "smote": _cmd_smote,
    "select": _cmd_select,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "benchmark": _cmd_benchmark,
    "predict": _cmd_predict,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse already printed usage/version text
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"cadvote: error: {e}", file=sys.stderr)
        return 1
    except CadError as e:
        print(f"cadvote: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except SystemExit as e:
        return int(e.code or 0)
    except Exception as e:  # pragma: no cover - defensive
        print(f"cadvote: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
