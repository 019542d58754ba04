"""Command-line front end.

Verbs: run (full pipeline), tune (search only, emits the trial trace),
eval (fit and score one hyperparameter setting), pca (projection export),
bench (per-stage timing table). Settings come from an optional JSON config
file; every field can be overridden by a flag.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bayesopt import write_trace
from .dtree import HyperParams, fit_tree, predict_many
from .ingest import load_flows, stratified_split
from .metrics import compute_metrics, confusion, metrics_to_text, pca2, write_pca_csv
from .pipeline import (
    PipelineConfig,
    benchmark_scaling,
    report_to_text,
    run_pipeline,
)
from .preprocess import SmoteConfig, apply_minmax, fit_minmax, scale_dataset, smote


def _add_common(p: argparse.ArgumentParser, seed_required: bool) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--data", dest="data_path", help="flow CSV path")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--positive-label", dest="positive_label")
    p.add_argument("--negative-label", dest="negative_label")
    p.add_argument(
        "--feature-columns",
        dest="feature_columns",
        help="comma-separated feature include-list (default: all non-label columns)",
    )
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--seed", type=int, required=seed_required, default=None)
    p.add_argument("--smote-k", dest="smote_k", type=int)
    p.add_argument("--smote-ratio", dest="smote_ratio", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--n-init", dest="n_init", type=int)
    p.add_argument("--cv-folds", dest="cv_folds", type=int)
    p.add_argument("--n-candidates", dest="n_candidates", type=int)
    p.add_argument("--n-threads", dest="n_threads", type=int)
    p.add_argument(
        "--space",
        help='inline JSON search space, e.g. \'[{"name": "max_depth", "kind": "integer", '
        '"lower": 1, "upper": 50}]\'',
    )


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        k: getattr(args, k, None)
        for k in (
            "data_path",
            "label_column",
            "positive_label",
            "negative_label",
            "test_fraction",
            "seed",
            "smote_k",
            "smote_ratio",
            "budget",
            "n_init",
            "cv_folds",
            "n_candidates",
            "n_threads",
        )
    }
    if getattr(args, "feature_columns", None):
        overrides["feature_columns"] = [c.strip() for c in args.feature_columns.split(",")]
    if getattr(args, "space", None):
        from .bayesopt import Dim, SearchSpace

        dims = json.loads(args.space)
        overrides["space"] = SearchSpace(
            dims=tuple(Dim(s["name"], s["kind"], s["lower"], s["upper"]) for s in dims)
        )
    if args.config:
        cfg = PipelineConfig.from_file(args.config, **overrides)
    else:
        filled = {k: v for k, v in overrides.items() if v is not None}
        if "seed" not in filled:
            filled["seed"] = 0
        cfg = PipelineConfig(**filled)
    if cfg.data_path is None:
        raise SystemExit("error: no data file (pass --data or set data_path in the config)")
    return cfg


def _load(cfg: PipelineConfig):
    return load_flows(
        cfg.data_path,
        cfg.label_column,
        cfg.positive_label,
        feature_columns=cfg.feature_columns,
        negative_label=cfg.negative_label,
    )


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    report = run_pipeline(cfg)
    text = report_to_text(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    if args.trace:
        write_trace(report.trace, args.trace, cfg.space)
        print(f"trace written to {args.trace}")
    return 0


def _cmd_tune(args) -> int:
    cfg = _build_config(args)
    from .pipeline import make_cv_objective, stratified_kfold
    from .bayesopt import optimize

    data = _load(cfg)
    split = stratified_split(data, cfg.test_fraction, cfg.seed)
    scaler = fit_minmax(split.train)
    train_s = scale_dataset(scaler, split.train)
    folds = stratified_kfold(train_s.labels, cfg.cv_folds, cfg.seed)
    smote_cfg = SmoteConfig(k=cfg.smote_k, target_ratio=cfg.smote_ratio, seed=cfg.seed)
    objective = make_cv_objective(train_s, folds, smote_cfg, cfg.seed, cfg.n_threads)
    trace = optimize(
        objective,
        cfg.space,
        budget=cfg.budget,
        n_init=cfg.n_init,
        seed=cfg.seed,
        n_candidates=cfg.n_candidates,
    )
    out = args.out or "trace.csv"
    write_trace(trace, out, cfg.space)
    best = trace.best
    print(f"best objective {best.objective:.6f} at trial {best.index}: {best.config}")
    print(f"trace written to {out}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _build_config(args)
    hp = HyperParams(
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        max_features_fraction=args.max_features_fraction,
    )
    data = _load(cfg)
    split = stratified_split(data, cfg.test_fraction, cfg.seed)
    scaler = fit_minmax(split.train)
    train_s = scale_dataset(scaler, split.train)
    test_s = scale_dataset(scaler, split.test)
    augmented = smote(train_s, SmoteConfig(cfg.smote_k, cfg.smote_ratio, cfg.seed))
    tree = fit_tree(augmented, hp, cfg.seed, cfg.n_threads)
    pred = predict_many(tree, test_s.features)
    print(metrics_to_text(compute_metrics(confusion(test_s.labels, pred, 1))))
    return 0


def _cmd_pca(args) -> int:
    cfg = _build_config(args)
    data = _load(cfg)
    scaler = fit_minmax(data)
    projections, _, explained = pca2(apply_minmax(scaler, data.features))
    write_pca_csv(projections, data.labels, args.out)
    print(f"explained variance: {explained[0]:.6f}, {explained[1]:.6f}")
    print(f"projection data written to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    cfg = _build_config(args)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else []
    rows = benchmark_scaling(cfg, sizes)
    print(json.dumps(rows, indent=2))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="botopt", description="Botnet flow classification with a tuned decision tree"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full pipeline: split, normalize, tune, fit, evaluate")
    _add_common(p_run, seed_required=True)
    p_run.add_argument("--report", help="also write the run report to this file")
    p_run.add_argument("--trace", help="write the tuning trace CSV to this file")
    p_run.set_defaults(fn=_cmd_run)

    p_tune = sub.add_parser("tune", help="hyperparameter search only, emit the trial trace")
    _add_common(p_tune, seed_required=False)
    p_tune.add_argument("--out", help="trace CSV path (default trace.csv)")
    p_tune.set_defaults(fn=_cmd_tune)

    p_eval = sub.add_parser("eval", help="fit and score one hyperparameter setting")
    _add_common(p_eval, seed_required=False)
    p_eval.add_argument("--max-depth", type=int, default=50)
    p_eval.add_argument("--min-samples-split", type=int, default=2)
    p_eval.add_argument("--min-samples-leaf", type=int, default=1)
    p_eval.add_argument("--max-features-fraction", type=float, default=1.0)
    p_eval.set_defaults(fn=_cmd_eval)

    p_pca = sub.add_parser("pca", help="export 2-component projection data")
    _add_common(p_pca, seed_required=False)
    p_pca.add_argument("--out", required=True, help="output CSV (pc1, pc2, label)")
    p_pca.set_defaults(fn=_cmd_pca)

    p_bench = sub.add_parser("bench", help="per-stage timing table over subsample sizes")
    _add_common(p_bench, seed_required=False)
    p_bench.add_argument("--sizes", help="comma-separated ascending subsample sizes")
    p_bench.set_defaults(fn=_cmd_bench)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
