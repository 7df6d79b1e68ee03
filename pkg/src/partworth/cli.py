"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 data error, 4 numeric failure.
All state flows through flags and config files; nothing is read from the
environment.
"""

import argparse
import json
import sys

import numpy as np

from .autoencoder import reconstruction_dump
from .car import car_records_to_dataset, load_car
from .checkpoint import load_checkpoint
from .datasets import ChoiceDataset, split_dataset
from .errors import DataError, NumericError, ValidationError
from .experiment import (
    ExperimentConfig,
    SplitSpec,
    evaluate_checkpoint,
    pretrain_autoencoder,
    run_experiment,
)
from .moral_machine import load_mm, mm_pairs_to_dataset
from .reports import TrainReport, compare_table, format_compare_text
from .residual import ResidualChoiceNet
from .schema import AttributeSchema
from .synthetic import random_partworths, synth_clustered, synth_interaction, synth_linear


def _load_schema(path) -> AttributeSchema:
    try:
        with open(path) as fh:
            return AttributeSchema.from_json(json.load(fh))
    except FileNotFoundError:
        raise DataError(f"schema file not found: {path}") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"schema file is malformed: {exc}") from None


def _cmd_preprocess_mm(args) -> int:
    pairs, schema, stats = load_mm(args.input, limit=args.limit)
    dataset = mm_pairs_to_dataset(pairs, stats)
    dataset.save(args.out)
    print(f"wrote {dataset.n} pairs to {args.out} "
          f"(one-hot width {schema.width}, numeric width 42)")
    print(json.dumps(stats.to_json()))
    return 0


def _cmd_preprocess_car(args) -> int:
    records, stats = load_car(args.exp1, args.exp2)
    wrote = []
    if args.exp1:
        ds1 = car_records_to_dataset(records, 1, include_user_attrs=args.user_attrs, stats=stats)
        ds1.save(args.out)
        wrote.append((args.out, ds1.n, 1))
    if args.exp2:
        out2 = args.out
        if args.exp1:  # both experiments: exp2 goes next to the exp1 file
            stem, dot, suffix = args.out.rpartition(".")
            out2 = f"{stem}-exp2{dot}{suffix}" if dot else f"{args.out}-exp2"
        ds2 = car_records_to_dataset(records, 2, include_user_attrs=args.user_attrs, stats=stats)
        ds2.save(out2)
        wrote.append((out2, ds2.n, 2))
    for path, n, exp in wrote:
        print(f"wrote {n} experiment-{exp} records to {path}")
    print(f"rejected {stats.rows_rejected} malformed rows "
          f"(lines {stats.rejected_lines[:10]}{'...' if len(stats.rejected_lines) > 10 else ''})")
    return 0


def _cmd_synth(args) -> int:
    schema = _load_schema(args.schema)
    if args.kind == "linear":
        w_star = random_partworths(schema, seed=args.seed, scale=args.scale)
        dataset = synth_linear(schema, w_star, n_pairs=args.n, seed=args.seed)
    elif args.kind in ("xor", "threshold"):
        dataset = synth_interaction(schema, args.kind, n=args.n, noise=args.noise,
                                    seed=args.seed, pairing=args.pairing)
    else:  # clusters
        dataset = synth_clustered(schema, n=args.n, seed=args.seed,
                                  n_clusters=args.clusters, corruption=args.corruption)
    dataset.save(args.out)
    bayes = dataset.meta.get("bayes_accuracy")
    extra = f", bayes accuracy {bayes:.4f}" if bayes is not None else ""
    print(f"wrote {dataset.n} {args.kind} records to {args.out}{extra}")
    return 0


def _overrides(args) -> dict:
    return {"dataset": args.dataset, "seed": args.seed,
            "max_epochs": args.max_epochs, "out_dir": args.out_dir}


def _cmd_train(args) -> int:
    config = ExperimentConfig.from_file(args.config, _overrides(args))
    result = run_experiment(config)
    print(f"model {config.model}: best epoch {result.report.best_epoch}, "
          f"test accuracy {result.metrics.accuracy:.4f}, test AUC {result.metrics.auc:.4f}")
    if config.out_dir:
        print(f"artifacts in {config.out_dir}")
    return 0


def _cmd_pretrain_ae(args) -> int:
    config = ExperimentConfig.from_file(args.config, _overrides(args))
    if config.model != "autoencoder":
        config.model = "autoencoder"
    result = pretrain_autoencoder(config)
    best = result.report.extra.get("best_val_recon")
    print(f"autoencoder: best epoch {result.report.best_epoch}, "
          f"best validation recon loss {best}")
    if config.out_dir:
        print(f"artifacts in {config.out_dir}")
    return 0


def _cmd_eval(args) -> int:
    metrics = evaluate_checkpoint(args.model, dataset_path=args.dataset,
                                  split_name=args.split)
    print(json.dumps(metrics.to_json()))
    return 0


def _cmd_partworths(args) -> int:
    model, kind, _ = load_checkpoint(args.model)
    if kind == "conjoint":
        table = model.partworths_effects_
    elif kind == "residual":
        table = model.extract_partworths()
    else:
        raise ValidationError(f"{kind} checkpoints carry no partworth table")
    table.to_csv(args.out, importance_method=args.importance)
    print(f"wrote partworth table to {args.out}")
    return 0


def _cmd_reconstruct(args) -> int:
    model, kind, config = load_checkpoint(args.model)
    if kind != "autoencoder":
        raise ValidationError(f"reconstruct needs an autoencoder checkpoint, got {kind}")
    dataset_path = args.dataset or (config or {}).get("dataset")
    if not dataset_path:
        raise ValidationError("no dataset recorded in checkpoint; pass --dataset")
    dataset = ChoiceDataset.load(dataset_path)
    items = dataset.one_hot_single() if dataset.pairing == "single" else \
        dataset.schema.one_hot_indices(dataset.a)
    # index into the held-out partition when the training split is recoverable
    if config is not None and config.get("split") is not None:
        spec = SplitSpec.from_json(config["split"])
        seed = spec.seed if spec.seed is not None else config.get("seed", 0)
        split = split_dataset(dataset, seed=seed, by_respondent=spec.by_respondent,
                              test_fraction=spec.test_fraction, val_fraction=spec.val_fraction)
        items = items[split.test]
    if not 0 <= args.sample < items.shape[0]:
        raise ValidationError(f"sample index {args.sample} out of range 0..{items.shape[0] - 1}")
    reconstruction_dump(model, dataset.schema, items[args.sample : args.sample + 1], args.out)
    print(f"wrote reconstruction of sample {args.sample} to {args.out}")
    return 0


def _cmd_compare(args) -> int:
    reports = [TrainReport.load(p) for p in args.reports]
    rows = compare_table(reports, out_csv=args.out,
                         out_txt=args.text_out)
    print(format_compare_text(rows), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partworth",
                                     description="Preference learning toolkit: conjoint "
                                                 "analysis with linear and neural utility models")
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("preprocess", help="ingest raw survey exports")
    pre_sub = pre.add_subparsers(dest="source", required=True)
    mm = pre_sub.add_parser("mm", help="Moral Machine responses CSV")
    mm.add_argument("--input", required=True)
    mm.add_argument("--out", required=True)
    mm.add_argument("--limit", type=int, default=None,
                    help="keep a deterministic subsample of N pairs")
    mm.set_defaults(func=_cmd_preprocess_mm)
    car = pre_sub.add_parser("car", help="car preference comparison CSVs")
    car.add_argument("--exp1", default=None)
    car.add_argument("--exp2", default=None)
    car.add_argument("--out", required=True,
                     help="dataset path; with both experiments, exp2 goes to <out>-exp2")
    car.add_argument("--user-attrs", action="store_true",
                     help="include respondent attributes in the item vectors")
    car.set_defaults(func=_cmd_preprocess_car)

    synth = sub.add_parser("synth", help="generate synthetic datasets with known ground truth")
    synth.add_argument("kind", choices=["linear", "xor", "threshold", "clusters"])
    synth.add_argument("--schema", required=True, help="schema JSON file")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--out", required=True)
    synth.add_argument("--scale", type=float, default=1.0, help="partworth scale (linear)")
    synth.add_argument("--noise", type=float, default=0.05, help="label flip rate (xor/threshold)")
    synth.add_argument("--pairing", choices=["single", "pairwise"], default="single")
    synth.add_argument("--clusters", type=int, default=4)
    synth.add_argument("--corruption", type=float, default=0.02)
    synth.set_defaults(func=_cmd_synth)

    def add_train_overrides(p):
        p.add_argument("--config", required=True)
        p.add_argument("--dataset", default=None, help="override config dataset path")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--max-epochs", dest="max_epochs", type=int, default=None)
        p.add_argument("--out-dir", dest="out_dir", default=None)

    train = sub.add_parser("train", help="train a choice model from a config")
    add_train_overrides(train)
    train.set_defaults(func=_cmd_train)

    pae = sub.add_parser("pretrain-ae", help="unsupervised autoencoder pretraining stage")
    add_train_overrides(pae)
    pae.set_defaults(func=_cmd_pretrain_ae)

    ev = sub.add_parser("eval", help="evaluate a checkpoint on a dataset partition")
    ev.add_argument("--model", required=True)
    ev.add_argument("--dataset", default=None)
    ev.add_argument("--split", choices=["train", "validation", "test"], default="test")
    ev.set_defaults(func=_cmd_eval)

    pw = sub.add_parser("partworths", help="export the effects-coded partworth table")
    pw.add_argument("--model", required=True)
    pw.add_argument("--out", required=True)
    pw.add_argument("--importance", choices=["range", "sum"], default="range")
    pw.set_defaults(func=_cmd_partworths)

    rec = sub.add_parser("reconstruct", help="dump original vs reconstructed values for one item")
    rec.add_argument("--model", required=True)
    rec.add_argument("--sample", type=int, required=True)
    rec.add_argument("--out", required=True)
    rec.add_argument("--dataset", default=None)
    rec.set_defaults(func=_cmd_reconstruct)

    cmp_ = sub.add_parser("compare", help="model-by-metric comparison table from reports")
    cmp_.add_argument("--reports", nargs="+", required=True)
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--text-out", default=None)
    cmp_.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
