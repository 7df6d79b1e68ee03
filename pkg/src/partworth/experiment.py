"""Experiment orchestration: config resolution, training, checkpoint
selection, test evaluation, and artifact writing.

A run is fully reproducible from its config and input files: the resolved
config, the sha256 of the dataset file, and the seed are written next to the
report. Artifacts are only written after the run succeeds, so a failed run
leaves no partial outputs.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autoencoder import ItemAutoencoder
from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import ChoiceDataset, split_dataset
from .errors import DataError, ValidationError
from .linear import LinearConjoint
from .metrics import MetricSet
from .moral_machine import mm_numeric_matrix, mm_side_schema
from .reports import EpochRecord, TrainReport, export_curves
from .residual import ResidualChoiceNet
from .schema import concat_schema
from .ssl import SSLChoiceNet

MODEL_KINDS = ("conjoint", "ssl", "residual", "autoencoder")


@dataclass
class SplitSpec:
    test_fraction: float = 0.3
    val_fraction: float = 0.1
    by_respondent: bool = False
    seed: int | None = None  # defaults to the run seed

    def to_json(self) -> dict:
        return {"test_fraction": self.test_fraction, "val_fraction": self.val_fraction,
                "by_respondent": self.by_respondent, "seed": self.seed}

    @classmethod
    def from_json(cls, obj: dict | None) -> "SplitSpec":
        return cls(**obj) if obj else cls()


@dataclass
class ExperimentConfig:
    dataset: str
    model: str
    seed: int = 0
    max_epochs: int = 100
    split: SplitSpec = field(default_factory=SplitSpec)
    hparams: dict = field(default_factory=dict)
    out_dir: str | None = None

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValidationError(f"unknown model {self.model!r}, expected one of {MODEL_KINDS}")

    def to_json(self) -> dict:
        return {"dataset": self.dataset, "model": self.model, "seed": self.seed,
                "max_epochs": self.max_epochs, "split": self.split.to_json(),
                "hparams": self.hparams, "out_dir": self.out_dir}

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        obj["split"] = SplitSpec.from_json(obj.get("split"))
        return cls(**obj)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except FileNotFoundError:
            raise DataError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"config is not valid JSON: {exc}") from None
        for key, value in (overrides or {}).items():
            if value is not None:
                obj[key] = value
        return cls.from_json(obj)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def design_matrix(dataset: ChoiceDataset, model_kind: str, hparams: dict):
    """Assemble (X, y, partworth_schema, estimator_kwargs) for a model kind.

    Pairwise datasets feed difference-link models as [x_A | x_B]; the
    "single" pairing on a pairwise dataset concatenates both options into one
    long item (one-hot under a doubled schema, or the 42-feature numeric
    scenario vector for Moral Machine data with feature_mode="numeric").
    """
    if model_kind == "ssl":
        if dataset.pairing != "pairwise":
            raise ValidationError("ssl training requires a pairwise dataset")
        return dataset.one_hot_pair(), dataset.y, None, {}

    if model_kind == "conjoint":
        link = hparams.get("link", "pairwise" if dataset.pairing == "pairwise" else "single")
        if dataset.pairing == "pairwise":
            X = dataset.one_hot_pair()
            if link == "pairwise":
                return X, dataset.y, dataset.schema, {"schema": dataset.schema, "link": "pairwise"}
            schema = concat_schema(dataset.schema)
            return X, dataset.y, schema, {"schema": schema, "link": "single"}
        if link != "single":
            raise ValidationError("single-item datasets only support the single link")
        return dataset.one_hot_single(), dataset.y, dataset.schema, {
            "schema": dataset.schema, "link": "single"}

    if model_kind == "residual":
        pairing = hparams.get("pairing", dataset.pairing)
        feature_mode = hparams.get("feature_mode", "onehot")
        if feature_mode not in ("onehot", "numeric"):
            raise ValidationError(f"unknown feature_mode {feature_mode!r}")
        if dataset.pairing == "pairwise":
            if pairing == "pairwise":
                if feature_mode == "onehot":
                    return dataset.one_hot_pair(), dataset.y, dataset.schema, {
                        "schema": dataset.schema, "pairing": "pairwise"}
                return dataset.numeric_pair_concat(), dataset.y, None, {"pairing": "pairwise"}
            # both options concatenated into one decision vector
            if feature_mode == "numeric":
                if dataset.schema == mm_side_schema():
                    X = mm_numeric_matrix(dataset)
                else:
                    X = dataset.numeric_pair_concat()
                return X, dataset.y, None, {"pairing": "single"}
            schema = concat_schema(dataset.schema)
            return dataset.one_hot_pair(), dataset.y, schema, {
                "schema": schema, "pairing": "single"}
        if pairing != "single":
            raise ValidationError("single-item datasets only support single pairing")
        if feature_mode == "numeric":
            return dataset.numeric_single(), dataset.y, None, {"pairing": "single"}
        return dataset.one_hot_single(), dataset.y, dataset.schema, {
            "schema": dataset.schema, "pairing": "single"}

    raise ValidationError(f"unknown model kind {model_kind!r}")


@dataclass
class ExperimentResult:
    model: object
    report: TrainReport
    metrics: MetricSet
    out_dir: str | None


def _write_artifacts(config: ExperimentConfig, model, report: TrainReport,
                     dataset_sha: str, partworth_schema) -> None:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    resolved = config.to_json()
    resolved["dataset_sha256"] = dataset_sha
    with open(out / "config.json", "w") as fh:
        json.dump(resolved, fh, indent=1, sort_keys=True)
    report.save(out / "report.json")
    if report.history:
        export_curves(report, out / "curves.csv")
    save_checkpoint(model, out / "model.json", config=resolved)
    if isinstance(model, LinearConjoint):
        model.partworths_effects_.to_csv(out / "partworths.csv")
    elif isinstance(model, ResidualChoiceNet) and partworth_schema is not None:
        model.extract_partworths().to_csv(out / "partworths.csv")


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Train per config, keep the best-validation checkpoint, evaluate once on
    the test partition, and write report files."""
    if config.model == "autoencoder":
        raise ValidationError("use pretrain_autoencoder for autoencoder configs")
    dataset = ChoiceDataset.load(config.dataset)
    if dataset.y is None:
        raise ValidationError("dataset has no targets; cannot train a choice model")
    dataset_sha = _sha256(config.dataset)
    split_seed = config.split.seed if config.split.seed is not None else config.seed
    split = split_dataset(dataset, seed=split_seed,
                          by_respondent=config.split.by_respondent,
                          test_fraction=config.split.test_fraction,
                          val_fraction=config.split.val_fraction)
    hp = dict(config.hparams)
    X, y, pw_schema, est_kwargs = design_matrix(dataset, config.model, hp)
    epochs = int(hp.get("epochs", config.max_epochs))

    if config.model == "conjoint":
        model = LinearConjoint(
            l2=hp.get("l2", 1e-4), max_iter=hp.get("max_iter", 500), seed=config.seed,
            **est_kwargs,
        )
        # no per-epoch checkpointing, so the validation carve is not needed:
        # fit on the full 70% train partition
        fit_idx = np.sort(np.concatenate([split.train, split.validation]))
        model.fit(X[fit_idx], y[fit_idx])
        train_scores = model.predict_proba(X[fit_idx])[:, 1]
        train_acc = float(((train_scores >= 0.5).astype(int) == y[fit_idx]).mean())
        report = TrainReport(
            model_type="conjoint", seed=config.seed,
            history=[EpochRecord(epoch=0, train_loss=model.fit_report_["final_loss"],
                                 train_acc=train_acc)],
            best_epoch=0,
            stop_reason="converged" if model.fit_report_["converged"] else "max_iter",
            extra={"fit_report": model.fit_report_, "link": model.link_},
        )
    elif config.model == "ssl":
        encoder_path = hp.get("encoder")
        if not encoder_path:
            raise ValidationError("ssl config needs hparams.encoder (autoencoder checkpoint)")
        encoder, kind, _ = load_checkpoint(encoder_path)
        if kind != "autoencoder":
            raise ValidationError(f"{encoder_path} is a {kind} checkpoint, expected autoencoder")
        model = SSLChoiceNet(
            encoder=encoder,
            classifier_hidden=tuple(hp.get("classifier_hidden", (64, 32))),
            encoder_mode=hp.get("encoder_mode", "frozen"),
            lr=hp.get("lr", 1e-3),
            encoder_lr_scale=hp.get("encoder_lr_scale", 0.1),
            epochs=epochs,
            batch_size=int(hp.get("batch_size", 128)),
            augment_swap=bool(hp.get("augment_swap", False)),
            seed=config.seed,
        )
        model.fit(X[split.train], y[split.train],
                  X_val=X[split.validation], y_val=y[split.validation])
        report = model.report_
    else:  # residual
        model = ResidualChoiceNet(
            hidden_nodes=int(hp.get("hidden_nodes", 16)),
            l2_residual=hp.get("l2_residual", 1e-4),
            lr=hp.get("lr", 1e-3),
            epochs=epochs,
            batch_size=int(hp.get("batch_size", 256)),
            freeze_residual=bool(hp.get("freeze_residual", False)),
            seed=config.seed,
            **est_kwargs,
        )
        model.fit(X[split.train], y[split.train],
                  X_val=X[split.validation], y_val=y[split.validation])
        report = model.report_

    test_scores = model.predict_proba(X[split.test])[:, 1]
    metrics = MetricSet.from_scores(test_scores, y[split.test])
    report.test = metrics
    report.test_scores = [float(s) for s in test_scores]
    report.test_targets = [int(t) for t in y[split.test]]
    report.extra["split"] = {"train": len(split.train), "validation": len(split.validation),
                             "test": len(split.test), "seed": split_seed,
                             "by_respondent": config.split.by_respondent}
    report.extra["dataset_sha256"] = dataset_sha

    if config.out_dir:
        _write_artifacts(config, model, report, dataset_sha, pw_schema)
    return ExperimentResult(model=model, report=report, metrics=metrics, out_dir=config.out_dir)


def pretrain_autoencoder(config: ExperimentConfig) -> ExperimentResult:
    """Unsupervised pretraining stage: fits an autoencoder on all option
    vectors of the train partition and checkpoints it."""
    if config.model != "autoencoder":
        raise ValidationError("pretrain_autoencoder expects model='autoencoder'")
    dataset = ChoiceDataset.load(config.dataset)
    dataset_sha = _sha256(config.dataset)
    split_seed = config.split.seed if config.split.seed is not None else config.seed
    split = split_dataset(dataset, seed=split_seed,
                          by_respondent=config.split.by_respondent,
                          test_fraction=config.split.test_fraction,
                          val_fraction=config.split.val_fraction)
    hp = dict(config.hparams)
    if dataset.pairing == "pairwise":
        # both presented options are unlabeled items
        X_train = np.vstack([dataset.schema.one_hot_indices(dataset.a[split.train]),
                             dataset.schema.one_hot_indices(dataset.b[split.train])])
        X_val = np.vstack([dataset.schema.one_hot_indices(dataset.a[split.validation]),
                           dataset.schema.one_hot_indices(dataset.b[split.validation])])
    else:
        X_train = dataset.schema.one_hot_indices(dataset.x[split.train])
        X_val = dataset.schema.one_hot_indices(dataset.x[split.validation])

    model = ItemAutoencoder(
        hidden_dims=tuple(hp.get("hidden_dims", (128,))),
        latent_dim=int(hp.get("latent_dim", 2)),
        variant=hp.get("variant", "ae"),
        recon_kind=hp.get("recon_kind", "bce"),
        kl_weight=hp.get("kl_weight", 1.0),
        epochs=int(hp.get("epochs", config.max_epochs)),
        batch_size=int(hp.get("batch_size", 128)),
        lr=hp.get("lr", 1e-3),
        seed=config.seed,
    )
    model.fit(X_train, X_val=X_val if X_val.shape[0] else None)
    report = model.report_
    report.extra["dataset_sha256"] = dataset_sha

    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        resolved = config.to_json()
        resolved["dataset_sha256"] = dataset_sha
        with open(out / "config.json", "w") as fh:
            json.dump(resolved, fh, indent=1, sort_keys=True)
        report.save(out / "report.json")
        if report.history:
            export_curves(report, out / "curves.csv")
        save_checkpoint(model, out / "model.json", config=resolved)
    return ExperimentResult(model=model, report=report, metrics=None, out_dir=config.out_dir)


def evaluate_checkpoint(ckpt_path, dataset_path=None, split_name: str = "test") -> MetricSet:
    """Re-evaluate a trained checkpoint on a partition of its dataset, using
    the split spec stored in the checkpoint's config."""
    model, kind, config = load_checkpoint(ckpt_path)
    if kind == "autoencoder":
        raise ValidationError("autoencoder checkpoints have no choice metrics to evaluate")
    if config is None:
        raise ValidationError("checkpoint carries no config; cannot rebuild the split")
    dataset = ChoiceDataset.load(dataset_path or config["dataset"])
    if dataset.y is None:
        raise ValidationError("dataset has no targets")
    split_spec = SplitSpec.from_json(config.get("split"))
    seed = split_spec.seed if split_spec.seed is not None else config.get("seed", 0)
    split = split_dataset(dataset, seed=seed, by_respondent=split_spec.by_respondent,
                          test_fraction=split_spec.test_fraction,
                          val_fraction=split_spec.val_fraction)
    try:
        idx = {"train": split.train, "validation": split.validation, "test": split.test}[split_name]
    except KeyError:
        raise ValidationError(f"unknown split {split_name!r}") from None
    X, y, _, _ = design_matrix(dataset, kind, config.get("hparams", {}))
    scores = model.predict_proba(X[idx])[:, 1]
    return MetricSet.from_scores(scores, y[idx])
