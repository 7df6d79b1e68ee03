"""Preference learning toolkit: choice-based conjoint analysis with linear,
autoencoder-pretrained, and residual neural utility models."""

from .autoencoder import ItemAutoencoder, LatentCode, reconstruction_dump
from .car import CarChoiceRecord, car_records_to_dataset, car_schema, load_car
from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import ChoiceDataset, DatasetSplit, split_dataset
from .errors import (
    DataError,
    NumericError,
    PartworthError,
    ProtocolError,
    ShapeError,
    ValidationError,
)
from .experiment import (
    ExperimentConfig,
    SplitSpec,
    evaluate_checkpoint,
    pretrain_autoencoder,
    run_experiment,
)
from .linear import AttributeImportance, LinearConjoint, PartworthTable
from .metrics import MetricSet, accuracy, auc
from .moral_machine import MMScenarioPair, load_mm, mm_pairs_to_dataset, mm_side_schema
from .reports import EpochRecord, TrainReport, compare_table, export_curves
from .residual import ResidualChoiceNet, ResidualDiagnostics, UtilityDecomposition
from .schema import Attribute, AttributeSchema, concat_schema
from .ssl import SSLChoiceNet
from .synthetic import random_partworths, synth_clustered, synth_interaction, synth_linear

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "AttributeImportance",
    "AttributeSchema",
    "CarChoiceRecord",
    "ChoiceDataset",
    "DataError",
    "DatasetSplit",
    "EpochRecord",
    "ExperimentConfig",
    "ItemAutoencoder",
    "LatentCode",
    "LinearConjoint",
    "MMScenarioPair",
    "MetricSet",
    "NumericError",
    "PartworthError",
    "PartworthTable",
    "ProtocolError",
    "ResidualChoiceNet",
    "ResidualDiagnostics",
    "SSLChoiceNet",
    "ShapeError",
    "SplitSpec",
    "TrainReport",
    "UtilityDecomposition",
    "ValidationError",
    "accuracy",
    "auc",
    "car_records_to_dataset",
    "car_schema",
    "compare_table",
    "concat_schema",
    "evaluate_checkpoint",
    "export_curves",
    "load_car",
    "load_checkpoint",
    "load_mm",
    "mm_pairs_to_dataset",
    "mm_side_schema",
    "pretrain_autoencoder",
    "random_partworths",
    "reconstruction_dump",
    "run_experiment",
    "save_checkpoint",
    "split_dataset",
    "synth_clustered",
    "synth_interaction",
    "synth_linear",
]
