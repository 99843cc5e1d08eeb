"""Persistence-gated mixture of ordinal experts."""

from ._pgmoe import (
    Dataset,
    DomainError,
    EvalReport,
    GenConfig,
    GradCheckReport,
    Model,
    Pattern,
    Record,
    build_splits,
    build_windows,
    evaluate,
    fit,
    generate,
    gradcheck,
    read_series,
    train,
    write_series,
)

METHODS = ("Persist", "POM", "NNPOM", "ITME", "STME", "STMEIC")

__all__ = [
    "METHODS",
    "Dataset",
    "DomainError",
    "EvalReport",
    "GenConfig",
    "GradCheckReport",
    "Model",
    "Pattern",
    "Record",
    "build_splits",
    "build_windows",
    "evaluate",
    "fit",
    "generate",
    "gradcheck",
    "read_series",
    "train",
    "write_series",
]
