"""Ultraweak DPG Helmholtz solver with multigrid-preconditioned CG."""

from ._core import (
    ConfigError,
    ConvergenceRecord,
    CoarseOpMode,
    CycleConfig,
    LoadKind,
    LoadSpec,
    OmegaSweepResult,
    OmegaSweepRow,
    StudyConfig,
    StudyKind,
    StudyResult,
    csv_to_records,
    parse_config,
    records_to_csv,
    run_omega_sweep,
    run_study,
    selftest,
    serialize_config,
)

__all__ = [
    "ConfigError",
    "ConvergenceRecord",
    "CoarseOpMode",
    "CycleConfig",
    "LoadKind",
    "LoadSpec",
    "OmegaSweepResult",
    "OmegaSweepRow",
    "StudyConfig",
    "StudyKind",
    "StudyResult",
    "csv_to_records",
    "parse_config",
    "records_to_csv",
    "run_omega_sweep",
    "run_study",
    "selftest",
    "serialize_config",
]
