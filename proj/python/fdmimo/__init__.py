"""Full-duplex MIMO self-interference cancellation lab.

Thin Python layer over the C++ core: configuration types, the
single-trial and sweep drivers, numerical self-checks, and the
command-line entry point.
"""

from __future__ import annotations

import json
import sys

from fdmimo._core import (
    ConfigError,
    OptimizerConfig,
    SystemConfig,
    __version__,
    run_cli,
    run_trial,
    selfcheck_covariance,
    selfcheck_gradient,
    selfcheck_projection,
    selfcheck_second_moment_identity,
)
from fdmimo._core import run_sweep as _run_sweep_raw

__all__ = [
    "ConfigError",
    "OptimizerConfig",
    "SystemConfig",
    "__version__",
    "run_cli",
    "run_trial",
    "run_sweep",
    "selfcheck_covariance",
    "selfcheck_gradient",
    "selfcheck_projection",
    "selfcheck_second_moment_identity",
]


def run_sweep(config: SystemConfig, master_seed: int = 1, parallel: int = 1) -> dict:
    """Sweep the configured channel-estimation-error grid.

    Returns a dict with the per-trial CSV text under ``"csv"`` and the
    parsed aggregate summary (per-grid-point statistics, config echo,
    deterministic run id) under ``"summary"``.
    """
    raw = _run_sweep_raw(config, master_seed, parallel)
    return {"csv": raw["csv"], "summary": json.loads(raw["summary_json"])}


def _main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
