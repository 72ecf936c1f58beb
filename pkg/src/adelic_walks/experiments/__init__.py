"""Configuration, Monte Carlo orchestration, statistics, and result emission."""

from adelic_walks.experiments.config import ConfigError, ExperimentConfig, parse_config
from adelic_walks.experiments.results import ResultRow, ResultTable, emit_results, read_summary
from adelic_walks.experiments.runners import (
    RUNNERS,
    run_adelic_test,
    run_jump_law_test,
    run_marginal_convergence,
    run_moment_scaling_test,
    run_oracle_eval,
    run_survival_test,
    run_tightness_test,
)
from adelic_walks.experiments.stats import StatSummary, clopper_pearson, dkw_epsilon

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "ResultRow",
    "ResultTable",
    "emit_results",
    "read_summary",
    "RUNNERS",
    "run_adelic_test",
    "run_jump_law_test",
    "run_marginal_convergence",
    "run_moment_scaling_test",
    "run_oracle_eval",
    "run_survival_test",
    "run_tightness_test",
    "StatSummary",
    "clopper_pearson",
    "dkw_epsilon",
]
