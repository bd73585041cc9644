"""Configuration, deterministic instances, ratio search and the check suite."""

from .config import ALL_CHECKS, ConfigError, ExperimentConfig, load_config, parse_config
from .report import SCHEMA, VerificationReport
from .search import ratio_search
from .suite import run_suite
