from .config import ExperimentConfig, load_config, parse_config
from .experiments import run_experiment
from .summary import SummaryError, summarize

__all__ = ["ExperimentConfig", "load_config", "parse_config", "run_experiment", "summarize", "SummaryError"]
