"""Experiment configuration: a YAML document validated with unknown keys rejected."""

import hashlib
import json
import os
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..acquisition import MaximizerBudget
from ..batch import BatchConfig
from ..errors import ConfigError
from ..gp import GpConfig
from ..optimization import GaParams
from ..sampling import SamplerParams

OUTPUT_ROOT_ENV = "SCOBO_OUTPUT_ROOT"

EXPERIMENTS = (
    "E1-uncertainty",
    "E2-ga-vs-sa",
    "E3-dimension-sweep",
    "E4-batch-size-sweep",
    "single-run",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SamplerSection(_Strict):
    n_min: Optional[int] = Field(None, ge=2)
    n_max: Optional[int] = Field(None, ge=2)
    m: int = Field(50, ge=1)


class GpSection(_Strict):
    n_starts: int = Field(16, ge=1)
    length_scale_bounds: Tuple[float, float] = (0.01, 10.0)
    nugget_bounds: Tuple[float, float] = (1e-8, 1e-2)
    max_iter: int = Field(200, ge=1)


class MaximizerSection(_Strict):
    n_starts: Optional[int] = Field(None, ge=0)
    max_local_steps: int = Field(200, ge=1)
    n_screen: int = Field(10_000, ge=1)


class GaSection(_Strict):
    l: float = Field(5.0, gt=0)
    p_c: float = Field(0.5, ge=0, le=1)
    p_m: float = Field(0.1, ge=0, le=1)
    max_generations: int = Field(200, ge=1)
    stall_generations: int = Field(30, ge=1)


class GklsSection(_Strict):
    n_minima: int = Field(10, ge=1)
    f_star: float = -1.0
    base_min: float = 0.0
    radius_range: Tuple[float, float] = (0.05, 0.10)


class ExperimentConfig(_Strict):
    experiment: Literal[EXPERIMENTS]
    replications: int = Field(1, ge=1)
    dimensions: List[int] = [2]
    batch_sizes: List[int] = [5]
    strategies: List[Literal["SCO", "SamplingOnly", "KB", "CLMin"]] = ["SCO", "SamplingOnly"]
    cycles: int = Field(5, ge=0)
    n_init: Optional[int] = None
    function: Literal["branin", "gkls"] = "gkls"
    optimizer: Literal["SA", "GA"] = "SA"
    master_seed: int = 0
    output_dir: Optional[str] = None
    workers: int = Field(1, ge=1)
    reference_presamples: int = Field(20_000, ge=100)
    sampler: SamplerSection = SamplerSection()
    gp: GpSection = GpSection()
    maximizer: MaximizerSection = MaximizerSection()
    ga: GaSection = GaSection()
    gkls: GklsSection = GklsSection()

    @model_validator(mode="after")
    def _check(self):
        if not self.dimensions or any(d < 1 for d in self.dimensions):
            raise ValueError("dimensions must be a non-empty list of positive integers")
        if not self.batch_sizes or any(n < 1 for n in self.batch_sizes):
            raise ValueError("batch_sizes must be a non-empty list of positive integers")
        if not self.strategies:
            raise ValueError("strategies must not be empty")
        if self.function == "branin" and self.dimensions != [2]:
            raise ValueError("the branin function requires dimensions: [2]")
        if self.experiment == "E1-uncertainty":
            if any(n < 2 for n in self.batch_sizes):
                raise ValueError("E1 batch sizes must be at least 2")
            if any(s not in ("SCO", "SamplingOnly") for s in self.strategies):
                raise ValueError("E1 compares only SCO and SamplingOnly")
        if self.experiment == "E2-ga-vs-sa" and any(n < 2 for n in self.batch_sizes):
            raise ValueError("E2 batch sizes must be at least 2")
        s = self.sampler
        if s.n_min is not None and s.n_max is not None and s.n_max < s.n_min:
            raise ValueError("sampler.n_max must be >= sampler.n_min")
        return self

    def batch_config(self, batch_size):
        return BatchConfig(
            batch_size=batch_size,
            cycles=self.cycles,
            n_init=self.n_init,
            sampler=SamplerParams(**self.sampler.model_dump()),
            gp=GpConfig(**self.gp.model_dump()),
            maximizer=MaximizerBudget(**self.maximizer.model_dump()),
            optimizer=self.optimizer,
            ga=GaParams(**self.ga.model_dump()),
        )

    def resolved_output_dir(self):
        if self.output_dir:
            return Path(self.output_dir)
        root = os.environ.get(OUTPUT_ROOT_ENV, "results")
        return Path(root) / f"{self.experiment}-seed{self.master_seed}"

    def echo(self):
        """Canonical JSON-compatible form of the configuration."""
        return json.loads(self.model_dump_json())

    def digest(self):
        data = self.echo()
        data.pop("output_dir", None)
        data.pop("workers", None)
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(data):
    """Validate a mapping; raises :class:`ConfigError` listing offending fields."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping", ["<root>"])
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        fields = [".".join(str(p) for p in err["loc"]) or "<root>" for err in exc.errors()]
        lines = [f"  {f}: {err['msg']}" for f, err in zip(fields, exc.errors())]
        raise ConfigError("invalid configuration:\n" + "\n".join(lines), fields) from None


def load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", ["<file>"]) from None
    return parse_config(data if data is not None else {})
