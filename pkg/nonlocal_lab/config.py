"""
Run configuration: a flat `key = value` text format validated by pydantic.

Grammar: one `key = value` per line, `#` starts a comment, blank lines are
ignored, keys are dotted lowercase identifiers and values are numbers, bare
words or comma lists. Duplicate and unknown keys are errors; every error names
its 1-based line.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .domain import build_grid
from .errors import ConfigError, DomainError
from .models import Ball, Box, Domain, EllSpec, EllVariant, Interval, KernelSpec, Shape, TailSpec, TailVariant
from .random_fields import DEFAULT_MASTER_SEED
from .solve import SourceSpec
from .verify import CHECKS

logger = logging.getLogger(__name__)

# Config key -> (section, field).
KEY_PATHS: Dict[str, Tuple[str, str]] = {
    "dimension": ("kernel", "dimension"),
    "rho": ("kernel", "rho"),
    "ell.variant": ("kernel", "ell_variant"),
    "ell.beta": ("kernel", "ell_beta"),
    "ell.c": ("kernel", "ell_c"),
    "tail.variant": ("kernel", "tail_variant"),
    "tail.alpha1": ("kernel", "tail_alpha1"),
    "tail.alpha2": ("kernel", "tail_alpha2"),
    "domain.shape": ("domain", "shape"),
    "domain.a": ("domain", "a"),
    "domain.b": ("domain", "b"),
    "domain.lower": ("domain", "lower"),
    "domain.upper": ("domain", "upper"),
    "domain.radius": ("domain", "radius"),
    "domain.h": ("domain", "h"),
    "domain.r_ext": ("domain", "r_ext"),
    "solver.tol": ("solver", "tol"),
    "solver.max_iter": ("solver", "max_iter"),
    "solver.sublinear_power": ("solver", "sublinear_power"),
    "solver.sublinear_scale": ("solver", "sublinear_scale"),
    "verify.checks": ("verify", "checks"),
    "verify.seeds": ("verify", "seeds"),
    "verify.master_seed": ("verify", "master_seed"),
    "verify.tol_exact": ("verify", "tol_exact"),
    "verify.tol_cross": ("verify", "tol_cross"),
    "output.dir": ("output", "dir"),
}

_LINE = re.compile(r"^(?P<key>[a-z][a-z0-9_]*(?:\.[a-z][a-z0-9_]*)*)\s*=\s*(?P<value>.+?)\s*$")


def _positive(value: Optional[float], name: str) -> Optional[float]:
    if value is not None and not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


class KernelSection(BaseModel):
    dimension: int = Field(1, description="Space dimension N (1 or 2)")
    rho: float = Field(1.0, description="Singular range of the kernel")
    ell_variant: EllVariant = Field(EllVariant.CONSTANT, description="constant, logpow or invloglog")
    ell_beta: float = Field(1.0, description="LogPow exponent, at least -1")
    ell_c: float = Field(1.0, description="Constant profile value")
    tail_variant: TailVariant = Field(TailVariant.ZERO, description="zero, power_decay or piecewise_power")
    tail_alpha1: Optional[float] = Field(None, description="Fractional order of the piecewise power core")
    tail_alpha2: Optional[float] = Field(None, description="Decay order of the power tail")

    @field_validator("dimension")
    @classmethod
    def _dimension(cls, v: int) -> int:
        if v not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {v}")
        return v

    @field_validator("rho", "ell_c")
    @classmethod
    def _positive_fields(cls, v: float, info) -> float:
        return _positive(v, info.field_name)

    def spec(self) -> KernelSpec:
        ell = EllSpec(self.ell_variant, rho=self.rho, beta=self.ell_beta, c=self.ell_c)
        tail = TailSpec(self.tail_variant, alpha1=self.tail_alpha1, alpha2=self.tail_alpha2)
        return KernelSpec(dimension=self.dimension, ell=ell, tail=tail)


class DomainSection(BaseModel):
    shape: str = Field("interval", description="interval, box or ball")
    a: float = -1.0
    b: float = 1.0
    lower: List[float] = Field(default_factory=lambda: [-1.0, -1.0])
    upper: List[float] = Field(default_factory=lambda: [1.0, 1.0])
    radius: float = 1.0
    h: float = Field(0.0625, description="Cell size")
    r_ext: Optional[float] = Field(None, description="Shell width; defaults to rho")

    @field_validator("shape")
    @classmethod
    def _shape(cls, v: str) -> str:
        if v not in ("interval", "box", "ball"):
            raise ValueError(f"domain.shape must be interval, box or ball, got {v!r}")
        return v

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def _split(cls, v):
        if isinstance(v, str):
            return [part.strip() for part in v.split(",") if part.strip()]
        return v

    @field_validator("h", "radius", "r_ext")
    @classmethod
    def _positive_fields(cls, v: Optional[float], info) -> Optional[float]:
        return _positive(v, f"domain.{info.field_name}")


class SolverSection(BaseModel):
    tol: float = Field(1e-12, description="Relative residual of linear solves")
    max_iter: int = Field(2000, description="Iteration cap of the nonlinear solvers")
    sublinear_power: Optional[float] = Field(0.5, description="q in f(t) = c t^q; empty for a constant source")
    sublinear_scale: float = Field(1.0, description="c in f(t) = c t^q")

    @field_validator("tol", "sublinear_scale")
    @classmethod
    def _positive_fields(cls, v: float, info) -> float:
        return _positive(v, f"solver.{info.field_name}")

    @field_validator("max_iter")
    @classmethod
    def _iterations(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"solver.max_iter must be at least 1, got {v}")
        return v

    @field_validator("sublinear_power", mode="before")
    @classmethod
    def _constant_source(cls, v):
        if isinstance(v, str) and v.strip().lower() in ("", "none", "constant"):
            return None
        return v


class VerifySection(BaseModel):
    checks: List[str] = Field(default_factory=lambda: sorted(CHECKS))
    seeds: int = Field(200, description="Random functions per check")
    master_seed: int = Field(DEFAULT_MASTER_SEED, description="Seed of the counter-based streams")
    tol_exact: float = 1e-8
    tol_cross: float = 5e-2

    @field_validator("checks", mode="before")
    @classmethod
    def _split(cls, v):
        if isinstance(v, str):
            v = [part.strip() for part in v.split(",") if part.strip()]
        unknown = [name for name in v if name not in CHECKS]
        if unknown:
            raise ValueError(f"unknown check(s) {', '.join(unknown)}; valid checks: {', '.join(sorted(CHECKS))}")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"verify.seeds must be at least 1, got {v}")
        return v

    @field_validator("tol_exact", "tol_cross")
    @classmethod
    def _positive_fields(cls, v: float, info) -> float:
        return _positive(v, f"verify.{info.field_name}")


class OutputSection(BaseModel):
    dir: str = Field("out", description="Directory for artifacts")


class RunConfig(BaseModel):
    """Validated configuration of one run."""

    kernel: KernelSection = Field(default_factory=KernelSection)
    domain: DomainSection = Field(default_factory=DomainSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.domain.shape == "interval" and self.kernel.dimension != 1:
            raise ValueError("domain.shape = interval needs dimension = 1")
        if self.domain.shape == "box" and self.kernel.dimension != 2:
            raise ValueError("domain.shape = box needs dimension = 2")
        if self.domain.r_ext is not None and self.domain.r_ext < self.kernel.rho:
            raise ValueError(f"domain.r_ext={self.domain.r_ext:g} must be at least rho={self.kernel.rho:g}")
        try:
            self.kernel.spec()
        except DomainError as exc:
            raise ValueError(str(exc)) from exc
        return self

    def kernel_spec(self) -> KernelSpec:
        return self.kernel.spec()

    def shape(self) -> Shape:
        d = self.domain
        if d.shape == "interval":
            return Interval(d.a, d.b)
        if d.shape == "box":
            return Box(tuple(d.lower), tuple(d.upper))
        return Ball(d.radius, self.kernel.dimension)

    @property
    def r_ext(self) -> float:
        return self.domain.r_ext if self.domain.r_ext is not None else self.kernel.rho

    def build_domain(self, h: Optional[float] = None) -> Domain:
        return build_grid(self.shape(), h or self.domain.h, self.r_ext, rho=self.kernel.rho)

    def source(self) -> SourceSpec:
        return SourceSpec(power=self.solver.sublinear_power, scale=self.solver.sublinear_scale)

    @property
    def output_dir(self) -> Path:
        return Path(self.output.dir)


def parse_config_text(text: str) -> Dict[str, Tuple[str, int]]:
    """Parse the flat grammar into {key: (raw value, line number)}."""
    entries: Dict[str, Tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if match is None:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=number)
        key, value = match.group("key"), match.group("value")
        if key not in KEY_PATHS:
            raise ConfigError(f"unknown key {key!r}; valid keys: {', '.join(sorted(KEY_PATHS))}", line=number)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", line=number)
        entries[key] = (value, number)
    return entries


def config_from_text(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    entries = parse_config_text(text)
    nested: Dict[str, Dict[str, str]] = {}
    lines: Dict[Tuple[str, str], int] = {}
    for key, (value, number) in entries.items():
        section, name = KEY_PATHS[key]
        nested.setdefault(section, {})[name] = value
        lines[(section, name)] = number
    try:
        config = RunConfig.model_validate(nested)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = tuple(str(part) for part in error["loc"][:2])
        message = error["msg"].removeprefix("Value error, ")
        line = lines.get(loc) if len(loc) == 2 else None
        field = next((k for k, path in KEY_PATHS.items() if path == loc), ".".join(loc) or "config")
        raise ConfigError(f"{field}: {message}", line=line) from exc
    logger.debug("config parsed: %d keys", len(entries))
    return config


def load_config(path: Optional[Path]) -> RunConfig:
    """Load a config file; None gives the defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return config_from_text(path.read_text(encoding="utf-8"))
