import json
import math
import numbers
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import numpy as np

from src.core.errors import ConfigError
from src.core.scatterer import KINDS, TWO_LEVEL_ATOM

MODES = (
    "single-bs",
    "composite-scan",
    "max-friction-vs-zeta",
    "temperature-vs-zeta",
    "limits-check",
    "figure",
)
FIGURES = ("3", "4a", "4b", "5")
SPACINGS = ("linear", "log")
OUTPUT_FORMATS = ("csv", "json", "xlsx")
ZETA_MODES = ("max-friction-vs-zeta", "temperature-vs-zeta")

# scalar fields a command-line flag of the same name may override
SCALAR_FIELDS = (
    "mode", "figure", "zeta", "zeta_imag", "r_fixed", "r_fixed_imag", "k0", "k0L", "x",
    "eps", "flux", "kind", "gamma", "detuning", "cross_section_ratio", "b0", "c0", "seed",
)
NUMERIC_FIELDS = (
    "zeta", "zeta_imag", "r_fixed", "r_fixed_imag", "k0", "k0L", "x", "eps", "flux",
    "gamma", "detuning", "cross_section_ratio", "b0", "c0",
)


@dataclass
class GridSpec:
    start: float = 0.0
    stop: float = math.pi
    count: int = 2049
    spacing: str = "linear"

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass
class RunConfig:
    mode: str = "composite-scan"
    figure: Optional[str] = None
    zeta: float = 0.01
    zeta_imag: float = 0.0
    r_fixed: float = -1.0
    r_fixed_imag: float = 0.0
    k0: float = 1.0
    k0L: float = 100.0
    x: float = 7 * math.pi / 8
    eps: float = 0.0
    flux: float = 1.0
    kind: str = "constant"
    gamma: float = 0.0
    detuning: float = 0.0
    cross_section_ratio: float = 1.0
    b0: float = 1.0
    c0: float = 1.0
    zetas: Optional[List[float]] = None
    seed: int = 0
    grid: GridSpec = field(default_factory=GridSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def zeta_complex(self) -> complex:
        return complex(self.zeta, self.zeta_imag)

    @property
    def r_complex(self) -> complex:
        return complex(self.r_fixed, self.r_fixed_imag)

    def zeta_points(self) -> np.ndarray:
        if self.zetas:
            return np.asarray(self.zetas, dtype=float)
        return self.grid.points()

    @staticmethod
    def load(path: str) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError("<file>", f"not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError("<file>", "the configuration must be a JSON object")
        # validated by the caller once command-line overrides are applied
        return RunConfig.from_dict(data)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        kwargs = dict(data)
        kwargs["grid"] = _nested(GridSpec, kwargs.get("grid"), "grid")
        kwargs["output"] = _nested(OutputSpec, kwargs.get("output"), "output")
        if kwargs.get("figure") is not None:
            kwargs["figure"] = str(kwargs["figure"])
        return RunConfig(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        # asdict keeps declaration order, which is the canonical field order
        return asdict(self)

    def override(self, values: Dict[str, Any]) -> "RunConfig":
        for name, value in values.items():
            if value is None:
                continue
            if name not in SCALAR_FIELDS:
                raise ConfigError(name, "cannot be overridden from the command line")
            setattr(self, name, str(value) if name == "figure" else value)
        return self

    def validate(self) -> "RunConfig":
        for name in NUMERIC_FIELDS:
            _require_number(name, getattr(self, name))
        for name in ("start", "stop"):
            _require_number(f"grid.{name}", getattr(self.grid, name))
        if self.zetas is not None:
            if not isinstance(self.zetas, list):
                raise ConfigError("zetas", "must be a list of numbers")
            for z in self.zetas:
                _require_number("zetas", z)
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        if self.mode == "figure" and self.figure not in FIGURES:
            raise ConfigError("figure", f"must be one of {', '.join(FIGURES)} in figure mode")
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
        if self.kind == TWO_LEVEL_ATOM and self.gamma <= 0:
            raise ConfigError("gamma", "two-level atom needs gamma > 0")
        if abs(self.r_complex) > 1:
            raise ConfigError("r_fixed", "|r_fixed| must not exceed 1")
        if self.k0 <= 0:
            raise ConfigError("k0", "must be positive")
        if self.flux < 0:
            raise ConfigError("flux", "must be non-negative")
        if self.k0L - self.x <= 0:
            raise ConfigError("x", "k0L - x must be positive")
        if not isinstance(self.seed, int):
            raise ConfigError("seed", "must be an integer")

        g = self.grid
        if not isinstance(g.count, int) or g.count < 2:
            raise ConfigError("grid.count", "scans need at least 2 points")
        if g.spacing not in SPACINGS:
            raise ConfigError("grid.spacing", f"must be one of {', '.join(SPACINGS)}")
        if g.spacing == "log" and (g.start <= 0 or g.stop <= 0):
            raise ConfigError("grid.start", "log spacing needs start > 0 and stop > 0")
        if self.mode == "composite-scan" and self.k0L - max(g.start, g.stop) <= 0:
            raise ConfigError("grid.stop", "every scanned position must satisfy k0L - x > 0")
        if self.mode in ZETA_MODES and np.any(self.zeta_points() <= 0):
            raise ConfigError("zetas" if self.zetas else "grid.start", "polarizability scans need zeta > 0")

        if self.output.format not in OUTPUT_FORMATS:
            raise ConfigError("output.format", f"must be one of {', '.join(OUTPUT_FORMATS)}")
        return self


def _require_number(name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(name, f"must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")


def _nested(cls, value: Any, prefix: str):
    if value is None:
        return cls()
    if isinstance(value, cls):
        return value
    if not isinstance(value, dict):
        raise ConfigError(prefix, "must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(value) - known)
    if unknown:
        raise ConfigError(f"{prefix}.{unknown[0]}", "unknown field")
    return cls(**value)
