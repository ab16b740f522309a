"""Experiment configuration.

Config files are flat ``key = value`` text: blank lines and ``#`` comments
ignored, keys must match ExperimentConfig fields, and every value goes
through the same typed coercion as a CLI override, so both paths fail with
the same messages.  Integer grids accept either a comma list (``2,4,6``) or
an inclusive range ``start:stop[:step]``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError
from .model import Normalization
from .scenarios import Placement

KNOWN_ESTIMATORS = ("monte-carlo", "det-equiv", "closed-form", "link-level")
NORMALIZATION_CHOICES = ("trace-m", "trace-d", "both")
PLACEMENT_CHOICES = tuple(p.value for p in Placement)


def _parse_int(text: str) -> int:
    return int(text.strip())


def _parse_float(text: str) -> float:
    return float(text.strip())


def _parse_str(text: str) -> str:
    return text.strip()


def _parse_grid(text: str):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"range must be start:stop[:step], got {text!r}")
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        if step < 1:
            raise ValueError("range step must be >= 1")
        return tuple(range(start, stop + 1, step))
    values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    if not values:
        raise ValueError("empty grid")
    return values


def _parse_namelist(text: str):
    values = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    if not values:
        raise ValueError("empty list")
    return values


@dataclass
class ExperimentConfig:
    """All knobs of the command-line experiments, with sweep defaults."""

    m: int = 60
    k: int = 30
    snr_db: float = 10.0
    total_power: float = 1.0
    trials: int = 2000
    seed: int = 12345
    normalization: str = "both"                  # trace-m | trace-d | both
    d_grid: tuple = tuple(range(2, 61, 2))
    estimators: tuple = ("monte-carlo", "det-equiv", "closed-form")
    out: str = "sweep.csv"
    corr_r: float = 0.0                          # exponential correlation coefficient
    n_symbols: int = 10000                       # link-level symbols per realization
    ll_trials: int = 20                          # realizations used by link-level rows
    placement: str = "worst"                     # used by the `single` command
    d: int = 30                                  # used by the `single` command
    eps_k: int = 8                               # epsilon-study users
    eps_m_grid: tuple = (64, 128, 256, 512, 1024)
    eps_trials: int = 200

    @property
    def rho(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    def normalizations(self):
        """The Normalization members this config asks for, in fixed order."""
        if self.normalization == "both":
            return [Normalization.TRACE_M, Normalization.TRACE_D]
        return [Normalization.parse(self.normalization)]

    def validate(self):
        if self.k < 1 or self.m < self.k:
            raise ConfigError(f"need m >= k >= 1, got m={self.m}, k={self.k}")
        if self.total_power <= 0:
            raise ConfigError("total_power must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.normalization not in NORMALIZATION_CHOICES:
            raise ConfigError(f"normalization must be one of {NORMALIZATION_CHOICES}, "
                              f"got {self.normalization!r}")
        if not self.d_grid:
            raise ConfigError("d_grid is empty")
        for d in self.d_grid:
            if not (1 <= d <= self.m):
                raise ConfigError(f"d_grid entry {d} outside 1..{self.m}")
        for est in self.estimators:
            if est not in KNOWN_ESTIMATORS:
                raise ConfigError(f"unknown estimator {est!r}; "
                                  f"known: {KNOWN_ESTIMATORS}")
        if not (0.0 <= self.corr_r < 1.0):
            raise ConfigError(f"corr_r must be in [0, 1), got {self.corr_r}")
        if self.n_symbols < 1000:
            raise ConfigError("n_symbols must be >= 1000")
        if self.ll_trials < 1:
            raise ConfigError("ll_trials must be >= 1")
        if self.placement not in PLACEMENT_CHOICES:
            raise ConfigError(f"placement must be one of {PLACEMENT_CHOICES}, "
                              f"got {self.placement!r}")
        if not (1 <= self.d <= self.m):
            raise ConfigError(f"d must be in 1..{self.m}, got {self.d}")
        if self.eps_k < 2:
            raise ConfigError("eps_k must be >= 2")
        if self.eps_trials < 1:
            raise ConfigError("eps_trials must be >= 1")
        if len(self.eps_m_grid) < 2:
            raise ConfigError("eps_m_grid needs at least two sizes")
        return self


_PARSERS = {
    "m": _parse_int,
    "k": _parse_int,
    "snr_db": _parse_float,
    "total_power": _parse_float,
    "trials": _parse_int,
    "seed": _parse_int,
    "normalization": _parse_str,
    "d_grid": _parse_grid,
    "estimators": _parse_namelist,
    "out": _parse_str,
    "corr_r": _parse_float,
    "n_symbols": _parse_int,
    "ll_trials": _parse_int,
    "placement": _parse_str,
    "d": _parse_int,
    "eps_k": _parse_int,
    "eps_m_grid": _parse_grid,
    "eps_trials": _parse_int,
}

_FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))
assert set(_PARSERS) == set(_FIELD_NAMES)


def coerce_value(key: str, text: str):
    """Parse one raw string value for a config key (shared by file and CLI)."""
    if key not in _PARSERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return _PARSERS[key](text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def parse_config_file(path: str) -> dict:
    """Read a flat key = value file into a parsed-values dict."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = coerce_value(key, text)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return values


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the config file, then explicit overrides; validated.

    Override values may be raw strings (coerced per key) or already-typed.
    """
    cfg = ExperimentConfig()
    if path is not None:
        cfg = replace(cfg, **parse_config_file(path))
    if overrides:
        parsed = {}
        for key, value in overrides.items():
            if key not in _PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
            parsed[key] = coerce_value(key, value) if isinstance(value, str) else value
        cfg = replace(cfg, **parsed)
    return cfg.validate()
