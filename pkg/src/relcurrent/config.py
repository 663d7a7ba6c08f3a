"""Run configuration: flat ``key = value`` files with command-line overrides."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from .spin import as_spin, spin_dim


class ConfigError(ValueError):
    pass


def _floats(text, n=None):
    vals = [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _complexes(text):
    return [complex(v.replace("i", "j")) for v in str(text).replace(" ", "").split(",") if v != ""]


def _spins(text):
    return [as_spin(v) for v in str(text).replace(" ", "").split(",") if v != ""]


@dataclass
class RunConfig:
    command: str = "check"
    spin: Fraction = Fraction(1, 2)
    sweep: list | None = None
    sigma: list = field(default_factory=lambda: [0.5])
    sigma_axes: list | None = None
    p0: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    x0: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    weights: list | None = None
    nodes: int = 24
    levels: int = 2
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    out: str = "relcurrent-out"
    compare_analytic: bool = False
    boost: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    rotation: list = field(default_factory=lambda: [0.0, 0.0, 1.0, 0.0])
    gate_tol: float = 1e-8
    agreement_tol: float = 1e-6
    dirac_tol: float = 1e-5
    linalg_tol: float = 1e-12
    group_tol: float = 1e-10
    unitarity_tol: float = 1e-6
    grid: str = "line"
    extent: float = 8.0
    points: int = 81
    time: float = 0.0
    samples: int = 200
    plots: bool = True

    def validate(self):
        if self.nodes < 8:
            raise ConfigError("nodes per axis must be at least 8")
        if self.levels < 1:
            raise ConfigError("levels must be at least 1")
        for name in ("gate_tol", "agreement_tol", "dirac_tol", "linalg_tol", "group_tol", "unitarity_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if any(s <= 0 for s in self.sigma) or (self.sigma_axes and any(s <= 0 for s in self.sigma_axes)):
            raise ConfigError("widths must be positive")
        if np.linalg.norm(self.boost) >= 1:
            raise ConfigError("boost velocity must be subluminal")
        if self.grid not in ("line", "plane", "volume"):
            raise ConfigError(f"grid must be line, plane or volume, got {self.grid!r}")
        if self.points < 2:
            raise ConfigError("need at least two grid points")
        if self.weights is not None:
            if len(self.weights) != spin_dim(self.spin):
                raise ConfigError(f"spin {self.spin} needs {spin_dim(self.spin)} weights")
            n = np.linalg.norm(self.weights)
            if n == 0:
                raise ConfigError("spin weights must not all vanish")
            self.weights = [w / n for w in self.weights]
        self.threads = max(1, int(self.threads))
        return self

    def items(self):
        """Config echo for manifests, in declaration order."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(_fmt(x) for x in v)
            out[f.name] = _fmt(v) if not isinstance(v, str) else v
        return out


def _fmt(v):
    if isinstance(v, complex):
        return f"{v.real:g}{v.imag:+g}j"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


_PARSERS = {
    "spin": as_spin,
    "sweep": _spins,
    "sigma": _floats,
    "sigma_axes": lambda t: _floats(t, 3),
    "p0": lambda t: _floats(t, 3),
    "x0": lambda t: _floats(t, 3),
    "weights": _complexes,
    "nodes": int,
    "levels": int,
    "threads": int,
    "seed": int,
    "points": int,
    "samples": int,
    "boost": lambda t: _floats(t, 3),
    "rotation": lambda t: _floats(t, 4),
    "compare_analytic": lambda t: str(t).strip().lower() in ("1", "true", "yes", "on"),
    "plots": lambda t: str(t).strip().lower() in ("1", "true", "yes", "on"),
}
_FLOATS = {"gate_tol", "agreement_tol", "dirac_tol", "linalg_tol", "group_tol", "unitarity_tol", "extent", "time"}


def parse_value(key, text):
    key = key.replace("-", "_")
    names = {f.name for f in fields(RunConfig)}
    if key not in names:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        if key in _PARSERS:
            return key, _PARSERS[key](text)
        if key in _FLOATS:
            return key, float(text)
        return key, str(text).strip()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from exc


def read_config_file(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            k, v = parse_value(key, val)
            values[k] = v
    return values


def build_config(file_values=None, overrides=None):
    cfg = RunConfig()
    for src in (file_values or {}, overrides or {}):
        for k, v in src.items():
            setattr(cfg, k, v)
    return cfg.validate()
