"""Declarative sweep configuration stored as INI sections.

One section per experiment; keys missing from a section fall back to
``[DEFAULT]`` and then to the experiment's built-in defaults.  Numeric
values accept arithmetic with ``pi``, e.g. ``tau1_grid = 0, 3*pi/2, pi/200``.
"""

from __future__ import annotations

import ast
import configparser
import io
import math
import operator
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Union

import numpy as np

from ..errors import ConfigError

EXPERIMENTS = ("prepare", "fig2", "fig3", "fig4", "fig5", "sweep", "boundary", "convergence")

DEFAULT_TOLERANCES = {"truncation": 1e-6, "convergence": 1e-6}

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_number(text: str, key: str = None) -> float:
    """Evaluate a numeric literal or arithmetic expression in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError):
        raise ConfigError(f"cannot read {text!r} as a number", key) from None


def _parse_list(text, key):
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty list", key)
    return tuple(parse_number(p, key) for p in parts)


def _parse_grid(text, key):
    vals = _parse_list(text, key)
    if len(vals) != 3:
        raise ConfigError("a grid is 'start, stop, step'", key)
    return vals


def _parse_optional(text, key, parser):
    if text.strip().lower() in ("", "none", "null"):
        return None
    return parser(text, key)


def _parse_tolerances(text, key):
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"tolerance entry {item!r} is not name=value", key)
        name, value = item.split("=", 1)
        out[name.strip()] = parse_number(value, f"{key}.{name.strip()}")
    return out


def grid_values(grid) -> np.ndarray:
    """Points ``start, start + step, ...`` up to ``stop`` (inclusive within 1e-9 steps)."""
    start, stop, step = grid
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


@dataclass(frozen=True)
class SweepConfig:
    """Parameter set for one experiment run."""

    experiment: str = "sweep"
    r_values: tuple = (0.26, 0.86, 1.2)
    sin2_theta: float = 0.1
    tau1_grid: tuple = (0.0, 1.5 * math.pi, math.pi / 200)
    tau2_grid: Optional[tuple] = None
    kappa_tbar: Optional[float] = None
    delta_tau: Optional[float] = None
    n_max: Union[str, int] = "auto"
    n_max_cap: int = 60
    p_grid: tuple = (0.0, 1.0, 1e-3)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: str = "-"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}", "experiment")
        if not self.r_values:
            raise ConfigError("at least one squeezing value is needed", "r_values")
        for r in self.r_values:
            if not (math.isfinite(r) and r >= 0):
                raise ConfigError(f"squeezing must be finite and >= 0, got {r}", "r_values")
        if not 0.0 <= self.sin2_theta <= 1.0:
            raise ConfigError(f"must lie in [0, 1], got {self.sin2_theta}", "sin2_theta")
        for name in ("tau1_grid", "tau2_grid", "p_grid"):
            g = getattr(self, name)
            if g is None:
                continue
            if len(g) != 3 or not all(math.isfinite(v) for v in g):
                raise ConfigError("a grid is three finite numbers", name)
            start, stop, step = g
            if step <= 0 or stop < start:
                raise ConfigError("grid must be monotone: start <= stop and step > 0", name)
            if start < 0:
                raise ConfigError("grid values must be non-negative", name)
        if self.p_grid[1] > 1.0:
            raise ConfigError("family parameter cannot exceed 1", "p_grid")
        for name in ("kappa_tbar", "delta_tau"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"must be finite and >= 0, got {v}", name)
        # rows with tau1 < delta_tau are reported as null, so at least one must remain
        if self.delta_tau is not None and grid_values(self.tau1_grid)[-1] < self.delta_tau:
            raise ConfigError("delta_tau exceeds every tau1 on the grid", "delta_tau")
        if self.n_max != "auto" and (isinstance(self.n_max, bool) or not isinstance(self.n_max, int) or self.n_max < 1):
            raise ConfigError(f"must be 'auto' or an integer >= 1, got {self.n_max!r}", "n_max")
        if not isinstance(self.n_max_cap, int) or self.n_max_cap < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.n_max_cap!r}", "n_max_cap")
        for k, v in self.tolerances.items():
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"tolerance must be > 0, got {v}", f"tolerances.{k}")

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES.get(name))

    def with_overrides(self, **kwargs) -> "SweepConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        if "tolerances" in kwargs:
            kwargs["tolerances"] = {**self.tolerances, **kwargs["tolerances"]}
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else (dict(v) if isinstance(v, dict) else v)
        return out


# per-experiment defaults applied before the config file
EXPERIMENT_DEFAULTS = {
    "prepare": dict(r_values=(0.26, 0.46, 0.86, 1.2)),
    "fig2": dict(r_values=(0.26, 0.86, 1.2)),
    "fig3": dict(r_values=(0.46, 0.86, 2.0)),
    "fig4": dict(r_values=(0.46, 0.86), n_max=20),
    "fig5": dict(
        r_values=(0.86,),
        tau1_grid=(0.0, 2 * math.pi, math.pi / 4),
        tau2_grid=(0.0, 1.5 * math.pi, math.pi / 100),
        n_max=20,
    ),
    "sweep": dict(),
    "boundary": dict(),
    "convergence": dict(r_values=(0.0, 0.46, 0.86), tau1_grid=(0.0, 1.5 * math.pi, math.pi / 50)),
}


def default_config(experiment: str) -> SweepConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}", "experiment")
    return SweepConfig(experiment=experiment, **EXPERIMENT_DEFAULTS[experiment])


_PARSERS = {
    "r_values": _parse_list,
    "sin2_theta": parse_number,
    "tau1_grid": _parse_grid,
    "tau2_grid": lambda t, k: _parse_optional(t, k, _parse_grid),
    "kappa_tbar": lambda t, k: _parse_optional(t, k, parse_number),
    "delta_tau": lambda t, k: _parse_optional(t, k, parse_number),
    "p_grid": _parse_grid,
    "tolerances": _parse_tolerances,
    "output_path": lambda t, k: t.strip(),
}


def parse_n_max(text, key="n_max"):
    text = str(text).strip()
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"must be 'auto' or an integer, got {text!r}", key) from None


def parse_config(text: str, experiment: str) -> SweepConfig:
    """Read the section for ``experiment`` from INI text."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    base = default_config(experiment)
    section = cp[experiment] if cp.has_section(experiment) else cp.defaults()
    values = {}
    known = {f.name for f in fields(SweepConfig)} - {"experiment"}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError("unknown key", key)
        if key == "n_max":
            values[key] = parse_n_max(raw, key)
        elif key == "n_max_cap":
            try:
                values[key] = int(raw.strip())
            except ValueError:
                raise ConfigError(f"must be an integer, got {raw!r}", key) from None
        else:
            values[key] = _PARSERS[key](raw, key)
    if "tolerances" in values:
        values["tolerances"] = {**DEFAULT_TOLERANCES, **values["tolerances"]}
    return replace(base, **values)


def load_config(path: str, experiment: str) -> SweepConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    return parse_config(text, experiment)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: SweepConfig) -> str:
    """INI text that :func:`parse_config` reads back to an equal config."""
    cp = configparser.ConfigParser(interpolation=None)
    sec = {}
    sec["r_values"] = ", ".join(_fmt(float(r)) for r in cfg.r_values)
    sec["sin2_theta"] = _fmt(float(cfg.sin2_theta))
    sec["tau1_grid"] = ", ".join(_fmt(float(v)) for v in cfg.tau1_grid)
    sec["tau2_grid"] = "none" if cfg.tau2_grid is None else ", ".join(_fmt(float(v)) for v in cfg.tau2_grid)
    sec["kappa_tbar"] = "none" if cfg.kappa_tbar is None else _fmt(float(cfg.kappa_tbar))
    sec["delta_tau"] = "none" if cfg.delta_tau is None else _fmt(float(cfg.delta_tau))
    sec["n_max"] = str(cfg.n_max)
    sec["n_max_cap"] = str(cfg.n_max_cap)
    sec["p_grid"] = ", ".join(_fmt(float(v)) for v in cfg.p_grid)
    sec["tolerances"] = ", ".join(f"{k}={_fmt(float(v))}" for k, v in sorted(cfg.tolerances.items()))
    sec["output_path"] = cfg.output_path
    cp[cfg.experiment] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
