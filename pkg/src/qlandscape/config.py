"""Task configuration: INI-style sections with ``--set section.key=value`` overrides.

Example::

    [system]
    v_x = 1
    v_y = 0

    [task]
    rho0_bloch = 0, 1, 0
    a_bloch = sqrt(2)/2, sqrt(2)/2, 0
    tr_A = 1
    T = 0.6*pi

    [grid]
    n = 256

    [optimizer]
    restarts = 20
    seed = 0

    [tolerances]
    critical_tol = 1e-10

Numeric entries accept plain arithmetic with ``pi`` and ``sqrt``.
"""
from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import ControlTask
from .errors import ConfigError
from .optimizer import OptimizerConfig

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or simple arithmetic expression."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        value = float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError, OverflowError) as exc:
        raise ConfigError(f"cannot parse number {text!r}: {exc}") from None
    if not math.isfinite(value):
        raise ConfigError(f"non-finite value {text!r}")
    return value


def parse_int(text: str) -> int:
    value = parse_number(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def parse_vector(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 3:
        raise ConfigError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(parse_number(p) for p in parts)


OPT_INT = {"max_iters", "restarts", "seed"}


@dataclass
class TaskConfig:
    v_x: float = 1.0
    v_y: float = 0.0
    rho0_bloch: tuple = (0.0, 1.0, 0.0)
    a_bloch: tuple = (math.sqrt(0.5), math.sqrt(0.5), 0.0)
    tr_A: float = 1.0
    T: float = 0.6 * math.pi
    n: int = 256
    optimizer: dict = field(default_factory=dict)
    critical_tol: float = 1e-10
    scan: dict = field(default_factory=dict)

    def validate(self):
        if np.linalg.norm(self.rho0_bloch) > 1 + 1e-12:
            raise ConfigError("rho0_bloch must have norm <= 1")
        if self.n < 8:
            raise ConfigError("grid n must be >= 8")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if not self.critical_tol > 0:
            raise ConfigError("critical_tol must be positive")
        self.optimizer_config()
        return self

    def task(self, T: Optional[float] = None) -> ControlTask:
        try:
            return ControlTask.from_bloch(
                self.v_x, self.v_y, self.rho0_bloch, self.a_bloch, self.tr_A,
                self.T if T is None else T)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def optimizer_config(self) -> OptimizerConfig:
        try:
            return OptimizerConfig(**self.optimizer)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"optimizer block: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "v_x": self.v_x, "v_y": self.v_y,
            "rho0_bloch": list(self.rho0_bloch), "a_bloch": list(self.a_bloch),
            "tr_A": self.tr_A, "T": self.T, "n": self.n,
            "optimizer": dict(self.optimizer), "critical_tol": self.critical_tol,
        }


_OPT_FIELDS = {f.name for f in fields(OptimizerConfig)}


def _section_of(key: str) -> str:
    k = key.lower()
    for section, keys in (
        ("system", {"v_x", "v_y"}),
        ("task", {"rho0_bloch", "a_bloch", "tr_a", "t"}),
        ("grid", {"n"}),
        ("optimizer", _OPT_FIELDS),
        ("tolerances", {"critical_tol"}),
        ("scan", {"t_min", "t_max", "steps"}),
    ):
        if k in keys:
            return section
    raise ConfigError(f"unknown config key {key!r}")


def _apply(cfg: TaskConfig, section: str, key: str, value: str):
    section, key = section.strip().lower(), key.strip()
    k = key.lower()
    if section == "system" and k in ("v_x", "v_y"):
        setattr(cfg, k, parse_number(value))
    elif section == "task" and k in ("rho0_bloch", "a_bloch"):
        setattr(cfg, k, parse_vector(value))
    elif section == "task" and k == "tr_a":
        cfg.tr_A = parse_number(value)
    elif section == "task" and k == "t":
        cfg.T = parse_number(value)
    elif section == "grid" and k == "n":
        cfg.n = parse_int(value)
    elif section == "optimizer" and k in _OPT_FIELDS:
        cfg.optimizer[k] = parse_int(value) if k in OPT_INT else parse_number(value)
    elif section == "tolerances" and k == "critical_tol":
        cfg.critical_tol = parse_number(value)
    elif section == "scan" and k in ("t_min", "t_max", "steps"):
        cfg.scan[k] = parse_int(value) if k == "steps" else parse_number(value)
    else:
        raise ConfigError(f"unknown config key {section}.{key}")


def load_config(path=None, overrides=()) -> TaskConfig:
    cfg = TaskConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            text = Path(path).read_text()
            parser.read_string(text, source=str(path))
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for section in parser.sections():
            for key, value in parser.items(section):
                _apply(cfg, section, key, value)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects [section.]key=value, got {item!r}")
        lhs, value = item.split("=", 1)
        if "." in lhs:
            section, key = lhs.split(".", 1)
        else:
            key = lhs.strip()
            section = _section_of(key)
        _apply(cfg, section, key, value)
    return cfg.validate()
