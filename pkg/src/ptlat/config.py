"""
Run configuration: a flat, commented TOML document.

Example::

    # Hermitian SSH regime, odd chain
    variant = "offdiagonal"
    N = 49
    lambda = 0.4
    beta = "1/2"
    gamma = 0.0

Every key is optional; unknown keys are rejected. ``beta`` is either a
fraction string (``"1/2"``, rational) or a real given as a number or an
arithmetic expression string (``"sqrt(13)-3"``, irrational).
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .model import IrrationalBeta, ModelSpec, ModelValidationError, RationalBeta, Variant

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "parse_beta", "parse_config", "load_config"]


class ConfigError(ValueError):
    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"config.{key}: {reason}")


# key -> (type, default); None default means derived (gamma_max falls back to 2t)
MODEL_KEYS: dict[str, tuple[type, Any]] = {
    "variant": (str, "offdiagonal"),
    "N": (int, 50),
    "t": (float, 1.0),
    "lambda": (float, 0.0),
    "V": (float, 0.0),
    "beta": (str, "1/2"),
    "phi": (float, 0.0),
    "gamma": (float, 0.0),
    "j": (int, 1),
    "t_prime": (float, 0.0),
}

OPTION_KEYS: dict[str, tuple[type, Any]] = {
    "eps_real": (float, 1e-8),
    "eps_zero": (float, 1e-3),
    "w_min": (float, 0.5),
    "fraction": (float, 0.1),
    "tol_bisect": (float, 1e-4),
    "phi_points": (int, 64),
    "sweep_points": (int, 201),
    "phi_min": (float, 0.0),
    "phi_max": (float, 2.0 * math.pi),
    "policy": (str, "all_phi"),
    "gamma_min": (float, 0.0),
    "gamma_max": (float, None),
    "gamma_points": (int, 41),
    "n_values": (list, []),
    "gamma_probe": (float, 0.1),
    "v_min": (float, 0.0),
    "v_max": (float, 4.0),
    "v_points": (int, 41),
    "input": (str, ""),
    "title": (str, ""),
}

DEFAULTS = {k: d for k, (_, d) in {**MODEL_KEYS, **OPTION_KEYS}.items()}

_VARIANTS = {v.value: v for v in Variant}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "exp": math.exp, "log": math.log}
_CONSTS = {"pi": math.pi, "e": math.e}


def _eval_expr(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_expr(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_expr(node.left), _eval_expr(node.right))
    if isinstance(node, ast.Name) and node.id in _CONSTS:
        return _CONSTS[node.id]
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval_expr(node.args[0]))
    raise ValueError(f"unsupported expression element {ast.dump(node)}")


def parse_beta(value) -> RationalBeta | IrrationalBeta:
    """``"a/b"`` -> RationalBeta (reduced); numbers or expressions -> IrrationalBeta."""
    if isinstance(value, bool):
        raise ConfigError("beta", "expected a fraction string, number or expression")
    if isinstance(value, (int, float)):
        try:
            return IrrationalBeta(float(value))
        except ModelValidationError as exc:
            raise ConfigError("beta", exc.reason) from None
    if not isinstance(value, str):
        raise ConfigError("beta", f"expected a string or number, got {type(value).__name__}")
    text = value.strip()
    parts = text.split("/")
    if len(parts) == 2 and all(p.strip().isdigit() for p in parts):
        a, b = (int(p) for p in parts)
        if b == 0:
            raise ConfigError("beta", "zero denominator")
        f = Fraction(a, b)
        try:
            return RationalBeta(f.numerator, f.denominator)
        except ModelValidationError as exc:
            raise ConfigError("beta", exc.reason) from None
    try:
        number = _eval_expr(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError("beta", f"cannot evaluate {text!r}: {exc}") from None
    try:
        return IrrationalBeta(number)
    except ModelValidationError as exc:
        raise ConfigError("beta", exc.reason) from None


def _check_type(key: str, value, kind: type):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(key, "must be finite")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
            raise ConfigError(key, f"expected a list of integers, got {value!r}")
        return list(value)
    if kind is str:
        if key == "beta":
            return value
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    raise AssertionError(kind)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration: the model plus every command option, defaults applied."""

    spec: ModelSpec
    options: dict

    def __getitem__(self, key: str):
        return self.options[key]

    def echo(self) -> dict:
        """Fully resolved flat key-value form; re-parsing it reproduces this config."""
        s = self.spec
        out = {
            "variant": s.variant.value,
            "N": s.N,
            "t": s.t,
            "lambda": s.lam,
            "V": s.V,
            "beta": str(s.beta) if isinstance(s.beta, RationalBeta) else s.beta.value,
            "phi": s.phi,
            "gamma": s.gamma,
            "j": s.j,
            "t_prime": s.t_prime,
        }
        out.update(self.options)
        return out


def _from_mapping(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a key-value document")
    known = {**MODEL_KEYS, **OPTION_KEYS}
    for key in doc:
        if key not in known:
            raise ConfigError(key, "unknown key")
    values = {}
    for key, (kind, default) in known.items():
        values[key] = _check_type(key, doc[key], kind) if key in doc else default

    if values["variant"] not in _VARIANTS:
        raise ConfigError("variant", f"expected one of {sorted(_VARIANTS)}, got {values['variant']!r}")
    beta = parse_beta(values["beta"])
    try:
        spec = ModelSpec(
            variant=_VARIANTS[values["variant"]],
            N=values["N"],
            beta=beta,
            t=values["t"],
            lam=values["lambda"],
            V=values["V"],
            phi=values["phi"],
            gamma=values["gamma"],
            j=values["j"],
            t_prime=values["t_prime"],
        )
    except ModelValidationError as exc:
        key = "lambda" if exc.field == "lam" else exc.field
        raise ConfigError(key, exc.reason) from None

    opts = {k: values[k] for k in OPTION_KEYS}
    if opts["gamma_max"] is None:
        opts["gamma_max"] = 2.0 * spec.t
    for key in ("eps_real", "eps_zero", "w_min", "tol_bisect", "gamma_max"):
        if opts[key] <= 0:
            raise ConfigError(key, "must be positive")
    if not 0.0 < opts["fraction"] <= 0.5:
        raise ConfigError("fraction", "must be in (0, 0.5]")
    for key in ("phi_points", "sweep_points", "gamma_points", "v_points"):
        if opts[key] < 1:
            raise ConfigError(key, "must be >= 1")
    if not 0.0 <= opts["phi_min"] < opts["phi_max"] <= 2.0 * math.pi:
        raise ConfigError("phi_max", "need 0 <= phi_min < phi_max <= 2 pi")
    if not 0.0 <= opts["gamma_min"] < opts["gamma_max"]:
        raise ConfigError("gamma_min", "need 0 <= gamma_min < gamma_max")
    if not 0.0 <= opts["v_min"] < opts["v_max"]:
        raise ConfigError("v_min", "need 0 <= v_min < v_max")
    if opts["policy"] not in ("all_phi", "fixed_phi"):
        raise ConfigError("policy", "expected 'all_phi' or 'fixed_phi'")
    if opts["gamma_probe"] < 0:
        raise ConfigError("gamma_probe", "must be >= 0")
    for n in opts["n_values"]:
        if n < 2 or not 1 <= spec.j <= n:
            raise ConfigError("n_values", f"N={n} is not a valid size for impurity site j={spec.j}")
    return RunConfig(spec, opts)


def parse_config(text: str, fmt: str = "toml") -> RunConfig:
    """
    Parse and validate a configuration document.

    ``fmt="json"`` accepts either a flat object or a summary file written by
    the CLI, whose ``"config"`` block is the resolved echo.
    """
    try:
        if fmt == "toml":
            doc = tomllib.loads(text)
        elif fmt == "json":
            doc = json.loads(text)
            if isinstance(doc, dict) and isinstance(doc.get("config"), dict):
                doc = doc["config"]
        else:
            raise ValueError(f"unknown config format {fmt!r}")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError("<document>", f"malformed: {exc}") from None
    return _from_mapping(doc)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "toml"
    return parse_config(path.read_text(encoding="utf-8"), fmt)
