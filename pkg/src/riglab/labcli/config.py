"""Plain-text ``key = value`` configuration with typed values.

Every key has one parser and one formatter, and ``parse(format(v)) == v``
for every value the parser can produce.  The same parsers are applied to
command-line flag strings, so a flag and a config line mean the same thing.
"""

from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from ..diophantine import DecimalAlpha, QuadraticSurd, parse_alpha
from ..dynamics.cocycles import FourierCocycle, parse_modes
from ..errors import ConfigError, UnknownKey


@dataclass(frozen=True)
class KeyType:
    name: str
    parse: Callable[[str], Any]
    format: Callable[[Any], str]


def _int(s: str) -> int:
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"expected an integer, got {s!r}") from None


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"expected a rational u/v, got {s!r}") from None


def _fmt_rational(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _float(s: str) -> float:
    try:
        return float(s.strip())
    except ValueError:
        raise ValueError(f"expected a number, got {s!r}") from None


def _split(s: str) -> list[str]:
    parts = [p.strip() for p in s.split(";")]
    if not s.strip() or any(not p for p in parts):
        raise ValueError(f"expected a ';'-separated list, got {s!r}")
    return parts


def _length(s: str):
    if "sqrt" in s or s.startswith("dec:"):
        return parse_alpha(s)
    return _rational(s)


def _fmt_length(v) -> str:
    return _fmt_rational(v) if isinstance(v, (Fraction, int)) else str(v)


def _fmt_alpha(v) -> str:
    if isinstance(v, (QuadraticSurd, DecimalAlpha)):
        return str(v)
    raise TypeError(f"not an alpha value: {v!r}")


def _enum(*choices: str) -> KeyType:
    def parse(s: str) -> str:
        s = s.strip()
        if s not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {s!r}")
        return s

    return KeyType("enum", parse, str)


def _bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ValueError(f"expected true or false, got {s!r}")


INT = KeyType("int", _int, str)
RATIONAL = KeyType("rational", _rational, _fmt_rational)
FLOAT = KeyType("float", _float, repr)
STR = KeyType("str", str.strip, str)
BOOL = KeyType("bool", _bool, lambda v: "true" if v else "false")
ALPHA = KeyType("alpha", parse_alpha, _fmt_alpha)
MODES = KeyType("modes", parse_modes, lambda v: str(v) or "0")
INTS = KeyType("ints", lambda s: [_int(p) for p in _split(s)], lambda v: ";".join(str(i) for i in v))
FLOATS = KeyType("floats", lambda s: [_float(p) for p in _split(s)], lambda v: ";".join(repr(float(x)) for x in v))
LENGTHS = KeyType("lengths", lambda s: [_length(p) for p in _split(s)], lambda v: ";".join(_fmt_length(x) for x in v))
STRS = KeyType("strs", _split, lambda v: ";".join(v))

KINDS = _enum("mobius", "liouville")
SYSTEMS = _enum("rotation", "anzai", "iet", "special_flow", "rokhlin")
FUNCTIONALS = _enum("L2_function_norm", "topological_distance")
FORMATS = _enum("csv", "json")
TARGETS = _enum("autocorrelation", "orbit")

SCHEMA: dict[str, KeyType] = {
    # ranges and sizes
    "lo": INT,
    "hi": INT,
    "X": INT,
    "H": INT,
    "q": INT,
    "j": INT,
    "N": INT,
    "h": INT,
    "h_max": INT,
    "M": INT,
    "L": INT,
    "z": INT,
    "K": INT,
    "bK": INT,
    "q_max": INT,
    "terms": INT,
    "grid": INT,
    "sup_grid": INT,
    "segment": INT,
    "count": INT,
    # values
    "kind": KINDS,
    "alpha": ALPHA,
    "epsilon": RATIONAL,
    "delta": RATIONAL,
    "tol": FLOAT,
    "functional": FUNCTIONALS,
    "format": FORMATS,
    "target": TARGETS,
    # systems
    "system": SYSTEMS,
    "modes": MODES,
    "velocity": FLOATS,
    "lengths": LENGTHS,
    "permutation": INTS,
    "observable": STR,
    "x": FLOATS,
    "block_ends": INTS,
    "allowed_j": INT,
    "inputs": STRS,
    "out": STR,
}


def parse_value(key: str, text: str, line: int | None = None):
    kt = SCHEMA.get(key)
    if kt is None:
        raise UnknownKey(f"unknown key {key!r}", line)
    try:
        return kt.parse(text)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"{key}: {exc}", line) from None


def format_value(key: str, value) -> str:
    kt = SCHEMA.get(key)
    if kt is None:
        raise UnknownKey(f"unknown key {key!r}")
    return kt.format(value)


def parse_config_text(text: str) -> "OrderedDict[str, Any]":
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: OrderedDict[str, Any] = OrderedDict()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        out[key] = parse_value(key, value, lineno)
    return out


def parse_config(path) -> "OrderedDict[str, Any]":
    """Typed parameters from a config file, or from the ``parameters`` of a run manifest (.json)."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".json":
        try:
            data = json.loads(text)
            pairs = data["parameters"]
        except (ValueError, KeyError, TypeError):
            raise ConfigError(f"{p} is not a run manifest") from None
        return parse_config_text("\n".join(f"{k} = {v}" for k, v in pairs))
    return parse_config_text(text)


def format_config(params) -> str:
    return "".join(f"{k} = {format_value(k, v)}\n" for k, v in params.items())
