"""Run configuration: a strict ``key = value`` format with three sections.

    [convolver]
    kind = gegenbauer        # gegenbauer | weighted | tent
    alpha = 0.5
    r = 1
    h_coeffs = 1, 1          # weighted only: h(t) = 1 + t^2

    [function]
    variant = exponential    # exponential | sampled
    terms = pi, 0, -0.5j; -pi, 0, 0.5j
    half_width = 2
    smoothness_k = 5

    [run]
    command = extend
    R = 5

Numbers may be written as arithmetic in ``pi`` and the imaginary unit ``j``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import InvalidArgument, ParseError

COMMANDS = ("spectrum", "coeffs", "extend", "verify", "bounds")
SUITES = ("bessel", "tent", "weighted")
VARIANTS = ("exponential", "sampled")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_number(text: str) -> complex:
    """Evaluate a numeric expression over literals, ``pi`` and ``j``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name) and node.id in ("pi", "j"):
            return math.pi if node.id == "pi" else 1j
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression element {ast.dump(node)}")

    try:
        return complex(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def _real(text: str) -> float:
    z = parse_number(text)
    if z.imag != 0:
        raise ValueError(f"expected a real number, got {text!r}")
    return z.real


def _int(text: str) -> int:
    x = _real(text)
    if x != int(x):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(x)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(options):
    def conv(text: str) -> str:
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return t

    return conv


def _real_list(text: str) -> tuple:
    return tuple(_real(x) for x in text.split(",") if x.strip())


def _terms(text: str) -> tuple:
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        if len(parts) != 3:
            raise ValueError(f"term {chunk.strip()!r} must be 'lambda, m, c'")
        out.append((parse_number(parts[0]), _int(parts[1]), parse_number(parts[2])))
    return tuple(out)


def _text(text: str) -> str:
    return text.strip()


@dataclass(frozen=True)
class ConvolverBlock:
    kind: str = "gegenbauer"
    alpha: float | None = None
    r: float = 1.0
    h_coeffs: tuple = ()


@dataclass(frozen=True)
class FunctionBlock:
    variant: str = "exponential"
    terms: tuple = ()
    sample_file: str | None = None
    half_width: float | None = None
    smoothness_k: int | None = None


@dataclass(frozen=True)
class RunBlock:
    command: str = "extend"
    R: float | None = None
    q: int = 0
    k: int | None = None
    gamma: float | None = None
    cutoff: int = 64
    grid_size: int = 801
    quad_order: int = 256
    out_dir: str = "out"
    deterministic: bool = True
    suite: str = "bessel"
    threads: int = 1
    probes: tuple | None = None


@dataclass(frozen=True)
class RunConfig:
    convolver: ConvolverBlock = field(default_factory=ConvolverBlock)
    function: FunctionBlock = field(default_factory=FunctionBlock)
    run: RunBlock = field(default_factory=RunBlock)
    base_dir: Path = field(default_factory=Path.cwd)


SCHEMA = {
    "convolver": {
        "kind": _choice(("gegenbauer", "weighted", "tent")),
        "alpha": _real,
        "r": _real,
        "h_coeffs": _real_list,
    },
    "function": {
        "variant": _choice(VARIANTS),
        "terms": _terms,
        "sample_file": _text,
        "half_width": _real,
        "smoothness_k": _int,
    },
    "run": {
        "command": _choice(COMMANDS),
        "R": _real,
        "q": _int,
        "k": _int,
        "gamma": _real,
        "cutoff": _int,
        "grid_size": _int,
        "quad_order": _int,
        "out_dir": _text,
        "deterministic": _bool,
        "suite": _choice(SUITES),
        "threads": _int,
        "probes": _real_list,
    },
}

_BLOCKS = {"convolver": ConvolverBlock, "function": FunctionBlock, "run": RunBlock}


def _validate(values: dict, lines: dict) -> None:
    """Re-check the numeric constraints of the referenced types."""

    def fail(section, key, msg):
        raise ParseError(msg, line=lines.get((section, key)), key=key)

    conv = values["convolver"]
    kind = conv.get("kind", "gegenbauer")
    if "r" in conv and not conv["r"] > 0:
        fail("convolver", "r", f"constraint violation r > 0 (got {conv['r']})")
    if kind == "tent":
        for key in ("alpha", "h_coeffs"):
            if key in conv:
                fail("convolver", key, f"'{key}' does not apply to the tent convolver")
    else:
        if "alpha" not in conv:
            fail("convolver", "kind", f"{kind} convolver requires 'alpha'")
        if not conv["alpha"] > -0.5:
            fail("convolver", "alpha", f"constraint violation alpha > -1/2 (got {conv['alpha']})")
        if kind == "weighted" and not conv.get("h_coeffs"):
            fail("convolver", "kind", "weighted convolver requires 'h_coeffs'")
        if kind == "gegenbauer" and "h_coeffs" in conv:
            fail("convolver", "h_coeffs", "'h_coeffs' applies only to the weighted convolver")

    fn = values["function"]
    if "half_width" in fn and not fn["half_width"] > 0:
        fail("function", "half_width", f"constraint violation half_width > 0 (got {fn['half_width']})")
    if "smoothness_k" in fn and fn["smoothness_k"] < 0:
        fail("function", "smoothness_k", "constraint violation smoothness_k >= 0")
    if fn.get("variant") == "sampled" and "terms" in fn:
        fail("function", "terms", "'terms' applies only to the exponential variant")
    if fn.get("variant", "exponential") == "exponential" and "sample_file" in fn:
        fail("function", "sample_file", "'sample_file' applies only to the sampled variant")

    run = values["run"]
    positive = {"cutoff": 1, "quad_order": 1, "grid_size": 2, "threads": 1}
    for key, lo in positive.items():
        if key in run and run[key] < lo:
            fail("run", key, f"constraint violation {key} >= {lo} (got {run[key]})")
    for key in ("q", "k"):
        if key in run and run[key] < 0:
            fail("run", key, f"constraint violation {key} >= 0 (got {run[key]})")
    if "gamma" in run and not run["gamma"] > 0:
        fail("run", "gamma", f"constraint violation gamma > 0 (got {run['gamma']})")
    if "R" in run and not run["R"] > 0:
        fail("run", "R", f"constraint violation R > 0 (got {run['R']})")


def parse_config(text: str, base_dir: Path | str | None = None) -> RunConfig:
    """Parse and validate a configuration document; defaults fill missing keys."""
    values: dict = {name: {} for name in SCHEMA}
    lines: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {raw.strip()!r}", line=lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ParseError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            raise ParseError("key outside of any section", line=lineno, key=key)
        if key not in SCHEMA[section]:
            raise ParseError(f"unknown key in [{section}]", line=lineno, key=key)
        if key in values[section]:
            raise ParseError(f"duplicate key in [{section}]", line=lineno, key=key)
        try:
            values[section][key] = SCHEMA[section][key](value)
        except ValueError as exc:
            raise ParseError(f"type mismatch: {exc}", line=lineno, key=key) from exc
        lines[(section, key)] = lineno
    _validate(values, lines)
    blocks = {name: _BLOCKS[name](**vals) for name, vals in values.items()}
    return RunConfig(base_dir=Path(base_dir) if base_dir else Path.cwd(), **blocks)


def override(cfg: RunConfig, section: str, key: str, raw: str) -> RunConfig:
    """Apply one command-line override, parsed and validated like a config line."""
    if section not in SCHEMA or key not in SCHEMA[section]:
        raise ParseError(f"unknown override {section}.{key}", key=key)
    try:
        value = SCHEMA[section][key](raw)
    except ValueError as exc:
        raise ParseError(f"type mismatch: {exc}", key=key) from exc
    block = replace(getattr(cfg, section), **{key: value})
    cfg = replace(cfg, **{section: block})
    current = {
        name: {f.name: getattr(getattr(cfg, name), f.name) for f in fields(_BLOCKS[name])
               if getattr(getattr(cfg, name), f.name) not in (None, ())}
        for name in SCHEMA
    }
    _validate(current, {})
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidArgument(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
