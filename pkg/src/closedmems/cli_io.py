"""Run configuration (flat ``key = value`` text) and deterministic CSV output."""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .geometry import Domain, DomainKind, MIN_NODES

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "CsvTable",
    "format_value",
    "write_csv",
    "write_columns",
    "write_text",
    "DEFAULT_CONFIG",
]

DEFAULT_CONFIG = """\
# reference problem: a = rho^0.5 on (0, 1), Coulomb-like exponent p = 1
domain = interval 1
n = 128
gamma = 0.5
p = 1
"""


class ConfigError(ValueError):
    """Every problem found in a configuration, not only the first."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    domain: Domain | None = None
    n: int | None = None
    gamma: float | None = None
    kappa: float = 1.0
    shape: str = "pure"
    p: float | None = None
    N: int | None = None
    lam: float | None = None
    lambdas: tuple[float, ...] | None = None
    lambda_min: float | None = None
    lambda_max: float | None = None
    lambda_count: int = 9
    lambda_spacing: str = "log"
    epsilon: float = 0.0
    tol: float | None = None
    max_iter: int = 10_000
    touch_eps: float = 1e-12
    eig_tol: float = 1e-8
    rel_tol: float = 1e-3
    beta: float | None = None
    q: float = 2.0
    r: float = 0.1
    out: str | None = None
    origin: tuple[float, ...] = (0.0,)
    source: str = field(default="", repr=False)

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical ``key = value`` form."""
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def canonical(self) -> str:
        lines = []
        for f in fields(self):
            if f.name == "source":
                continue
            v = getattr(self, f.name)
            if isinstance(v, Domain):
                v = v.describe()
            elif isinstance(v, tuple):
                v = ",".join(format_value(x) for x in v)
            elif isinstance(v, float):
                v = format_value(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def dimension(self) -> int:
        if self.N is not None:
            return self.N
        return self.domain.dim if self.domain is not None else 1

    def sweep_lambdas(self, scale: float = 1.0) -> list[float]:
        if self.lambdas is not None:
            return sorted(self.lambdas)
        lo, hi = self.lambda_min, self.lambda_max
        if lo is None or hi is None:
            raise ConfigError(["sweep needs 'lambdas' or both 'lambda_min' and 'lambda_max'"])
        if self.lambda_spacing == "log":
            vals = np.geomspace(lo * scale, hi * scale, self.lambda_count)
        else:
            vals = np.linspace(lo * scale, hi * scale, self.lambda_count)
        return [float(v) for v in vals]

    def require(self, *names: str) -> None:
        missing = [k for k in names if getattr(self, k if k != "lambda" else "lam") is None]
        if missing:
            raise ConfigError([f"missing required key '{k}'" for k in missing])


_ALIASES = {"lambda": "lam", "kappa": "kappa"}

_FLOAT_KEYS = {"gamma", "kappa", "p", "lambda", "lambda_min", "lambda_max", "epsilon",
               "tol", "touch_eps", "eig_tol", "rel_tol", "beta", "q", "r"}
_INT_KEYS = {"n", "N", "max_iter", "lambda_count"}
_STR_KEYS = {"shape", "lambda_spacing", "out", "domain", "lambdas"}
_KNOWN = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


def _parse_domain(text: str) -> tuple[Domain, tuple[float, ...]]:
    """``interval L`` or ``interval a b``; ``rectangle L1 L2``; ``disk R``."""
    parts = text.split()
    if not parts:
        raise ValueError("empty domain")
    kind = DomainKind(parts[0].lower())
    ext = [float(x) for x in parts[1:]]
    origin: tuple[float, ...] = (0.0,)
    if kind is DomainKind.INTERVAL and len(ext) == 2:
        if not ext[1] > ext[0]:
            raise ValueError("interval endpoints must satisfy a < b")
        origin, ext = (ext[0],), [ext[1] - ext[0]]
    elif kind is DomainKind.RECTANGLE:
        origin = (0.0, 0.0)
    if not ext:
        ext = [1.0, 1.0] if kind is DomainKind.RECTANGLE else [1.0]
    return Domain(kind, tuple(ext)), origin


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat ``key = value`` configuration.

    ``#`` starts a comment.  ``gamma`` and ``p`` are always required; keys
    needed only by particular commands are checked when the command runs.

    Raises
    ------
    ConfigError
        Listing every unknown key, malformed or out-of-range value and
        missing required key.
    """
    errors: list[str] = []
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN:
            errors.append(f"line {lineno}: unknown key '{key}'")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        try:
            if key in _FLOAT_KEYS:
                x = float(val)
                if not math.isfinite(x):
                    raise ValueError("not finite")
                values[key] = x
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key == "domain":
                values[key], values["origin"] = _parse_domain(val)
            elif key == "lambdas":
                values[key] = tuple(float(x) for x in val.replace(",", " ").split())
            else:
                values[key] = val
        except ValueError as exc:
            errors.append(f"line {lineno}: bad value for '{key}': {val!r} ({exc})")

    for key in ("gamma", "p"):
        if key not in values:
            errors.append(f"missing required key '{key}'")

    def check(key, ok, msg):
        if key in values and not ok(values[key]):
            errors.append(f"'{key}' {msg}, got {values[key]!r}")

    check("gamma", lambda v: v > 0, "must be positive")
    check("p", lambda v: v > 0, "must be positive")
    check("kappa", lambda v: v >= 1, "must be >= 1")
    check("n", lambda v: v >= MIN_NODES, f"must be >= {MIN_NODES}")
    check("N", lambda v: v >= 1, "must be a positive integer")
    check("lambda", lambda v: v > 0, "must be positive")
    check("lambda_min", lambda v: v > 0, "must be positive")
    check("lambda_max", lambda v: v > 0, "must be positive")
    check("lambda_count", lambda v: v >= 2, "must be at least 2")
    check("lambda_spacing", lambda v: v in ("log", "linear"), "must be 'log' or 'linear'")
    check("lambdas", lambda v: len(v) > 0 and all(x > 0 for x in v), "must be positive numbers")
    check("epsilon", lambda v: v >= 0, "must be nonnegative")
    check("tol", lambda v: v > 0, "must be positive")
    check("touch_eps", lambda v: v > 0, "must be positive")
    check("eig_tol", lambda v: v > 0, "must be positive")
    check("max_iter", lambda v: v >= 1, "must be at least 1")
    check("rel_tol", lambda v: 1e-4 <= v <= 1e-2, "must lie in [1e-4, 1e-2]")
    check("q", lambda v: v >= 1, "must be >= 1")
    check("r", lambda v: v > 0, "must be positive")
    check("beta", lambda v: v > 0, "must be positive")
    check("shape", lambda v: v in ("pure", "modulated"), "must be 'pure' or 'modulated'")
    if "beta" in values and "gamma" in values and values["gamma"] > 0:
        check("beta", lambda v: v < values["gamma"], "must be below gamma")
    if values.get("shape", "pure") == "pure" and values.get("kappa", 1.0) != 1.0:
        errors.append("the pure-power profile needs kappa = 1 (use shape = modulated)")
    if "lambda_min" in values and "lambda_max" in values and values["lambda_min"] > values["lambda_max"]:
        errors.append("'lambda_min' must not exceed 'lambda_max'")
    if errors:
        raise ConfigError(errors)

    kwargs = {_ALIASES.get(k, k): v for k, v in values.items()}
    return RunConfig(source=text, **kwargs)


def format_value(x) -> str:
    """Locale-free text form; floats use 17 significant digits (round-trip exact)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if hasattr(x, "value"):
        x = x.value
    x = str(x)
    if any(c in x for c in ',"\n'):
        return '"' + x.replace('"', '""') + '"'
    return x


@dataclass
class CsvTable:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *row) -> None:
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} columns, header has {len(self.header)}")
        self.rows.append(list(row))

    def render(self, digest: str | None = None) -> str:
        out = []
        if digest is not None:
            out.append(f"# config_sha256 = {digest}")
        out.append(",".join(self.header))
        for row in self.rows:
            out.append(",".join(format_value(v) for v in row))
        return "\n".join(out) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_csv(path: os.PathLike, table: CsvTable, digest: str | None = None) -> Path:
    return _write(Path(path), table.render(digest))


def write_columns(path: os.PathLike, x, y, digest: str | None = None) -> Path:
    """Two-column whitespace-separated plot data."""
    lines = [f"# config_sha256 = {digest}"] if digest is not None else []
    lines += [f"{format_value(a)} {format_value(b)}" for a, b in zip(x, y)]
    return _write(Path(path), "\n".join(lines) + "\n")


def write_text(path: os.PathLike, text: str, digest: str | None = None) -> Path:
    head = f"# config_sha256 = {digest}\n" if digest is not None else ""
    return _write(Path(path), head + text)
