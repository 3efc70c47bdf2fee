"""Flat ``key = value`` run configuration with strict validation.

Blank lines and ``#`` comments are ignored.  Lists are comma separated.
Per-cell exponents of a convergence grid use keys ``cell.<n_max>.<l_max>``
holding ``alpha_0, beta_0, alpha_1, beta_1, ...``; explicit exponents use
``exponents.l<l>``.  ``alpha.<sector>`` and ``beta.<sector>`` override the
even-tempered schedule for one sector, so a single run can use a singlet
basis and a triplet basis optimized separately.  Unknown keys and out-of-range values raise
:class:`ConfigError` before any computation starts.
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .ci import PRECISIONS
from .entanglement import CONVENTIONS
from .model import EVEN_TEMPERED, EXPLICIT, BasisSpec

MAX_L = 6
MAX_N = 40
SECTORS = ("singlet", "triplet")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key or line."""


@dataclass
class RunConfig:
    Z: float = 2.0
    l_max: int = 2
    n_max: tuple[int, ...] = (10,)
    sectors: tuple[str, ...] = ("singlet",)
    exponent_mode: str = EVEN_TEMPERED
    alpha: tuple[float, ...] = (2.0,)
    beta: tuple[float, ...] = (0.6,)
    exponents: dict[int, tuple[float, ...]] = field(default_factory=dict)
    sector_alpha: dict[str, tuple[float, ...]] = field(default_factory=dict)
    sector_beta: dict[str, tuple[float, ...]] = field(default_factory=dict)
    optimize: bool = False
    budget: int = 2000
    objective: tuple[int, ...] = (0,)
    drop_threshold: float = 1e-10
    states: tuple[str, ...] = ()
    count: int = 7
    n_values: dict[str, tuple[int, ...]] = field(default_factory=dict)
    grid_n_max: tuple[int, ...] = ()
    grid_l_max: tuple[int, ...] = ()
    cells: dict[tuple[int, int], tuple[float, ...]] = field(default_factory=dict)
    fit_n_min: int = 2
    format: str = "csv"
    out: str = ""
    serial: bool = False
    interaction: bool = True
    spectrum_convention: str = "shell"
    precision: str = "auto"

    def basis_spec(self, l_max: int | None = None, n_max=None, params=None, sector: str | None = None) -> BasisSpec:
        """Basis for this run, optionally for a sector, another grid cell or parameter vector."""
        l_max = self.l_max if l_max is None else l_max
        if self.exponent_mode == EXPLICIT:
            missing = [l for l in range(l_max + 1) if l not in self.exponents]
            if missing:
                raise ConfigError(f"exponents.l{missing[0]} is required in explicit mode")
            return BasisSpec.explicit([self.exponents[l] for l in range(l_max + 1)],
                                      drop_threshold=self.drop_threshold)
        n = _per_l(self.n_max if n_max is None else n_max, l_max, "n_max")
        if params is not None:
            if len(params) != 2 * (l_max + 1):
                raise ConfigError(f"cell parameters need {2 * (l_max + 1)} values, got {len(params)}")
            alpha, beta = params[0::2], params[1::2]
        else:
            alpha = _per_l(self.sector_alpha.get(sector, self.alpha), l_max, "alpha")
            beta = _per_l(self.sector_beta.get(sector, self.beta), l_max, "beta")
        return BasisSpec.even(l_max, n, alpha, beta, drop_threshold=self.drop_threshold)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["exponents"] = {f"l{l}": list(v) for l, v in self.exponents.items()}
        d["cells"] = {f"{n}.{l}": list(v) for (n, l), v in self.cells.items()}
        for key, value in d.items():
            if isinstance(value, tuple):
                d[key] = list(value)
        for key in ("n_values", "sector_alpha", "sector_beta"):
            d[key] = {k: list(v) for k, v in getattr(self, key).items()}
        return d


def _per_l(values, l_max, name):
    values = tuple(values)
    if len(values) == 1:
        return values * (l_max + 1)
    if len(values) < l_max + 1:
        raise ConfigError(f"{name}: need one value or {l_max + 1} values (one per l), got {len(values)}")
    return values[: l_max + 1]


def _ints(text):
    return tuple(int(x) for x in _split(text))


def _floats(text):
    return tuple(float(x) for x in _split(text))


def _split(text):
    items = [x.strip() for x in str(text).split(",")]
    if not all(items):
        raise ValueError("empty list item")
    return items


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(options):
    def parse(text):
        t = str(text).strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t
    return parse


def _sectors(text):
    items = tuple(x.lower() for x in _split(text))
    if items == ("both",):
        return SECTORS
    for s in items:
        if s not in SECTORS:
            raise ValueError(f"unknown sector {s!r}")
    return items


PARSERS = {
    "Z": float, "l_max": int, "n_max": _ints, "sector": _sectors,
    "exponent_mode": _choice((EVEN_TEMPERED, EXPLICIT)), "alpha": _floats, "beta": _floats,
    "optimize": _bool, "budget": int, "objective": _ints, "drop_threshold": float,
    "states": lambda t: tuple(x.strip() for x in str(t).split(";") if x.strip()),
    "count": int, "grid_n_max": _ints, "grid_l_max": _ints, "fit_n_min": int,
    "format": _choice(FORMATS), "out": str, "serial": _bool, "interaction": _bool,
    "spectrum_convention": _choice(CONVENTIONS), "precision": _choice(PRECISIONS),
    "n_values.singlet": _ints, "n_values.triplet": _ints,
    "alpha.singlet": _floats, "alpha.triplet": _floats, "beta.singlet": _floats, "beta.triplet": _floats,
}
_CELL = re.compile(r"^cell\.(\d+)\.(\d+)$")
_EXPONENTS = re.compile(r"^exponents\.l(\d+)$")


def apply(config: RunConfig, key: str, raw, where: str = "") -> None:
    """Parse ``raw`` for ``key`` and store it on ``config``."""
    prefix = f"{where}key {key!r}: "
    try:
        if m := _CELL.match(key):
            config.cells[(int(m[1]), int(m[2]))] = _floats(raw)
            return
        if m := _EXPONENTS.match(key):
            config.exponents[int(m[1])] = _floats(raw)
            return
        if key not in PARSERS:
            raise ConfigError(f"{prefix}unknown key")
        value = PARSERS[key](raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix}invalid value {raw!r} ({exc})") from None
    if key == "sector":
        config.sectors = value
    elif "." in key:
        group, sector = key.split(".", 1)
        target = {"n_values": config.n_values, "alpha": config.sector_alpha, "beta": config.sector_beta}[group]
        target[sector] = value
    else:
        setattr(config, key, value)


def parse_text(text: str, source: str = "<config>") -> RunConfig:
    config = RunConfig()
    seen = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}: "
        if "=" not in body:
            raise ConfigError(f"{where}expected 'key = value', got {body!r}")
        key, raw = (x.strip() for x in body.split("=", 1))
        if key in seen:
            raise ConfigError(f"{where}key {key!r} repeats line {seen[key]}")
        seen[key] = lineno
        apply(config, key, raw, where)
    return config


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_text(text, str(path))


def validate(config: RunConfig) -> RunConfig:
    """Range checks applied after file values and command-line overrides merge."""
    def need(ok, key, what):
        if not ok:
            raise ConfigError(f"key {key!r}: {what}")

    need(0 < config.Z <= 10, "Z", "must lie in (0, 10]")
    need(0 <= config.l_max <= MAX_L, "l_max", f"must lie in [0, {MAX_L}]")
    need(all(1 <= n <= MAX_N for n in config.n_max), "n_max", f"entries must lie in [1, {MAX_N}]")
    need(all(a > 0 for a in config.alpha), "alpha", "must be positive")
    need(all(b > 0 for b in config.beta), "beta", "must be positive")
    for sector, values in config.sector_alpha.items():
        need(all(a > 0 for a in values), f"alpha.{sector}", "must be positive")
    for sector, values in config.sector_beta.items():
        need(all(b > 0 for b in values), f"beta.{sector}", "must be positive")
    need(1 <= config.budget <= 100000, "budget", "must lie in [1, 100000]")
    need(all(k >= 0 for k in config.objective), "objective", "ordinals must be non-negative")
    need(0 < config.drop_threshold < 1e-2, "drop_threshold", "must lie in (0, 0.01)")
    need(1 <= config.count <= 200, "count", "must lie in [1, 200]")
    need(config.fit_n_min >= 1, "fit_n_min", "must be at least 1")
    need(all(0 <= l <= MAX_L for l in config.grid_l_max), "grid_l_max", f"entries must lie in [0, {MAX_L}]")
    need(all(1 <= n <= MAX_N for n in config.grid_n_max), "grid_n_max", f"entries must lie in [1, {MAX_N}]")
    for sector, ns in config.n_values.items():
        need(all(1 <= n <= 30 for n in ns), f"n_values.{sector}", "entries must lie in [1, 30]")
        if sector == "triplet":
            need(min(ns) >= 2, "n_values.triplet", "triplet states start at n = 2")
    for (n, l), params in config.cells.items():
        need(all(p > 0 for p in params), f"cell.{n}.{l}", "parameters must be positive")
        need(len(params) == 2 * (l + 1), f"cell.{n}.{l}", f"needs {2 * (l + 1)} values (alpha, beta per l)")
    for l, xs in config.exponents.items():
        need(all(x > 0 for x in xs), f"exponents.l{l}", "must be positive")
    if config.exponent_mode == EXPLICIT:
        need(all(l in config.exponents for l in range(config.l_max + 1)), "exponents",
             f"explicit mode needs exponents.l0 .. exponents.l{config.l_max}")
    try:
        for sector in SECTORS:
            config.basis_spec(sector=sector)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config
