"""Experiment configuration: a flat ``key = value`` file.

Recognised keys (anything else is an error)::

    initial_data     trig polynomial, e.g. ``sin(x) + 1/2*sin(2x)``  (required)
    n_modes          Galerkin cutoff N                               [128]
    dt               time step h                                     [1e-5]
    t_end            horizon; default is T* rounded up to one
                     decimal plus 0.1
    methods          comma list from m1, m2, m3                      [m1,m2,m3]
    restart_stride   method-3 cell length in solver steps            [1]
    linf_mode        grid | coeff                                    [grid]
    kstar_mode       paper | strict                                  [paper]
    t_star_mode      theorem | table                                 [theorem]
    output_dir       where CSVs and the summary go                   [run]
    snapshot_stride  write every s-th snapshot to trajectory.bin,
                     0 disables                                      [0]

Lines starting with ``#`` or ``;`` are comments. A rowfile for ``table`` uses
the same keys, one ``[section]`` per row.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .evolve import InitialDatum
from .verify import t_star

METHODS = ("m1", "m2", "m3")
LINF_MODES = ("grid", "coeff")
KSTAR_MODES = ("paper", "strict")
TSTAR_MODES = ("theorem", "table")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message

    def __reduce__(self):  # picklable across table worker processes
        return type(self), (self.key, self.message)


@dataclass(frozen=True)
class ExperimentConfig:
    initial_data: InitialDatum
    n_modes: int = 128
    dt: float = 1e-5
    t_end: float | None = None
    methods: tuple[str, ...] = METHODS
    restart_stride: int = 1
    linf_mode: str = "grid"
    kstar_mode: str = "paper"
    t_star_mode: str = "theorem"
    output_dir: str = "run"
    snapshot_stride: int = 0

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("methods", "at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("methods", f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt", f"must be positive, got {self.dt}")
        if self.n_modes < 2:
            raise ConfigError("n_modes", f"must be >= 2, got {self.n_modes}")
        if self.initial_data.max_wavenumber > self.n_modes:
            raise ConfigError("initial_data", f"wavenumber {self.initial_data.max_wavenumber} "
                              f"exceeds n_modes = {self.n_modes}")
        if self.t_end is not None and not self.t_end >= self.dt:
            raise ConfigError("t_end", f"must be >= dt, got {self.t_end}")
        if self.restart_stride < 1:
            raise ConfigError("restart_stride", "must be >= 1")
        if self.snapshot_stride < 0:
            raise ConfigError("snapshot_stride", "must be >= 0")
        for key, allowed in (("linf_mode", LINF_MODES), ("kstar_mode", KSTAR_MODES),
                             ("t_star_mode", TSTAR_MODES)):
            if getattr(self, key) not in allowed:
                raise ConfigError(key, f"expected one of {', '.join(allowed)}, "
                                       f"got {getattr(self, key)!r}")

    @property
    def t_star(self) -> float:
        return t_star(self.initial_data, self.t_star_mode)

    @property
    def horizon(self) -> float:
        if self.t_end is not None:
            return self.t_end
        return default_t_end(self.t_star)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def as_text(self) -> str:
        """Round-trippable ``key = value`` rendering with ``t_end`` resolved."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "t_end":
                value = self.horizon
            lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


def default_t_end(t_star_value: float) -> float:
    """T* rounded up to the first decimal, plus 0.1."""
    return math.ceil(round(t_star_value * 10, 9)) / 10 + 0.1


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_CONVERTERS = {
    "initial_data": InitialDatum.parse,
    "n_modes": int,
    "dt": float,
    "t_end": float,
    "methods": lambda s: tuple(m.strip().lower() for m in s.split(",") if m.strip()),
    "restart_stride": int,
    "linf_mode": str.strip,
    "kstar_mode": str.strip,
    "t_star_mode": lambda s: "table" if s.strip() == "table_compat" else s.strip(),
    "output_dir": str.strip,
    "snapshot_stride": int,
}


def config_from_mapping(items: dict, where: str = "") -> ExperimentConfig:
    prefix = f"{where}: " if where else ""
    kwargs = {}
    for key, raw in items.items():
        if key not in _CONVERTERS:
            raise ConfigError(key, f"{prefix}unknown key (allowed: {', '.join(_CONVERTERS)})")
        try:
            kwargs[key] = _CONVERTERS[key](raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(key, f"{prefix}invalid value {raw!r} ({exc})") from None
    if "initial_data" not in kwargs:
        raise ConfigError("initial_data", f"{prefix}missing required key")
    return ExperimentConfig(**kwargs)


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), default_section="\0")
    parser.optionxform = str
    return parser


def parse_config(text: str) -> ExperimentConfig:
    parser = _parser()
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError("file", str(exc)) from None
    return config_from_mapping(dict(parser["run"]))


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def load_rows(path) -> list[tuple[str, ExperimentConfig | ConfigError]]:
    """Rows of a table file; a row that fails validation keeps its error."""
    parser = _parser()
    try:
        parser.read_string(Path(path).read_text())
    except configparser.Error as exc:
        raise ConfigError("file", str(exc)) from None
    rows = []
    for name in parser.sections():
        try:
            rows.append((name, config_from_mapping(dict(parser[name]), where=f"[{name}]")))
        except ConfigError as exc:
            rows.append((name, exc))
    return rows
