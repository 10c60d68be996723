"""Scenario configuration: an INI-style key=value document with sections.

Every key is documented in ``docs/config_reference.md``.  ``format_config``
and ``parse_config`` round-trip exactly.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

from .analysis.search import WEIGHT_MODES, parse_grid
from .attacks import ModifiedStrategy, PauliEncoding
from .protocols import (ModifiedInstance, ProtocolAInstance, ProtocolBInstance, parse_gate_sequence)
from .quantum_core import BlochAngles
from .spacetime import Geometry, Position, regular_geometry


class ConfigParseError(ValueError):
    """Malformed document: unknown section or key, bad literal."""


class ConfigValidationError(ValueError):
    """Well-formed but inconsistent scenario."""


def _bits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    out = tuple(int(v) for v in text.replace(" ", "").split(","))
    if any(v not in (0, 1) for v in out):
        raise ValueError(f"expected bits, got {text!r}")
    return out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _angle(text: str) -> float:
    from .analysis.search import _angle as parse_angle
    return parse_angle(text)


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "; ".join(",".join(_fmt(x) for x in row) for row in v)
        return ",".join(_fmt(x) for x in v)
    return str(v)


@dataclass(frozen=True)
class GeometryConfig:
    layout: str = "regular"
    n: int = 2
    d: float = 1.0
    l: float = 0.1
    c: float = 1.0
    latency: float = 0.0
    verifiers: tuple[tuple[float, ...], ...] = ()
    receiver: tuple[float, ...] = (0.0, 0.0, 0.0)

    def build(self) -> Geometry:
        if self.layout == "regular":
            return regular_geometry(self.n, self.d, self.l, self.c, self.latency)
        if self.layout == "custom":
            if len(self.verifiers) < 2:
                raise ConfigValidationError("custom layout needs at least two verifiers")
            g = Geometry(tuple(Position.of(v) for v in self.verifiers), Position.of(self.receiver),
                         self.l, self.c, latency=self.latency)
            return g.with_default_cheaters()
        raise ConfigValidationError(f"unknown layout {self.layout!r}")


@dataclass(frozen=True)
class ProtocolConfig:
    name: str = "A"
    u: int = 0
    q_shares: tuple[int, ...] = (0,)
    label: tuple[int, ...] = ()
    locals: tuple[str, ...] = ()
    basis: str = "Z"
    program: str = ""
    shares: tuple[str, ...] = ()
    theta: float | None = None
    phi: float | None = None
    stations: int = 2

    @property
    def n_stations(self) -> int:
        if self.name == "A":
            return len(self.q_shares) + 1
        if self.name == "B":
            return len(self.label)
        if self.name == "modified":
            if self.theta is not None:
                return 2
            return len(self.shares) + 1 if self.shares else self.stations
        return 2

    def build(self):
        if self.name == "A":
            return ProtocolAInstance.from_shares(self.u, self.q_shares)
        if self.name == "B":
            locs = [parse_gate_sequence(s) for s in self.locals] if self.locals else []
            return ProtocolBInstance.from_label(self.label, locs)
        if self.name == "pauli":
            return PauliEncoding(self.u, self.basis)
        if self.name == "modified":
            if self.theta is not None:
                return ModifiedInstance.from_angles(self.u, BlochAngles(self.theta, self.phi or 0.0))
            if self.shares:
                return ModifiedInstance.from_sequences(self.u, self.shares)
            return ModifiedInstance.from_bits(self.u, self.program, self.stations)
        raise ConfigValidationError(f"unknown protocol {self.name!r}")


@dataclass(frozen=True)
class AttackConfig:
    name: str = ""
    strategy: str = "TeleportOptimal"
    forced: tuple[tuple[str, int], ...] = ()
    enumerate: bool = True


@dataclass(frozen=True)
class RatesConfig:
    samples: int = 100_000
    strategies: tuple[str, ...] = ("RandomGuess", "MeasureHold", "TeleportOptimal")
    engine: str = "batched"
    profile_points: int = 13
    basis_restarts: int = 0


@dataclass(frozen=True)
class SearchConfig:
    grid: str = "pauli+fibonacci:64+ring:pi/3:8"
    restarts: int = 32
    weights: str = "schmidt"
    maxiter: int = 1500


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    out: str = ""
    table: str = ""
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    rates: RatesConfig = field(default_factory=RatesConfig)
    search: SearchConfig = field(default_factory=SearchConfig)

    def with_seed(self, seed: int) -> ScenarioConfig:
        return replace(self, seed=seed)


_SECTIONS = {
    "geometry": GeometryConfig,
    "protocol": ProtocolConfig,
    "attack": AttackConfig,
    "rates": RatesConfig,
    "search": SearchConfig,
}
_TOP = ("seed", "out", "table")


def _parse_value(cls, name: str, raw: str):
    raw = raw.strip()
    if cls is GeometryConfig and name == "verifiers":
        return tuple(_floats(p) for p in raw.split(";") if p.strip())
    if cls is GeometryConfig and name == "receiver":
        return _floats(raw)
    if cls is ProtocolConfig and name in ("q_shares", "label"):
        return _bits(raw)
    if cls is ProtocolConfig and name in ("locals", "shares"):
        return tuple(p.strip() for p in raw.split(",")) if raw else ()
    if cls is ProtocolConfig and name in ("theta", "phi"):
        return None if raw in ("", "none") else _angle(raw)
    if cls is AttackConfig and name == "forced":
        out = []
        for item in filter(None, (p.strip() for p in raw.split(","))):
            key, _, val = item.partition(":")
            out.append((key.strip(), int(val)))
        return tuple(out)
    if cls is RatesConfig and name == "strategies":
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    default = {f.name: f for f in fields(cls)}[name].default
    if isinstance(default, bool):
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"expected true/false, got {raw!r}")
        return raw.lower() == "true"
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigParseError(str(e).splitlines()[0]) from None
    top: dict[str, Any] = {}
    sections: dict[str, Any] = {}
    for sec in cp.sections():
        if sec == "scenario":
            for k, v in cp.items(sec):
                if k not in _TOP:
                    raise ConfigParseError(f"unknown key [scenario] {k}")
                try:
                    top[k] = int(v) if k == "seed" else v.strip()
                except ValueError:
                    raise ConfigParseError(f"bad value for [scenario] {k}: {v!r}") from None
            continue
        cls = _SECTIONS.get(sec)
        if cls is None:
            raise ConfigParseError(f"unknown section [{sec}]")
        names = {f.name for f in fields(cls)}
        kw = {}
        for k, v in cp.items(sec):
            if k not in names:
                raise ConfigParseError(f"unknown key [{sec}] {k}")
            try:
                kw[k] = _parse_value(cls, k, v)
            except ValueError as e:
                raise ConfigParseError(f"bad value for [{sec}] {k}: {e}") from None
        sections[sec] = cls(**kw)
    return ScenarioConfig(**top, **sections)


def format_config(cfg: ScenarioConfig) -> str:
    lines = ["[scenario]", f"seed = {cfg.seed}"]
    if cfg.out:
        lines.append(f"out = {cfg.out}")
    if cfg.table:
        lines.append(f"table = {cfg.table}")
    for sec in _SECTIONS:
        obj = getattr(cfg, sec)
        lines.append("")
        lines.append(f"[{sec}]")
        for f in fields(obj):
            v = getattr(obj, f.name)
            if v is None:
                continue
            if f.name == "forced":
                text = ", ".join(f"{k}:{val}" for k, val in v)
            elif f.name in ("locals", "shares", "strategies"):
                text = ", ".join(v)
            else:
                text = _fmt(v)
            lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


def config_as_dict(cfg: ScenarioConfig) -> dict:
    out: dict[str, Any] = {k: getattr(cfg, k) for k in _TOP}
    for sec in _SECTIONS:
        obj = getattr(cfg, sec)
        out[sec] = {f.name: _jsonable(getattr(obj, f.name)) for f in fields(obj)}
    return out


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

ATTACK_REQUIREMENTS = {
    # name: (protocol, allowed N)
    "A_n2": ("A", {2}),
    "A_n2_xyz": ("pauli", {2}),
    "A_n3_qss": ("A", {3}),
    "A_nN_qss": ("A", {3, 4, 5}),
    "B_n2": ("B", {2}),
    "B_n3": ("B", {3}),
    "A_csqc_chain": ("modified", {2, 3}),
    "modified": ("modified", {2}),
}


def validate(cfg: ScenarioConfig, command: str) -> None:
    """Referential completeness for ``command``; raises ConfigValidationError."""
    try:
        _validate(cfg, command)
    except ConfigValidationError:
        raise
    except ValueError as e:
        raise ConfigValidationError(str(e)) from None


def _validate(cfg: ScenarioConfig, command: str) -> None:
    if command in ("run-protocol", "run-attack", "feasibility"):
        geo = cfg.geometry.build()
    if command in ("run-protocol", "run-attack"):
        p = cfg.protocol
        p.build()
        if geo.n != p.n_stations:
            raise ConfigValidationError(f"protocol uses {p.n_stations} stations, geometry has {geo.n}")
        if command == "run-protocol" and p.name == "pauli":
            raise ConfigValidationError("protocol 'pauli' exists only as an attack target")
    if command == "run-attack":
        a = cfg.attack
        if a.name not in ATTACK_REQUIREMENTS:
            raise ConfigValidationError(f"unknown attack {a.name!r}; choose from {sorted(ATTACK_REQUIREMENTS)}")
        proto, ns = ATTACK_REQUIREMENTS[a.name]
        if cfg.protocol.name != proto:
            raise ConfigValidationError(f"attack {a.name} needs protocol {proto}, got {cfg.protocol.name}")
        if cfg.protocol.n_stations not in ns:
            raise ConfigValidationError(f"attack {a.name} needs N in {sorted(ns)}")
        if a.name == "modified":
            ModifiedStrategy.parse(a.strategy)
            if cfg.protocol.theta is None:
                raise ConfigValidationError("attack 'modified' needs explicit theta/phi")
        if a.name == "A_csqc_chain":
            inst = cfg.protocol.build()
            if any(not g.is_clifford for seq in inst.shares for g in seq):
                raise ConfigValidationError("chain attack needs Clifford shares")
    if command == "rates":
        r = cfg.rates
        if r.samples < 1000:
            raise ConfigValidationError("rates.samples must be >= 1000")
        for s in r.strategies:
            ModifiedStrategy.parse(s)
        if r.engine not in ("batched", "scalar"):
            raise ConfigValidationError(f"unknown engine {r.engine!r}")
        if r.basis_restarts and r.basis_restarts < 8:
            raise ConfigValidationError("rates.basis_restarts must be 0 or >= 8")
    if command in ("search-2q", "search-3l"):
        s = cfg.search
        parse_grid(s.grid)
        if s.restarts < 1:
            raise ConfigValidationError("search.restarts must be positive")
        if s.weights not in WEIGHT_MODES:
            raise ConfigValidationError(f"search.weights must be one of {', '.join(WEIGHT_MODES)}")
    if not math.isfinite(cfg.geometry.d) or cfg.geometry.d <= 0:
        raise ConfigValidationError("geometry.d must be positive")
