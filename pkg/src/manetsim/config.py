"""Scenario configuration, INI-style config files and the flat column echo."""

from __future__ import annotations

import configparser
import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Any

from manetsim.adversary import AdversarySpec
from manetsim.trust import Strategy, StrategyConfig


class ConfigError(ValueError):
    """An invalid scenario; the message names the offending field."""


@dataclass
class MobilityConfig:
    width: float = 500.0
    height: float = 550.0
    speed_max: float = 20.0
    pause: float = 0.0
    tick: float = 0.5
    frozen: bool = False


@dataclass
class TrafficConfig:
    rate: float = 4.0
    payload: int = 512
    flows: int = 0  # 0 means max(1, nodes // 10)
    start_min: float = 1.0
    start_max: float = 10.0


@dataclass
class AodvConfig:
    route_lifetime: float = 10.0
    rreq_retries: int = 2
    rreq_timeout: float = 1.0
    ttl: int = 32
    intermediate_reply: bool = True
    buffer_size: int = 64


@dataclass
class DsrConfig:
    cache_size: int = 3
    cache_replies: bool = False
    salvage: bool = True
    request_retries: int = 2
    request_timeout: float = 1.0
    ttl: int = 32
    buffer_size: int = 64


@dataclass
class LinkConfig:
    data_delay: float = 0.002
    control_delay: float = 0.001
    jitter: float = 0.0001


SECTIONS = ("mobility", "traffic", "adversary", "trust", "aodv", "dsr", "link")
TOP_LEVEL = ("protocol", "strategy", "nodes", "range_m", "duration", "seed",
             "snapshot_interval")


@dataclass
class ScenarioConfig:
    protocol: str = "aodv"
    strategy: str = "none"
    nodes: int = 40
    range_m: float = 150.0
    duration: float = 300.0
    seed: int = 1
    snapshot_interval: float = 10.0
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    trust: StrategyConfig = field(default_factory=StrategyConfig)
    aodv: AodvConfig = field(default_factory=AodvConfig)
    dsr: DsrConfig = field(default_factory=DsrConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    # programmatic overrides for hand-built topologies
    positions: tuple[tuple[float, float], ...] | None = None
    flow_pairs: tuple[tuple[int, int], ...] | None = None
    assignments: tuple[tuple[int, str], ...] | None = None

    def validate(self) -> None:
        def bad(name: str, why: str):
            raise ConfigError(f"{name}: {why}")

        if self.protocol not in ("aodv", "dsr"):
            bad("protocol", f"expected aodv or dsr, got {self.protocol!r}")
        if self.strategy not in {s.value for s in Strategy}:
            bad("strategy", f"expected none, eliminate or second-chance, got {self.strategy!r}")
        if not isinstance(self.nodes, int) or self.nodes < 2:
            bad("nodes", f"need at least 2 nodes, got {self.nodes}")
        if self.range_m <= 0:
            bad("range_m", "must be positive")
        if self.duration <= 0:
            bad("duration", "must be positive")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must be a 64-bit unsigned integer")
        if self.snapshot_interval <= 0:
            bad("snapshot_interval", "must be positive")
        m = self.mobility
        if m.width <= 0 or m.height <= 0:
            bad("mobility.width/height", "must be positive")
        if m.speed_max < 0:
            bad("mobility.speed_max", "must be non-negative")
        if m.pause < 0:
            bad("mobility.pause", "must be non-negative")
        if m.tick <= 0:
            bad("mobility.tick", "must be positive")
        t = self.traffic
        if t.rate <= 0:
            bad("traffic.rate", "must be positive")
        if t.payload <= 0:
            bad("traffic.payload", "must be positive")
        if t.flows < 0:
            bad("traffic.flows", "must be non-negative")
        if not 0 <= t.start_min <= t.start_max:
            bad("traffic.start_min", "need 0 <= start_min <= start_max")
        for section in ("adversary", "trust"):
            obj = getattr(self, section)
            try:
                obj.__post_init__()
            except ValueError as exc:
                bad(section, str(exc))
        for name in ("aodv", "dsr"):
            sec = getattr(self, name)
            if sec.ttl < 1:
                bad(f"{name}.ttl", "must be at least 1")
            if sec.buffer_size < 1:
                bad(f"{name}.buffer_size", "must be at least 1")
        if self.dsr.cache_size < 1:
            bad("dsr.cache_size", "must be at least 1")
        if self.positions is not None:
            if len(self.positions) != self.nodes:
                bad("positions", f"expected {self.nodes} positions")
            for x, y in self.positions:
                if not (0 <= x <= m.width and 0 <= y <= m.height):
                    bad("positions", f"({x}, {y}) lies outside the terrain")
        if self.flow_pairs is not None:
            for s, d in self.flow_pairs:
                if s == d or not (0 <= s < self.nodes and 0 <= d < self.nodes):
                    bad("flow_pairs", f"invalid pair ({s}, {d})")

    def strategy_config(self) -> StrategyConfig:
        return dataclasses.replace(self.trust, strategy=Strategy(self.strategy))

    def flow_count(self) -> int:
        return self.traffic.flows or max(1, self.nodes // 10)


def _fmt(value: Any) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ";".join(",".join(str(v) for v in item) for item in value)
    return repr(value) if isinstance(value, float) else str(value)


def flatten(cfg: ScenarioConfig) -> dict[str, str]:
    """Every run-affecting parameter as ``column -> text``, in a fixed order."""
    out = {name: _fmt(getattr(cfg, name)) for name in TOP_LEVEL}
    for section in SECTIONS:
        obj = getattr(cfg, section)
        for f in dataclasses.fields(obj):
            if section == "trust" and f.name == "strategy":
                continue
            out[f"{section}.{f.name}"] = _fmt(getattr(obj, f.name))
    for name in ("positions", "flow_pairs", "assignments"):
        out[name] = _fmt(getattr(cfg, name))
    return out


CONFIG_COLUMNS = tuple(flatten(ScenarioConfig()))


def _coerce(current: Any, text: str, name: str) -> Any:
    text = text.strip()
    try:
        if isinstance(current, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(current, enum.Enum):
            return type(current)(text)
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float) or current is None:
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r}") from None
    return text


def set_value(cfg: ScenarioConfig, key: str, text: str) -> None:
    """Set ``key`` (``field`` or ``section.field``) from its text form."""
    if "." in key:
        section, name = key.split(".", 1)
        if section not in SECTIONS:
            raise ConfigError(f"{key}: unknown section {section!r}")
        obj = getattr(cfg, section)
    else:
        obj, name = cfg, key
        if name not in TOP_LEVEL:
            raise ConfigError(f"{key}: unknown key")
    spec = next((f for f in dataclasses.fields(obj) if f.name == name), None)
    if spec is None:
        raise ConfigError(f"{key}: unknown key")
    if not text.strip() and "None" in str(spec.type):
        setattr(obj, name, None)
        return
    setattr(obj, name, _coerce(getattr(obj, name), text, key))


def load_config(path, cfg: ScenarioConfig | None = None) -> ScenarioConfig:
    """Read ``key = value`` lines grouped in ``[scenario]`` and per-module sections."""
    cfg = cfg or ScenarioConfig()
    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as fh:
        parser.read_file(fh)
    for section in parser.sections():
        for key, value in parser.items(section):
            set_value(cfg, key if section == "scenario" else f"{section}.{key}", value)
    return cfg


def dump_config(cfg: ScenarioConfig) -> str:
    lines = ["[scenario]"]
    flat = flatten(cfg)
    lines += [f"{k} = {flat[k]}" for k in TOP_LEVEL]
    for section in SECTIONS:
        lines.append("")
        lines.append(f"[{section}]")
        lines += [f"{k.split('.', 1)[1]} = {v}" for k, v in flat.items()
                  if k.startswith(section + ".")]
    return "\n".join(lines) + "\n"
