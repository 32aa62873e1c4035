"""Scenario configuration: sectioned key/value text (INI).

Every value has a default, so an empty file reproduces the five-agent
constant-gain benchmark; the ``[adaptive]`` section holds the overrides used
by the adaptive benchmark.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .fem import FemModel, build_fem
from .graph import Topology, complete_topology, five_agent_topology
from .profiles import BENCHMARK_PROFILES, ProfileError, compile_profile, initial_states


class ConfigError(ValueError):
    """Invalid scenario configuration; message names the section and key."""


@dataclass
class FemSettings:
    n: int = 40
    a1: float = 0.05
    pulse_center: float = 0.5
    pulse_width: float = 0.3
    pulse_area: float = 120.0
    c_K: float = 5e-4
    c_F: float = 1e-2


@dataclass
class TopologySettings:
    builtin: str = "five_agent"          # five_agent | complete | custom
    agents: int = 5                  # used by complete/custom
    edges: tuple = ()                # custom only: ((i, j), ...)


@dataclass
class InitialSettings:
    builtin: str = "benchmark"       # benchmark | custom
    profiles: tuple = ()


@dataclass
class SimulationSettings:
    t_end: float = 2.0
    dt: float = 1e-3


@dataclass
class SweepSettings:
    grid: str = "0:2:0.05"
    trace_alphas: tuple = (0.0, 0.3, 2.0)


@dataclass
class AdaptiveSettings:
    a1: float = 0.1
    c_F: float = 1e-3
    gamma: float = 100.0
    sigma: float = 1e-5
    alpha0: float = 1.0


@dataclass
class DesignSettings:
    mode: str = "uniform_sweep"      # design 2: uniform_sweep | multi_gain
    symmetric: bool = True
    seeds: tuple = ("zeros", "ones", "static")
    alpha: float = 0.3               # design 3: uniform Laplacian gain
    max_evals: int = 300


_SECTIONS = {
    "fem": FemSettings,
    "topology": TopologySettings,
    "initial": InitialSettings,
    "simulation": SimulationSettings,
    "sweep": SweepSettings,
    "adaptive": AdaptiveSettings,
    "design": DesignSettings,
}


@dataclass
class ScenarioConfig:
    fem: FemSettings = field(default_factory=FemSettings)
    topology: TopologySettings = field(default_factory=TopologySettings)
    initial: InitialSettings = field(default_factory=InitialSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    adaptive: AdaptiveSettings = field(default_factory=AdaptiveSettings)
    design: DesignSettings = field(default_factory=DesignSettings)

    # -- builders -----------------------------------------------------------
    def build_fem(self, adaptive: bool = False) -> FemModel:
        f = self.fem
        a1, c_F = (self.adaptive.a1, self.adaptive.c_F) if adaptive else (f.a1, f.c_F)
        try:
            return build_fem(n=f.n, a1=a1, pulse_center=f.pulse_center,
                             pulse_width=f.pulse_width, c_K=f.c_K, c_F=c_F,
                             pulse_area=f.pulse_area)
        except ValueError as exc:
            raise ConfigError(f"[fem] {exc}") from None

    def build_topology(self) -> Topology:
        t = self.topology
        try:
            if t.builtin == "five_agent":
                return five_agent_topology()
            if t.builtin == "complete":
                return complete_topology(t.agents)
            return Topology(t.agents, t.edges)
        except ValueError as exc:
            raise ConfigError(f"[topology] {exc}") from None

    def profiles(self) -> tuple:
        return BENCHMARK_PROFILES if self.initial.builtin == "benchmark" else self.initial.profiles

    def initial_states(self, fem: FemModel) -> np.ndarray:
        try:
            return initial_states(fem, self.profiles())
        except ValueError as exc:
            raise ConfigError(f"[initial] {exc}") from None

    def grid_values(self) -> np.ndarray:
        return parse_grid(self.sweep.grid)

    def validate(self) -> "ScenarioConfig":
        self.build_fem()
        self.build_fem(adaptive=True)
        topo = self.build_topology()
        if self.initial.builtin not in ("benchmark", "custom"):
            raise ConfigError(f"[initial] builtin must be 'benchmark' or 'custom', "
                              f"got {self.initial.builtin!r}")
        if self.topology.builtin not in ("five_agent", "complete", "custom"):
            raise ConfigError(f"[topology] unknown builtin {self.topology.builtin!r}")
        if len(self.profiles()) != topo.N:
            raise ConfigError(f"[initial] {len(self.profiles())} profiles for {topo.N} agents")
        for p in self.profiles():
            try:
                compile_profile(p)
            except ProfileError as exc:
                raise ConfigError(f"[initial] {exc}") from None
        s = self.simulation
        if not (s.dt > 0 and s.t_end >= s.dt):
            raise ConfigError(f"[simulation] need dt > 0 and t_end >= dt "
                              f"(dt={s.dt}, t_end={s.t_end})")
        steps = round(s.t_end / s.dt)
        if abs(steps * s.dt - s.t_end) > 1e-9 * s.t_end:
            raise ConfigError(f"[simulation] t_end={s.t_end} is not a multiple of dt={s.dt}")
        try:
            self.grid_values()
        except ValueError as exc:
            raise ConfigError(f"[sweep] grid: {exc}") from None
        a = self.adaptive
        if a.gamma < 0 or a.sigma < 0:
            raise ConfigError("[adaptive] gamma and sigma must be nonnegative")
        if a.alpha0 < 0:
            raise ConfigError("[adaptive] alpha0 must be nonnegative")
        d = self.design
        if d.mode not in ("uniform_sweep", "multi_gain"):
            raise ConfigError(f"[design] mode must be uniform_sweep or multi_gain, got {d.mode!r}")
        bad = set(d.seeds) - {"zeros", "ones", "static"}
        if bad:
            raise ConfigError(f"[design] unknown seeds {sorted(bad)}")
        if d.alpha < 0:
            raise ConfigError("[design] alpha must be nonnegative")
        if d.max_evals < 1:
            raise ConfigError("[design] max_evals must be positive")
        return self

    # -- text form ----------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for name in _SECTIONS:
            lines.append(f"[{name}]")
            section = getattr(self, name)
            for f in fields(section):
                value = getattr(section, f.name)
                if f.name == "profiles":
                    text = "".join(f"\n    {v}" for v in value)
                else:
                    text = " " + _format(value)
                lines.append(f"{f.name} ={text}")
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "ScenarioConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config syntax: {exc}") from None
        cfg = cls()
        for sec in cp.sections():
            if sec not in _SECTIONS:
                raise ConfigError(f"unknown section [{sec}]")
            current = getattr(cfg, sec)
            known = {f.name: f for f in fields(current)}
            updates = {}
            for key, raw in cp.items(sec):
                if key not in known:
                    raise ConfigError(f"[{sec}] unknown key {key!r}")
                default = getattr(_SECTIONS[sec](), key)
                try:
                    updates[key] = _parse(raw, default, sec, key)
                except ValueError as exc:
                    raise ConfigError(f"[{sec}] {key}: {exc}") from None
            setattr(cfg, sec, replace(current, **updates))
        return cfg

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text)


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``start:stop:step`` (inclusive) or a comma list into values."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected start:stop:step, got {spec!r}")
        a, b, step = (float(p) for p in parts)
        if step <= 0 or b < a:
            raise ValueError(f"need step > 0 and stop >= start in {spec!r}")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        vals = np.round(a + step * np.arange(count), 12)
    else:
        vals = np.array([float(p) for p in spec.split(",") if p.strip()])
    if vals.size == 0 or np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ValueError(f"grid {spec!r} must hold finite nonnegative values")
    return vals


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{i}-{j}" for i, j in value)
        return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    return str(value)


def _parse(raw: str, default, sec: str, key: str):
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        v = float(raw)
        if v != int(v):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(v)
    if isinstance(default, float):
        v = float(raw)
        if not np.isfinite(v):
            raise ValueError(f"expected a finite number, got {raw!r}")
        return v
    if isinstance(default, tuple):
        if key == "edges":
            out = []
            for item in filter(None, (p.strip() for p in raw.replace("\n", ",").split(","))):
                a, _, b = item.partition("-")
                out.append((int(a), int(b)))
            return tuple(out)
        if key == "trace_alphas":
            return tuple(float(p) for p in raw.replace("\n", ",").split(",") if p.strip())
        if key == "profiles":
            sep = "\n" if "\n" in raw else ";"
            return tuple(p.strip() for p in raw.split(sep) if p.strip())
        return tuple(p.strip() for p in raw.replace("\n", ",").split(",") if p.strip())
    return raw
