"""Domain types, scenario configuration and seeded scenario construction."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

# traffic class indices into the per-user rate vectors
CONTROL, REALTIME, NONREALTIME = 0, 1, 2
CLASS_NAMES = ("control", "realtime", "nonrealtime")


class ConfigError(ValueError):
    """Raised for an invalid or unparsable scenario configuration."""


@dataclass(frozen=True)
class SimConfig:
    venue_radius_Rp: float = 200.0
    uav_range_R: float = 40.0
    altitude_H: float = 90.0
    num_users_N: int = 150
    buffer_access_B: float = 50.0
    buffer_relay: float = 200.0
    wavelength_lambda: float = 0.010
    noise_power: float = 1.0  # W, i.e. 30 dBm
    # None -> calibrated so SNR at the service edge is 15 dB (see radio)
    link_budget_K: Optional[float] = None
    edge_weight_alpha: float = 0.5
    surge_tick: int = 11
    surge_factor: float = 2.0
    ma_window_W: int = 5
    surge_threshold: float = 1.5
    max_uavs: Optional[int] = None  # None = unlimited
    ticks: int = 30
    grid_step: float = 5.0
    seed: int = 7
    # (lo, hi) inclusive integer ranges drawn per user
    rate_control: tuple[int, int] = (1, 1)
    rate_realtime: tuple[int, int] = (2, 8)
    rate_nonrealtime: tuple[int, int] = (1, 5)
    heartbeat_timeout: int = 3
    root_in_coverage: bool = False

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


def validate_config(cfg: SimConfig) -> SimConfig:
    """Return ``cfg`` unchanged, or raise ConfigError naming the first violated rule."""
    checks = [
        (cfg.venue_radius_Rp > 0, "venue_radius_Rp must be > 0"),
        (cfg.uav_range_R > 0, "uav_range_R must be > 0"),
        (cfg.uav_range_R < cfg.venue_radius_Rp, "uav_range_R must be < venue_radius_Rp"),
        (cfg.altitude_H > 0, "altitude_H must be > 0"),
        (cfg.num_users_N > 0, "num_users_N must be > 0"),
        (cfg.buffer_access_B > 0, "buffer_access_B must be > 0"),
        (cfg.buffer_relay >= cfg.buffer_access_B, "buffer_relay must be >= buffer_access_B"),
        (cfg.wavelength_lambda > 0, "wavelength_lambda must be > 0"),
        (cfg.noise_power > 0, "noise_power must be > 0"),
        (cfg.link_budget_K is None or cfg.link_budget_K > 0, "link_budget_K must be > 0"),
        (0.0 <= cfg.edge_weight_alpha <= 1.0, "edge_weight_alpha out of [0,1]"),
        (cfg.surge_tick >= 0, "surge_tick must be >= 0"),
        (cfg.surge_factor > 1, "surge_factor must be > 1"),
        (cfg.ma_window_W >= 1, "ma_window_W must be >= 1"),
        (cfg.surge_threshold > 1, "surge_threshold must be > 1"),
        (cfg.max_uavs is None or cfg.max_uavs >= 1, "max_uavs must be >= 1 or unlimited"),
        (cfg.ticks >= 0, "ticks must be >= 0"),
        (cfg.grid_step > 0, "grid_step must be > 0"),
        (0 <= cfg.seed < 2**64, "seed must be a 64-bit unsigned integer"),
        (cfg.heartbeat_timeout >= 1, "heartbeat_timeout must be >= 1"),
    ]
    for name in ("rate_control", "rate_realtime", "rate_nonrealtime"):
        lo, hi = getattr(cfg, name)
        checks.append((0 <= lo <= hi, f"{name} must satisfy 0 <= lo <= hi"))
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    return cfg


def _parse_rate_range(text: str) -> tuple[int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return int(parts[0]), int(parts[0])
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise ValueError(f"expected 'n' or 'lo,hi', got {text!r}")


def _parse_optional_int(text: str) -> Optional[int]:
    return None if text.lower() in ("unlimited", "none", "inf") else int(text)


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.lower() in ("auto", "none", "calibrated") else float(text)


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_PARSERS = {
    "num_users_N": int,
    "surge_tick": int,
    "ma_window_W": int,
    "ticks": int,
    "seed": int,
    "heartbeat_timeout": int,
    "max_uavs": _parse_optional_int,
    "link_budget_K": _parse_optional_float,
    "rate_control": _parse_rate_range,
    "rate_realtime": _parse_rate_range,
    "rate_nonrealtime": _parse_rate_range,
    "root_in_coverage": _parse_bool,
}


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse flat ``key = value`` lines into a validated SimConfig.

    ``#`` starts a comment. Keys not given keep the value from ``base``
    (defaults if omitted). Unknown keys are an error.
    """
    known = {f.name for f in dataclasses.fields(SimConfig)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            changes[key] = _PARSERS.get(key, float)(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    cfg = dataclasses.replace(base or SimConfig(), **changes)
    return validate_config(cfg)


def load_config(path: str | Path) -> SimConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: SimConfig) -> str:
    """Inverse of parse_config."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            text = "unlimited" if f.name == "max_uavs" else "auto"
        elif isinstance(value, tuple):
            text = f"{value[0]},{value[1]}"
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


class Role(str, Enum):
    SERVING = "serving"
    ROOT = "root"
    SUSPENDED = "suspended"


@dataclass
class UserDevice:
    id: int
    radius: float
    angle: float
    gen_rate: list[float]
    base_gen_rate: tuple[float, float, float]
    sector_id: Optional[int] = None
    serving_uav: Optional[int] = None

    @property
    def x(self) -> float:
        return self.radius * math.cos(self.angle)

    @property
    def y(self) -> float:
        return self.radius * math.sin(self.angle)

    @property
    def total_rate(self) -> float:
        return sum(self.gen_rate)


@dataclass
class UavNode:
    id: int
    x: float
    y: float
    altitude: float
    role: Role = Role.SERVING
    sector_id: Optional[int] = None
    access_buffer_used: float = 0.0
    relay_buffer_used: float = 0.0
    load: float = 0.0
    served_users: set[int] = field(default_factory=set)
    last_heartbeat: int = -1
    # demand assigned by the latest user->UAV association
    demand: float = 0.0
    # parked on a sector boundary to help a congested neighbour
    parked: bool = False
    idle_ticks: int = 0
    failed: bool = False

    @property
    def active(self) -> bool:
        return self.role is not Role.SUSPENDED

    @property
    def angle(self) -> float:
        return math.atan2(self.y, self.x) % (2 * math.pi)

    def distance_to(self, x: float, y: float, z: float = 0.0) -> float:
        return math.sqrt((self.x - x) ** 2 + (self.y - y) ** 2 + (self.altitude - z) ** 2)


@dataclass
class Sector:
    id: int
    angle_lo: float
    angle_hi: float
    user_ids: list[int] = field(default_factory=list)
    traffic_T: float = 0.0
    traffic_by_class: tuple[float, float, float] = (0.0, 0.0, 0.0)
    uav_ids: set[int] = field(default_factory=set)
    score: float = 0.0

    @property
    def width(self) -> float:
        return self.angle_hi - self.angle_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.angle_lo + self.angle_hi)


@dataclass(frozen=True)
class ControllerPos:
    xb: float
    yb: float


def init_scenario(cfg: SimConfig) -> tuple[list[UserDevice], ControllerPos]:
    """Draw N users uniformly over the annulus [R'-R, R'+R] x [0, 2pi).

    Per-class rates are uniform integers in the configured ranges. The
    controller sits on the venue edge at (R'+R, 0).
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.num_users_N
    rp, r = cfg.venue_radius_Rp, cfg.uav_range_R
    radii = rng.uniform(rp - r, rp + r, n)
    angles = rng.uniform(0.0, 2 * math.pi, n)
    rates = [
        rng.integers(lo, hi, size=n, endpoint=True)
        for lo, hi in (cfg.rate_control, cfg.rate_realtime, cfg.rate_nonrealtime)
    ]
    users = []
    for i in range(n):
        base = tuple(float(rates[c][i]) for c in range(3))
        users.append(
            UserDevice(
                id=i,
                radius=float(radii[i]),
                angle=float(angles[i]) % (2 * math.pi),
                gen_rate=list(base),
                base_gen_rate=base,
            )
        )
    return users, ControllerPos(rp + r, 0.0)
