"""Per-tick traffic generation, access buffering and congestion feedback.

Traffic is a fluid quantity (units per tick). Buffer accounting is done in
exact rationals so per-tick conservation holds without rounding slack.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, TextIO

from .model import CONTROL, NONREALTIME, REALTIME, SimConfig, UserDevice
from .placement import PlacementState

# per-class multipliers applied to a throttled user
FEEDBACK_MULTIPLIERS = {CONTROL: 1.0, REALTIME: 0.9, NONREALTIME: 0.8}
RECOVERY_FACTOR = 1.05
FEEDBACK_CODE_MAX = 7  # three reserved header bits

DROPS_HEADER = [
    "tick",
    "offered",
    "served",
    "dropped_access",
    "dropped_relay",
    "avg_dropped_per_uav",
    "active_uavs",
]


@dataclass(frozen=True)
class FeedbackMessage:
    user_id: int
    code: int
    issued_tick: int
    k: float = 0.0

    def __post_init__(self):
        if not 0 <= self.code <= FEEDBACK_CODE_MAX:
            raise ValueError(f"feedback code {self.code} does not fit in 3 bits")


@dataclass
class TickMetrics:
    tick: int
    offered: Fraction
    served: Fraction
    dropped_access: Fraction
    dropped_relay: Fraction
    avg_dropped_per_uav: Fraction
    active_uavs: int

    @property
    def dropped(self) -> Fraction:
        return self.dropped_access + self.dropped_relay


@dataclass
class AccessResult:
    intake: dict[int, Fraction]
    dropped: dict[int, Fraction]
    offered_total: Fraction

    @property
    def dropped_total(self) -> Fraction:
        return sum(self.dropped.values(), Fraction(0))


def generate_traffic(users: Sequence[UserDevice], tick: int, cfg: SimConfig) -> list[tuple[float, float, float]]:
    """Offered per-class demand of every user this tick, indexed by user id.

    At the surge tick every rate is scaled by the surge factor, never above
    base rate x surge factor.
    """
    if tick == cfg.surge_tick:
        f = cfg.surge_factor
        for user in users:
            user.gen_rate = [min(r * f, b * f) for r, b in zip(user.gen_rate, user.base_gen_rate)]
    offered = [(0.0, 0.0, 0.0)] * (max((u.id for u in users), default=-1) + 1)
    for user in users:
        offered[user.id] = tuple(user.gen_rate)
    return offered


def enqueue_and_drop(state: PlacementState, offered, cfg: SimConfig) -> AccessResult:
    """Fill each UAV's access buffer with its users' demand; overflow is dropped."""
    B = Fraction(cfg.buffer_access_B)
    intake: dict[int, Fraction] = {}
    dropped: dict[int, Fraction] = {}
    total = Fraction(0)
    for uav in state.uavs:
        if not uav.active:
            uav.access_buffer_used = 0.0
            continue
        demand = Fraction(0)
        for uid in sorted(uav.served_users):
            demand += sum((Fraction(r) for r in offered[uid]), Fraction(0))
        intake[uav.id] = min(demand, B)
        dropped[uav.id] = demand - intake[uav.id]
        uav.access_buffer_used = float(intake[uav.id])
        total += demand
    return AccessResult(intake=intake, dropped=dropped, offered_total=total)


def compute_feedback_k(buffer_B: float, user_rate: float) -> tuple[float, int]:
    """Rate-reduction figure k = B / rate and its saturating 3-bit code."""
    if user_rate <= 0:
        raise ValueError("user_rate must be > 0 for feedback")
    k = buffer_B / user_rate
    return k, min(FEEDBACK_CODE_MAX, math.floor(k))


def apply_feedback(user: UserDevice, feedback: Optional[FeedbackMessage] = None) -> UserDevice:
    for c, m in FEEDBACK_MULTIPLIERS.items():
        user.gen_rate[c] = user.gen_rate[c] * m
    return user


def congestion_control(
    state: PlacementState,
    users: Sequence[UserDevice],
    cfg: SimConfig,
    tick: int = 0,
) -> list[FeedbackMessage]:
    """Throttle every user of the UAVs placement could not relieve.

    Only active under a fleet cap; with unlimited UAVs placement always
    deploys instead, so this is a no-op.
    """
    if cfg.max_uavs is None:
        return []
    by_id = {u.id: u for u in users}
    messages = []
    for uav_id in sorted(state.feedback_uavs):
        for uid in sorted(state.uav(uav_id).served_users):
            user = by_id[uid]
            rate = user.total_rate
            if rate <= 0:
                continue
            k, code = compute_feedback_k(cfg.buffer_access_B, rate)
            msg = FeedbackMessage(user_id=uid, code=code, issued_tick=tick, k=k)
            apply_feedback(user, msg)
            messages.append(msg)
    return messages


def recover_rates(users: Sequence[UserDevice], busy_uavs: Iterable[int], cfg: SimConfig) -> list[UserDevice]:
    """Let throttled users of non-busy UAVs climb back toward their base rate."""
    busy = set(busy_uavs)
    for user in users:
        if user.serving_uav in busy:
            continue
        for c, base in enumerate(user.base_gen_rate):
            if user.gen_rate[c] < base:
                user.gen_rate[c] = min(base, user.gen_rate[c] * RECOVERY_FACTOR)
    return list(users)


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.6f}"


def write_drops_csv(metrics: Iterable[TickMetrics], fp: TextIO) -> int:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(DROPS_HEADER)
    count = 0
    for m in metrics:
        writer.writerow([_fmt(getattr(m, name)) for name in DROPS_HEADER])
        count += 1
    return count
