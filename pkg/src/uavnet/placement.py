"""UAV allocation, symmetric in-sector placement and per-tick placement updates."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .model import ControllerPos, Role, Sector, SimConfig, UavNode, UserDevice
from .sectors import required_uavs

# control traffic is the most protected class, then realtime
SCORE_WEIGHTS = (1.5, 1.2, 1.0)


class PlacementError(RuntimeError):
    pass


@dataclass
class PlacementState:
    uavs: list[UavNode]
    sectors: list[Sector]
    traffic_history: list[deque]
    root_id: Optional[int] = None
    sector_scores: list[float] = field(default_factory=list)
    # busy UAVs left to congestion feedback by the last placement_update
    feedback_uavs: set[int] = field(default_factory=set)
    # (action, sector, uav) records of the last placement_update
    actions: list[tuple[str, int, int]] = field(default_factory=list)

    @property
    def num_sectors(self) -> int:
        return len(self.sectors)

    def uav(self, uav_id: int) -> UavNode:
        for u in self.uavs:
            if u.id == uav_id:
                return u
        raise KeyError(uav_id)

    @property
    def root(self) -> Optional[UavNode]:
        return None if self.root_id is None else self.uav(self.root_id)

    def serving(self) -> list[UavNode]:
        return [u for u in self.uavs if u.role is Role.SERVING]

    def active(self) -> list[UavNode]:
        return [u for u in self.uavs if u.active]

    def own_uavs(self, n: int) -> list[UavNode]:
        return [u for u in self.uavs if u.role is Role.SERVING and u.sector_id == n]


def _ring_point(cfg: SimConfig, angle: float) -> tuple[float, float]:
    return cfg.venue_radius_Rp * math.cos(angle), cfg.venue_radius_Rp * math.sin(angle)


def _sync_members(state: PlacementState) -> None:
    for sector in state.sectors:
        sector.uav_ids = {u.id for u in state.own_uavs(sector.id)}


def respace_sector(state: PlacementState, n: int, cfg: SimConfig) -> None:
    """Spread the sector's non-parked UAVs evenly inside its angular span."""
    sector = state.sectors[n]
    members = sorted((u for u in state.own_uavs(n) if not u.parked), key=lambda u: u.id)
    k = len(members)
    for i, u in enumerate(members):
        u.x, u.y = _ring_point(cfg, sector.angle_lo + (i + 1) * sector.width / (k + 1))


def initial_placement(
    sectors: Sequence[Sector],
    cfg: SimConfig,
    controller: Optional[ControllerPos] = None,
    counts: Optional[Sequence[int]] = None,
) -> PlacementState:
    """Give each sector ceil(T/B) UAVs, evenly spaced at radius R', plus a root.

    The root (id 0) sits on the UAV ring at the point nearest the controller.
    ``counts`` overrides the per-sector sizing.
    """
    if controller is None:
        controller = ControllerPos(cfg.venue_radius_Rp + cfg.uav_range_R, 0.0)
    if counts is None:
        counts = [required_uavs(s.traffic_T, cfg.buffer_access_B) for s in sectors]
    if cfg.max_uavs is not None and sum(counts) + 1 > cfg.max_uavs:
        raise PlacementError("max_uavs exceeded")

    root_angle = math.atan2(controller.yb, controller.xb)
    rx, ry = _ring_point(cfg, root_angle)
    uavs = [UavNode(id=0, x=rx, y=ry, altitude=cfg.altitude_H, role=Role.ROOT)]
    for sector, k in zip(sectors, counts):
        for _ in range(k):
            uavs.append(UavNode(id=len(uavs), x=0.0, y=0.0, altitude=cfg.altitude_H, sector_id=sector.id))
    state = PlacementState(
        uavs=uavs,
        sectors=list(sectors),
        traffic_history=[deque(maxlen=cfg.ma_window_W) for _ in sectors],
        root_id=0,
    )
    for sector in sectors:
        respace_sector(state, sector.id, cfg)
    _sync_members(state)
    return state


def _user_demands(users: Sequence[UserDevice], offered) -> dict[int, float]:
    if offered is None:
        return {u.id: u.total_rate for u in users}
    return {u.id: float(sum(offered[u.id])) for u in users}


def assign_users_to_uavs(
    state: PlacementState,
    users: Sequence[UserDevice],
    cfg: SimConfig,
    offered=None,
) -> PlacementState:
    """Associate every user with a serving UAV.

    Users are taken in id order. Each goes to the nearest serving UAV (3D
    distance, ties to the lower id) in its own or an adjacent sector that
    still has room for the user's demand under B; when none has room it goes
    to the nearest such UAV anyway and the excess is dropped downstream.
    """
    serving = sorted(state.serving(), key=lambda u: u.id)
    if users and not serving:
        raise PlacementError("no active UAV")
    for u in state.uavs:
        u.served_users = set()
        u.demand = 0.0
    S = state.num_sectors
    demands = _user_demands(users, offered)
    B = cfg.buffer_access_B
    for user in sorted(users, key=lambda u: u.id):
        if user.sector_id is not None and S > 0:
            near = {(user.sector_id - 1) % S, user.sector_id, (user.sector_id + 1) % S}
            candidates = [u for u in serving if u.sector_id in near] or serving
        else:
            candidates = serving
        ux, uy = user.x, user.y
        ranked = sorted(candidates, key=lambda u: (u.distance_to(ux, uy), u.id))
        d = demands[user.id]
        chosen = next((u for u in ranked if u.demand + d <= B), ranked[0])
        chosen.demand += d
        chosen.served_users.add(user.id)
        user.serving_uav = chosen.id
    return state


def update_sector_scores(state: PlacementState, sectors: Sequence[Sector], cfg: SimConfig) -> list[float]:
    """Priority-weighted traffic over the capacity of the sector's own UAVs.

    A sector with traffic but no UAVs scores +inf.
    """
    scores = []
    for sector in sectors:
        weighted = sum(w * t for w, t in zip(SCORE_WEIGHTS, sector.traffic_by_class))
        capacity = len(state.own_uavs(sector.id)) * cfg.buffer_access_B
        if capacity == 0:
            score = math.inf if weighted > 0 else 0.0
        else:
            score = weighted / capacity
        sector.score = score
        scores.append(score)
    state.sector_scores = scores
    return scores


def detect_surge(history: Sequence[float], current: float, cfg: SimConfig) -> bool:
    """Moving-average surge test over the last W samples; false during warm-up."""
    W = cfg.ma_window_W
    if len(history) < W:
        return False
    window = list(history)[-W:]
    return current > cfg.surge_threshold * (sum(window) / W)


def is_busy(uav: UavNode, cfg: SimConfig) -> bool:
    return uav.demand >= cfg.buffer_access_B


def _can_deploy(state: PlacementState, cfg: SimConfig) -> bool:
    return cfg.max_uavs is None or len(state.active()) < cfg.max_uavs


def _deploy(state: PlacementState, n: int, cfg: SimConfig) -> UavNode:
    spare = [u for u in state.uavs if u.role is Role.SUSPENDED and not u.failed]
    if spare:
        uav = min(spare, key=lambda u: u.id)
    else:
        uav = UavNode(id=max(u.id for u in state.uavs) + 1, x=0.0, y=0.0, altitude=cfg.altitude_H)
        state.uavs.append(uav)
    uav.role = Role.SERVING
    uav.sector_id = n
    uav.parked = False
    uav.idle_ticks = 0
    uav.x, uav.y = _ring_point(cfg, state.sectors[n].midpoint)
    return uav


def _pick_donor(state: PlacementState, n: int, cfg: SimConfig) -> Optional[tuple[UavNode, float]]:
    S = state.num_sectors
    sector = state.sectors[n]
    boundary = {}
    if S > 1:
        boundary[(n + 1) % S] = sector.angle_hi
        boundary.setdefault((n - 1) % S, sector.angle_lo)
    candidates = []
    for m, angle in boundary.items():
        if m == n:
            continue
        home = [u for u in state.own_uavs(m) if not u.parked]
        # never strip a sector with traffic of its last UAV
        if len(home) < 2 and state.sectors[m].traffic_T > 0:
            continue
        candidates.extend((u, angle) for u in home if not is_busy(u, cfg))
    if not candidates:
        return None
    return min(candidates, key=lambda c: (c[0].demand, c[0].id))


def placement_update(
    state: PlacementState,
    sectors: Sequence[Sector],
    users: Sequence[UserDevice],
    cfg: SimConfig,
    surges: Optional[Sequence[bool]] = None,
    offered=None,
) -> PlacementState:
    """One round of congestion-driven placement.

    Sectors are visited by descending score. A sector whose UAVs are busy
    (demand >= B) gets one action: a free or partially free UAV from an
    adjacent sector is parked on the shared boundary; failing that a UAV is
    deployed at the sector midpoint if the fleet cap allows; otherwise its
    busy UAVs are left for congestion feedback. A sector flagged by surge
    detection whose demand exceeds its own capacity deploys directly.
    Deployment also requires real overload: an overflowing UAV or sector
    demand above its own capacity. When
    no UAV is busy, UAVs idle for W ticks are suspended.
    """
    if surges is None:
        surges = [False] * len(sectors)
    state.feedback_uavs = set()
    state.actions = []
    for u in state.serving():
        u.idle_ticks = 0 if u.served_users else u.idle_ticks + 1

    B = cfg.buffer_access_B
    by_user = {u.id: u for u in users}
    order = sorted(range(len(sectors)), key=lambda n: (-state.sectors[n].score, n))
    changed = False
    for n in order:
        own = state.own_uavs(n)
        if own:
            busy = [u for u in own if is_busy(u, cfg)]
        else:
            serving_ids = {by_user[uid].serving_uav for uid in sectors[n].user_ids if uid in by_user}
            busy = [state.uav(i) for i in sorted(i for i in serving_ids if i is not None)]
            busy = [u for u in busy if u.role is Role.SERVING and is_busy(u, cfg)]
        if not busy:
            continue
        if surges[n] and sectors[n].traffic_T > len(own) * B and _can_deploy(state, cfg):
            uav = _deploy(state, n, cfg)
            state.actions.append(("deploy", n, uav.id))
            changed = True
            continue
        donor = _pick_donor(state, n, cfg)
        if donor is not None:
            uav, angle = donor
            uav.x, uav.y = _ring_point(cfg, angle)
            uav.parked = True
            state.actions.append(("move", n, uav.id))
            changed = True
            continue
        if _can_deploy(state, cfg):
            # a UAV filled to exactly B drops nothing; deploy only on real overload
            if any(u.demand > B for u in busy) or sectors[n].traffic_T > len(own) * B:
                uav = _deploy(state, n, cfg)
                state.actions.append(("deploy", n, uav.id))
                changed = True
            continue
        state.feedback_uavs.update(u.id for u in busy)
        state.actions.append(("feedback", n, -1))

    if not any(is_busy(u, cfg) for u in state.serving()):
        idle = sorted((u for u in state.serving() if u.idle_ticks >= cfg.ma_window_W), key=lambda u: u.id)
        for u in idle:
            if len(state.serving()) <= 1:
                break
            u.role = Role.SUSPENDED
            u.parked = False
            state.actions.append(("suspend", -1 if u.sector_id is None else u.sector_id, u.id))
            changed = True

    if changed:
        for sector in state.sectors:
            respace_sector(state, sector.id, cfg)
        _sync_members(state)
        assign_users_to_uavs(state, users, cfg, offered)
    return state
