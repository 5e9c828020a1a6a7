"""Angular sectorization of the venue and per-sector UAV sizing."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import UserDevice, Sector

TWO_PI = 2 * math.pi


def compute_sector_count(Rp: float, R: float) -> int:
    """Number of equal angular sectors for a venue of radius Rp.

    Chosen so that each sector's arc at the user ring, 2*pi*Rp/S, is at
    least one UAV footprint diameter 2R.
    """
    if not 0 < R < Rp:
        raise ValueError("require 0 < R < Rp")
    return max(1, math.floor(math.pi * Rp / R))


def sector_of(angle: float, S: int) -> int:
    idx = math.floor((angle % TWO_PI) * S / TWO_PI)
    # angles a hair below 2*pi can round up to S
    return min(idx, S - 1)


def make_sectors(S: int) -> list[Sector]:
    width = TWO_PI / S
    return [Sector(id=n, angle_lo=n * width, angle_hi=(n + 1) * width) for n in range(S)]


def assign_users_to_sectors(
    users: Sequence[UserDevice],
    S: int,
    offered: Optional[Sequence[Sequence[float]]] = None,
) -> list[Sector]:
    """Map each user to the sector containing its angle.

    Sets ``user.sector_id`` and returns the sectors with ``user_ids``
    (ascending) and traffic populated. Traffic comes from ``offered`` when
    given, else from each user's current ``gen_rate``.
    """
    if S < 1:
        raise ValueError("S must be >= 1")
    sectors = make_sectors(S)
    for user in sorted(users, key=lambda u: u.id):
        n = sector_of(user.angle, S)
        user.sector_id = n
        sectors[n].user_ids.append(user.id)
    refresh_sector_traffic(sectors, users, offered)
    return sectors


def refresh_sector_traffic(
    sectors: Iterable[Sector],
    users: Sequence[UserDevice],
    offered: Optional[Sequence[Sequence[float]]] = None,
) -> None:
    by_id = {u.id: u for u in users}
    for sector in sectors:
        per_class = [0.0, 0.0, 0.0]
        for uid in sector.user_ids:
            rates = offered[uid] if offered is not None else by_id[uid].gen_rate
            for c in range(3):
                per_class[c] += rates[c]
        sector.traffic_by_class = tuple(per_class)
        sector.traffic_T = sum(per_class)


def required_uavs(traffic_T: float, B: float) -> int:
    """ceil(T / B) UAVs for a sector offering T units per tick; 0 when empty."""
    if traffic_T < 0 or B <= 0:
        raise ValueError("require traffic_T >= 0 and B > 0")
    # exact rational division so integral ratios never round up spuriously
    return math.ceil(Fraction(traffic_T) / Fraction(B))
