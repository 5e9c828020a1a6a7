"""Free-space received power, best-server SNR and the SNR coverage grid."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .model import Role, SimConfig, UavNode

SERVICE_EDGE_SNR_DB = 15.0
PGM_DB_LO, PGM_DB_HI = -10.0, 40.0


class GridParseError(ValueError):
    pass


def friis_received_power(K: float, lam: float, d):
    """K / (lambda^2 d^2); K lumps transmit power and both antenna areas.

    Accepts scalars or numpy arrays for ``d``.
    """
    if K <= 0 or lam <= 0:
        raise ValueError("K and lambda must be > 0")
    if np.any(np.asarray(d) <= 0):
        raise ValueError("distance must be > 0")
    return K / (lam * lam * np.square(d)) if isinstance(d, np.ndarray) else K / (lam * lam * d * d)


def calibrated_link_budget(cfg: SimConfig) -> float:
    """K placing the SNR at 3D distance sqrt(R^2 + H^2) at exactly 15 dB."""
    edge_sq = cfg.uav_range_R**2 + cfg.altitude_H**2
    return 10 ** (SERVICE_EDGE_SNR_DB / 10) * cfg.wavelength_lambda**2 * edge_sq * cfg.noise_power


def link_budget(cfg: SimConfig) -> float:
    return cfg.link_budget_K if cfg.link_budget_K is not None else calibrated_link_budget(cfg)


def coverage_servers(uavs: Iterable[UavNode], cfg: SimConfig) -> list[UavNode]:
    keep = {Role.SERVING, Role.ROOT} if cfg.root_in_coverage else {Role.SERVING}
    return [u for u in uavs if u.role in keep and not u.failed]


def snr_db(point: tuple[float, float], uavs: Sequence[UavNode], cfg: SimConfig) -> float:
    """Best-server SNR in dB at a ground point; -inf when nothing serves."""
    servers = coverage_servers(uavs, cfg)
    if not servers:
        return -math.inf
    x, y = point
    d = min(u.distance_to(x, y) for u in servers)
    power = friis_received_power(link_budget(cfg), cfg.wavelength_lambda, d)
    return 10 * math.log10(power / cfg.noise_power)


@dataclass
class SnrGrid:
    half_side: float
    step: float
    values: np.ndarray  # values[row, col]; row follows y, col follows x

    @property
    def coords(self) -> np.ndarray:
        n = self.values.shape[0]
        return -self.half_side + self.step * np.arange(n)

    def iter_points(self):
        c = self.coords
        for r, y in enumerate(c):
            for col, x in enumerate(c):
                yield float(x), float(y), float(self.values[r, col])


def grid_side(half_side: float, step: float) -> int:
    return math.floor(2 * half_side / step) + 1


def compute_grid(uavs: Sequence[UavNode], cfg: SimConfig) -> SnrGrid:
    """Best-server SNR over the square of half-side R + R' centred on the venue."""
    half = cfg.venue_radius_Rp + cfg.uav_range_R
    n = grid_side(half, cfg.grid_step)
    c = -half + cfg.grid_step * np.arange(n)
    servers = coverage_servers(uavs, cfg)
    if not servers:
        return SnrGrid(half, cfg.grid_step, np.full((n, n), -np.inf))
    xs, ys = np.meshgrid(c, c)  # xs[row, col] = c[col]
    best = np.full((n, n), np.inf)
    for u in servers:
        d2 = (xs - u.x) ** 2 + (ys - u.y) ** 2 + u.altitude**2
        np.minimum(best, d2, out=best)
    power = link_budget(cfg) / (cfg.wavelength_lambda**2 * best)
    return SnrGrid(half, cfg.grid_step, 10 * np.log10(power / cfg.noise_power))


def write_grid_csv(grid: SnrGrid, fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["x", "y", "snr_db"])
    for x, y, v in grid.iter_points():
        writer.writerow([f"{x:.6f}", f"{y:.6f}", f"{v:.6f}"])


def read_grid_csv(path: str | Path) -> SnrGrid:
    """Parse a grid CSV back into an SnrGrid; errors carry the line number."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fp:
        reader = csv.reader(fp)
        header = next(reader, None)
        if header != ["x", "y", "snr_db"]:
            raise GridParseError("line 1: expected header x,y,snr_db")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise GridParseError(f"line {lineno}: expected 3 fields, got {len(row)}")
            try:
                rows.append(tuple(float(v) for v in row))
            except ValueError:
                raise GridParseError(f"line {lineno}: non-numeric field") from None
    if not rows:
        raise GridParseError("line 2: grid has no data rows")
    n = math.isqrt(len(rows))
    if n * n != len(rows):
        raise GridParseError(f"line {len(rows) + 1}: {len(rows)} rows do not form a square grid")
    xs = [r[0] for r in rows[:n]]
    for i, (x, y, _) in enumerate(rows):
        if x != xs[i % n] or y != rows[(i // n) * n][1]:
            raise GridParseError(f"line {i + 2}: point ({x}, {y}) out of row-major order")
    values = np.array([r[2] for r in rows]).reshape(n, n)
    step = xs[1] - xs[0] if n > 1 else 1.0
    return SnrGrid(half_side=-xs[0], step=step, values=values)


def snr_to_gray(values: np.ndarray) -> np.ndarray:
    """Linear map of [-10, 40] dB onto [0, 255], rounded half up and clamped."""
    scaled = (np.asarray(values, dtype=float) - PGM_DB_LO) / (PGM_DB_HI - PGM_DB_LO) * 255.0
    scaled = np.nan_to_num(scaled, nan=0.0, posinf=255.0, neginf=0.0)
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def grid_to_pgm(grid: SnrGrid) -> bytes:
    """Binary P5 graymap, +y at the top of the image."""
    gray = snr_to_gray(grid.values)[::-1]
    h, w = gray.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes()


def write_pgm(grid: SnrGrid, path: str | Path) -> None:
    Path(path).write_bytes(grid_to_pgm(grid))
