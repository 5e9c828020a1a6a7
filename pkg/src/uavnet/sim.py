"""Tick-driven simulation loop and run artifacts."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from .model import ControllerPos, SimConfig, UserDevice, init_scenario, validate_config
from .placement import (
    PlacementState,
    assign_users_to_uavs,
    detect_surge,
    initial_placement,
    is_busy,
    placement_update,
    update_sector_scores,
)
from .radio import compute_grid, grid_to_pgm, read_grid_csv, write_grid_csv
from .routing import (
    RelayResult,
    RoutingTree,
    TREE_HEADER,
    build_graph,
    dijkstra_tree,
    elect_root,
    forward_relay,
    write_tree_rows,
)
from .sectors import assign_users_to_sectors, compute_sector_count, refresh_sector_traffic
from .traffic import (
    AccessResult,
    FeedbackMessage,
    TickMetrics,
    congestion_control,
    enqueue_and_drop,
    generate_traffic,
    recover_rates,
    write_drops_csv,
)

log = logging.getLogger(__name__)

INIT_PHASES = ("Segmentation", "AllocUAV", "UserToUav")
TICK_PHASES = ("UpdateTraffic", "Placement", "TrafficCongestionControl", "MultiHopRouting")


class SimulationError(RuntimeError):
    def __init__(self, tick: int, cause: Exception):
        super().__init__(f"tick {tick}: {cause}")
        self.tick = tick
        self.cause = cause


@dataclass
class TickRecord:
    """Everything one tick produced, beyond the emitted metrics row."""

    metrics: TickMetrics
    tree: RoutingTree
    access: AccessResult
    relay: RelayResult
    feedback: list[FeedbackMessage]
    surges: list[bool]
    actions: list[tuple[str, int, int]]
    new_root: Optional[int]
    root: int


class Simulation:
    """Stateful driver; one ``step()`` is one pass of the system-flow loop.

    ``users``, ``controller`` and ``placement`` may be supplied to start
    from a hand-built scenario. ``trace`` receives the name of every phase
    as it runs.
    """

    def __init__(
        self,
        cfg: SimConfig,
        users: Optional[list[UserDevice]] = None,
        controller: Optional[ControllerPos] = None,
        placement: Optional[PlacementState] = None,
        kill_root_at: Optional[int] = None,
        trace: Optional[Callable[[str], None]] = None,
    ):
        self.cfg = validate_config(cfg)
        self.kill_root_at = kill_root_at
        self._trace = trace or (lambda name: None)
        if users is None:
            users, scenario_controller = init_scenario(cfg)
            controller = controller or scenario_controller
        self.users = users
        self.controller = controller or ControllerPos(cfg.venue_radius_Rp + cfg.uav_range_R, 0.0)

        self._trace("Segmentation")
        S = compute_sector_count(cfg.venue_radius_Rp, cfg.uav_range_R)
        if placement is None:
            self.sectors = assign_users_to_sectors(users, S)
            self._trace("AllocUAV")
            self.state = initial_placement(self.sectors, cfg, self.controller)
        else:
            self.state = placement
            self.sectors = placement.sectors
            fresh = assign_users_to_sectors(users, S)
            for old, new in zip(self.sectors, fresh):
                old.user_ids = new.user_ids
                old.traffic_T, old.traffic_by_class = new.traffic_T, new.traffic_by_class
            self._trace("AllocUAV")
        self._trace("UserToUav")
        assign_users_to_uavs(self.state, users, cfg)
        self.tick = 0
        self.records: list[TickRecord] = []

    @property
    def metrics(self) -> list[TickMetrics]:
        return [r.metrics for r in self.records]

    def step(self) -> TickRecord:
        t = self.tick
        try:
            record = self._step(t)
        except SimulationError:
            raise
        except Exception as exc:
            raise SimulationError(t, exc) from exc
        self.records.append(record)
        self.tick += 1
        return record

    def run(self, ticks: Optional[int] = None) -> list[TickRecord]:
        for _ in range(self.cfg.ticks if ticks is None else ticks):
            self.step()
        return self.records

    def _step(self, t: int) -> TickRecord:
        cfg, state, users = self.cfg, self.state, self.users

        self._trace("UpdateTraffic")
        offered = generate_traffic(users, t, cfg)
        refresh_sector_traffic(self.sectors, users, offered)

        self._trace("Placement")
        assign_users_to_uavs(state, users, cfg, offered)
        update_sector_scores(state, self.sectors, cfg)
        surges = []
        for sector, history in zip(self.sectors, state.traffic_history):
            surges.append(detect_surge(history, sector.traffic_T, cfg))
            history.append(sector.traffic_T)
        placement_update(state, self.sectors, users, cfg, surges, offered)

        self._trace("TrafficCongestionControl")
        busy = {u.id for u in state.serving() if is_busy(u, cfg)}
        feedback = congestion_control(state, users, cfg, t)
        recover_rates(users, busy, cfg)

        self._trace("MultiHopRouting")
        if self.kill_root_at is not None and t == self.kill_root_at and state.root is not None:
            state.root.failed = True
            log.info("tick %d: root %d failed", t, state.root_id)
        new_root = elect_root(state, t, cfg, self.controller, users, offered)
        if new_root is not None:
            log.info("tick %d: uav %d elected root", t, new_root)
        graph = build_graph(state, cfg)
        tree = dijkstra_tree(graph)
        access = enqueue_and_drop(state, offered, cfg)
        relay = forward_relay(state, tree, access.intake, cfg)

        active = len(state.active())
        dropped_access = access.dropped_total
        dropped_relay = relay.dropped_total
        metrics = TickMetrics(
            tick=t,
            offered=access.offered_total,
            served=relay.controller_received,
            dropped_access=dropped_access,
            dropped_relay=dropped_relay,
            avg_dropped_per_uav=(dropped_access + dropped_relay) / active if active else Fraction(0),
            active_uavs=active,
        )
        return TickRecord(
            metrics=metrics,
            tree=tree,
            access=access,
            relay=relay,
            feedback=feedback,
            surges=surges,
            actions=list(state.actions),
            new_root=new_root,
            root=state.root_id,
        )

    def roster(self) -> list[dict]:
        return [
            {
                "id": u.id,
                "x": u.x,
                "y": u.y,
                "role": u.role.value,
                "sector": u.sector_id,
            }
            for u in sorted(self.state.uavs, key=lambda u: u.id)
        ]


@dataclass
class RunReport:
    config: SimConfig
    metrics: list[TickMetrics]
    roster: list[dict]
    manifest: list[tuple[str, int]] = field(default_factory=list)
    records: list[TickRecord] = field(default_factory=list)

    def config_echo(self) -> dict:
        return asdict(self.config)


def _write_text(path: Path, text: str, manifest: list) -> None:
    data = text.encode("utf-8")
    path.write_bytes(data)
    manifest.append((str(path), len(data)))


def _emit_grid(path: Path, sim: Simulation, manifest: list, pgm: bool) -> None:
    buf = io.StringIO()
    write_grid_csv(compute_grid(sim.state.uavs, sim.cfg), buf)
    _write_text(path, buf.getvalue(), manifest)
    if pgm:
        # go through the CSV so the image matches what `plot` makes from it
        data = grid_to_pgm(read_grid_csv(path))
        pgm_path = path.with_suffix(".pgm")
        pgm_path.write_bytes(data)
        manifest.append((str(pgm_path), len(data)))


def run(
    cfg: SimConfig,
    out_dir: str | Path,
    kill_root_at: Optional[int] = None,
    pgm: bool = False,
    trace: Optional[Callable[[str], None]] = None,
    users: Optional[list[UserDevice]] = None,
    placement: Optional[PlacementState] = None,
) -> RunReport:
    """Run ``cfg.ticks`` ticks and write drops.csv, tree.csv and the two SNR grids."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: list[tuple[str, int]] = []
    sim = Simulation(cfg, users=users, placement=placement, kill_root_at=kill_root_at, trace=trace)
    _emit_grid(out / "snr_initial.csv", sim, manifest, pgm)

    tree_buf = io.StringIO()
    tree_writer = csv.writer(tree_buf, lineterminator="\n")
    tree_writer.writerow(TREE_HEADER)
    for _ in range(cfg.ticks):
        record = sim.step()
        write_tree_rows(tree_writer, record.metrics.tick, record.tree)

    drops_buf = io.StringIO()
    write_drops_csv(sim.metrics, drops_buf)
    _write_text(out / "drops.csv", drops_buf.getvalue(), manifest)
    _write_text(out / "tree.csv", tree_buf.getvalue(), manifest)
    _emit_grid(out / "snr_final.csv", sim, manifest, pgm)
    return RunReport(config=cfg, metrics=sim.metrics, roster=sim.roster(), manifest=manifest, records=sim.records)
