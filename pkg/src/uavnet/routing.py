"""Composite-weight UAV graph, shortest-path tree to the root, relay and root election."""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, TextIO

from .model import ControllerPos, Role, SimConfig, UserDevice
from .placement import PlacementState, assign_users_to_uavs


class RoutingError(RuntimeError):
    pass


@dataclass
class UavGraph:
    nodes: list[int]
    weights: dict[tuple[int, int], float]
    root: int

    def neighbours(self, i: int):
        for j in self.nodes:
            if (i, j) in self.weights:
                yield j, self.weights[(i, j)]


@dataclass
class RoutingTree:
    parent: dict[int, int]
    path_cost: dict[int, float]
    root: int

    def depth(self, v: int) -> int:
        d = 0
        while v != self.root:
            v = self.parent[v]
            d += 1
        return d

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while v != self.root:
            v = self.parent[v]
            path.append(v)
        return path


@dataclass
class RelayResult:
    drops: dict[int, Fraction]
    forwarded: dict[int, Fraction]
    handled: dict[int, Fraction]
    controller_received: Fraction = Fraction(0)

    @property
    def dropped_total(self) -> Fraction:
        return sum(self.drops.values(), Fraction(0))


def build_graph(state: PlacementState, cfg: SimConfig) -> UavGraph:
    """Complete directed graph over the active UAVs.

    weight(i, j) = alpha * d(i, j) / d_max + (1 - alpha) * load(j) / buffer_relay,
    with d the horizontal separation and load(j) the receiver's last-tick load.
    """
    if state.root_id is None:
        raise RoutingError("no root designated")
    nodes = sorted(u.id for u in state.active())
    if state.root_id not in nodes:
        nodes = sorted(nodes + [state.root_id])
    uav = {i: state.uav(i) for i in nodes}
    dist = {}
    for i in nodes:
        for j in nodes:
            if i != j:
                dist[(i, j)] = math.hypot(uav[i].x - uav[j].x, uav[i].y - uav[j].y)
    d_max = max(dist.values(), default=0.0)
    alpha = cfg.edge_weight_alpha
    weights = {}
    for (i, j), d in dist.items():
        d_term = d / d_max if d_max > 0 else 0.0
        weights[(i, j)] = alpha * d_term + (1 - alpha) * (uav[j].load / cfg.buffer_relay)
    return UavGraph(nodes=nodes, weights=weights, root=state.root_id)


def dijkstra_tree(graph: UavGraph) -> RoutingTree:
    """Shortest-path tree from the root.

    Equal-cost parents resolve to the lower predecessor id; equal-cost
    settlement order to the lower node id.
    """
    root = graph.root
    cost = {root: 0.0}
    parent = {root: root}
    settled = set()
    heap = [(0.0, root)]
    while heap:
        c, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        for v, w in graph.neighbours(u):
            if v in settled:
                continue
            new = c + w
            if v not in cost or new < cost[v] or (new == cost[v] and u < parent[v]):
                cost[v] = new
                parent[v] = u
                heapq.heappush(heap, (new, v))
    missing = [v for v in graph.nodes if v not in settled]
    if missing:
        raise RoutingError(f"unreachable node {missing[0]}")
    return RoutingTree(parent=parent, path_cost=cost, root=root)


def forward_relay(
    state: PlacementState,
    tree: RoutingTree,
    intake: Mapping[int, Fraction],
    cfg: SimConfig,
) -> RelayResult:
    """Push every UAV's access intake up the tree, leaves first.

    Each relay forwards at most buffer_relay per tick and drops the rest.
    The root hands everything to the controller, unless it has failed, in
    which case it drops everything it receives.
    """
    cap = Fraction(cfg.buffer_relay)
    inflow = {v: Fraction(intake.get(v, 0)) for v in tree.parent}
    drops = {v: Fraction(0) for v in tree.parent}
    forwarded = {v: Fraction(0) for v in tree.parent}
    handled = {}
    order = sorted(tree.parent, key=lambda v: (-tree.depth(v), v))
    for v in order:
        handled[v] = inflow[v]
        if v == tree.root:
            continue
        out = min(inflow[v], cap)
        drops[v] = inflow[v] - out
        forwarded[v] = out
        inflow[tree.parent[v]] += out
    root = state.uav(tree.root)
    received = inflow[tree.root]
    if root.failed:
        drops[tree.root] = received
        received = Fraction(0)
    forwarded[tree.root] = received
    for v in tree.parent:
        u = state.uav(v)
        u.relay_buffer_used = float(min(handled[v] - Fraction(intake.get(v, 0)), cap))
        u.load = float(handled[v])
    return RelayResult(drops=drops, forwarded=forwarded, handled=handled, controller_received=received)


def elect_root(
    state: PlacementState,
    tick: int,
    cfg: SimConfig,
    controller: ControllerPos,
    users: Optional[Sequence[UserDevice]] = None,
    offered=None,
) -> Optional[int]:
    """Record heartbeats and re-elect the root once its heartbeat is stale.

    The live serving UAV nearest the controller (3D, lower id on ties)
    takes over and gives up its users, which are reassigned when ``users``
    is given. Returns the new root id, or None if nothing changed.
    """
    live = [u for u in state.active() if not u.failed]
    if not live:
        raise RoutingError("no live UAV")
    for u in live:
        u.last_heartbeat = tick
    root = state.root
    if root is not None and tick - root.last_heartbeat <= cfg.heartbeat_timeout:
        return None
    candidates = [u for u in live if u.role is Role.SERVING]
    if not candidates:
        if root is not None and not root.failed:
            return None
        raise RoutingError("no live UAV")
    new_root = min(candidates, key=lambda u: (u.distance_to(controller.xb, controller.yb), u.id))
    if root is not None:
        root.role = Role.SUSPENDED
    released = sorted(new_root.served_users)
    new_root.role = Role.ROOT
    new_root.sector_id = None
    new_root.parked = False
    new_root.served_users = set()
    new_root.demand = 0.0
    state.root_id = new_root.id
    for sector in state.sectors:
        sector.uav_ids.discard(new_root.id)
    if users is not None:
        for user in users:
            if user.id in released:
                user.serving_uav = None
        assign_users_to_uavs(state, users, cfg, offered)
    return new_root.id


TREE_HEADER = ["tick", "uav", "parent", "path_cost"]


def write_tree_rows(writer, tick: int, tree: RoutingTree) -> None:
    for v in sorted(tree.parent):
        writer.writerow([tick, v, tree.parent[v], f"{tree.path_cost[v]:.6f}"])


def write_tree_csv(trees: Sequence[tuple[int, RoutingTree]], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(TREE_HEADER)
    for tick, tree in trees:
        write_tree_rows(writer, tick, tree)
