"""Walk through the initial layout: sectors, UAV counts and user association.

Run with ``python3 demos/01_sectors_and_placement.py``.
"""
import math

from uavnet import SimConfig, Simulation


def main():
    cfg = SimConfig()
    sim = Simulation(cfg)
    print(f"venue radius {cfg.venue_radius_Rp} m, UAV range {cfg.uav_range_R} m")
    print(f"{len(sim.sectors)} sectors, {len(sim.state.active())} UAVs including the root")
    print()
    print("sector  width(deg)  users  traffic  uavs")
    for s in sim.sectors:
        print(f"{s.id:6d}  {math.degrees(s.width):10.1f}  {len(s.user_ids):5d}  {s.traffic_T:7.1f}  {len(s.uav_ids):4d}")

    root = sim.state.root
    print()
    print(f"root uav {root.id} at ({root.x:.1f}, {root.y:.1f}), controller at ({sim.controller.xb}, {sim.controller.yb})")

    loads = sorted((u.demand for u in sim.state.serving()), reverse=True)
    print(f"heaviest UAV demand {loads[0]:.1f} of {cfg.buffer_access_B}, lightest {loads[-1]:.1f}")


if __name__ == "__main__":
    main()
