"""With a hard cap on the fleet, overload is handled by rate feedback instead.

One user per sector, one UAV per sector, and a cap that leaves no room to
deploy. Each user offers more than a UAV buffer holds, so the UAVs tell
their users to slow down until the drops stop.
"""
import math

from uavnet import SimConfig, Simulation, UserDevice, initial_placement
from uavnet.sectors import assign_users_to_sectors, compute_sector_count


def main():
    S = compute_sector_count(200.0, 40.0)
    cfg = SimConfig(max_uavs=S + 1, surge_tick=10**6, ticks=12)
    rates = (1.0, 30.0, 30.0)
    users = [
        UserDevice(id=n, radius=200.0, angle=(n + 0.5) * 2 * math.pi / S,
                   gen_rate=list(rates), base_gen_rate=rates)
        for n in range(S)
    ]
    placement = initial_placement(assign_users_to_sectors(users, S), cfg, counts=[1] * S)
    sim = Simulation(cfg, users=users, placement=placement)

    print(f"{S} sectors, fleet capped at {cfg.max_uavs}, buffer {cfg.buffer_access_B}")
    print("tick  offered  dropped_access  feedback")
    for _ in range(cfg.ticks):
        rec = sim.step()
        m = rec.metrics
        codes = sorted({f.code for f in rec.feedback})
        print(f"{m.tick:4d}  {float(m.offered):7.1f}  {float(m.dropped_access):14.2f}  {len(rec.feedback):3d} msgs {codes}")
    u = users[0]
    print(f"user 0 rates now {[round(r, 2) for r in u.gen_rate]} (base {list(u.base_gen_rate)})")


if __name__ == "__main__":
    main()
