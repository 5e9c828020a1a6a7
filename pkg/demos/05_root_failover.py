"""Kill the root UAV at tick 5 and watch the heartbeat election replace it."""
from uavnet import SimConfig, Simulation


def main():
    cfg = SimConfig(ticks=12)
    sim = Simulation(cfg, kill_root_at=5)
    print(f"heartbeat timeout {cfg.heartbeat_timeout} ticks")
    print("tick  root  served  dropped_relay")
    for _ in range(cfg.ticks):
        rec = sim.step()
        m = rec.metrics
        note = f"  <- uav {rec.new_root} elected" if rec.new_root is not None else ""
        print(f"{m.tick:4d}  {rec.root:4d}  {float(m.served):6.1f}  {float(m.dropped_relay):13.1f}{note}")


if __name__ == "__main__":
    main()
