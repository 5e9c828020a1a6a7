"""Traffic doubles at tick 11; watch the fleet grow and drops fade out."""
from uavnet import SimConfig, Simulation


def main():
    cfg = SimConfig()
    sim = Simulation(cfg)
    print("tick  offered  dropped  uavs  actions")
    for _ in range(cfg.ticks):
        rec = sim.step()
        m = rec.metrics
        deploys = sum(1 for a in rec.actions if a[0] == "deploy")
        moves = sum(1 for a in rec.actions if a[0] == "move")
        note = f"+{deploys} deployed, {moves} moved" if deploys or moves else ""
        if any(rec.surges):
            note += f"  surge in {sum(rec.surges)} sectors"
        print(f"{m.tick:4d}  {float(m.offered):7.1f}  {float(m.dropped):7.2f}  {m.active_uavs:4d}  {note}")


if __name__ == "__main__":
    main()
