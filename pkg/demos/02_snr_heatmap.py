"""Coverage before and after a run, written as CSV and PGM images.

The images land in ``demo_out/``; any PGM viewer can open them.
"""
from pathlib import Path

import numpy as np

from uavnet import SimConfig, run
from uavnet.radio import read_grid_csv


def summarize(path):
    grid = read_grid_csv(path)
    v = grid.values[np.isfinite(grid.values)]
    print(f"{path.name}: {grid.values.shape[0]}x{grid.values.shape[1]} points, "
          f"min {v.min():.2f} dB, median {np.median(v):.2f} dB, max {v.max():.2f} dB")


def main():
    out = Path("demo_out")
    report = run(SimConfig(), out, pgm=True)
    for name, size in report.manifest:
        print(f"wrote {name} ({size} bytes)")
    print()
    summarize(out / "snr_initial.csv")
    summarize(out / "snr_final.csv")


if __name__ == "__main__":
    main()
