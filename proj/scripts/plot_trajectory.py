#!/usr/bin/env python3
"""Quick look at rumorsim CSV output.

Usage:
  plot_trajectory.py trajectory.csv [out.png]
  plot_trajectory.py ensemble.csv [out.png]   # mean curves with +/- 1 sd bands
"""
import csv
import sys


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else None

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        print("no data rows in", path)
        return 1

    import matplotlib

    if out:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = [float(r["time"]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    labels = {"s": "S", "ia": "I_A (rumor)", "ib": "I_B (refutation)", "r": "R"}

    if "mean_ia" in rows[0]:
        for key, label in labels.items():
            mean = [float(r[f"mean_{key}"]) for r in rows]
            sd = [float(r[f"sd_{key}"]) for r in rows]
            (line,) = ax.plot(t, mean, label=label)
            ax.fill_between(
                t,
                [m - s for m, s in zip(mean, sd)],
                [m + s for m, s in zip(mean, sd)],
                alpha=0.2,
                color=line.get_color(),
                linewidth=0,
            )
    else:
        for key, label in labels.items():
            ax.plot(t, [float(r[key]) for r in rows], label=label)

    ax.set_xlabel("time [days]")
    ax.set_ylabel("individuals")
    ax.legend()
    fig.tight_layout()
    if out:
        fig.savefig(out, dpi=150)
        print("wrote", out)
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
