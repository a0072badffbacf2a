"""A small Watts-Strogatz sweep and its charts.

Runs configs/ws_small.json (n = 10 and 20, four densities, 5 seeds), writes
the CSV files and SVG charts to results/ws_small and prints the summary.

    python3 demos/small_world_sweep.py
"""

from pathlib import Path

from eprnet.harness import BEST, ExperimentConfig, run_and_write
from eprnet.plotting import KINDS, plot

ROOT = Path(__file__).resolve().parents[1]


def main():
    cfg = ExperimentConfig.from_json(ROOT / "configs" / "ws_small.json")
    out = ROOT / cfg.output_dir
    result = run_and_write(cfg, out)
    print(f"{len(result.rows)} rows, {len(result.failures)} failed cells -> {out}")
    print(" n  k/n   k   max-min rate     Jain  source Jain")
    for row in result.ws_summary:
        if row["strategy"] == BEST:
            print(f"{row['n']:2d}  {row['k_over_n']:.1f}  {row['k']:2d}  {row['min_rate_mean']:12.4g}"
                  f"  {row['jain_mean']:7.3f}  {row['source_jain_mean']:11.3f}")
    for kind in KINDS:
        for path in plot(out, kind):
            print(path.relative_to(ROOT))


if __name__ == "__main__":
    main()
