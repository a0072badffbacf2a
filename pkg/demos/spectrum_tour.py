"""Walk through the channel plan of the broadband source.

Computes the 185-channel reference plan, shows its shape and then the
rescaled plans used for Watts-Strogatz networks of 10 to 40 nodes.

    python3 demos/spectrum_tour.py
"""

import numpy as np

from eprnet.spectrum import CALIBRATED_REP_RATE, channel_rates, pair_count, scaled_plan


def main():
    ref = channel_rates()
    r = ref.rates
    print(f"reference plan: {ref.m} channels, repetition rate {CALIBRATED_REP_RATE:.6g} Hz")
    print(f"  centre channel {np.argmax(r) + 1}: {r.max():.1f} pairs/s")
    print(f"  edge channels: {r[0]:.1f} pairs/s (peak/edge {r.max() / r[0]:.2f})")
    print(f"  total {ref.total_rate:.1f} pairs/s, {ref.total_rate / 136:.1f} per node pair of a 17-node network")

    # a coarse text profile, one bar per 10 channels
    for start in range(0, ref.m, 10):
        chunk = r[start:start + 10].mean()
        print(f"  ch {start + 1:3d}-{min(start + 10, ref.m):3d} {'#' * int(60 * chunk / r.max())}")

    print("\nrescaled plans (same per-pair mean rate):")
    for n in (10, 20, 30, 40):
        plan = scaled_plan(ref, 136, n)
        print(f"  n={n:2d}: {pair_count(n):4d} pairs, {plan.m:5d} channels of {plan.geometry.b_c / 1e9:7.3f} GHz,"
              f" peak {plan.rates.max():8.2f} pairs/s")


if __name__ == "__main__":
    main()
