"""Free transfer along the chain: ballistic peak, then saturation.

A single flipped spin released at site 1 of a 100-site open chain travels
ballistically: the transfer fidelity at site l peaks near t = l/2 and decays
toward the long-time average 1/2.  This script prints the peak table and the
late-time residuals.
"""
from __future__ import annotations

import numpy as np

from spinchain.chain import ChainSpec
from spinchain.green1 import reduced_profile


def averaged_row(spec: ChainSpec, t: float) -> np.ndarray:
    g = reduced_profile(1, t, spec)
    return 0.5 + np.abs(g) ** 2 / 6.0 + g.real / 3.0


def main() -> None:
    spec = ChainSpec(100, "open", 0.5, 1.0)
    sites = (20, 40, 60, 80, 100)
    best = {l: (0.0, -1.0) for l in sites}
    for k in range(1, 601):
        t = 0.1 * k
        row = averaged_row(spec, t)
        for l in sites:
            if row[l - 1] > best[l][1]:
                best[l] = (t, float(row[l - 1]))

    print("Ballistic arrival of the averaged transfer fidelity (100-site open chain)")
    print(f"{'site l':>8} {'peak time':>10} {'l/2':>8} {'peak F':>8}")
    for l in sites:
        t_peak, f_peak = best[l]
        print(f"{l:>8} {t_peak:>10.1f} {l / 2:>8.1f} {f_peak:>8.4f}")

    late = averaged_row(spec, 200.0)
    print("\nAt t = 200 the fidelity has relaxed to the 1/2 plateau:")
    print(f"  max |F - 1/2| over sites 1..20: {np.max(np.abs(late[:20] - 0.5)):.2e}")


if __name__ == "__main__":
    main()
