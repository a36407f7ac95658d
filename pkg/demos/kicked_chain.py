"""Kicked-chain transport: tunable localization and fast arrival.

The same encoded qubit rides a discrete-time walk: free hopping for an
interval tau, then an instantaneous site-dependent potential kick, repeated.
Strong kicks localize the walker; kick intervals near one send it across the
chain almost immediately.  A projective occupation measurement after a few
kicks leaves a detector fingerprint (occupation difference against the
uninterrupted run) whose far-end first passage exposes the speed-up.
"""
from __future__ import annotations

import numpy as np

from spinchain.chain import InitialState
from spinchain.harper import (
    HarperSpec,
    free_occupation_profile,
    qdp_and_detect,
    spread_metric,
)


def first_passage(tau: float, threshold: float = 1e-3) -> int:
    spec = HarperSpec(n=100, g=1.0, tau=tau)
    flip = InitialState(0.0, 1.0)
    for n in range(6, 601):
        if abs(qdp_and_detect(spec, 1, 5, n, flip).detector[-1]) > threshold:
            return n
    raise RuntimeError("no passage within 600 kicks")


def main() -> None:
    flip = InitialState(0.0, 1.0)
    print("Participation width after 200 kicks (100 sites, tau = 0.1):")
    for g in (0.5, 1.0, 2.0, 3.0):
        width = spread_metric(free_occupation_profile(HarperSpec(n=100, g=g, tau=0.1), 200, flip))
        print(f"  kick strength g = {g:.1f}: width = {width:6.2f} sites")

    print("\nDetector fingerprint of a site-1 measurement after 5 kicks (g = 1):")
    for tau in (0.1, 0.9):
        n = first_passage(tau)
        print(f"  tau = {tau:.1f}: far-end signal |f_100| > 1e-3 first reached at kick {n}")

    spec = HarperSpec(n=100, g=1.0, tau=0.1)
    result = qdp_and_detect(spec, 1, 5, 50, InitialState(np.sqrt(0.5), np.sqrt(0.5)))
    print(f"\nDetector profile sums to zero by construction: sum = {np.sum(result.detector):+.1e}")


if __name__ == "__main__":
    main()
