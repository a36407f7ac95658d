"""Kicked-Harper chain: discrete-time hopping with a periodically kicked potential.

A single spinless particle hops on a chain of N sites; every tau units of time
the site potential g*cos(2*pi*j*eta/N) acts as an instantaneous kick.  One
period of the dynamics is the Floquet step U = exp(-i*tau*T) * D, where T is
the hopping matrix and D the diagonal kick phases, applied to states sampled
just after each kick.  A qubit (alpha, beta) is encoded exactly as in the
spin chain: alpha|vacuum> + beta|particle at site 1>.  The vacuum carries no
dynamics, so the whole evolution - including a projective occupation
measurement of site m after n0 kicks - reduces to N-dimensional linear
algebra in the one-particle sector.

The kick-strength/kick-interval plane interpolates between transport that is
ballistic (small g, small tau), localized (large g), and effectively
instantaneous across the chain (tau near 1), which the detector profile
f_l = occupation difference with/without the measurement makes visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import BLOCH_MOMENTS, Boundary, InitialState

__all__ = [
    "HarperSpec",
    "HarperQdpResult",
    "hopping_matrix",
    "kick_phases",
    "floquet_step",
    "propagate",
    "free_occupation_profile",
    "fidelity_free_kicked",
    "qdp_and_detect",
    "spread_metric",
]


@dataclass(frozen=True)
class HarperSpec:
    """Kicked-chain parameters: size, kick strength, commensuration, interval.

    ``eta`` controls whether the potential cos(2*pi*j*eta/N) is commensurate
    with the lattice; the default sqrt(2) is incommensurate.  ``tau`` is both
    the kick interval and the hop duration per period.
    """

    n: int
    g: float
    tau: float
    eta: float = math.sqrt(2.0)
    boundary: Boundary = "open"

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need at least 2 sites, got {self.n}")
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise ValueError(f"kick interval tau must be > 0, got {self.tau}")
        if self.boundary not in ("open", "closed"):
            raise ValueError(f"unknown boundary {self.boundary!r}")


def hopping_matrix(spec: HarperSpec) -> np.ndarray:
    """Real symmetric nearest-neighbour hopping matrix (+1 on each bond)."""
    t = np.zeros((spec.n, spec.n))
    idx = np.arange(spec.n - 1)
    t[idx, idx + 1] = 1.0
    t[idx + 1, idx] = 1.0
    if spec.boundary == "closed":
        t[0, spec.n - 1] += 1.0
        t[spec.n - 1, 0] += 1.0
    return t


def kick_phases(spec: HarperSpec) -> np.ndarray:
    """Diagonal kick factor exp(-i*tau*g*cos(2*pi*j*eta/N)), sites j = 1..N."""
    j = np.arange(1, spec.n + 1)
    return np.exp(-1j * spec.tau * spec.g * np.cos(2.0 * np.pi * j * spec.eta / spec.n))


def _hop_factor(spec: HarperSpec) -> np.ndarray:
    """exp(-i*tau*T) from the analytic eigenmodes of the hopping matrix.

    Open chains diagonalize in sine modes sin(j*k*pi/(N+1)) with energies
    2*cos(k*pi/(N+1)); closed chains in plane waves exp(2*pi*i*j*k/N) with
    energies 2*cos(2*pi*k/N).
    """
    n = spec.n
    if spec.boundary == "open":
        j = np.arange(1, n + 1)
        modes = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, j) * np.pi / (n + 1))
        energies = 2.0 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
        return (modes * np.exp(-1j * spec.tau * energies)) @ modes.T
    j = np.arange(n)
    modes = np.exp(2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)
    energies = 2.0 * np.cos(2.0 * np.pi * j / n)
    return (modes * np.exp(-1j * spec.tau * energies)) @ modes.conj().T


def floquet_step(spec: HarperSpec) -> np.ndarray:
    """One-period unitary: hop factor times diagonal kick phases (kick acts first)."""
    return _hop_factor(spec) * kick_phases(spec)[np.newaxis, :]


def propagate(spec: HarperSpec, n_kicks: int, initial: InitialState) -> tuple[complex, np.ndarray]:
    """Evolve the encoded state through n_kicks periods.

    Returns (vacuum amplitude, one-particle amplitude vector).  The vacuum
    amplitude is constant: the kick potential and the hopping both annihilate
    the empty chain.
    """
    if n_kicks < 0:
        raise ValueError(f"kick count must be >= 0, got {n_kicks}")
    psi = np.zeros(spec.n, dtype=complex)
    psi[0] = initial.beta
    step = floquet_step(spec)
    for _ in range(n_kicks):
        psi = step @ psi
    return complex(initial.alpha), psi


def _site_amplitudes(spec: HarperSpec, n_kicks: int) -> np.ndarray:
    """Unit-seed amplitude vector: n_kicks periods applied to a particle at site 1."""
    psi = np.zeros(spec.n, dtype=complex)
    psi[0] = 1.0
    step = floquet_step(spec)
    for _ in range(n_kicks):
        psi = step @ psi
    return psi


def free_occupation_profile(spec: HarperSpec, n_kicks: int, initial: InitialState) -> np.ndarray:
    """Site-occupation expectation values after n_kicks periods, no interruption."""
    _, psi = propagate(spec, n_kicks, initial)
    return np.abs(psi) ** 2


def fidelity_free_kicked(spec: HarperSpec, n_kicks: int, initial: InitialState | None = None) -> np.ndarray:
    """Transfer fidelity per site after n_kicks periods, no interruption.

    Without ``initial``: the analytic Bloch-sphere average
    1/2 + |u_l|^2/6 + Re(u_l)/3 built from the unit-seed amplitudes u.
    With it: the per-state fidelity of (alpha, beta).
    """
    u = _site_amplitudes(spec, n_kicks)
    if initial is None:
        m = BLOCH_MOMENTS
        return (
            m.abs_alpha_sq
            + (m.abs_alpha_4 - m.alpha_sq_beta_sq) * np.abs(u) ** 2
            + 2.0 * m.alpha_sq_beta_sq * u.real
        )
    alpha, beta = initial.alpha, initial.beta
    x = abs(beta) ** 2 * np.abs(u) ** 2
    y = beta * np.conj(alpha) * u
    return abs(alpha) ** 2 * (1.0 - x) + abs(beta) ** 2 * x + 2.0 * (alpha * np.conj(beta) * y).real


@dataclass(frozen=True)
class HarperQdpResult:
    """Per-site readout after a site-m occupation measurement at kick n0.

    ``occupation`` and ``coherence`` are the interrupted RDM elements, rows of
    the measured-then-evolved density matrix; ``detector`` is the occupation
    difference against the uninterrupted run (sums to zero: the measurement
    preserves the total particle-number expectation); ``fidelity`` is the
    Bloch-sphere-averaged transfer fidelity.
    """

    occupation: np.ndarray
    coherence: np.ndarray
    detector: np.ndarray
    fidelity: np.ndarray
    free_occupation: np.ndarray
    m: int
    n0: int
    n: int

    def __post_init__(self) -> None:
        total = float(np.sum(self.detector))
        if abs(total) > 1e-9:
            raise ValueError(f"detector profile must sum to 0, got {total:.3e}")


def qdp_and_detect(
    spec: HarperSpec,
    m: int,
    n0: int,
    n: int,
    initial: InitialState,
) -> HarperQdpResult:
    """Measure the occupation of site m after n0 kicks, read out after n kicks.

    The measurement splits the evolution into a survive branch (amplitude at m
    removed, vacuum component retained) and a collapse branch (the amplitude
    found at m, re-released from m); both branches evolve freely for the
    remaining n - n0 kicks and are summed incoherently.
    """
    if not 1 <= m <= spec.n:
        raise ValueError(f"measurement site m = {m} outside 1..{spec.n}")
    if not 0 <= n0 <= n:
        raise ValueError(f"need 0 <= n0 <= n, got n0 = {n0}, n = {n}")
    alpha, beta = complex(initial.alpha), complex(initial.beta)

    u_mid = _site_amplitudes(spec, n0)
    found = u_mid[m - 1]
    survive_seed = u_mid.copy()
    survive_seed[m - 1] = 0.0

    step = floquet_step(spec)
    h = survive_seed
    k = np.zeros(spec.n, dtype=complex)
    k[m - 1] = found
    u_free = u_mid
    for _ in range(n - n0):
        h = step @ h
        k = step @ k
        u_free = step @ u_free

    abs2 = np.abs(h) ** 2 + np.abs(k) ** 2
    occupation = abs(beta) ** 2 * abs2
    coherence = alpha * np.conj(beta) * np.conj(h)
    free_occ = abs(beta) ** 2 * np.abs(u_free) ** 2
    detector = occupation - free_occ
    mom = BLOCH_MOMENTS
    fidelity = (
        mom.abs_alpha_sq
        + (mom.abs_alpha_4 - mom.alpha_sq_beta_sq) * abs2
        + 2.0 * mom.alpha_sq_beta_sq * h.real
    )
    return HarperQdpResult(
        occupation=occupation,
        coherence=coherence,
        detector=detector,
        fidelity=fidelity,
        free_occupation=free_occ,
        m=m,
        n0=n0,
        n=n,
    )


def spread_metric(profile: np.ndarray) -> float:
    """Participation width (sum p)^2 / sum p^2 of a non-negative profile.

    A delta profile gives 1, a uniform profile over N sites gives N.
    """
    p = np.asarray(profile, dtype=float)
    if p.size == 0 or np.any(p < -1e-12):
        raise ValueError("profile must be non-negative and non-empty")
    total = float(p.sum())
    if total <= 0.0:
        raise ValueError("profile sums to zero; width undefined")
    return float(total * total / np.sum(p * p))
