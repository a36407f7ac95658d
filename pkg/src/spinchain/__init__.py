"""Spin-chain state transfer under instantaneous local quantum processes.

Analytic one- and two-magnon propagators, transfer-fidelity protocols with
projective or unitary interruptions, kicked-Harper Floquet dynamics, and an
independent dense-matrix cross-check oracle.
"""
__version__ = "0.1.0"
