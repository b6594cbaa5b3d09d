"""
Lightcone ZK — desk-scale relativistic cryptography laboratory.
Finite-field commitments, the two-prover zero-knowledge protocol for
Hamiltonian Cycle with light-cone timing checks, coupled nonlocal games
and numerical checks of the consecutive-measurement bounds.
"""

__version__ = "1.0.0"
