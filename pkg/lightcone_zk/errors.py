"""
errors.py — Exception hierarchy for the laboratory.

Every error raised on a violated precondition derives from LabError and
from the builtin it specializes, so `except ValueError` still works.
"""


class LabError(Exception):
    """Base class for all laboratory errors."""


# ─── Field arithmetic ────────────────────────────────────────

class ModulusMismatch(LabError, ValueError):
    pass


class DivisionByZero(LabError, ZeroDivisionError):
    pass


class ShapeMismatch(LabError, ValueError):
    pass


class NotPrime(LabError, ValueError):
    pass


# ─── Combinatorics ───────────────────────────────────────────

class SizeMismatch(LabError, ValueError):
    pass


class TooLarge(LabError, ValueError):
    """Input exceeds a brute-force guard."""


class InvalidGraph(LabError, ValueError):
    pass


# ─── Linear algebra ──────────────────────────────────────────

class InvalidOperator(LabError, ValueError):
    pass


class DimensionMismatch(LabError, ValueError):
    pass


class KappaOutOfRange(LabError, ValueError):
    pass


class BlocksNotOrthogonal(LabError, ValueError):
    pass


# ─── Games and commitments ───────────────────────────────────

class NotUniform(LabError, ValueError):
    pass


class NotProjective(LabError, ValueError):
    pass


class ParameterOrder(LabError, ValueError):
    pass


class ValueOutOfRange(LabError, ValueError):
    pass


class WidthMismatch(LabError, ValueError):
    pass


# ─── Spacetime and protocol ──────────────────────────────────

class CausalityViolationInConstruction(LabError, ValueError):
    """A receive event precedes its light-cone arrival."""


class MismatchedRun(LabError, ValueError):
    pass


class InvalidWitness(LabError, ValueError):
    pass


class MalformedTranscript(LabError, ValueError):
    pass


class GraphIsHamiltonian(LabError, ValueError):
    pass


class SignalingViolation(LabError, TypeError):
    """A second-prover strategy asks for data it cannot causally hold."""


class RewindingError(LabError, RuntimeError):
    """A verifier strategy was invoked twice in one round."""


class TrialsCancelled(LabError, RuntimeError):
    pass


class UsageError(LabError, ValueError):
    pass
