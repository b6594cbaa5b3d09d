"""
quantum.py — Dense operators and numerical checks of the consecutive-measurement bounds.

Handles:
  • Validated DensityMatrix / PureState / Projector / ProjectorFamily values
  • The averaged single-measurement value V and consecutive value E
  • Margin reports for the multi-outcome and single-outcome lower bounds on E,
    the almost-orthogonal states bound, the thresholded main proposition,
    the pinching inequality and the comparison with V(V² − 1/n)
  • Random instance generators (Ginibre states, QR-orthogonalized blocks)
  • Seeded parallel sweeps through TrialEngine
"""

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh

from .config import (
    DEGENERATE_NORM, INEQUALITY_TOL, MAX_QUANTUM_DIMENSION, PROJECTOR_TOL,
    PSD_TOL, STATE_TOL, DEFAULT_WORKERS,
)
from .engine import TrialEngine
from .errors import (
    BlocksNotOrthogonal, DimensionMismatch, InvalidOperator, KappaOutOfRange, TooLarge,
)
from .models import CheckReport

logger = logging.getLogger(__name__)

IntOrRange = Union[int, Sequence[int]]


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def _check_dim(d: int) -> None:
    if d > MAX_QUANTUM_DIMENSION:
        raise TooLarge(f"dimension {d} exceeds the dense limit {MAX_QUANTUM_DIMENSION}")


# ─── Values ──────────────────────────────────────────────────

class PureState:
    """Unit vector in ℂ^d."""

    def __init__(self, amplitudes):
        vec = _frozen(amplitudes).reshape(-1)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > STATE_TOL:
            raise InvalidOperator(f"state norm is {norm}, expected 1")
        self.amplitudes = vec

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(vec / np.linalg.norm(vec))

    @classmethod
    def basis(cls, d: int, index: int) -> "PureState":
        vec = np.zeros(d, dtype=complex)
        vec[index] = 1.0
        return cls(vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> float:
        """|⟨self|other⟩|²."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite d×d matrix."""

    def __init__(self, matrix):
        m = _frozen(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperator(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > STATE_TOL:
            raise InvalidOperator("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > STATE_TOL:
            raise InvalidOperator(f"density matrix trace is {np.trace(m).real}, expected 1")
        lowest = float(eigvalsh(m)[0])
        if lowest < -PSD_TOL:
            raise InvalidOperator(f"density matrix has negative eigenvalue {lowest}")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d) / d)


class Projector:
    """Orthogonal projector: P² = P = P† within PROJECTOR_TOL (Frobenius)."""

    def __init__(self, matrix):
        m = _frozen(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperator(f"projector must be square, got shape {m.shape}")
        if np.linalg.norm(m @ m - m) > PROJECTOR_TOL or np.linalg.norm(m - m.conj().T) > PROJECTOR_TOL:
            raise InvalidOperator("matrix is not an orthogonal projector")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    @classmethod
    def onto(cls, state: PureState) -> "Projector":
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()))

    @classmethod
    def identity(cls, d: int) -> "Projector":
        return cls(np.eye(d))

    @classmethod
    def zero(cls, d: int) -> "Projector":
        return cls(np.zeros((d, d)))


class ProjectorFamily:
    """
    n families of S mutually orthogonal projectors, stored as an (n, S, d, d) array.
    P_i = Σ_s P_i^s is itself a projector.
    """

    def __init__(self, blocks):
        arr = _frozen(blocks)
        if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
            raise InvalidOperator(f"blocks must have shape (n, S, d, d), got {arr.shape}")
        n, S, d, _ = arr.shape
        for i in range(n):
            for s in range(S):
                Projector(arr[i, s])
                for t in range(s + 1, S):
                    if np.linalg.norm(arr[i, s] @ arr[i, t]) > PROJECTOR_TOL:
                        raise BlocksNotOrthogonal(f"blocks {s} and {t} of family {i} overlap")
        self.blocks = arr

    @classmethod
    def from_projectors(cls, rows: Sequence[Sequence[Projector]]) -> "ProjectorFamily":
        return cls(np.array([[p.matrix for p in row] for row in rows]))

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def S(self) -> int:
        return self.blocks.shape[1]

    @property
    def dim(self) -> int:
        return self.blocks.shape[2]

    def totals(self) -> np.ndarray:
        """P_i = Σ_s P_i^s, shape (n, d, d)."""
        return self.blocks.sum(axis=1)

    def is_complete(self, tol: float = PROJECTOR_TOL) -> bool:
        """Every P_i equals the identity, i.e. each row is a full measurement."""
        eye = np.eye(self.dim)
        return all(np.linalg.norm(P - eye) <= tol for P in self.totals())


# ─── V and E ─────────────────────────────────────────────────

def compute_V_E(sigma: DensityMatrix, F: ProjectorFamily) -> Tuple[float, float]:
    """
    V = (1/n) Σ_i tr(P_i σ)
    E = (1/n(n−1)) Σ_{i≠j} Σ_{s,s'} tr(P_j^{s'} P_i^s σ P_i^s P_j^{s'})
    """
    if sigma.dim != F.dim:
        raise DimensionMismatch(f"state dimension {sigma.dim} vs projector dimension {F.dim}")
    n = F.n
    if n < 2:
        raise ValueError("E needs at least two projector families")

    totals = F.totals()
    V = float(np.einsum("iab,ba->", totals, sigma.matrix).real) / n

    # tr(P_j^{s'} X P_j^{s'}) = tr(P_j^{s'} X), so summing s' leaves tr(P_j X)
    pinched = np.einsum("isab,bc,iscd->iad", F.blocks, sigma.matrix, F.blocks)
    cross = np.einsum("jab,iba->ji", totals, pinched).real
    E = float(cross.sum() - np.trace(cross)) / (n * (n - 1))
    return V, E


def multi_bound(V: float, n: int, S: int) -> float:
    """(1/64S)·max(V − 1/n, 0)³."""
    return max(V - 1.0 / n, 0.0) ** 3 / (64.0 * S)


def _report(theorem: str, margin: float, **fields) -> CheckReport:
    return CheckReport(theorem=theorem, passed=margin >= -INEQUALITY_TOL, margin=float(margin), **fields)


# ─── Theorem Checks ──────────────────────────────────────────

def check_theorem_multi(sigma: DensityMatrix, F: ProjectorFamily) -> CheckReport:
    """E ≥ (1/64S)(V − 1/n)³ for any number S of orthogonal outcomes."""
    V, E = compute_V_E(sigma, F)
    bound = multi_bound(V, F.n, F.S)
    return _report("multi", E - bound, dim=F.dim, n=F.n, S=F.S, V=V, E=E, bound=bound)


def check_theorem_single(sigma: DensityMatrix, F: ProjectorFamily) -> CheckReport:
    """The S = 1 case: E ≥ (1/64)(V − 1/n)³."""
    if F.S != 1:
        raise ValueError(f"single-outcome check needs S = 1, got S = {F.S}")
    report = check_theorem_multi(sigma, F)
    report.theorem = "single"
    return report


def compare_bounds(V: float, n: int, S: int) -> Tuple[float, Optional[float]]:
    """
    Our cubic bound next to V(V² − 1/n).
    The second bound only applies for S = 1 and V ≥ 1/√n; otherwise None.
    """
    if not 0.0 <= V <= 1.0:
        raise ValueError(f"V must lie in [0, 1], got {V}")
    ours = multi_bound(V, n, S)
    if S == 1 and V >= 1.0 / np.sqrt(n):
        return ours, V * (V * V - 1.0 / n)
    return ours, None


def check_theorem_unruh(sigma: DensityMatrix, F: ProjectorFamily) -> CheckReport:
    """Both lower bounds on E at once; the quadratic one only where it applies."""
    V, E = compute_V_E(sigma, F)
    ours, unruh = compare_bounds(min(max(V, 0.0), 1.0), F.n, F.S)
    margin = E - ours if unruh is None else min(E - ours, E - unruh)
    return _report(
        "unruh", margin, dim=F.dim, n=F.n, S=F.S, V=V, E=E, bound=ours if unruh is None else max(ours, unruh),
        extra={"ours": ours, "unruh": unruh, "applicable": unruh is not None},
    )


def lemma_projection_identities(
    phi: PureState, P: Projector, psi: Optional[PureState] = None
) -> CheckReport:
    """
    With ψ = P|φ⟩/‖P|φ⟩‖:  |⟨φ|ψ⟩|² = ‖P|φ⟩‖² = tr(P|φ⟩⟨φ|).
    For any fixed point ψ of P:  |⟨φ|ψ⟩|² ≤ tr(P|φ⟩⟨φ|).
    """
    if phi.dim != P.dim:
        raise DimensionMismatch(f"state dimension {phi.dim} vs projector dimension {P.dim}")
    projected = P.matrix @ phi.amplitudes
    weight = float(np.vdot(projected, projected).real)
    trace = float(np.vdot(phi.amplitudes, projected).real)

    degenerate = np.sqrt(weight) < DEGENERATE_NORM
    equality_violation = 0.0
    if degenerate:
        logger.debug("P|φ⟩ vanishes; skipping the normalized-projection identity")
    else:
        normalized = PureState.normalized(projected)
        overlap = phi.overlap(normalized)
        equality_violation = max(abs(overlap - weight), abs(weight - trace))

    if psi is None and not degenerate:
        psi = PureState.normalized(projected)
    inequality_violation = 0.0
    if psi is not None:
        if psi.dim != P.dim:
            raise DimensionMismatch(f"fixed point dimension {psi.dim} vs projector dimension {P.dim}")
        if np.linalg.norm(P.matrix @ psi.amplitudes - psi.amplitudes) > PROJECTOR_TOL:
            raise InvalidOperator("ψ is not a fixed point of P")
        inequality_violation = max(phi.overlap(psi) - trace, 0.0)

    worst = max(equality_violation, inequality_violation)
    return _report(
        "lemma-projection", -worst, dim=P.dim,
        extra={"degenerate": bool(degenerate), "equality_violation": equality_violation,
               "inequality_violation": inequality_violation},
    )


def check_almost_orthogonal(states: Sequence[PureState]) -> CheckReport:
    """λ_max(Σ|φᵢ⟩⟨φᵢ|) ≤ 1 + √((n−1)C/n) with C = Σ_{i≠j} |⟨φᵢ|φⱼ⟩|²."""
    if len(states) < 2:
        raise ValueError("need at least two states")
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise DimensionMismatch(f"states have different dimensions {sorted(dims)}")
    n = len(states)
    vectors = np.array([s.amplitudes for s in states])          # (n, d)
    gram = np.abs(vectors.conj() @ vectors.T) ** 2
    C = float(gram.sum() - np.trace(gram))
    # λ_max of Σ|φ⟩⟨φ| equals λ_max of the n×n Gram matrix
    top = float(eigvalsh(vectors.conj() @ vectors.T)[-1])
    bound = 1.0 + np.sqrt((n - 1) * C / n)
    return _report(
        "almost-orthogonal", bound - top, dim=dims.pop(), n=n, bound=float(bound),
        extra={"S_hat": top, "C": C},
    )


def threshold_set_size(sigma: DensityMatrix, F: ProjectorFamily, kappa: float) -> int:
    """|Z| for Z = {i : tr(P_i σ) ≥ V/κ}."""
    p = np.einsum("iab,ba->i", F.totals(), sigma.matrix).real
    V = p.mean()
    return int(np.sum(p >= V / kappa - INEQUALITY_TOL))


def check_main_proposition(
    sigma: DensityMatrix, F: ProjectorFamily, kappas: Iterable[float] = (2.0,)
) -> List[CheckReport]:
    """V ≤ (1 + 1/(κ−1))(1/n + √(κE/V)) for each κ > 1 (S = 1, V > 0)."""
    if F.S != 1:
        raise ValueError(f"main proposition needs S = 1, got S = {F.S}")
    kappas = list(kappas)
    for kappa in kappas:
        if kappa <= 1:
            raise KappaOutOfRange(f"κ must exceed 1, got {kappa}")
    V, E = compute_V_E(sigma, F)
    if V <= DEGENERATE_NORM:
        raise ValueError(f"V = {V} is too small for the thresholded bound")

    reports = []
    for kappa in kappas:
        rhs = (1.0 + 1.0 / (kappa - 1.0)) * (1.0 / F.n + np.sqrt(kappa * max(E, 0.0) / V))
        reports.append(_report(
            "main-proposition", rhs - V, dim=F.dim, n=F.n, S=1, V=V, E=E, bound=float(rhs),
            extra={"kappa": kappa, "Z": threshold_set_size(sigma, F, kappa)},
        ))
    return reports


def check_pinching(psi: PureState, blocks: Sequence[Projector]) -> CheckReport:
    """Σᵢ Pᵢ|ψ⟩⟨ψ|Pᵢ − (1/m)·P|ψ⟩⟨ψ|P is positive semidefinite, P = Σᵢ Pᵢ."""
    m = len(blocks)
    if m == 0:
        raise ValueError("need at least one block")
    for b in blocks:
        if b.dim != psi.dim:
            raise DimensionMismatch(f"block dimension {b.dim} vs state dimension {psi.dim}")
    for a in range(m):
        for b in range(a + 1, m):
            if np.linalg.norm(blocks[a].matrix @ blocks[b].matrix) > PROJECTOR_TOL:
                raise BlocksNotOrthogonal(f"blocks {a} and {b} overlap")

    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    P = sum(b.matrix for b in blocks)
    pinched = sum(b.matrix @ rho @ b.matrix for b in blocks)
    diff = pinched - (P @ rho @ P) / m
    lowest = float(eigvalsh((diff + diff.conj().T) / 2)[0])
    return CheckReport(
        theorem="pinching", passed=lowest >= -PSD_TOL, margin=lowest, dim=psi.dim, n=m,
        extra={"min_eigenvalue": lowest},
    )


# ─── Purification ────────────────────────────────────────────

def purify(sigma: DensityMatrix) -> PureState:
    """|φ⟩ = Σ_k √λ_k |k⟩|k⟩ on ℂ^d ⊗ ℂ^d, with partial trace σ."""
    vals, vecs = np.linalg.eigh(sigma.matrix)
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()
    d = sigma.dim
    phi = np.zeros(d * d, dtype=complex)
    for k in range(d):
        phi += np.sqrt(vals[k]) * np.kron(vecs[:, k], np.eye(d)[k])
    return PureState.normalized(phi)


def check_purified_lower_bound(sigma: DensityMatrix, F: ProjectorFamily) -> CheckReport:
    """
    S = 1: E ≥ (1/n(n−1)) Σ_{i≠j} pᵢ |⟨φᵢ|φⱼ⟩|² with φᵢ the normalized lifted projections
    of a purification and pᵢ = tr(Pᵢσ).
    """
    if F.S != 1:
        raise ValueError(f"purified bound needs S = 1, got S = {F.S}")
    V, E = compute_V_E(sigma, F)
    phi = purify(sigma)
    env = np.eye(sigma.dim)
    n = F.n

    weights, projected = [], []
    for P in F.totals():
        vec = np.kron(P, env) @ phi.amplitudes
        w = float(np.vdot(vec, vec).real)
        weights.append(w)
        projected.append(vec / np.sqrt(w) if np.sqrt(w) >= DEGENERATE_NORM else None)

    total = 0.0
    for i in range(n):
        if projected[i] is None:
            continue
        for j in range(n):
            if j != i and projected[j] is not None:
                total += weights[i] * abs(np.vdot(projected[i], projected[j])) ** 2
    lower = total / (n * (n - 1))
    return _report("purified-lower-bound", E - lower, dim=F.dim, n=n, S=1, V=V, E=E, bound=lower)


# ─── Generators ──────────────────────────────────────────────

def _gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure_state(d: int, rng: np.random.Generator) -> PureState:
    _check_dim(d)
    return PureState.normalized(_gaussian(d, rng))


def random_density_matrix(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre ensemble GG†/tr(GG†) of the given (default: random) rank."""
    _check_dim(d)
    r = rank if rank is not None else int(rng.integers(1, d + 1))
    G = _gaussian((d, r), rng)
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def random_orthogonal_blocks(d: int, ranks: Sequence[int], rng: np.random.Generator) -> List[Projector]:
    """Mutually orthogonal projectors of the given ranks from one QR-orthonormalized basis."""
    _check_dim(d)
    if sum(ranks) > d:
        raise ValueError(f"ranks {list(ranks)} exceed dimension {d}")
    basis, _ = np.linalg.qr(_gaussian((d, d), rng))
    blocks, start = [], 0
    for r in ranks:
        cols = basis[:, start:start + r]
        blocks.append(Projector(cols @ cols.conj().T))
        start += r
    return blocks


def random_projector(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> Projector:
    r = rank if rank is not None else int(rng.integers(0, d + 1))
    return random_orthogonal_blocks(d, [r], rng)[0]


def random_projector_family(d: int, n: int, S: int, rng: np.random.Generator) -> ProjectorFamily:
    """For each i: a random total rank split into S orthogonal blocks."""
    rows = []
    for _ in range(n):
        total = int(rng.integers(0, d + 1))
        ranks = rng.multinomial(total, [1.0 / S] * S)
        rows.append(random_orthogonal_blocks(d, [int(r) for r in ranks], rng))
    return ProjectorFamily.from_projectors(rows)


def tightness_instance(n: int) -> Tuple[DensityMatrix, ProjectorFamily]:
    """σ = |φ⟩⟨φ| with φ uniform over n basis states and P_i = |i⟩⟨i|: V = 1/n, E = 0."""
    phi = PureState.normalized(np.ones(n))
    family = ProjectorFamily.from_projectors([[Projector.onto(PureState.basis(n, i))] for i in range(n)])
    return phi.density(), family


# ─── Sweeps ──────────────────────────────────────────────────

def _pick(rng: np.random.Generator, value: IntOrRange) -> int:
    if isinstance(value, int):
        return value
    return int(rng.choice(list(value)))


def _trial_multi(rng, d, n, S) -> List[CheckReport]:
    return [check_theorem_multi(random_density_matrix(d, rng), random_projector_family(d, n, S, rng))]


def _trial_single(rng, d, n, S) -> List[CheckReport]:
    return [check_theorem_single(random_density_matrix(d, rng), random_projector_family(d, n, 1, rng))]


def _trial_unruh(rng, d, n, S) -> List[CheckReport]:
    return [check_theorem_unruh(random_density_matrix(d, rng), random_projector_family(d, n, 1, rng))]


def _trial_lemmas(rng, d, n, S) -> List[CheckReport]:
    return [lemma_projection_identities(random_pure_state(d, rng), random_projector(d, rng))]


def _trial_almost_orthogonal(rng, d, n, S) -> List[CheckReport]:
    return [check_almost_orthogonal([random_pure_state(d, rng) for _ in range(max(n, 2))])]


def _trial_main(rng, d, n, S) -> List[CheckReport]:
    sigma = random_density_matrix(d, rng)
    family = random_projector_family(d, n, 1, rng)
    V, _ = compute_V_E(sigma, family)
    if V <= DEGENERATE_NORM:
        # every projector annihilates σ; redraw with full-rank projectors
        family = ProjectorFamily.from_projectors([[Projector.identity(d)] for _ in range(n)])
    return check_main_proposition(sigma, family, (1.5, 2.0, 4.0))


def _trial_pinching(rng, d, n, S) -> List[CheckReport]:
    m = max(1, min(n, d))
    ranks = [int(r) for r in rng.multinomial(int(rng.integers(m, d + 1)), [1.0 / m] * m)]
    return [check_pinching(random_pure_state(d, rng), random_orthogonal_blocks(d, ranks, rng))]


def _trial_purified(rng, d, n, S) -> List[CheckReport]:
    return [check_purified_lower_bound(random_density_matrix(d, rng), random_projector_family(d, n, 1, rng))]


CHECKS: Dict[str, Callable[..., List[CheckReport]]] = {
    "multi":                _trial_multi,
    "single":               _trial_single,
    "unruh":                _trial_unruh,
    "lemma-projection":     _trial_lemmas,
    "almost-orthogonal":    _trial_almost_orthogonal,
    "main-proposition":     _trial_main,
    "pinching":             _trial_pinching,
    "purified-lower-bound": _trial_purified,
}


def sweep(
    theorem: str,
    trials: int,
    seed: int,
    dim: IntOrRange = 8,
    n: IntOrRange = 4,
    S: IntOrRange = 1,
    workers: int = DEFAULT_WORKERS,
    on_progress=None,
) -> List[CheckReport]:
    """Run `trials` random instances of one check; reports come back in trial order."""
    if theorem not in CHECKS:
        raise ValueError(f"unknown check {theorem!r}, expected one of {sorted(CHECKS)}")
    check = CHECKS[theorem]

    def trial(_index: int, trial_seed: int) -> List[CheckReport]:
        rng = np.random.default_rng(trial_seed)
        d, count, outcomes = _pick(rng, dim), _pick(rng, n), _pick(rng, S)
        _check_dim(d)
        return check(rng, d, count, outcomes)

    engine = TrialEngine(workers=workers, stage=theorem, on_progress=on_progress, on_log=logger.debug)
    batches = engine.run(trial, seed, trials)
    reports = [r for batch in batches for r in batch]
    failed = sum(1 for r in reports if not r.passed)
    if failed:
        logger.warning("%s: %d of %d checks failed", theorem, failed, len(reports))
    return reports


def sweep_theorem_multi(trials: int, seed: int, dim: IntOrRange = range(2, 33),
                        n: IntOrRange = range(2, 9), S: IntOrRange = range(1, 5),
                        workers: int = DEFAULT_WORKERS) -> List[CheckReport]:
    return sweep("multi", trials, seed, dim, n, S, workers)
