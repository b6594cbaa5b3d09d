"""
games.py — Two-player games on the uniform distribution.

Handles:
  • Game descriptions with exhaustive win tables
  • The coupled game (Bob gets two distinct inputs, must win both)
  • Exact classical values by best-response scans over deterministic strategies
  • Classical, quantum and consecutive-measurement strategy evaluation
  • CHSH over 𝔽_Q, its parallel repetition, and their closed-form bounds
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import INEQUALITY_TOL, MAX_QUANTUM_DIMENSION, MAX_STRATEGY_EVALUATIONS
from .errors import (
    DimensionMismatch, InvalidOperator, NotProjective, NotUniform, ParameterOrder,
    ShapeMismatch, TooLarge,
)
from .models import CheckReport
from .quantum import DensityMatrix, PureState, ProjectorFamily
from .utils import cube_root, exact_cube_root

logger = logging.getLogger(__name__)

Valuation = Callable[[Hashable, Hashable, Hashable, Hashable], bool]

_SCAN_CHUNK = 4096


# ─── Games ───────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Game:
    """G = (I_A, I_B, O_A, O_B, V) with inputs drawn independently and uniformly."""
    inputs_a: Tuple
    inputs_b: Tuple
    outputs_a: Tuple
    outputs_b: Tuple
    valuation: Valuation
    uniform: bool = True
    name: str = "game"

    def __post_init__(self):
        for label in ("inputs_a", "inputs_b", "outputs_a", "outputs_b"):
            values = tuple(getattr(self, label))
            if not values:
                raise ValueError(f"{label} must be non-empty")
            object.__setattr__(self, label, values)

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return len(self.inputs_a), len(self.inputs_b), len(self.outputs_a), len(self.outputs_b)

    def wins(self, x, y, a, b) -> bool:
        return bool(self.valuation(x, y, a, b))

    @cached_property
    def win_table(self) -> np.ndarray:
        """W[x, y, a, b] ∈ {0, 1}, indexed by position in each tuple."""
        table = np.zeros(self.shape, dtype=np.int8)
        for (i, x), (j, y), (k, a), (l, b) in itertools.product(
            enumerate(self.inputs_a), enumerate(self.inputs_b),
            enumerate(self.outputs_a), enumerate(self.outputs_b),
        ):
            table[i, j, k, l] = 1 if self.valuation(x, y, a, b) else 0
        table.setflags(write=False)
        return table


@dataclass(frozen=True)
class ProjectivityCertificate:
    """S = max over (x, y, a) of the number of winning Bob outputs."""
    S: int

    @property
    def projective(self) -> bool:
        return self.S <= 1


def projectivity(G: Game) -> ProjectivityCertificate:
    return ProjectivityCertificate(int(G.win_table.sum(axis=3).max()))


def couple_game(G: Game) -> Game:
    """Bob receives an ordered pair y ≠ y′ and answers (b, b′); both instances must be won."""
    if not G.uniform:
        raise NotUniform(f"{G.name} is not on the uniform distribution")
    if len(G.inputs_b) < 2:
        raise ValueError("coupling needs at least two Bob inputs")
    pairs = tuple((y, z) for y in G.inputs_b for z in G.inputs_b if y != z)
    answers = tuple(itertools.product(G.outputs_b, repeat=2))

    def valuation(x, yz, a, bc):
        return G.valuation(x, yz[0], a, bc[0]) and G.valuation(x, yz[1], a, bc[1])

    return Game(G.inputs_a, pairs, G.outputs_a, answers, valuation, name=f"{G.name}_coup")


def always_win_game(nx: int = 2, ny: int = 2, na: int = 2, nb: int = 2) -> Game:
    return Game(range(nx), range(ny), range(na), range(nb), lambda *_: True, name="always-win")


def chsh_q_game(Q: int, P: int = 2) -> Game:
    """x ∈ 𝔽_Q, y ∈ {0..P−1}; win iff a + b = x·y mod Q."""
    if P > Q:
        raise ParameterOrder(f"P = {P} exceeds Q = {Q}")
    return Game(
        range(Q), range(P), range(Q), range(Q),
        lambda x, y, a, b: (a + b) % Q == (x * y) % Q,
        name=f"CHSH^{Q}({P})",
    )


def parallel_chsh_q_game(Q: int, n: int) -> Game:
    """n parallel CHSH^Q(2) instances; all must be won."""
    strings_q = tuple(itertools.product(range(Q), repeat=n))
    strings_2 = tuple(itertools.product(range(2), repeat=n))

    def valuation(x, y, a, b):
        return all((ai + bi) % Q == (xi * yi) % Q for xi, yi, ai, bi in zip(x, y, a, b))

    return Game(strings_q, strings_2, strings_q, strings_q, valuation, name=f"CHSH^{Q}(2)^{n}")


# ─── Classical Value ─────────────────────────────────────────

def _scan_chunk(W: np.ndarray, lo: int, hi: int) -> int:
    """
    Best total wins over side-1 deterministic strategies with index in [lo, hi),
    side 2 playing the per-input best response. W has shape (n1, n2, o1, o2).
    """
    n1, _, o1, _ = W.shape
    idx = np.arange(lo, hi, dtype=np.int64)
    digits = (idx[:, None] // (o1 ** np.arange(n1, dtype=np.int64))[None, :]) % o1   # (chunk, n1)
    gathered = W[np.arange(n1)[None, :], :, digits, :]                               # (chunk, n1, n2, o2)
    scores = gathered.sum(axis=1, dtype=np.int64).max(axis=2).sum(axis=1)
    return int(scores.max())


def classical_value(G: Game, workers: int = 1) -> Fraction:
    """Exact optimum over deterministic strategies of the uniform-average win probability."""
    nx, ny, na, nb = G.shape
    count_a, count_b = na ** nx, nb ** ny
    if count_a <= count_b:
        W, strategies, per_strategy = G.win_table, count_a, nx * ny * nb
    else:
        W, strategies, per_strategy = G.win_table.transpose(1, 0, 3, 2), count_b, nx * ny * na
    evaluations = strategies * per_strategy
    if evaluations > MAX_STRATEGY_EVALUATIONS:
        raise TooLarge(f"{G.name}: {evaluations} strategy evaluations exceed {MAX_STRATEGY_EVALUATIONS}")

    bounds = [(lo, min(lo + _SCAN_CHUNK, strategies)) for lo in range(0, strategies, _SCAN_CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            best = max(pool.map(lambda b: _scan_chunk(W, *b), bounds))
    else:
        best = max(_scan_chunk(W, lo, hi) for lo, hi in bounds)

    value = Fraction(best, nx * ny)
    logger.debug("classical value of %s = %s (%d strategies scanned)", G.name, value, strategies)
    return value


# ─── Strategies ──────────────────────────────────────────────

@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic answer functions, optionally mixed with shared randomness."""
    fA: Dict
    fB: Dict
    mixture: Tuple[Tuple[Fraction, "ClassicalStrategy"], ...] = ()

    @classmethod
    def mixed(cls, components: Sequence[Tuple[Fraction, "ClassicalStrategy"]]) -> "ClassicalStrategy":
        total = sum(Fraction(w) for w, _ in components)
        if total != 1:
            raise ValueError(f"mixture weights sum to {total}, expected 1")
        return cls({}, {}, tuple((Fraction(w), s) for w, s in components))

    @classmethod
    def constant(cls, G: Game, a=0, b=0) -> "ClassicalStrategy":
        return cls({x: a for x in G.inputs_a}, {y: b for y in G.inputs_b})


class QuantumStrategy:
    """
    Shared state ρ on ℂ^{d_A} ⊗ ℂ^{d_B}; Alice's measurement for input x is row x of
    `alice` (one block per output), likewise Bob. Every row must sum to the identity.
    """

    def __init__(self, state: DensityMatrix, alice: ProjectorFamily, bob: ProjectorFamily):
        if alice.dim * bob.dim != state.dim:
            raise DimensionMismatch(f"state dimension {state.dim} ≠ {alice.dim}·{bob.dim}")
        if state.dim > MAX_QUANTUM_DIMENSION:
            raise TooLarge(f"total dimension {state.dim} exceeds {MAX_QUANTUM_DIMENSION}")
        if not alice.is_complete():
            raise InvalidOperator("Alice's projectors do not sum to the identity")
        if not bob.is_complete():
            raise NotProjective("Bob's projectors do not sum to the identity")
        self.state = state
        self.alice = alice
        self.bob = bob

    @property
    def dims(self) -> Tuple[int, int]:
        return self.alice.dim, self.bob.dim

    def joint_probabilities(self) -> np.ndarray:
        """p[x, y, a, b] = tr((A_x^a ⊗ B_y^b) ρ)."""
        dA, dB = self.dims
        rho = self.state.matrix.reshape(dA, dB, dA, dB)
        return np.einsum("xaik,ybjl,klij->xyab", self.alice.blocks, self.bob.blocks, rho,
                         optimize=True).real


@dataclass(frozen=True)
class SequentialStrategy:
    """Coupled-game strategy: Bob measures y, then y′ on the post-measurement state."""
    base: QuantumStrategy
    game: Game

    @cached_property
    def coupled(self) -> Game:
        return couple_game(self.game)

    def joint_probabilities(self) -> np.ndarray:
        """
        p[x, y, y′, a, b, b′] = tr((A_x^a ⊗ B_{y′}^{b′} B_y^b) ρ (I ⊗ B_y^b B_{y′}^{b′})).
        """
        dA, dB = self.base.dims
        rho = self.base.state.matrix.reshape(dA, dB, dA, dB)
        B = self.base.bob.blocks
        K = np.einsum("zcjm,ybml->ybzcjl", B, B)          # B_{y′}^{b′} B_y^b
        Kd = np.conj(np.swapaxes(K, -1, -2))
        return np.einsum("xaik,ybzcjl,klim,ybzcmj->xyzabc", self.base.alice.blocks, K, rho, Kd,
                         optimize=True).real


Strategy = Union[ClassicalStrategy, QuantumStrategy, SequentialStrategy]


def _classical_value_of(G: Game, s: ClassicalStrategy) -> Fraction:
    if s.mixture:
        return sum((w * _classical_value_of(G, part) for w, part in s.mixture), Fraction(0))
    if set(s.fA) != set(G.inputs_a) or set(s.fB) != set(G.inputs_b):
        raise ShapeMismatch(f"strategy inputs do not match {G.name}")
    outs_a, outs_b = set(G.outputs_a), set(G.outputs_b)
    if any(v not in outs_a for v in s.fA.values()) or any(v not in outs_b for v in s.fB.values()):
        raise ShapeMismatch(f"strategy outputs fall outside {G.name}")
    wins = sum(1 for x in G.inputs_a for y in G.inputs_b if G.wins(x, y, s.fA[x], s.fB[y]))
    return Fraction(wins, len(G.inputs_a) * len(G.inputs_b))


def _quantum_value_of(G: Game, s: QuantumStrategy) -> float:
    nx, ny, na, nb = G.shape
    if (s.alice.n, s.alice.S, s.bob.n, s.bob.S) != (nx, na, ny, nb):
        raise ShapeMismatch(
            f"strategy shape {(s.alice.n, s.bob.n, s.alice.S, s.bob.S)} does not match {G.name} {G.shape}"
        )
    p = s.joint_probabilities()
    return float((G.win_table * p).sum() / (nx * ny))


def _sequential_value_of(G: Game, s: SequentialStrategy) -> float:
    if G.shape != s.coupled.shape:
        raise ShapeMismatch(f"{G.name} is not the coupled game of {s.game.name}")
    W = s.game.win_table.astype(float)
    nx, ny, _, _ = s.game.shape
    both = np.einsum("xyab,xzac->xyzabc", W, W)
    p = s.joint_probabilities()
    total = (both * p).sum(axis=(3, 4, 5))
    off_diagonal = total.sum() - np.einsum("xyy->", total)
    return float(off_diagonal / (nx * ny * (ny - 1)))


def evaluate_strategy(G: Game, s: Strategy) -> Union[Fraction, float]:
    """Win probability: exact for classical strategies, Born-rule numeric for quantum ones."""
    if isinstance(s, ClassicalStrategy):
        return _classical_value_of(G, s)
    if isinstance(s, SequentialStrategy):
        return _sequential_value_of(G, s)
    if isinstance(s, QuantumStrategy):
        return _quantum_value_of(G, s)
    raise TypeError(f"unsupported strategy type {type(s).__name__}")


def consecutive_strategy(G: Game, s: QuantumStrategy) -> SequentialStrategy:
    """The coupled strategy in which Bob measures his two inputs one after the other."""
    if not s.bob.is_complete():
        raise NotProjective("Bob's measurements are not complete projective measurements")
    return SequentialStrategy(base=s, game=G)


def check_coupled_relation(G: Game, s: QuantumStrategy) -> CheckReport:
    """Coupled value ≥ (1/64S)·max(v − 1/n, 0)³ with n = |I_B| and S from projectivity."""
    v = float(evaluate_strategy(G, s))
    seq = consecutive_strategy(G, s)
    coupled = evaluate_strategy(seq.coupled, seq)
    S = max(projectivity(G).S, 1)
    n = len(G.inputs_b)
    bound = max(v - 1.0 / n, 0.0) ** 3 / (64.0 * S)
    margin = coupled - bound
    return CheckReport(
        theorem="coupled-game", passed=margin >= -INEQUALITY_TOL, margin=margin,
        dim=s.state.dim, n=n, S=S, V=v, E=coupled, bound=bound, extra={"game": G.name},
    )


# ─── Strategy Builders ───────────────────────────────────────

def _angle_measurement(theta: float) -> List[np.ndarray]:
    v = np.array([np.cos(theta), np.sin(theta)])
    w = np.array([-np.sin(theta), np.cos(theta)])
    return [np.outer(v, v), np.outer(w, w)]


def epr_chsh_strategy() -> QuantumStrategy:
    """|Φ⁺⟩ with Alice at angles 0, π/4 and Bob at ±π/8; wins binary CHSH with cos²(π/8)."""
    phi = PureState.normalized([1, 0, 0, 1])
    alice = ProjectorFamily(np.array([_angle_measurement(0.0), _angle_measurement(np.pi / 4)]))
    bob = ProjectorFamily(np.array([_angle_measurement(np.pi / 8), _angle_measurement(-np.pi / 8)]))
    return QuantumStrategy(phi.density(), alice, bob)


def embed_classical(
    G: Game, strategies: Sequence[ClassicalStrategy], weights: Optional[Sequence[Fraction]] = None
) -> QuantumStrategy:
    """
    Diagonal quantum strategy reproducing a mixture of deterministic strategies:
    ρ = Σ_k w_k |k⟩⟨k| ⊗ |k⟩⟨k|, A_x^a = Σ_k [fA_k(x) = a] |k⟩⟨k|, likewise for Bob.
    """
    m = len(strategies)
    if m == 0:
        raise ValueError("need at least one strategy")
    weights = [Fraction(1, m)] * m if weights is None else [Fraction(w) for w in weights]
    if sum(weights) != 1:
        raise ValueError(f"weights sum to {sum(weights)}, expected 1")

    def measurements(inputs, outputs, pick) -> np.ndarray:
        blocks = np.zeros((len(inputs), len(outputs), m, m))
        for i, x in enumerate(inputs):
            for k, strat in enumerate(strategies):
                blocks[i, outputs.index(pick(strat)[x]), k, k] = 1.0
        return blocks

    rho = np.zeros((m * m, m * m))
    for k, w in enumerate(weights):
        rho[k * m + k, k * m + k] = float(w)
    alice = ProjectorFamily(measurements(G.inputs_a, G.outputs_a, lambda s: s.fA))
    bob = ProjectorFamily(measurements(G.inputs_b, G.outputs_b, lambda s: s.fB))
    return QuantumStrategy(DensityMatrix(rho), alice, bob)


# ─── CHSH^Q Bounds ───────────────────────────────────────────

@dataclass
class BoundsReport:
    """Closed-form values for CHSH^Q(P) and the coupled parallel repetition."""
    Q: int
    P: int
    n_rep: int
    single_bound: float
    single_bound_exact: Optional[Fraction]
    coupled_single: Fraction
    closed_form_coupled: Fraction
    exact_coupled: Fraction
    parallel_value_bound: Optional[float]
    parallel_coupled_cap: Optional[Fraction]
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def normalization_ratio(self) -> Fraction:
        """exact / closed form = 2ⁿ / (2ⁿ − 1)."""
        return self.exact_coupled / self.closed_form_coupled

    def to_dict(self) -> dict:
        record = {
            "Q": self.Q,
            "P": self.P,
            "n_rep": self.n_rep,
            "single_bound": self.single_bound,
            "single_bound_exact": self.single_bound_exact,
            "single_bound_approximate": self.single_bound_exact is None,
            "coupled_single": self.coupled_single,
            "closed_form_coupled": self.closed_form_coupled,
            "exact_coupled": self.exact_coupled,
            "normalization_ratio": self.normalization_ratio,
            "parallel_value_bound": self.parallel_value_bound,
            "parallel_coupled_cap": self.parallel_coupled_cap,
            "coupled_pairs": "ordered",
        }
        record.update(self.extra)
        return record


def chsh_q_bounds(Q: int, P: int, n_rep: int) -> BoundsReport:
    """
    (i)   1/P + 4/Q^{1/3}
    (ii)  ((1 + 1/Q)ⁿ − 1)/2ⁿ
    (iii) ((1 + 1/Q)ⁿ − 1)/(2ⁿ − 1), the exact mean of Q^{−|y−y′|} over ordered y ≠ y′
    (iv)  1/2ⁿ + 4(2n/(Q·2ⁿ))^{1/3}, only when Q > n
    """
    if P > Q:
        raise ParameterOrder(f"P = {P} exceeds Q = {Q}")
    if Q < 2 or P < 1 or n_rep < 1:
        raise ValueError(f"need Q ≥ 2, P ≥ 1, n_rep ≥ 1; got Q={Q}, P={P}, n_rep={n_rep}")

    root = exact_cube_root(Fraction(1, Q))
    if root is not None:
        single_exact = Fraction(1, P) + 4 * root
        single = float(single_exact)
    else:
        single_exact = None
        single = 1.0 / P + 4.0 * cube_root(Fraction(1, Q))[0]

    n = n_rep
    growth = (1 + Fraction(1, Q)) ** n - 1
    closed_form = growth / 2 ** n
    exact_mean = growth / (2 ** n - 1)

    parallel_bound, cap = None, None
    if Q > n:
        cap = Fraction(2 * n, Q * 2 ** n)
        cap_root, _ = cube_root(cap)
        parallel_bound = 1.0 / 2 ** n + 4.0 * cap_root

    return BoundsReport(
        Q=Q, P=P, n_rep=n, single_bound=single, single_bound_exact=single_exact,
        coupled_single=Fraction(1, Q), closed_form_coupled=closed_form, exact_coupled=exact_mean,
        parallel_value_bound=parallel_bound, parallel_coupled_cap=cap,
    )


def coupled_expectation_by_enumeration(Q: int, n: int) -> Fraction:
    """Mean of Q^{−Hamming(y, y′)} over all ordered pairs of distinct y, y′ ∈ {0,1}ⁿ."""
    strings = list(itertools.product((0, 1), repeat=n))
    total, pairs = Fraction(0), 0
    for y in strings:
        for z in strings:
            if y != z:
                total += Fraction(1, Q ** sum(a != b for a, b in zip(y, z)))
                pairs += 1
    return total / pairs


def parallel_modulus_for_epsilon(n: int, epsilon: Union[Fraction, float]) -> Union[Fraction, float]:
    """Q = 64·2^{2n}/(2n·ε³), giving a parallel value bound of (1 + ε)/2ⁿ."""
    if epsilon <= 0:
        raise ValueError("ε must be positive")
    if isinstance(epsilon, float):
        return 64.0 * 4 ** n / (2 * n * epsilon ** 3)
    return Fraction(64 * 4 ** n, 2 * n) / Fraction(epsilon) ** 3
