"""
zkproto.py — Two-prover relativistic zero-knowledge protocol for Hamiltonian Cycle.

Handles:
  • Prover preprocessing, commitment to the permuted adjacency matrix, openings
  • Verification (timing first, then the algebra of the chosen challenge)
  • ProtocolSession running a round on the light-cone network
  • Cheating prover pairs, a seeded Monte Carlo attack harness and the exact
    classical soundness value
  • Parameter sizing and the soundness bound
  • The forward-only transcript simulator and exact real-vs-simulated distance
  • Transcript JSON
"""

import inspect
import itertools
import json
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple, Union

from .config import (
    DEFAULT_CONFIDENCE, DEFAULT_PROCESSING_DELAY, DEFAULT_SEPARATION, DEFAULT_WORKERS,
    MAX_SOUNDNESS_SCAN_N, MAX_ZK_ENUMERATION_N, MAX_ZK_ENUMERATION_Q,
)
from .engine import TrialEngine
from .errors import (
    GraphIsHamiltonian, InvalidWitness, MalformedTranscript, RewindingError,
    SignalingViolation, TooLarge,
)
from .fq import FieldModulus, FqMatrix, matrix_entrywise, next_prime_at_least, sample_residue, sample_uniform
from .graphs import (
    Cycle, Graph, Permutation, adjacency_matrix, apply_permutation, enumerate_cycles,
    find_hamiltonian_cycle, missing_edges, random_permutation,
)
from .models import RejectReason, Verdict
from .spacetime import AgentLayout, LightConeNetwork, SpacetimeEvent, nss_check
from .utils import ceil_log2, exact_cube_root, to_json, win_rate_interval

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


# ─── Answers and Transcripts ─────────────────────────────────

@dataclass(frozen=True)
class PermutationOpening:
    """chall = 0: the permutation (as sent, possibly invalid) and the full key matrix A."""
    mapping: Tuple[int, ...]
    A: FqMatrix


@dataclass(frozen=True)
class CycleOpening:
    """chall = 1: a cycle (as sent) and A′_{u,v} for each of its directed couples."""
    vertices: Tuple[int, ...]
    openings: Tuple[Tuple[Edge, int], ...]

    @classmethod
    def build(cls, cycle: Cycle, values: Dict[Edge, int]) -> "CycleOpening":
        return cls(cycle.vertices, tuple((e, values[e]) for e in cycle.edges()))

    def as_dict(self) -> Dict[Edge, int]:
        return dict(self.openings)


Answer = Union[PermutationOpening, CycleOpening]


@dataclass(frozen=True)
class ProverWitness:
    """The Hamiltonian cycle plus the (Π, A) both provers agree on beforehand."""
    graph: Graph
    cycle: Cycle
    pi: Permutation
    A: FqMatrix

    def __post_init__(self):
        if self.cycle.n != self.graph.n or missing_edges(self.graph, self.cycle):
            raise InvalidWitness(f"{self.cycle.vertices} is not a Hamiltonian cycle of the graph")
        if self.pi.n != self.graph.n or self.A.shape != (self.graph.n, self.graph.n):
            raise InvalidWitness("preprocessing does not match the graph size")

    @classmethod
    def prepare(cls, G: Graph, cycle: Cycle, modulus: FieldModulus, rng: random.Random) -> "ProverWitness":
        pi = random_permutation(G.n, rng)
        A = sample_uniform((G.n, G.n), modulus, rng)
        return cls(G, cycle, pi, A)

    def commitment(self, B: FqMatrix) -> FqMatrix:
        """Y = A + B ∘ M_{Π(G)}."""
        return _commit_matrix(self.graph, self.pi, self.A, B)

    def answer(self, chall: int) -> Answer:
        if chall == 0:
            return PermutationOpening(self.pi.mapping, self.A)
        permuted = apply_permutation(self.pi, self.cycle)
        return CycleOpening.build(permuted, {(u, v): self.A.value(u - 1, v - 1) for u, v in permuted.edges()})


@dataclass(frozen=True)
class Transcript:
    n: int
    modulus: FieldModulus
    B: FqMatrix
    Y: FqMatrix
    chall: int
    answer: Answer
    timeline: Tuple[SpacetimeEvent, ...] = ()
    verdict: Optional[Verdict] = None
    coin: Optional[int] = None

    @property
    def accepted(self) -> bool:
        return bool(self.verdict and self.verdict.accepted)


def _commit_matrix(G: Graph, pi: Permutation, A: FqMatrix, B: FqMatrix) -> FqMatrix:
    M = adjacency_matrix(apply_permutation(pi, G), A.modulus)
    return matrix_entrywise("add", A, matrix_entrywise("hadamard", B, M))


# ─── Verification ────────────────────────────────────────────

def _check_shapes(t: Transcript, G: Graph, modulus: FieldModulus) -> None:
    if t.modulus != modulus:
        raise MalformedTranscript(f"transcript over F_{t.modulus.q}, expected F_{modulus.q}")
    if t.n != G.n:
        raise MalformedTranscript(f"transcript for n={t.n}, graph has n={G.n}")
    for label, m in (("B", t.B), ("Y", t.Y)):
        if m.shape != (G.n, G.n) or m.modulus != modulus:
            raise MalformedTranscript(f"{label} must be an {G.n}×{G.n} matrix over F_{modulus.q}")
    if t.chall not in (0, 1):
        raise MalformedTranscript(f"challenge must be 0 or 1, got {t.chall!r}")
    expected = PermutationOpening if t.chall == 0 else CycleOpening
    if not isinstance(t.answer, expected):
        raise MalformedTranscript(f"challenge {t.chall} needs a {expected.__name__}")
    if t.chall == 0 and (t.answer.A.shape != (G.n, G.n) or t.answer.A.modulus != modulus):
        raise MalformedTranscript("opened key matrix has the wrong shape or modulus")


def check_timing(timeline: Tuple[SpacetimeEvent, ...]) -> Optional[Verdict]:
    """Reject when the answer did not reach V2 strictly before B's light cone."""
    b_send = next((e for e in timeline if e.kind == "send" and e.msg == "B"), None)
    answer_recv = next((e for e in timeline if e.kind == "receive" and e.msg == "answer"), None)
    if b_send is None or answer_recv is None:
        raise MalformedTranscript("timeline lacks the B send or the answer receipt")
    causality = nss_check(b_send, answer_recv)
    if not causality.passed:
        return Verdict.reject(RejectReason.TIMING, causality.explanation)
    return None


def verify(t: Transcript, G: Graph, modulus: FieldModulus, timing: bool = True) -> Verdict:
    """
    Timing first, then:
      chall = 0: Π valid and Y_{ij} = A_{ij} + B_{ij}·(M_{Π(G)})_{ij} for all i, j
      chall = 1: 𝒞′ a valid cycle and Y_{uv} = A′_{uv} + B_{uv} on each couple of 𝒞′
    Offending entries are reported 1-based.
    """
    _check_shapes(t, G, modulus)
    if timing:
        late = check_timing(t.timeline)
        if late is not None:
            return late
    q = modulus.q

    if t.chall == 0:
        try:
            pi = Permutation(tuple(t.answer.mapping))
        except ValueError as exc:
            return Verdict.reject(RejectReason.BAD_PERMUTATION, str(exc))
        if pi.n != G.n:
            return Verdict.reject(RejectReason.BAD_PERMUTATION, f"permutation on {pi.n} points")
        M = adjacency_matrix(apply_permutation(pi, G), modulus)
        A = t.answer.A
        for i in range(G.n):
            for j in range(G.n):
                if t.Y.value(i, j) != (A.value(i, j) + t.B.value(i, j) * M.value(i, j)) % q:
                    return Verdict.reject(
                        RejectReason.ALGEBRA_0, f"opening fails at ({i + 1}, {j + 1})", entry=(i + 1, j + 1)
                    )
        return Verdict.accept()

    try:
        cycle = Cycle(tuple(t.answer.vertices))
    except ValueError as exc:
        return Verdict.reject(RejectReason.BAD_CYCLE, str(exc))
    if cycle.n != G.n:
        return Verdict.reject(RejectReason.BAD_CYCLE, f"cycle on {cycle.n} vertices")
    openings = t.answer.as_dict()
    if set(openings) != cycle.couples():
        return Verdict.reject(RejectReason.BAD_CYCLE, "openings do not match the cycle's couples")
    for u, v in cycle.edges():
        if t.Y.value(u - 1, v - 1) != (openings[(u, v)] + t.B.value(u - 1, v - 1)) % q:
            return Verdict.reject(RejectReason.ALGEBRA_1, f"opening fails at ({u}, {v})", entry=(u, v))
    return Verdict.accept()


# ─── Prover Pairs ────────────────────────────────────────────

def _single_argument(fn: Callable) -> bool:
    try:
        params = list(inspect.signature(fn).parameters.values())
    except (TypeError, ValueError):
        return False
    if len(params) != 1:
        return False
    return params[0].kind in (inspect.Parameter.POSITIONAL_ONLY, inspect.Parameter.POSITIONAL_OR_KEYWORD)


@dataclass(frozen=True)
class CheatingProverPair:
    """
    P1 maps B to Y; P2 maps the challenge bit to an answer and nothing else.
    Shared randomness lives in the closures both functions were built from.
    """
    p1: Callable[[FqMatrix], FqMatrix]
    p2: Callable[[int], Answer]
    name: str = "custom"

    def __post_init__(self):
        if not _single_argument(self.p2):
            raise SignalingViolation("the second prover may only see the challenge bit")


@dataclass(frozen=True)
class RelayingProverPair:
    """P1 forwards B to P2 over the network; P2 waits for it before answering."""
    p1: Callable[[FqMatrix], FqMatrix]
    p2: Callable[[int, FqMatrix], Answer]
    name: str = "relaying"


ProverPair = Union[CheatingProverPair, RelayingProverPair]
PairFactory = Callable[[Graph, FieldModulus, random.Random], ProverPair]


def best_cycle(G: Graph) -> Cycle:
    """A cycle of 1..n missing the fewest edges of G."""
    return min(enumerate_cycles(G.n), key=lambda c: len(missing_edges(G, c)))


def _shifted_pair(G: Graph, modulus: FieldModulus, rng: random.Random, shifts: bool, name: str) -> CheatingProverPair:
    """
    Π = identity and 𝒞′ = best_cycle(G). A′ = A on present edges and A − δ on
    missing ones (δ uniform if `shifts`, else 0). Wins chall = 1 iff B = δ there.
    """
    n, q = G.n, modulus.q
    identity = Permutation.identity(n)
    A = sample_uniform((n, n), modulus, rng)
    cycle = best_cycle(G)
    absent = set(missing_edges(G, cycle))
    opened = {}
    for u, v in cycle.edges():
        delta = sample_residue(modulus, rng) if shifts and (u, v) in absent else 0
        opened[(u, v)] = (A.value(u - 1, v - 1) - delta) % q

    def p1(B: FqMatrix) -> FqMatrix:
        return _commit_matrix(G, identity, A, B)

    def p2(chall: int) -> Answer:
        if chall == 0:
            return PermutationOpening(identity.mapping, A)
        return CycleOpening.build(cycle, opened)

    return CheatingProverPair(p1, p2, name)


def optimal_classical_pair(G: Graph, modulus: FieldModulus, rng: random.Random) -> CheatingProverPair:
    return _shifted_pair(G, modulus, rng, shifts=True, name="optimal")


def honest_style_pair(G: Graph, modulus: FieldModulus, rng: random.Random) -> CheatingProverPair:
    return _shifted_pair(G, modulus, rng, shifts=False, name="honest-style")


def random_pair(G: Graph, modulus: FieldModulus, rng: random.Random) -> CheatingProverPair:
    """Uniform Y and uniform, mutually unrelated answers."""
    n = G.n
    Y = sample_uniform((n, n), modulus, rng)
    A = sample_uniform((n, n), modulus, rng)
    pi = random_permutation(n, rng)
    cycle = Cycle.from_permutation(random_permutation(n, rng))
    opened = {e: sample_residue(modulus, rng) for e in cycle.edges()}

    def p1(B: FqMatrix) -> FqMatrix:
        return Y

    def p2(chall: int) -> Answer:
        return PermutationOpening(pi.mapping, A) if chall == 0 else CycleOpening.build(cycle, opened)

    return CheatingProverPair(p1, p2, "random")


def relaying_pair(G: Graph, modulus: FieldModulus, rng: random.Random) -> RelayingProverPair:
    """Algebraically perfect on any graph once P2 knows B; only timing can catch it."""
    n, q = G.n, modulus.q
    identity = Permutation.identity(n)
    A = sample_uniform((n, n), modulus, rng)
    cycle = best_cycle(G)

    def p1(B: FqMatrix) -> FqMatrix:
        return _commit_matrix(G, identity, A, B)

    def p2(chall: int, B: FqMatrix) -> Answer:
        if chall == 0:
            return PermutationOpening(identity.mapping, A)
        Y = p1(B)
        return CycleOpening.build(
            cycle, {(u, v): (Y.value(u - 1, v - 1) - B.value(u - 1, v - 1)) % q for u, v in cycle.edges()}
        )

    return RelayingProverPair(p1, p2)


STRATEGIES: Dict[str, PairFactory] = {
    "optimal":      optimal_classical_pair,
    "honest-style": honest_style_pair,
    "random":       random_pair,
    "relaying":     relaying_pair,
}


# ─── Protocol Session ────────────────────────────────────────

class ProtocolSession:
    """
    Runs single protocol rounds on a light-cone network:
      1. Preprocessing (honest provers agree on Π and A)
      2. Commit: V1 sends B to P1 at t = 0, P1 answers Y
      3. Challenge: V2 sends chall to P2 at t = 0, P2 opens
      4. Verify: timing against V1's B send, then algebra
    """

    def __init__(
        self,
        graph: Graph,
        modulus: FieldModulus,
        separation: float = DEFAULT_SEPARATION,
        delay: float = DEFAULT_PROCESSING_DELAY,
        on_log: Optional[Callable[[str], None]] = None,
    ):
        modulus.require_prime()
        self.graph = graph
        self.modulus = modulus
        self.layout = AgentLayout.honest(separation)
        self.delay = delay
        self.on_log = on_log or logger.debug
        self._rounds = 0

    # ── Public API ───────────────────────────────────────────

    def run_honest(
        self,
        cycle: Cycle,
        rng: random.Random,
        B: Optional[FqMatrix] = None,
        chall: Optional[int] = None,
        witness: Optional[ProverWitness] = None,
    ) -> Transcript:
        if witness is None:
            witness = ProverWitness.prepare(self.graph, cycle, self.modulus, rng)
        elif witness.cycle != cycle:
            raise InvalidWitness("witness was prepared for a different cycle")
        self.on_log(f"preprocessing: Π = {witness.pi.mapping}")
        pair = CheatingProverPair(witness.commitment, witness.answer, "honest")
        return self.run_pair(pair, rng, B=B, chall=chall)

    def run_pair(
        self,
        pair: ProverPair,
        rng: random.Random,
        B: Optional[FqMatrix] = None,
        chall: Optional[int] = None,
    ) -> Transcript:
        n = self.graph.n
        if B is None:
            B = sample_uniform((n, n), self.modulus, rng)
        if chall is None:
            chall = rng.getrandbits(1)
        self._rounds += 1
        net = LightConeNetwork(self.layout, run_id=f"{pair.name}-{self._rounds}")
        received: Dict[str, object] = {}

        net.on("P1", self._prover_1(pair))
        net.on("P2", self._prover_2(pair))
        net.on("V1", lambda e, _net: received.__setitem__("Y", e.payload))
        net.on("V2", lambda e, _net: received.__setitem__("answer", e.payload))

        net.send("V1", "P1", "B", B, at=0.0)
        net.send("V2", "P2", "chall", chall, at=0.0)
        timeline = net.run()

        if "Y" not in received or "answer" not in received:
            raise MalformedTranscript("round ended without a commitment and an answer")
        transcript = Transcript(n, self.modulus, B, received["Y"], chall, received["answer"], timeline)
        verdict = verify(transcript, self.graph, self.modulus)
        self.on_log(
            f"round {self._rounds} ({pair.name}, chall={chall}): "
            + ("accept" if verdict.accepted else f"reject [{verdict.reason.display}]")
        )
        return replace(transcript, verdict=verdict)

    # ── Agents ───────────────────────────────────────────────

    def _prover_1(self, pair: ProverPair):
        relays = isinstance(pair, RelayingProverPair)

        def handle(event: SpacetimeEvent, net: LightConeNetwork) -> None:
            if event.msg != "B":
                return
            if relays:
                net.send("P1", "P2", "relay", event.payload, at=event.time)
            net.send("P1", "V1", "Y", pair.p1(event.payload), at=event.time + self.delay)

        return handle

    def _prover_2(self, pair: ProverPair):
        held: Dict[str, object] = {}

        def handle(event: SpacetimeEvent, net: LightConeNetwork) -> None:
            held[event.msg] = event.payload
            if "chall" not in held:
                return
            if isinstance(pair, RelayingProverPair):
                if "relay" not in held:
                    return
                answer = pair.p2(held["chall"], held["relay"])
            else:
                answer = pair.p2(held["chall"])
            if "sent" not in held:
                held["sent"] = True
                net.send("P2", "V2", "answer", answer, at=event.time + self.delay)

        return handle


def run_honest(
    G: Graph,
    cycle: Cycle,
    modulus: FieldModulus,
    seed: int,
    separation: float = DEFAULT_SEPARATION,
    delay: float = DEFAULT_PROCESSING_DELAY,
    B: Optional[FqMatrix] = None,
    chall: Optional[int] = None,
    witness: Optional[ProverWitness] = None,
) -> Transcript:
    """One honest round; InvalidWitness if `cycle` is not Hamiltonian in G."""
    if cycle.n != G.n or missing_edges(G, cycle):
        raise InvalidWitness(f"{cycle.vertices} is not a Hamiltonian cycle of the graph")
    session = ProtocolSession(G, modulus, separation, delay)
    return session.run_honest(cycle, random.Random(seed), B=B, chall=chall, witness=witness)


# ─── Soundness ───────────────────────────────────────────────

@lru_cache(maxsize=None)
def _consistent_fraction(present: bool, q: int) -> Fraction:
    """
    Best fraction of B_{uv} ∈ 𝔽_q for which one cycle couple can be opened under both
    challenges, maximized over the key gap δ = A_{uv} − A′_{uv}: it needs δ + B·M = B.
    """
    m = 1 if present else 0
    counts = Counter((b * (1 - m)) % q for b in range(q))
    return Fraction(max(counts.values()), q)


def classical_soundness_value(G: Graph, modulus: FieldModulus) -> Fraction:
    """
    Exact optimal classical win probability against a non-Hamiltonian graph.

    For every P2 answer pair (Π for chall 0, 𝒞′ for chall 1) the chance over B that
    P1 can produce one Y consistent with both openings is the product of per-couple
    consistent fractions; otherwise P1 can satisfy one challenge only. The value is
    max over (Π, 𝒞′) of 1/2 + 1/2·Pr[both consistent].
    """
    n = G.n
    if n > MAX_SOUNDNESS_SCAN_N:
        raise TooLarge(f"soundness scan is limited to n ≤ {MAX_SOUNDNESS_SCAN_N}, got n = {n}")
    q = modulus.q
    cycles = enumerate_cycles(n)
    best = Fraction(0)
    for mapping in itertools.permutations(range(1, n + 1)):
        permuted = apply_permutation(Permutation(mapping), G)
        for cycle in cycles:
            both = Fraction(1)
            for u, v in cycle.edges():
                both *= _consistent_fraction(permuted.has_edge(u, v), q)
            if both > best:
                best = both
        if best == 1:
            raise GraphIsHamiltonian("graph has a Hamiltonian cycle; soundness does not apply")
    return Fraction(1, 2) + best / 2


def soundness_bound(n: int, Q: int, S_proj: Optional[int] = None) -> Union[Fraction, float]:
    """1/2 + (64·S/Q)^{1/3} with S = n! by default; exact when the radicand is a rational cube."""
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    S = math.factorial(n) if S_proj is None else S_proj
    radicand = Fraction(64 * S, Q)
    root = exact_cube_root(radicand)
    if root is not None:
        return Fraction(1, 2) + root
    return 0.5 + float(radicand) ** (1.0 / 3.0)


@dataclass(frozen=True)
class SoundnessParameters:
    n: int
    k: int
    q0: int
    q: FieldModulus
    bits_per_round: int

    @property
    def bound(self) -> Union[Fraction, float]:
        """Soundness bound at Q0: exactly 1/2 + 2^{−k}."""
        return soundness_bound(self.n, self.q0)

    @property
    def vacuous(self) -> bool:
        return self.bound >= 1

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "q0": self.q0,
            "q": self.q.q,
            "bits": self.bits_per_round,
            "bound": self.bound,
            "vacuous": self.vacuous,
        }


def size_parameters(n: int, k: int) -> SoundnessParameters:
    """Q0 = 64·n!·2^{3k}, Q = smallest prime ≥ Q0, n²·⌈log₂Q⌉ committed bits per round."""
    if n < 3:
        raise ValueError(f"need n ≥ 3, got {n}")
    if k < 1:
        raise ValueError(f"need k ≥ 1, got {k}")
    q0 = 64 * math.factorial(n) * 2 ** (3 * k)
    q = next_prime_at_least(q0)
    params = SoundnessParameters(n, k, q0, q, n * n * ceil_log2(q.q))
    logger.debug("n=%d, k=%d: Q0=%d rounded to prime %d", n, k, q0, q.q)
    return params


# ─── Attack Harness ──────────────────────────────────────────

@dataclass
class AttackReport:
    strategy: str
    n: int
    q: int
    trials: int
    wins: int
    ci: Tuple[float, float]
    confidence: float
    exact_value: Optional[Fraction] = None
    reasons: Dict[str, int] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.wins / self.trials if self.trials else 0.0

    @property
    def consistent(self) -> Optional[bool]:
        if self.exact_value is None:
            return None
        return self.ci[0] <= float(self.exact_value) <= self.ci[1]

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "n": self.n,
            "q": self.q,
            "trials": self.trials,
            "wins": self.wins,
            "rate": self.rate,
            "ci_low": self.ci[0],
            "ci_high": self.ci[1],
            "confidence": self.confidence,
            "exact_value": self.exact_value,
            "consistent": self.consistent,
            "reasons": self.reasons,
        }


def attack_harness(
    G: Graph,
    modulus: FieldModulus,
    strategy: Union[str, PairFactory],
    trials: int,
    seed: int = 0,
    workers: int = DEFAULT_WORKERS,
    confidence: float = DEFAULT_CONFIDENCE,
    separation: float = DEFAULT_SEPARATION,
    delay: float = DEFAULT_PROCESSING_DELAY,
    on_progress=None,
) -> AttackReport:
    """Empirical win rate of a cheating pair with a Clopper–Pearson interval."""
    if isinstance(strategy, str):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}, expected one of {sorted(STRATEGIES)}")
        name, factory = strategy, STRATEGIES[strategy]
    else:
        name, factory = getattr(strategy, "__name__", "custom"), strategy

    session_args = (G, modulus, separation, delay)

    def trial(_index: int, trial_seed: int) -> Tuple[bool, Optional[str]]:
        rng = random.Random(trial_seed)
        pair = factory(G, modulus, rng)
        transcript = ProtocolSession(*session_args).run_pair(pair, rng)
        reason = transcript.verdict.reason.display if transcript.verdict.reason else None
        return transcript.accepted, reason

    engine = TrialEngine(workers=workers, stage=f"attack:{name}", on_progress=on_progress, on_log=logger.info)
    outcomes = engine.run(trial, seed, trials)
    wins = sum(1 for ok, _ in outcomes if ok)
    reasons = dict(Counter(r for ok, r in outcomes if not ok))

    exact = None
    if name in ("optimal", "honest-style") and G.n <= MAX_SOUNDNESS_SCAN_N:
        try:
            exact = classical_soundness_value(G, modulus)
        except GraphIsHamiltonian:
            exact = None
    return AttackReport(
        strategy=name, n=G.n, q=modulus.q, trials=trials, wins=wins,
        ci=win_rate_interval(wins, trials, confidence), confidence=confidence,
        exact_value=exact, reasons=reasons,
    )


@dataclass
class ReplayReport:
    """Both openings checked against one (B, Y), plus what they reveal about B."""
    accepted_0: bool
    accepted_1: bool
    extracted: List[Tuple[Edge, int, int]]

    @property
    def both_accepted(self) -> bool:
        return self.accepted_0 and self.accepted_1

    @property
    def identity_holds(self) -> bool:
        """B_{uv} = A_{uv} − A′_{uv} on every couple of 𝒞′ missing from Π(G)."""
        return all(b == gap for _, b, gap in self.extracted)


def replay_both_challenges(pair: CheatingProverPair, G: Graph, modulus: FieldModulus, B: FqMatrix) -> ReplayReport:
    """Feed one B to P1 and ask P2 both challenges; verify both without timing."""
    Y = pair.p1(B)
    answers = (pair.p2(0), pair.p2(1))
    verdicts = [
        verify(Transcript(G.n, modulus, B, Y, chall, answers[chall]), G, modulus, timing=False)
        for chall in (0, 1)
    ]
    extracted = []
    if all(v.accepted for v in verdicts):
        q = modulus.q
        permuted = apply_permutation(Permutation(tuple(answers[0].mapping)), G)
        cycle = Cycle(tuple(answers[1].vertices))
        opened = answers[1].as_dict()
        for u, v in missing_edges(permuted, cycle):
            gap = (answers[0].A.value(u - 1, v - 1) - opened[(u, v)]) % q
            extracted.append(((u, v), B.value(u - 1, v - 1), gap))
    return ReplayReport(verdicts[0].accepted, verdicts[1].accepted, extracted)


# ─── Zero Knowledge ──────────────────────────────────────────

@dataclass(frozen=True)
class VerifierStrategy:
    """
    A classical (possibly cheating) verifier: shared randomness is a coin uniform on
    range(coins); B depends on the coin, the challenge may also depend on Y.
    """
    matrix: Callable[[int], FqMatrix]
    challenge: Callable[[int, FqMatrix, FqMatrix], int]
    coins: int = 1
    name: str = "verifier"


class OneShotVerifier:
    """Lets each verifier function run at most once per round."""

    def __init__(self, strategy: VerifierStrategy):
        self.strategy = strategy
        self._calls: Counter = Counter()

    def new_round(self) -> None:
        self._calls.clear()

    def _tick(self, what: str) -> None:
        self._calls[what] += 1
        if self._calls[what] > 1:
            raise RewindingError(f"verifier {what} invoked twice in one round")

    def matrix(self, coin: int) -> FqMatrix:
        self._tick("matrix")
        return self.strategy.matrix(coin)

    def challenge(self, coin: int, B: FqMatrix, Y: FqMatrix) -> int:
        self._tick("challenge")
        chall = self.strategy.challenge(coin, B, Y)
        if chall not in (0, 1):
            raise MalformedTranscript(f"verifier produced challenge {chall!r}")
        return chall


def fixed_verifier(B: FqMatrix, chall: int) -> VerifierStrategy:
    return VerifierStrategy(lambda _c: B, lambda _c, _b, _y: chall, 1, f"fixed-{chall}")


def coin_verifier(B: FqMatrix) -> VerifierStrategy:
    """Fixed B, fair challenge coin."""
    return VerifierStrategy(lambda _c: B, lambda c, _b, _y: c, 2, "coin")


def parity_verifier(B0: FqMatrix, B1: FqMatrix) -> VerifierStrategy:
    """B chosen by the coin; chall = parity of the sum of Y's entries."""
    return VerifierStrategy(
        lambda c: B1 if c else B0, lambda _c, _b, Y: sum(Y.values) % 2, 2, "parity"
    )


def entry_verifier(B: FqMatrix) -> VerifierStrategy:
    """chall = 1 exactly when Y_{1,2} equals B_{1,2}."""
    return VerifierStrategy(
        lambda _c: B, lambda _c, b, Y: int(Y.value(0, 1) == b.value(0, 1)), 1, "entry"
    )


def _check_enumerable(G: Graph, modulus: FieldModulus) -> None:
    if G.n > MAX_ZK_ENUMERATION_N or modulus.q > MAX_ZK_ENUMERATION_Q:
        raise TooLarge(
            f"exact view enumeration is limited to n ≤ {MAX_ZK_ENUMERATION_N}, "
            f"Q ≤ {MAX_ZK_ENUMERATION_Q}; got n = {G.n}, Q = {modulus.q}"
        )


def _all_matrices(n: int, modulus: FieldModulus):
    for values in itertools.product(range(modulus.q), repeat=n * n):
        yield FqMatrix(n, n, values, modulus)


def _view_key(coin: int, B: FqMatrix, Y: FqMatrix, chall: int, answer: Answer) -> tuple:
    if isinstance(answer, PermutationOpening):
        tail = ("pi", tuple(answer.mapping), answer.A.values)
    else:
        tail = ("cycle", tuple(Cycle(answer.vertices).vertices), tuple(sorted(answer.openings)))
    return (coin, B.values, Y.values, chall) + tail


def zk_simulate(verifier: VerifierStrategy, G: Graph, modulus: FieldModulus, rng: random.Random) -> Transcript:
    """
    One simulated view, produced in a single forward pass with no cycle:
    Y uniform; chall = 0 → uniform Π with A = Y − B∘M_{Π(G)};
    chall = 1 → uniform 𝒞′ with A′_{uv} = Y_{uv} − B_{uv}.
    """
    n, q = G.n, modulus.q
    v = OneShotVerifier(verifier)
    coin = rng.randrange(verifier.coins)
    B = v.matrix(coin)
    Y = sample_uniform((n, n), modulus, rng)
    chall = v.challenge(coin, B, Y)
    if chall == 0:
        pi = random_permutation(n, rng)
        M = adjacency_matrix(apply_permutation(pi, G), modulus)
        A = matrix_entrywise("sub", Y, matrix_entrywise("hadamard", B, M))
        answer: Answer = PermutationOpening(pi.mapping, A)
    else:
        cycle = Cycle.from_permutation(random_permutation(n, rng))
        answer = CycleOpening.build(
            cycle, {(a, b): (Y.value(a - 1, b - 1) - B.value(a - 1, b - 1)) % q for a, b in cycle.edges()}
        )
    return Transcript(n, modulus, B, Y, chall, answer, coin=coin)


def real_view_distribution(
    verifier: VerifierStrategy, G: Graph, cycle: Cycle, modulus: FieldModulus
) -> Dict[tuple, Fraction]:
    """Exact distribution of the verifier's view against honest provers holding `cycle`."""
    _check_enumerable(G, modulus)
    if cycle.n != G.n or missing_edges(G, cycle):
        raise InvalidWitness(f"{cycle.vertices} is not a Hamiltonian cycle of the graph")
    n = G.n
    v = OneShotVerifier(verifier)
    perms = [Permutation(p) for p in itertools.permutations(range(1, n + 1))]
    masks = {pi: adjacency_matrix(apply_permutation(pi, G), modulus) for pi in perms}
    weight = Fraction(1, verifier.coins * len(perms) * modulus.q ** (n * n))
    dist: Dict[tuple, Fraction] = Counter()
    for coin in range(verifier.coins):
        for pi in perms:
            permuted = apply_permutation(pi, cycle)
            for A in _all_matrices(n, modulus):
                v.new_round()
                B = v.matrix(coin)
                Y = matrix_entrywise("add", A, matrix_entrywise("hadamard", B, masks[pi]))
                chall = v.challenge(coin, B, Y)
                if chall == 0:
                    answer: Answer = PermutationOpening(pi.mapping, A)
                else:
                    answer = CycleOpening.build(
                        permuted, {(a, b): A.value(a - 1, b - 1) for a, b in permuted.edges()}
                    )
                dist[_view_key(coin, B, Y, chall, answer)] += weight
    return dict(dist)


def simulated_view_distribution(
    verifier: VerifierStrategy,
    G: Graph,
    modulus: FieldModulus,
    permutation_weights: Optional[Dict[Permutation, Fraction]] = None,
) -> Dict[tuple, Fraction]:
    """
    Exact distribution of zk_simulate's output. `permutation_weights` replaces the
    uniform choice of Π (a deliberately broken simulator when non-uniform).
    """
    _check_enumerable(G, modulus)
    n, q = G.n, modulus.q
    v = OneShotVerifier(verifier)
    if permutation_weights is None:
        perms = [Permutation(p) for p in itertools.permutations(range(1, n + 1))]
        permutation_weights = {p: Fraction(1, len(perms)) for p in perms}
    cycles = enumerate_cycles(n)
    base = Fraction(1, verifier.coins * q ** (n * n))
    dist: Dict[tuple, Fraction] = Counter()
    for coin in range(verifier.coins):
        for Y in _all_matrices(n, modulus):
            v.new_round()
            B = v.matrix(coin)
            chall = v.challenge(coin, B, Y)
            if chall == 0:
                for pi, w in permutation_weights.items():
                    M = adjacency_matrix(apply_permutation(pi, G), modulus)
                    A = matrix_entrywise("sub", Y, matrix_entrywise("hadamard", B, M))
                    dist[_view_key(coin, B, Y, 0, PermutationOpening(pi.mapping, A))] += base * w
            else:
                for c in cycles:
                    opened = {(a, b): (Y.value(a - 1, b - 1) - B.value(a - 1, b - 1)) % q for a, b in c.edges()}
                    dist[_view_key(coin, B, Y, 1, CycleOpening.build(c, opened))] += base / len(cycles)
    return dict(dist)


def total_variation(p: Dict[tuple, Fraction], q: Dict[tuple, Fraction]) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in keys), Fraction(0)) / 2


def zk_distance(
    verifier: VerifierStrategy,
    G: Graph,
    modulus: FieldModulus,
    permutation_weights: Optional[Dict[Permutation, Fraction]] = None,
) -> Fraction:
    """Exact total-variation distance between real and simulated views (0 for a perfect simulator)."""
    _check_enumerable(G, modulus)
    cycle = find_hamiltonian_cycle(G)
    if cycle is None:
        raise InvalidWitness("zero knowledge is only claimed for Hamiltonian graphs")
    real = real_view_distribution(verifier, G, cycle, modulus)
    simulated = simulated_view_distribution(verifier, G, modulus, permutation_weights)
    distance = total_variation(real, simulated)
    logger.info("zk distance for %s verifier at n=%d, Q=%d: %s", verifier.name, G.n, modulus.q, distance)
    return distance


# ─── Transcript JSON ─────────────────────────────────────────

def transcript_to_dict(t: Transcript) -> dict:
    if isinstance(t.answer, PermutationOpening):
        answer = {"type": "permutation", "pi": list(t.answer.mapping), "A": t.answer.A.to_rows()}
    else:
        answer = {
            "type": "cycle",
            "cycle": list(t.answer.vertices),
            "openings": [[u, v, val] for (u, v), val in t.answer.openings],
        }
    verdict = t.verdict.to_dict() if t.verdict else {"verdict": None, "reason": None}
    record = {
        "n": t.n,
        "q": t.modulus.q,
        "B": t.B.to_rows(),
        "Y": t.Y.to_rows(),
        "chall": t.chall,
        "answer": answer,
        "timeline": [e.to_dict() for e in t.timeline],
        "verdict": verdict["verdict"],
        "reason": verdict["reason"],
    }
    if t.timeline:
        b_send = next((e for e in t.timeline if e.msg == "B"), None)
        answer_recv = next((e for e in t.timeline if e.msg == "answer" and e.kind == "receive"), None)
        if b_send and answer_recv:
            record["separation"] = b_send.src.distance_to(answer_recv.dst)
    return record


def transcript_to_json(t: Transcript, pretty: bool = False) -> str:
    return to_json(transcript_to_dict(t), pretty=pretty)


def transcript_from_json(text: str, separation: Optional[float] = None) -> Transcript:
    """
    Rebuild a transcript for re-verification. Agent positions come from the honest
    layout at the recorded (or given) separation; only verifier positions matter.
    """
    try:
        data = json.loads(text)
        modulus = FieldModulus.prime(int(data["q"]))
        n = int(data["n"])
        B = FqMatrix.from_rows(data["B"], modulus)
        Y = FqMatrix.from_rows(data["Y"], modulus)
        chall = int(data["chall"])
        raw = data["answer"]
        if raw["type"] == "permutation":
            answer: Answer = PermutationOpening(tuple(int(v) for v in raw["pi"]), FqMatrix.from_rows(raw["A"], modulus))
        elif raw["type"] == "cycle":
            answer = CycleOpening(
                tuple(int(v) for v in raw["cycle"]),
                tuple(((int(u), int(v)), int(val) % modulus.q) for u, v, val in raw["openings"]),
            )
        else:
            raise MalformedTranscript(f"unknown answer type {raw['type']!r}")
        distance = separation if separation is not None else float(data.get("separation", DEFAULT_SEPARATION))
        layout = AgentLayout.honest(distance)
        timeline = tuple(
            SpacetimeEvent(
                e["kind"], e["msg"], layout.site(e["from"]), layout.site(e["to"]), float(e["time"]), "replay"
            )
            for e in data.get("timeline", [])
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, MalformedTranscript):
            raise
        raise MalformedTranscript(f"cannot parse transcript: {exc}") from exc

    verdict = None
    if data.get("verdict") == "accept":
        verdict = Verdict.accept()
    elif data.get("verdict") == "reject" and data.get("reason"):
        verdict = Verdict.reject(RejectReason.from_display(data["reason"]))
    return Transcript(n, modulus, B, Y, chall, answer, timeline, verdict)
