"""
commitment.py — The 𝔽_Q relativistic bit / string commitment and its parallel repetition.

Handles:
  • Preparation (shared prover key a, shared verifier challenge x)
  • Commit y = a + d·x and reveal check, per slot
  • Sum-binding ε calculators and the bit cost of a target ε
  • Exact classical binding values via the induced CHSH^Q games
  • A full commit / sustain / reveal session over the light-cone network
"""

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple, Union

from .config import DEFAULT_PROCESSING_DELAY, DEFAULT_SEPARATION
from .errors import ParameterOrder, ValueOutOfRange, WidthMismatch
from .fq import FieldModulus, sample_residue
from .games import chsh_q_game, classical_value, parallel_chsh_q_game
from .spacetime import AgentLayout, CausalityVerdict, LightConeNetwork, SpacetimeEvent, sustain_check
from .utils import ceil_log2, cube_root, exact_cube_root

logger = logging.getLogger(__name__)

KINDS = ("bit", "string", "parallel")
Value = Union[int, Sequence[int]]


# ─── Messages ────────────────────────────────────────────────

@dataclass(frozen=True)
class CommitmentInstance:
    """
    Key material for one commitment.

    `alphabet` is P (2 for bits); `a` is shared by both prover agents and `x`
    by both verifier agents, one residue per slot.
    """
    kind: str
    modulus: FieldModulus
    alphabet: int
    a: Tuple[int, ...]
    x: Tuple[int, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown commitment kind {self.kind!r}")
        if self.alphabet > self.modulus.q:
            raise ParameterOrder(f"alphabet size {self.alphabet} exceeds Q = {self.modulus.q}")
        if len(self.a) != len(self.x) or not self.a:
            raise WidthMismatch(f"{len(self.a)} keys for {len(self.x)} challenges")
        if self.kind != "parallel" and len(self.a) != 1:
            raise WidthMismatch(f"{self.kind} commitments use a single slot")
        q = self.modulus.q
        if any(not 0 <= v < q for v in self.a + self.x):
            raise ValueOutOfRange(f"keys and challenges must be residues mod {q}")

    @property
    def slots(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class CommitMessage:
    y: Tuple[int, ...]


@dataclass(frozen=True)
class RevealMessage:
    """Opened values and keys; `subset` lists the revealed slots (all when None)."""
    d: Tuple[int, ...]
    a: Tuple[int, ...]
    subset: Optional[Tuple[int, ...]] = None


# ─── Protocol Steps ──────────────────────────────────────────

def prepare_instance(kind: str, width: int, modulus: FieldModulus, rng: random.Random) -> CommitmentInstance:
    """
    Preparation phase. `width` is ignored for bits, is P for strings and the
    number of slots for parallel commitments.
    """
    modulus.require_prime()
    if kind == "bit":
        alphabet, slots = 2, 1
    elif kind == "string":
        alphabet, slots = width, 1
    elif kind == "parallel":
        alphabet, slots = 2, width
    else:
        raise ValueError(f"unknown commitment kind {kind!r}")
    if alphabet > modulus.q:
        raise ParameterOrder(f"P = {alphabet} exceeds Q = {modulus.q}")
    a = tuple(sample_residue(modulus, rng) for _ in range(slots))
    x = tuple(sample_residue(modulus, rng) for _ in range(slots))
    return CommitmentInstance(kind, modulus, alphabet, a, x)


def _as_values(inst: CommitmentInstance, d: Value) -> Tuple[int, ...]:
    values = (d,) if isinstance(d, int) else tuple(int(v) for v in d)
    if len(values) != inst.slots:
        raise WidthMismatch(f"{len(values)} values for {inst.slots} slot(s)")
    for v in values:
        if not 0 <= v < inst.alphabet:
            raise ValueOutOfRange(f"committed value {v} outside [0, {inst.alphabet})")
    return values


def commit(inst: CommitmentInstance, d: Value) -> CommitMessage:
    """y_i = a_i + d_i·x_i."""
    q = inst.modulus.q
    values = _as_values(inst, d)
    return CommitMessage(tuple((a + v * x) % q for a, v, x in zip(inst.a, values, inst.x)))


def reveal_honest(
    inst: CommitmentInstance, d: Value, subset: Optional[Sequence[int]] = None
) -> RevealMessage:
    values = _as_values(inst, d)
    if subset is None:
        return RevealMessage(values, inst.a)
    subset = tuple(subset)
    return RevealMessage(tuple(values[i] for i in subset), tuple(inst.a[i] for i in subset), subset)


def verify_reveal(inst: CommitmentInstance, c: CommitMessage, r: RevealMessage) -> bool:
    """Accept iff y_i = a_i + d_i·x_i on every revealed slot."""
    if len(c.y) != inst.slots:
        raise WidthMismatch(f"commitment has {len(c.y)} slots, instance has {inst.slots}")
    slots = tuple(range(inst.slots)) if r.subset is None else r.subset
    if len(r.d) != len(slots) or len(r.a) != len(slots):
        raise WidthMismatch(f"reveal carries {len(r.d)} values and {len(r.a)} keys for {len(slots)} slot(s)")
    if any(not 0 <= i < inst.slots for i in slots):
        raise WidthMismatch(f"subset {slots} outside 0..{inst.slots - 1}")

    q = inst.modulus.q
    for i, d, a in zip(slots, r.d, r.a):
        if not 0 <= d < inst.alphabet:
            return False
        if c.y[i] % q != (a + d * inst.x[i]) % q:
            return False
    return True


# ─── Sum-Binding ─────────────────────────────────────────────

@dataclass
class BindingReport:
    """ε for a commitment flavour, with the modulus size it implies."""
    kind: str
    size: int
    Q: int
    epsilon: float
    epsilon_exact: Optional[Fraction]
    required_log2_q: float
    log2_q: float
    bits_per_round: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        record = {
            "kind": self.kind,
            "size": self.size,
            "q": self.Q,
            "epsilon": self.epsilon,
            "epsilon_exact": self.epsilon_exact,
            "approximate": self.epsilon_exact is None,
            "required_log2_q": self.required_log2_q,
            "log2_q": self.log2_q,
            "bits_per_round": self.bits_per_round,
        }
        record.update(self.extra)
        return record


def sum_binding_epsilon(kind: str, size: int, Q: int) -> BindingReport:
    """
    string (and bit, P = 2):  ε = 4P / Q^{1/3}
    parallel, |S| = size:     ε = 4(2|S|·2^{2|S|} / Q)^{1/3}
    """
    if size < 1 or Q < 2:
        raise ValueError(f"need size ≥ 1 and Q ≥ 2, got size={size}, Q={Q}")
    if kind == "bit":
        kind, size = "string", 2

    if kind == "string":
        radicand = Fraction(size ** 3, Q)
        slots = 1
    elif kind == "parallel":
        radicand = Fraction(2 * size * 4 ** size, Q)
        slots = size
    else:
        raise ValueError(f"unknown commitment kind {kind!r}")

    # ε = 4·radicand^{1/3}; for strings 4P/Q^{1/3} = 4(P³/Q)^{1/3}
    root = exact_cube_root(radicand)
    exact = 4 * root if root is not None else None
    epsilon = float(exact) if exact is not None else 4.0 * cube_root(radicand)[0]

    # strings report the quoted figure 3(log₂P + |log₂ε|) + 8, which sits two bits
    # above the exact log₂(64P³/ε³) of string_modulus_for_epsilon;
    # parallel slots report the exact log₂(2|S|·2^{2|S|}) + 3|log₂ε| + 6
    if kind == "string":
        required = 3 * (math.log2(size) + abs(math.log2(epsilon))) + 8
    else:
        required = math.log2(2 * size * 4 ** size) + 3 * abs(math.log2(epsilon)) + 6
    return BindingReport(
        kind=kind, size=size, Q=Q, epsilon=epsilon, epsilon_exact=exact,
        required_log2_q=required, log2_q=math.log2(Q), bits_per_round=slots * ceil_log2(Q),
    )


def string_modulus_for_epsilon(P: int, epsilon: Union[Fraction, float]) -> Union[Fraction, float]:
    """Q = 64P³/ε³, i.e. 3(log₂P + |log₂ε|) + 6 bits."""
    if epsilon <= 0:
        raise ValueError("ε must be positive")
    if isinstance(epsilon, float):
        return 64.0 * P ** 3 / epsilon ** 3
    return Fraction(64 * P ** 3) / Fraction(epsilon) ** 3


def binding_attack_value(kind: str, size: int, Q: int, workers: int = 1) -> Fraction:
    """
    Best classical Σ_d max Pr[reveal d] = (alphabet size) × classical value of the
    induced CHSH^Q game: P·ω(CHSH^Q(P)) for strings, 2^s·ω(CHSH^Q(2)^{⊗s}) for s parallel slots.
    """
    if kind == "bit":
        kind, size = "string", 2
    if kind == "string":
        return size * classical_value(chsh_q_game(Q, size), workers=workers)
    if kind == "parallel":
        return 2 ** size * classical_value(parallel_chsh_q_game(Q, size), workers=workers)
    raise ValueError(f"unknown commitment kind {kind!r}")


def reveal_probability_sum(
    commit_fn: Callable[[int], int],
    open_fn: Callable[[int], Optional[int]],
    modulus: FieldModulus,
    P: int,
) -> Fraction:
    """
    Σ_d Pr_x[y(x) = a(d) + d·x] for a deterministic classical attacker; `open_fn`
    returns None for values it cannot open.
    """
    q = modulus.q
    total = Fraction(0)
    for d in range(P):
        a = open_fn(d)
        if a is None:
            continue
        hits = sum(1 for x in range(q) if commit_fn(x) % q == (a + d * x) % q)
        total += Fraction(hits, q)
    return total


def best_reveal_probability_sum(commit_fn: Callable[[int], int], modulus: FieldModulus, P: int) -> Fraction:
    """Σ_d max_a Pr_x[y(x) − d·x = a]: the attacker opens each d with its best key."""
    q = modulus.q
    total = Fraction(0)
    for d in range(P):
        counts = [0] * q
        for x in range(q):
            counts[(commit_fn(x) - d * x) % q] += 1
        total += Fraction(max(counts), q)
    return total


# ─── Session ─────────────────────────────────────────────────

@dataclass
class CommitmentSession:
    instance: CommitmentInstance
    committed: Tuple[int, ...]
    commit_msg: CommitMessage
    reveal_msg: RevealMessage
    accepted: bool
    sustain: CausalityVerdict
    timeline: Tuple[SpacetimeEvent, ...]

    @property
    def binding_window_held(self) -> bool:
        return self.sustain.passed

    def to_dict(self) -> dict:
        return {
            "kind": self.instance.kind,
            "q": self.instance.modulus.q,
            "slots": self.instance.slots,
            "y": list(self.commit_msg.y),
            "revealed": list(self.reveal_msg.d),
            "accepted": self.accepted,
            "sustain": self.sustain.to_dict(),
            "timeline": [e.to_dict() for e in self.timeline],
        }


def run_commitment_session(
    kind: str,
    width: int,
    d: Value,
    modulus: FieldModulus,
    rng: random.Random,
    separation: float = DEFAULT_SEPARATION,
    sustain: float = 0.5,
    delay: float = DEFAULT_PROCESSING_DELAY,
    reveal_value: Optional[Value] = None,
) -> CommitmentSession:
    """
    Commit at location 1 (V1 ↔ P1), wait `sustain`, reveal at location 2 (P2 → V2).
    The reveal opens `reveal_value` (default: the committed value) with the shared key.
    """
    inst = prepare_instance(kind, width, modulus, rng)
    layout = AgentLayout.honest(separation)
    net = LightConeNetwork(layout, run_id=f"commit-{kind}")
    state = {}
    target = d if reveal_value is None else reveal_value

    def on_prover_1(event, network):
        state["y"] = commit(inst, d)
        network.send("P1", "V1", "y", state["y"], at=event.time + delay)

    def on_verifier_2(event, network):
        state["reveal"] = event.payload

    net.on("P1", on_prover_1)
    net.on("V2", on_verifier_2)
    x_send = net.send("V1", "P1", "x", inst.x, at=0.0)
    # P2 keeps its own clock; it never sees x or y
    net.send("P2", "V2", "reveal", reveal_honest(inst, target), at=sustain)
    timeline = net.run()

    reveal_recv = net.find("receive", "reveal")
    accepted = verify_reveal(inst, state["y"], state["reveal"])
    window = sustain_check(x_send.time, reveal_recv.time, layout.separation)
    logger.info(
        "%s commitment over F_%d: %s, sustain slack %.3g",
        kind, modulus.q, "accepted" if accepted else "rejected", window.slack,
    )
    return CommitmentSession(
        instance=inst, committed=_as_values(inst, d), commit_msg=state["y"],
        reveal_msg=state["reveal"], accepted=accepted, sustain=window, timeline=timeline,
    )
