"""
spacetime.py — Agents on a line exchanging messages no faster than light.

Handles:
  • Agent sites (P1, P2, V1, V2) at fixed 1-D positions, c = 1
  • Send / receive events and time-ordered timelines
  • A deterministic heapq event loop that delivers payloads only once
    their light cone has reached the receiver
  • The no-superluminal-signaling deadline check and the sustain bound
  • JSON-lines timeline export
"""

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from .config import DEFAULT_SEPARATION, SPEED_OF_LIGHT
from .errors import CausalityViolationInConstruction, MismatchedRun
from .utils import to_json

logger = logging.getLogger(__name__)

AGENT_IDS = ("P1", "P2", "V1", "V2")
SEND, RECEIVE = "send", "receive"


# ─── Values ──────────────────────────────────────────────────

@dataclass(frozen=True)
class AgentSite:
    """A named agent at a 1-D coordinate. Only verifier positions are trusted."""
    id: str
    position: float

    def __post_init__(self):
        if self.id not in AGENT_IDS:
            raise ValueError(f"unknown agent {self.id!r}, expected one of {AGENT_IDS}")

    def distance_to(self, other: "AgentSite") -> float:
        return abs(self.position - other.position)

    @property
    def is_verifier(self) -> bool:
        return self.id.startswith("V")


@dataclass(frozen=True)
class AgentLayout:
    """Positions of all four agents."""
    v1: AgentSite
    v2: AgentSite
    p1: AgentSite
    p2: AgentSite

    @classmethod
    def honest(cls, separation: float = DEFAULT_SEPARATION) -> "AgentLayout":
        """V1 at 0, V2 at D; each prover co-located with its verifier."""
        if separation <= 0:
            raise ValueError(f"separation must be positive, got {separation}")
        return cls(
            v1=AgentSite("V1", 0.0),
            v2=AgentSite("V2", float(separation)),
            p1=AgentSite("P1", 0.0),
            p2=AgentSite("P2", float(separation)),
        )

    @property
    def separation(self) -> float:
        return self.v1.distance_to(self.v2)

    def site(self, agent_id: str) -> AgentSite:
        return {"V1": self.v1, "V2": self.v2, "P1": self.p1, "P2": self.p2}[agent_id]


@dataclass(frozen=True)
class SpacetimeEvent:
    """One send or receive of message `msg`; times are in units of distance / c."""
    kind: str
    msg: str
    src: AgentSite
    dst: AgentSite
    time: float
    run_id: str = ""
    payload: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in (SEND, RECEIVE):
            raise ValueError(f"event kind must be send or receive, got {self.kind!r}")

    @property
    def light_travel_time(self) -> float:
        return self.src.distance_to(self.dst) / SPEED_OF_LIGHT

    def to_dict(self) -> dict:
        return {"kind": self.kind, "msg": self.msg, "from": self.src.id, "to": self.dst.id, "time": self.time}


@dataclass(frozen=True)
class CausalityVerdict:
    """`passed` holds exactly when `slack` is strictly positive."""
    passed: bool
    slack: float
    explanation: str

    @classmethod
    def from_slack(cls, slack: float, explanation: str) -> "CausalityVerdict":
        return cls(passed=slack > 0, slack=slack, explanation=explanation)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"pass": self.passed, "slack": self.slack, "explanation": self.explanation}


# ─── Timeline ────────────────────────────────────────────────

def _order_key(event: SpacetimeEvent) -> Tuple[float, str, int]:
    return event.time, event.msg, 0 if event.kind == SEND else 1


def schedule(events: Iterable[SpacetimeEvent]) -> Tuple[SpacetimeEvent, ...]:
    """
    Stable time-ordered timeline, ties broken by message id (send before receive).
    Raises CausalityViolationInConstruction if a receive beats its light cone.
    """
    events = list(events)
    sends: Dict[Tuple[str, str], SpacetimeEvent] = {
        (e.run_id, e.msg): e for e in events if e.kind == SEND
    }
    for e in events:
        if e.kind != RECEIVE:
            continue
        sent = sends.get((e.run_id, e.msg))
        if sent is None:
            continue
        arrival = sent.time + sent.light_travel_time
        if e.time < arrival:
            raise CausalityViolationInConstruction(
                f"message {e.msg!r} received at t={e.time} before light-cone arrival t={arrival}"
            )
    return tuple(sorted(events, key=_order_key))


def timeline_to_jsonl(events: Iterable[SpacetimeEvent]) -> str:
    return "\n".join(to_json(e.to_dict()) for e in events)


# ─── Causality Checks ────────────────────────────────────────

def nss_check(b_send: SpacetimeEvent, answer_recv: SpacetimeEvent) -> CausalityVerdict:
    """
    The answer must reach V2 strictly before any signal carrying B could:
    pass iff answer_recv.time < b_send.time + |V1 − V2| / c.
    """
    if b_send.run_id != answer_recv.run_id:
        raise MismatchedRun(f"events from runs {b_send.run_id!r} and {answer_recv.run_id!r}")
    if b_send.kind != SEND or b_send.src.id != "V1":
        raise MismatchedRun("first event must be V1 sending the challenge matrix")
    if answer_recv.kind != RECEIVE or answer_recv.dst.id != "V2":
        raise MismatchedRun("second event must be V2 receiving the answer")

    separation = b_send.src.distance_to(answer_recv.dst)
    deadline = b_send.time + separation / SPEED_OF_LIGHT
    slack = deadline - answer_recv.time
    if slack > 0:
        explanation = f"answer at t={answer_recv.time} beat the light-cone deadline t={deadline}"
    else:
        explanation = f"answer at t={answer_recv.time} not before the light-cone deadline t={deadline}"
    return CausalityVerdict.from_slack(slack, explanation)


def sustain_check(commit_time: float, reveal_time: float, separation: float) -> CausalityVerdict:
    """Binding holds while the sustain interval τ = reveal − commit stays below D / c."""
    tau = reveal_time - commit_time
    if tau < 0:
        raise ValueError(f"reveal at t={reveal_time} precedes commit at t={commit_time}")
    limit = separation / SPEED_OF_LIGHT
    return CausalityVerdict.from_slack(limit - tau, f"sustain τ={tau} against bound D/c={limit}")


# ─── Event Loop ──────────────────────────────────────────────

Handler = Callable[[SpacetimeEvent, "LightConeNetwork"], None]


class LightConeNetwork:
    """
    Deterministic discrete-event loop.

    Messages are pushed on a heap keyed by (arrival time, message id, seq)
    and handed to the receiving agent's handler only at arrival; a message
    may be delayed beyond its light cone but never delivered earlier.
    """

    def __init__(self, layout: AgentLayout, run_id: str = "run"):
        self.layout = layout
        self.run_id = run_id
        self.now = 0.0
        self._queue: List[tuple] = []
        self._seq = itertools.count()
        self._handlers: Dict[str, Handler] = {}
        self._events: List[SpacetimeEvent] = []

    def on(self, agent_id: str, handler: Handler) -> None:
        self._handlers[agent_id] = handler

    def send(
        self,
        src: str,
        dst: str,
        msg: str,
        payload: object = None,
        at: Optional[float] = None,
        extra_delay: float = 0.0,
    ) -> SpacetimeEvent:
        """Emit `msg` from `src` at time `at` (default: now) towards `dst`."""
        if extra_delay < 0:
            raise CausalityViolationInConstruction(f"message {msg!r} cannot travel faster than light")
        send_time = self.now if at is None else at
        if send_time < self.now:
            raise CausalityViolationInConstruction(f"message {msg!r} sent in the past (t={send_time} < {self.now})")

        event = SpacetimeEvent(
            SEND, msg, self.layout.site(src), self.layout.site(dst), send_time, self.run_id, payload
        )
        arrival = send_time + event.light_travel_time + extra_delay
        heapq.heappush(self._queue, (arrival, msg, next(self._seq), event))
        self._events.append(event)
        logger.debug("[%s] %s → %s %r at t=%g, arrives t=%g", self.run_id, src, dst, msg, send_time, arrival)
        return event

    def run(self, until: Optional[float] = None) -> Tuple[SpacetimeEvent, ...]:
        """Deliver queued messages in arrival order; handlers may send more."""
        while self._queue:
            arrival, _, _, sent = self._queue[0]
            if until is not None and arrival > until:
                break
            heapq.heappop(self._queue)
            self.now = arrival
            received = SpacetimeEvent(
                RECEIVE, sent.msg, sent.src, sent.dst, arrival, self.run_id, sent.payload
            )
            self._events.append(received)
            handler = self._handlers.get(sent.dst.id)
            if handler is not None:
                handler(received, self)
        return self.timeline()

    def timeline(self) -> Tuple[SpacetimeEvent, ...]:
        return schedule(self._events)

    def find(self, kind: str, msg: str) -> Optional[SpacetimeEvent]:
        for e in self._events:
            if e.kind == kind and e.msg == msg:
                return e
        return None
