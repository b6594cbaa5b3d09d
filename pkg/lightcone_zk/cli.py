"""
cli.py — Command-line front end for seeded batch experiments.

Covers:
  • params, run, verify, attack, zk-compare, verify-quantum, game, binding, commit
  • Shared flags (--seed, --format, --output, --workers, --separation, --delay,
    --verbose / --quiet) on every subcommand
  • JSON-lines per-trial records followed by one summary object
  • Exit codes: 0 success, 1 failed invariant or library error, 2 usage error
"""

import argparse
import logging
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Union

from . import __version__
from .config import DEFAULT_CONFIDENCE, RunSettings, spawn_seeds
from .engine import TrialEngine
from .errors import LabError, NotPrime, UsageError
from .fq import FieldModulus, FqMatrix
from .graphs import Graph, complete_graph, find_hamiltonian_cycle, load_graph
from .models import SweepSummary
from .quantum import CHECKS
from .utils import to_json

logger = logging.getLogger(__name__)

IntOrRange = Union[int, range]


# ─── Results ─────────────────────────────────────────────────

@dataclass
class CommandResult:
    """Per-trial records, one summary object, and whether every invariant held."""
    summary: dict
    ok: bool = True
    records: List[dict] = field(default_factory=list)


# ─── Argument Helpers ────────────────────────────────────────

def _int_or_range(text: str) -> IntOrRange:
    """"8" → 8, "2-32" → range(2, 33)."""
    try:
        if "-" in text:
            lo, hi = (int(part) for part in text.split("-", 1))
            if lo > hi:
                raise ValueError
            return range(lo, hi + 1)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a range like 2-32, got {text!r}")


def _prime_modulus(q: int) -> FieldModulus:
    try:
        return FieldModulus.prime(q)
    except NotPrime as exc:
        raise UsageError(f"--q must be prime for protocol runs: {exc}") from exc


def _load(path: str) -> Graph:
    try:
        return load_graph(path)
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path!r}: {exc.strerror}") from exc


def _progress_logger(every: int = 10) -> Callable[[str, int, int], None]:
    marks: Dict[str, int] = {}

    def report(stage: str, current: int, total: int) -> None:
        pct = current * 100 // total
        if pct // every > marks.get(stage, -1):
            marks[stage] = pct // every
            logger.info("%s: %d/%d (%d%%)", stage, current, total, pct)

    return report


# ─── Subcommands ─────────────────────────────────────────────

def cmd_params(args, settings: RunSettings) -> CommandResult:
    from .zkproto import size_parameters

    params = size_parameters(args.n, args.k)
    return CommandResult(params.to_dict())


def cmd_run(args, settings: RunSettings) -> CommandResult:
    from .zkproto import run_honest, transcript_to_dict

    G = _load(args.graph)
    modulus = _prime_modulus(args.q)
    cycle = find_hamiltonian_cycle(G)
    if cycle is None:
        raise UsageError(f"{args.graph} has no Hamiltonian cycle; honest runs need one")

    def trial(index: int, trial_seed: int) -> dict:
        t = run_honest(G, cycle, modulus, trial_seed, settings.separation, settings.processing_delay)
        if args.transcripts:
            return dict(transcript_to_dict(t), trial=index)
        return {
            "trial": index,
            "chall": t.chall,
            "verdict": "accept" if t.accepted else "reject",
            "reason": t.verdict.reason.display if t.verdict.reason else None,
        }

    engine = TrialEngine(settings.workers, "run", _progress_logger())
    records = engine.run(trial, settings.seed64, args.trials)
    accepted = sum(1 for r in records if r["verdict"] == "accept")
    reasons: Dict[str, int] = {}
    for r in records:
        if r["reason"]:
            reasons[r["reason"]] = reasons.get(r["reason"], 0) + 1
    summary = {
        "n": G.n, "q": modulus.q, "trials": args.trials,
        "accepted": accepted, "rejected": args.trials - accepted, "reasons": reasons,
        "cycle": list(cycle.vertices),
    }
    return CommandResult(summary, accepted == args.trials, records)


def cmd_verify(args, settings: RunSettings) -> CommandResult:
    from .zkproto import transcript_from_json, verify

    G = _load(args.graph)
    try:
        with open(args.transcript, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read transcript {args.transcript!r}: {exc.strerror}") from exc
    t = transcript_from_json(text, separation=args.replay_separation)
    verdict = verify(t, G, t.modulus, timing=not args.skip_timing)
    summary = dict(verdict.to_dict(), entry=list(verdict.entry) if verdict.entry else None)
    return CommandResult(summary, verdict.accepted)


def cmd_attack(args, settings: RunSettings) -> CommandResult:
    from .zkproto import attack_harness

    G = _load(args.graph)
    report = attack_harness(
        G, _prime_modulus(args.q), args.strategy, args.trials, settings.seed64,
        workers=settings.workers, confidence=args.confidence,
        separation=settings.separation, delay=settings.processing_delay,
        on_progress=_progress_logger(),
    )
    ok = report.consistent is not False
    if args.strategy == "relaying":
        ok = ok and report.wins == 0
    return CommandResult(report.to_dict(), ok)


def _zk_verifiers(n: int, modulus: FieldModulus):
    from .zkproto import coin_verifier, entry_verifier, fixed_verifier, parity_verifier

    ones = FqMatrix.ones(n, n, modulus)
    zeros = FqMatrix.zeros(n, n, modulus)
    return {
        "fixed-0": fixed_verifier(ones, 0),
        "fixed-1": fixed_verifier(ones, 1),
        "coin":    coin_verifier(ones),
        "parity":  parity_verifier(zeros, ones),
        "entry":   entry_verifier(ones),
    }


def cmd_zk_compare(args, settings: RunSettings) -> CommandResult:
    from .zkproto import zk_distance

    G = _load(args.graph) if args.graph else complete_graph(args.n)
    modulus = _prime_modulus(args.q)
    verifiers = _zk_verifiers(G.n, modulus)
    chosen = [args.verifier] if args.verifier else list(verifiers)
    records = []
    for name in chosen:
        records.append({"verifier": name, "tv_distance": zk_distance(verifiers[name], G, modulus)})
    worst = max(r["tv_distance"] for r in records)
    summary = {"n": G.n, "q": modulus.q, "verifiers": chosen, "tv_distance": worst}
    return CommandResult(summary, worst == 0, records)


def cmd_verify_quantum(args, settings: RunSettings) -> CommandResult:
    from .quantum import sweep

    theorems = sorted(CHECKS) if args.theorem == "all" else [args.theorem]
    reports = []
    for theorem in theorems:
        reports.extend(sweep(
            theorem, args.trials, settings.seed64, args.dim, args.n, args.s,
            settings.workers, _progress_logger(),
        ))
    summary = SweepSummary.from_reports(reports)
    return CommandResult(summary.to_dict(), summary.ok, [r.to_dict() for r in reports])


def cmd_game(args, settings: RunSettings) -> CommandResult:
    from .games import chsh_q_bounds, chsh_q_game, classical_value, couple_game

    report = chsh_q_bounds(args.q, args.p, args.reps)
    ok = True
    if args.exact:
        game = chsh_q_game(args.q, args.p)
        value = classical_value(game, settings.workers)
        coupled = classical_value(couple_game(game), settings.workers)
        report.extra.update({"classical_value": value, "coupled_classical_value": coupled})
        ok = value <= report.single_bound and coupled <= Fraction(1, args.q)
    return CommandResult(report.to_dict(), ok)


def cmd_binding(args, settings: RunSettings) -> CommandResult:
    from .commitment import binding_attack_value, sum_binding_epsilon

    size = args.p if args.kind != "bit" else 2
    report = sum_binding_epsilon(args.kind, size, args.q)
    ok = True
    if args.attack:
        value = binding_attack_value(report.kind, report.size, args.q, settings.workers)
        report.extra["attack_value"] = value
        ok = value <= 1 + report.epsilon
    return CommandResult(report.to_dict(), ok)


def cmd_commit(args, settings: RunSettings) -> CommandResult:
    from .commitment import run_commitment_session

    rng = random.Random(spawn_seeds(settings.seed64, 1)[0])
    value = args.value if len(args.value) > 1 else args.value[0]
    reveal = None
    if args.reveal is not None:
        reveal = args.reveal if len(args.reveal) > 1 else args.reveal[0]
    session = run_commitment_session(
        args.kind, args.width, value, _prime_modulus(args.q), rng,
        separation=settings.separation, sustain=args.sustain,
        delay=settings.processing_delay, reveal_value=reveal,
    )
    return CommandResult(session.to_dict(), session.accepted and session.binding_window_held)


COMMANDS: Dict[str, Callable[..., CommandResult]] = {
    "params":         cmd_params,
    "run":            cmd_run,
    "verify":         cmd_verify,
    "attack":         cmd_attack,
    "zk-compare":     cmd_zk_compare,
    "verify-quantum": cmd_verify_quantum,
    "game":           cmd_game,
    "binding":        cmd_binding,
    "commit":         cmd_commit,
}


# ─── Parser ──────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help="64-bit master seed (default: $LCZK_SEED or 0)")
    common.add_argument("--format", choices=("json", "pretty"), default="json")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--separation", type=float, default=None, help="V1–V2 distance (c = 1)")
    common.add_argument("--delay", type=float, default=None, help="prover processing delay")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true")
    noise.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="lightcone-zk",
        description="Relativistic two-prover zero-knowledge laboratory.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = True

    p = sub.add_parser("params", parents=[common], help="size Q for n vertices and k bits of soundness")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("run", parents=[common], help="honest protocol rounds")
    p.add_argument("--graph", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--transcripts", action="store_true", help="emit full transcripts per trial")

    p = sub.add_parser("verify", parents=[common], help="re-verify a saved transcript")
    p.add_argument("--graph", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--replay-separation", type=float, default=None)
    p.add_argument("--skip-timing", action="store_true")

    p = sub.add_parser("attack", parents=[common], help="Monte Carlo cheating prover pairs")
    p.add_argument("--graph", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--strategy", choices=("optimal", "random", "honest-style", "relaying"), default="optimal")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--confidence", type=float, default=DEFAULT_CONFIDENCE)

    p = sub.add_parser("zk-compare", parents=[common], help="exact real vs simulated view distance")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--graph", default=None)
    p.add_argument("--verifier", choices=("fixed-0", "fixed-1", "coin", "parity", "entry"), default=None)

    p = sub.add_parser("verify-quantum", parents=[common], help="random sweeps of the quantum inequalities")
    p.add_argument("--dim", type=_int_or_range, default=8)
    p.add_argument("--n", type=_int_or_range, default=4)
    p.add_argument("--s", type=_int_or_range, default=1)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--theorem", choices=sorted(CHECKS) + ["all"], default="multi")

    p = sub.add_parser("game", parents=[common], help="CHSH^Q bounds and coupled values")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--exact", action="store_true", help="also compute exact classical values")

    p = sub.add_parser("binding", parents=[common], help="sum-binding ε for the commitment flavours")
    p.add_argument("--kind", choices=("bit", "string", "parallel"), default="string")
    p.add_argument("--p", type=int, default=2, help="alphabet size, or slot count for parallel")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--attack", action="store_true", help="also compute the best classical attack")

    p = sub.add_parser("commit", parents=[common], help="commit / sustain / reveal on the network")
    p.add_argument("--kind", choices=("bit", "string", "parallel"), default="bit")
    p.add_argument("--width", type=int, default=2)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--value", type=int, nargs="+", required=True)
    p.add_argument("--reveal", type=int, nargs="+", default=None, help="open a different value")
    p.add_argument("--sustain", type=float, default=0.5)
    return parser


def settings_from_args(args) -> RunSettings:
    settings = RunSettings(subcommand=args.subcommand, output_format=args.format, output_path=args.output)
    if args.seed is not None:
        settings.seed = args.seed
    if args.workers is not None:
        settings.workers = max(1, args.workers)
    if args.separation is not None:
        settings.separation = args.separation
    if args.delay is not None:
        settings.processing_delay = args.delay
    return settings


# ─── Output ──────────────────────────────────────────────────

def render(result: CommandResult, pretty: bool) -> str:
    lines = [to_json(r, pretty=pretty) for r in result.records]
    lines.append(to_json(result.summary, pretty=pretty))
    return "\n".join(lines) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    logger.info("💾 Report written to %s", path)


# ─── Entry Point ─────────────────────────────────────────────

def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    settings = settings_from_args(args)
    logger.debug("settings: %s", settings)
    try:
        result = COMMANDS[args.subcommand](args, settings)
        _write(render(result, settings.pretty), settings.output_path)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        logger.error("%s: %s", args.subcommand, exc)
        return 2
    except LabError as exc:
        logger.error("❌ %s failed: %s", args.subcommand, exc)
        return 1
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        logger.error("%s: %s", args.subcommand, exc)
        return 2

    if result.ok:
        logger.info("✅ %s passed", args.subcommand)
        return 0
    logger.warning("⚠️ %s: an invariant failed", args.subcommand)
    return 1


def main() -> int:
    return dispatch(sys.argv[1:])
