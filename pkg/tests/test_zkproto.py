"""Tests for the relativistic Hamiltonian-cycle protocol, its soundness and zero knowledge."""

import itertools
import json
import math
import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lightcone_zk.errors import (
    GraphIsHamiltonian, InvalidWitness, MalformedTranscript, RewindingError,
    SignalingViolation, TooLarge,
)
from lightcone_zk.fq import FieldModulus, FqMatrix
from lightcone_zk.graphs import (
    Cycle, Permutation, complete_graph, cycle_graph, find_hamiltonian_cycle, missing_edges,
)
from lightcone_zk.models import RejectReason
from lightcone_zk.zkproto import (
    CheatingProverPair, CycleOpening, OneShotVerifier, PermutationOpening, ProtocolSession,
    ProverWitness, attack_harness, classical_soundness_value, coin_verifier,
    entry_verifier, fixed_verifier, optimal_classical_pair, parity_verifier, random_pair,
    real_view_distribution, relaying_pair, replay_both_challenges, run_honest,
    simulated_view_distribution, size_parameters, soundness_bound, transcript_from_json,
    transcript_to_json, verify, zk_distance, zk_simulate,
)


def _honest(G, modulus, seed, **kwargs):
    return run_honest(G, find_hamiltonian_cycle(G), modulus, seed, **kwargs)


# ─── Completeness ────────────────────────────────────────────

@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_honest_runs_always_accept(n, f7):
    G = cycle_graph(n)
    for seed in range(60):
        t = _honest(G, f7, seed)
        assert t.accepted, t.verdict


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 63), n=st.integers(min_value=3, max_value=6))
def test_honest_runs_accept_on_complete_graphs(seed, n):
    t = _honest(complete_graph(n), FieldModulus.prime(11), seed)
    assert t.accepted


def test_honest_accepts_every_challenge_matrix(k3, f2):
    """n = 3 over 𝔽_2: all 512 matrices B and both challenges."""
    cycle = find_hamiltonian_cycle(k3)
    witness = ProverWitness.prepare(k3, cycle, f2, random.Random(3))
    for values in itertools.product(range(2), repeat=9):
        B = FqMatrix(3, 3, values, f2)
        for chall in (0, 1):
            t = run_honest(k3, cycle, f2, 0, B=B, chall=chall, witness=witness)
            assert t.accepted


@pytest.mark.slow
def test_honest_accepts_every_challenge_matrix_over_f5(k3, f5):
    """n = 3 over 𝔽_5: all 5⁹ matrices B."""
    cycle = find_hamiltonian_cycle(k3)
    witness = ProverWitness.prepare(k3, cycle, f5, random.Random(5))
    for index, values in enumerate(itertools.product(range(5), repeat=9)):
        B = FqMatrix(3, 3, values, f5)
        t = run_honest(k3, cycle, f5, 0, B=B, chall=index % 2, witness=witness)
        assert t.accepted, values


def test_honest_rejects_non_hamiltonian_witness(path3, f7):
    with pytest.raises(InvalidWitness):
        run_honest(path3, Cycle((1, 2, 3)), f7, 0)


def test_session_logs_rounds(c5, f7):
    lines = []
    session = ProtocolSession(c5, f7, on_log=lines.append)
    session.run_honest(find_hamiltonian_cycle(c5), random.Random(1), chall=1)
    assert any("accept" in line for line in lines)


# ─── Verification ────────────────────────────────────────────

def test_tampered_commitment_reports_entry(k3, f7):
    t = _honest(k3, f7, 5, chall=0)
    values = list(t.Y.values)
    values[5] = (values[5] + 1) % 7                  # row 2, column 3
    verdict = verify(replace(t, Y=FqMatrix(3, 3, tuple(values), f7)), k3, f7)
    assert verdict.reason is RejectReason.ALGEBRA_0
    assert verdict.entry == (2, 3)


def test_tampered_cycle_opening(k3, f7):
    t = _honest(k3, f7, 6, chall=1)
    (edge, value), *rest = t.answer.openings
    forged = CycleOpening(t.answer.vertices, (((edge), (value + 1) % 7),) + tuple(rest))
    verdict = verify(replace(t, answer=forged), k3, f7)
    assert verdict.reason is RejectReason.ALGEBRA_1
    assert verdict.entry == edge


def test_bad_permutation_and_cycle(k3, f7):
    t0 = _honest(k3, f7, 1, chall=0)
    bad_pi = replace(t0, answer=PermutationOpening((1, 1, 3), t0.answer.A))
    assert verify(bad_pi, k3, f7).reason is RejectReason.BAD_PERMUTATION

    t1 = _honest(k3, f7, 1, chall=1)
    bad_cycle = replace(t1, answer=CycleOpening((1, 2, 2), t1.answer.openings))
    assert verify(bad_cycle, k3, f7).reason is RejectReason.BAD_CYCLE
    missing = replace(t1, answer=CycleOpening(t1.answer.vertices, t1.answer.openings[:2]))
    assert verify(missing, k3, f7).reason is RejectReason.BAD_CYCLE


def test_late_answer_fails_timing(k3, f7):
    t = _honest(k3, f7, 2, separation=1.0, delay=1.0)
    assert t.verdict.reason is RejectReason.TIMING
    assert verify(t, k3, f7, timing=False).accepted


def test_malformed_transcripts(k3, f7, f5):
    t = _honest(k3, f7, 3, chall=0)
    with pytest.raises(MalformedTranscript):
        verify(replace(t, chall=1), k3, f7)
    with pytest.raises(MalformedTranscript):
        verify(t, k3, f5)
    with pytest.raises(MalformedTranscript):
        verify(replace(t, timeline=()), k3, f7)
    with pytest.raises(MalformedTranscript):
        verify(t, complete_graph(4), f7)


# ─── Cheating Provers ────────────────────────────────────────

def test_second_prover_may_only_see_the_challenge(f7):
    with pytest.raises(SignalingViolation):
        CheatingProverPair(lambda B: B, lambda chall, B: None)
    with pytest.raises(SignalingViolation):
        CheatingProverPair(lambda B: B, lambda *args: None)


def test_relaying_pair_is_caught_by_timing(k3, f7):
    session = ProtocolSession(k3, f7, separation=2.0)
    rng = random.Random(9)
    for _ in range(20):
        t = session.run_pair(relaying_pair(k3, f7, rng), rng)
        assert t.verdict.reason is RejectReason.TIMING
        assert verify(t, k3, f7, timing=False).accepted


def test_optimal_pair_always_wins_challenge_zero(path3, f3):
    rng = random.Random(4)
    session = ProtocolSession(path3, f3)
    for _ in range(30):
        assert session.run_pair(optimal_classical_pair(path3, f3, rng), rng, chall=0).accepted


# ─── Soundness ───────────────────────────────────────────────

def test_classical_soundness_values(path3, star4, f3, f5, f7):
    assert classical_soundness_value(path3, f3) == Fraction(2, 3)
    assert classical_soundness_value(path3, f5) == Fraction(3, 5)
    assert classical_soundness_value(path3, f7) == Fraction(4, 7)
    assert classical_soundness_value(star4, f3) == Fraction(5, 9)


@pytest.mark.parametrize("q", [3, 5, 7])
def test_path_value_is_half_plus_half_over_q_and_below_bound(path3, q):
    value = classical_soundness_value(path3, FieldModulus.prime(q))
    assert value == Fraction(1, 2) * (1 + Fraction(1, q))
    assert value <= soundness_bound(3, q)


def test_soundness_value_guards(k3, f3):
    with pytest.raises(GraphIsHamiltonian):
        classical_soundness_value(k3, f3)
    with pytest.raises(TooLarge):
        classical_soundness_value(cycle_graph(8), f3)


def test_size_parameters():
    p = size_parameters(3, 1)
    assert (p.q0, p.q.q, p.bits_per_round) == (3072, 3079, 108)
    assert p.to_dict()["bits"] == 108
    assert size_parameters(4, 2).q0 == 98304
    assert size_parameters(3, 2).bound == Fraction(3, 4)
    with pytest.raises(ValueError):
        size_parameters(2, 1)
    with pytest.raises(ValueError):
        size_parameters(3, 0)


def test_soundness_bound():
    assert soundness_bound(3, 3072) == 1
    assert soundness_bound(3, 3072 * 8) == Fraction(3, 4)
    approx = soundness_bound(3, 5000)
    assert isinstance(approx, float)
    assert approx == pytest.approx(0.5 + (384 / 5000) ** (1 / 3))


@pytest.mark.slow
def test_attack_rate_matches_exact_value(path3, f3):
    report = attack_harness(path3, f3, "optimal", 4000, seed=17, workers=2)
    assert report.exact_value == Fraction(2, 3)
    sigma = math.sqrt(2 / 9 / 4000)
    assert abs(report.rate - 2 / 3) < 5 * sigma
    assert report.ci[0] < report.rate < report.ci[1]


@pytest.mark.slow
def test_long_attack_run_lands_in_interval(path3, f3):
    report = attack_harness(path3, f3, "optimal", 100_000, seed=23, workers=4, confidence=0.99)
    assert report.confidence == 0.99
    assert report.ci[0] <= 2 / 3 <= report.ci[1]
    assert report.consistent


def test_attack_harness_is_deterministic(path3, f3):
    a = attack_harness(path3, f3, "honest-style", 300, seed=5, workers=1)
    b = attack_harness(path3, f3, "honest-style", 300, seed=5, workers=4)
    assert (a.wins, a.reasons) == (b.wins, b.reasons)


def test_relaying_attack_never_wins(path3, f3):
    report = attack_harness(path3, f3, "relaying", 200, seed=1, workers=2)
    assert report.wins == 0
    assert report.reasons == {"timing": 200}


def test_random_pair_does_worse(star4, f3):
    report = attack_harness(star4, f3, random_pair, 600, seed=2, workers=2)
    assert report.rate < float(classical_soundness_value(star4, f3))


def test_unknown_strategy(path3, f3):
    with pytest.raises(ValueError):
        attack_harness(path3, f3, "psychic", 1)


def test_replay_extracts_challenge_entries(path3, f3):
    pair = optimal_classical_pair(path3, f3, random.Random(12))
    cycle = Cycle(pair.p2(1).vertices)
    opened = pair.p2(1).as_dict()
    A = pair.p2(0).A
    rows = [[0] * 3 for _ in range(3)]
    for u, v in missing_edges(path3, cycle):
        rows[u - 1][v - 1] = (A.value(u - 1, v - 1) - opened[(u, v)]) % 3
    report = replay_both_challenges(pair, path3, f3, FqMatrix.from_rows(rows, f3))
    assert report.both_accepted
    assert report.identity_holds
    assert len(report.extracted) == 1

    (u, v), b, gap = report.extracted[0]
    rows[u - 1][v - 1] = (gap + 1) % 3
    assert not replay_both_challenges(pair, path3, f3, FqMatrix.from_rows(rows, f3)).both_accepted


# ─── Zero Knowledge ──────────────────────────────────────────

def _verifiers(n, modulus):
    ones = FqMatrix.ones(n, n, modulus)
    zeros = FqMatrix.zeros(n, n, modulus)
    return [
        fixed_verifier(ones, 0), fixed_verifier(zeros, 1), coin_verifier(ones),
        parity_verifier(zeros, ones), entry_verifier(ones),
    ]


def test_simulator_is_perfect_over_f2(k3, f2):
    for verifier in _verifiers(3, f2):
        assert zk_distance(verifier, k3, f2) == 0, verifier.name


@pytest.mark.slow
def test_simulator_is_perfect_over_f3(k3, f3):
    assert zk_distance(parity_verifier(FqMatrix.zeros(3, 3, f3), FqMatrix.ones(3, 3, f3)), k3, f3) == 0


def test_broken_simulator_is_detected(k3, f2):
    weights = {Permutation.identity(3): Fraction(1)}
    distance = zk_distance(fixed_verifier(FqMatrix.ones(3, 3, f2), 0), k3, f2, permutation_weights=weights)
    assert distance > 0


def test_view_distributions_are_normalized(k3, f2):
    verifier = coin_verifier(FqMatrix.ones(3, 3, f2))
    cycle = find_hamiltonian_cycle(k3)
    assert sum(real_view_distribution(verifier, k3, cycle, f2).values()) == 1
    assert sum(simulated_view_distribution(verifier, k3, f2).values()) == 1


def test_zk_enumeration_guard(k4, f2):
    with pytest.raises(TooLarge):
        zk_distance(coin_verifier(FqMatrix.ones(4, 4, f2)), k4, f2)


def test_simulated_views_verify_without_a_cycle(path3, f7):
    """The simulator never touches a witness, so it works even on a non-Hamiltonian graph."""
    rng = random.Random(8)
    verifier = entry_verifier(FqMatrix.ones(3, 3, f7))
    for _ in range(40):
        t = zk_simulate(verifier, path3, f7, rng)
        assert verify(t, path3, f7, timing=False).accepted


def test_verifier_cannot_be_rewound(f2):
    v = OneShotVerifier(coin_verifier(FqMatrix.ones(3, 3, f2)))
    v.matrix(0)
    with pytest.raises(RewindingError):
        v.matrix(1)
    v.new_round()
    B = v.matrix(1)
    v.challenge(1, B, B)
    with pytest.raises(RewindingError):
        v.challenge(1, B, B)


# ─── Transcript JSON ─────────────────────────────────────────

@pytest.mark.parametrize("chall", [0, 1])
def test_transcript_json_reverifies(c5, f7, chall):
    t = _honest(c5, f7, 21, separation=3.0, chall=chall)
    restored = transcript_from_json(transcript_to_json(t))
    assert restored.verdict.accepted
    assert verify(restored, c5, f7).accepted
    assert restored.B == t.B and restored.Y == t.Y


def test_transcript_json_with_bad_permutation(k3, f7):
    data = json.loads(transcript_to_json(_honest(k3, f7, 4, chall=0)))
    data["answer"]["pi"] = [2, 2, 3]
    restored = transcript_from_json(json.dumps(data))
    assert verify(restored, k3, f7).reason is RejectReason.BAD_PERMUTATION


@pytest.mark.parametrize("text", ["not json", "{}", '{"n": 3, "q": 9}'])
def test_transcript_json_malformed(text):
    with pytest.raises(MalformedTranscript):
        transcript_from_json(text)
