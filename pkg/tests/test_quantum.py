"""Tests for operator values and the consecutive-measurement inequality checks."""

import numpy as np
import pytest

from lightcone_zk.errors import (
    BlocksNotOrthogonal, DimensionMismatch, InvalidOperator, KappaOutOfRange, TooLarge,
)
from lightcone_zk.models import SweepSummary
from lightcone_zk.quantum import (
    CHECKS, DensityMatrix, Projector, ProjectorFamily, PureState, check_almost_orthogonal,
    check_main_proposition, check_pinching, check_purified_lower_bound, check_theorem_multi,
    check_theorem_single, check_theorem_unruh, compare_bounds, compute_V_E,
    lemma_projection_identities, multi_bound, purify, random_density_matrix,
    random_orthogonal_blocks, random_projector_family, random_pure_state, sweep,
    sweep_theorem_multi, threshold_set_size, tightness_instance,
)


# ─── Values ──────────────────────────────────────────────────

def test_density_matrix_validation():
    with pytest.raises(InvalidOperator):
        DensityMatrix(np.eye(2))                      # trace 2
    with pytest.raises(InvalidOperator):
        DensityMatrix([[0.5, 1.0], [0.0, 0.5]])       # not Hermitian
    with pytest.raises(InvalidOperator):
        DensityMatrix([[1.5, 0.0], [0.0, -0.5]])      # negative eigenvalue
    assert DensityMatrix.maximally_mixed(4).dim == 4


def test_pure_state_requires_unit_norm():
    with pytest.raises(InvalidOperator):
        PureState([1.0, 1.0])
    assert PureState.normalized([3.0, 4.0]).overlap(PureState.basis(2, 0)) == pytest.approx(0.36)


def test_projector_validation():
    with pytest.raises(InvalidOperator):
        Projector([[1.0, 1.0], [0.0, 0.0]])
    assert Projector.onto(PureState.basis(3, 1)).rank == 1


def test_family_rejects_overlapping_blocks():
    P = Projector.onto(PureState.basis(2, 0)).matrix
    with pytest.raises(BlocksNotOrthogonal):
        ProjectorFamily(np.array([[P, P]]))


def test_complete_family(np_rng):
    F = ProjectorFamily.from_projectors([random_orthogonal_blocks(4, [1, 3], np_rng) for _ in range(2)])
    assert F.is_complete()
    assert F.n == 2 and F.S == 2 and F.dim == 4


def test_generators_guard_dimension(np_rng):
    with pytest.raises(TooLarge):
        random_density_matrix(65, np_rng)


# ─── V and E ─────────────────────────────────────────────────

@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_tightness_instance(n):
    sigma, F = tightness_instance(n)
    V, E = compute_V_E(sigma, F)
    assert V == pytest.approx(1.0 / n, abs=1e-12)
    assert abs(E) < 1e-12
    report = check_theorem_multi(sigma, F)
    assert report.passed
    assert report.bound == pytest.approx(0.0, abs=1e-12)


def test_identity_family_has_full_value():
    sigma = DensityMatrix.maximally_mixed(3)
    F = ProjectorFamily.from_projectors([[Projector.identity(3)] for _ in range(3)])
    assert compute_V_E(sigma, F) == pytest.approx((1.0, 1.0))


def test_compute_rejects_mismatch_and_single_family(np_rng):
    sigma = random_density_matrix(3, np_rng)
    with pytest.raises(DimensionMismatch):
        compute_V_E(sigma, random_projector_family(4, 2, 1, np_rng))
    with pytest.raises(ValueError):
        compute_V_E(sigma, random_projector_family(3, 1, 1, np_rng))


def _values_by_loops(sigma, F):
    rho, P = sigma.matrix, F.blocks
    n, S = F.n, F.S
    V = sum(np.trace(P[i, s] @ rho).real for i in range(n) for s in range(S)) / n
    E = 0.0
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            for s in range(S):
                for t in range(S):
                    E += np.trace(P[j, t] @ P[i, s] @ rho @ P[i, s] @ P[j, t]).real
    return V, E / (n * (n - 1))


@pytest.mark.parametrize("d, n, S", [(8, 4, 2), (5, 3, 3), (6, 5, 1)])
def test_compute_matches_nested_loops(np_rng, d, n, S):
    for _ in range(10):
        sigma = random_density_matrix(d, np_rng)
        F = random_projector_family(d, n, S, np_rng)
        V, E = compute_V_E(sigma, F)
        V_loop, E_loop = _values_by_loops(sigma, F)
        assert abs(V - V_loop) < 1e-10
        assert abs(E - E_loop) < 1e-10


def test_multi_bound_vanishes_below_one_over_n():
    assert multi_bound(0.2, 4, 1) == 0.0
    assert multi_bound(1.0, 2, 1) == pytest.approx(0.125 / 64)


# ─── Theorem Checks ──────────────────────────────────────────

def test_random_instances_satisfy_multi(np_rng):
    for _ in range(50):
        d = int(np_rng.integers(2, 9))
        F = random_projector_family(d, int(np_rng.integers(2, 6)), int(np_rng.integers(1, 4)), np_rng)
        report = check_theorem_multi(random_density_matrix(d, np_rng), F)
        assert report.passed, report.to_dict()


def test_single_requires_one_outcome(np_rng):
    sigma = random_density_matrix(3, np_rng)
    with pytest.raises(ValueError):
        check_theorem_single(sigma, random_projector_family(3, 2, 2, np_rng))
    assert check_theorem_single(sigma, random_projector_family(3, 2, 1, np_rng)).theorem == "single"


def test_compare_bounds():
    ours, unruh = compare_bounds(1.0, 4, 1)
    assert ours == pytest.approx(0.75 ** 3 / 64)
    assert unruh == pytest.approx(0.75)
    assert compare_bounds(0.3, 4, 1)[1] is None
    assert compare_bounds(1.0, 4, 2)[1] is None
    with pytest.raises(ValueError):
        compare_bounds(1.2, 4, 1)


def test_unruh_check_on_random_instances(np_rng):
    for _ in range(20):
        F = random_projector_family(4, 3, 1, np_rng)
        assert check_theorem_unruh(random_density_matrix(4, np_rng), F).passed


def test_projection_lemma(np_rng):
    phi = random_pure_state(5, np_rng)
    P = random_orthogonal_blocks(5, [2], np_rng)[0]
    report = lemma_projection_identities(phi, P)
    assert report.passed
    assert report.extra["degenerate"] is False


def test_projection_lemma_degenerate():
    report = lemma_projection_identities(PureState.basis(2, 0), Projector.zero(2))
    assert report.passed
    assert report.extra["degenerate"] is True


def test_projection_lemma_rejects_non_fixed_point():
    with pytest.raises(InvalidOperator):
        lemma_projection_identities(
            PureState.basis(2, 0), Projector.onto(PureState.basis(2, 0)), PureState.basis(2, 1)
        )


def test_almost_orthogonal_basis_is_tight():
    report = check_almost_orthogonal([PureState.basis(3, i) for i in range(3)])
    assert report.extra["C"] == pytest.approx(0.0)
    assert report.extra["S_hat"] == pytest.approx(1.0)
    assert report.passed


def test_almost_orthogonal_random(np_rng):
    states = [random_pure_state(4, np_rng) for _ in range(6)]
    assert check_almost_orthogonal(states).passed


def test_main_proposition(np_rng):
    sigma = random_density_matrix(6, np_rng, rank=6)
    F = ProjectorFamily.from_projectors([[random_orthogonal_blocks(6, [3], np_rng)[0]] for _ in range(4)])
    reports = check_main_proposition(sigma, F, (1.5, 2.0, 8.0))
    assert [r.extra["kappa"] for r in reports] == [1.5, 2.0, 8.0]
    assert all(r.passed for r in reports)
    assert 0 <= threshold_set_size(sigma, F, 2.0) <= 4
    with pytest.raises(KappaOutOfRange):
        check_main_proposition(sigma, F, (1.0,))


def test_pinching(np_rng):
    blocks = random_orthogonal_blocks(6, [2, 2, 1], np_rng)
    assert check_pinching(random_pure_state(6, np_rng), blocks).passed
    P = Projector.onto(PureState.basis(2, 0))
    with pytest.raises(BlocksNotOrthogonal):
        check_pinching(PureState.basis(2, 0), [P, P])


def test_purification_reduces_to_state(np_rng):
    sigma = random_density_matrix(3, np_rng)
    M = purify(sigma).amplitudes.reshape(3, 3)
    assert np.allclose(M @ M.conj().T, sigma.matrix, atol=1e-10)


def test_purified_lower_bound(np_rng):
    sigma = random_density_matrix(4, np_rng)
    assert check_purified_lower_bound(sigma, random_projector_family(4, 3, 1, np_rng)).passed


# ─── Sweeps ──────────────────────────────────────────────────

def test_sweep_is_worker_independent():
    serial = sweep("multi", 12, seed=3, dim=range(2, 6), n=range(2, 4), S=range(1, 3), workers=1)
    pooled = sweep("multi", 12, seed=3, dim=range(2, 6), n=range(2, 4), S=range(1, 3), workers=4)
    assert [r.margin for r in serial] == [r.margin for r in pooled]


@pytest.mark.parametrize("theorem", sorted(CHECKS))
def test_every_check_passes_a_small_sweep(theorem):
    reports = sweep(theorem, 15, seed=11, dim=range(2, 7), n=range(2, 5), S=range(1, 3), workers=2)
    summary = SweepSummary.from_reports(reports)
    assert summary.ok, summary.to_dict()


def test_sweep_rejects_unknown_check():
    with pytest.raises(ValueError):
        sweep("nope", 1, seed=0)


@pytest.mark.slow
def test_multi_sweep_over_full_grid():
    """10⁴ instances with d ≤ 32, n ≤ 8, S ≤ 4."""
    summary = SweepSummary.from_reports(sweep_theorem_multi(10_000, seed=2024))
    assert summary.passed == 10_000
    assert summary.min_margin >= -1e-9
