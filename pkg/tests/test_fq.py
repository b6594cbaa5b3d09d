"""Tests for prime-field arithmetic, matrices and sampling."""

import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st
from sympy import isprime

from lightcone_zk.errors import DivisionByZero, ModulusMismatch, NotPrime, ShapeMismatch
from lightcone_zk.fq import (
    FieldElement, FieldModulus, FqMatrix, field_arith, is_prime, matrix_entrywise,
    next_prime_at_least, sample_residue, sample_uniform,
)

PRIMES = [2, 3, 5, 7, 11, 13, 97, 3079, 1_000_003]
primes = st.sampled_from(PRIMES)


# ─── Primality ───────────────────────────────────────────────

def test_is_prime_small_values():
    assert [x for x in range(30) if is_prime(x)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_is_prime_beyond_trial_division():
    assert is_prime(1_000_003)
    assert not is_prime(1_000_001)        # 101 · 9901
    assert is_prime(2 ** 61 - 1)


def test_certified_modulus():
    assert FieldModulus.prime(7).certified
    with pytest.raises(NotPrime):
        FieldModulus.prime(9)


def test_uncertified_modulus_cannot_sample(rng):
    with pytest.raises(NotPrime):
        sample_uniform((2, 2), FieldModulus(7), rng)


def test_next_prime_at_least():
    assert next_prime_at_least(90).q == 97
    assert next_prime_at_least(3072).q == 3079
    assert next_prime_at_least(97).q == 97
    assert next_prime_at_least(2).q == 2
    assert next_prime_at_least(98304).certified


@pytest.mark.slow
def test_next_prime_skips_only_composites():
    for x in range(2, 100_000, 7):
        q = next_prime_at_least(x).q
        assert isprime(q)
        assert not any(isprime(y) for y in range(x, q)), x


# ─── Field Arithmetic ────────────────────────────────────────

def test_inverse_of_three_mod_seven(f7):
    assert field_arith("inv", f7.element(3)).value == 5


def test_inverse_of_zero_raises(f7):
    with pytest.raises(DivisionByZero):
        field_arith("inv", f7.zero)
    with pytest.raises(ZeroDivisionError):
        f7.one / f7.zero


def test_mixed_moduli_raise(f5, f7):
    with pytest.raises(ModulusMismatch):
        field_arith("add", f5.one, f7.one)


def test_operator_overloads(f7):
    a, b = f7.element(5), f7.element(4)
    assert a + b == 2
    assert a - b == 1
    assert b - a == 6
    assert a * b == 6
    assert a / b == 3            # 4 · 3 = 12 ≡ 5
    assert -a == 2
    assert 3 + a == 1


@given(q=primes, x=st.integers(min_value=0), y=st.integers(min_value=0), z=st.integers(min_value=0))
def test_field_axioms(q, x, y, z):
    """Addition and multiplication commute, associate and distribute."""
    m = FieldModulus.prime(q)
    a, b, c = m.element(x % q), m.element(y % q), m.element(z % q)
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == m.zero


@given(q=primes, x=st.integers(min_value=1))
def test_nonzero_elements_invert(q, x):
    m = FieldModulus.prime(q)
    a = m.element(x % q)
    if a.value == 0:
        return
    assert a * a.inverse() == m.one


def test_element_rejects_out_of_range(f7):
    with pytest.raises(ValueError):
        FieldElement(7, f7)


# ─── Matrices ────────────────────────────────────────────────

def test_matrix_entrywise_ops(f7):
    A = FqMatrix.from_rows([[1, 2], [3, 4]], f7)
    B = FqMatrix.from_rows([[6, 6], [0, 1]], f7)
    assert matrix_entrywise("add", A, B).to_rows() == [[0, 1], [3, 5]]
    assert matrix_entrywise("sub", A, B).to_rows() == [[2, 3], [3, 3]]
    assert matrix_entrywise("hadamard", A, B).to_rows() == [[6, 5], [0, 4]]


def test_matrix_shape_mismatch(f7):
    with pytest.raises(ShapeMismatch):
        matrix_entrywise("add", FqMatrix.zeros(2, 2, f7), FqMatrix.zeros(2, 3, f7))


def test_matrix_modulus_mismatch(f5, f7):
    with pytest.raises(ModulusMismatch):
        matrix_entrywise("add", FqMatrix.zeros(2, 2, f5), FqMatrix.zeros(2, 2, f7))


def test_matrix_reduces_values(f7):
    M = FqMatrix.from_values(1, 3, [-1, 7, 15], f7)
    assert M.values == (6, 0, 1)
    assert M[0, 2] == 1
    assert M.restrict([(0, 0), (0, 2)]) == {(0, 0): 6, (0, 2): 1}


def test_matrix_rejects_bad_fill(f7):
    with pytest.raises(ShapeMismatch):
        FqMatrix(2, 2, (0, 1, 2), f7)


# ─── Sampling ────────────────────────────────────────────────

def test_sample_uniform_is_deterministic(f7):
    a = sample_uniform((3, 3), f7, random.Random(5))
    b = sample_uniform((3, 3), f7, random.Random(5))
    assert a == b


def test_sample_residue_covers_field_evenly(f5):
    rng = random.Random(11)
    counts = Counter(sample_residue(f5, rng) for _ in range(25_000))
    assert set(counts) == set(range(5))
    for value in range(5):
        assert abs(counts[value] - 5_000) < 400


def test_bits_over_f2_are_balanced(f2):
    M = sample_uniform((1, 100_000), f2, random.Random(29))
    ones = sum(M.values) / 100_000
    assert 0.49 <= ones <= 0.51


def test_residues_mod_3079_have_uniform_mean():
    q, N = 3079, 100_000
    M = sample_uniform((1, N), FieldModulus.prime(q), random.Random(31))
    sigma = math.sqrt((q * q - 1) / 12 / N)
    assert abs(sum(M.values) / N - (q - 1) / 2) < 3 * sigma


@settings(max_examples=30)
@given(q=primes, seed=st.integers(min_value=0, max_value=2 ** 32))
def test_sample_uniform_stays_in_range(q, seed):
    m = FieldModulus.prime(q)
    M = sample_uniform((2, 3), m, random.Random(seed))
    assert M.shape == (2, 3)
    assert all(0 <= v < q for v in M.values)
