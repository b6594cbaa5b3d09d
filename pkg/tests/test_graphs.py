"""Tests for graphs, permutations, cycles and the graph text format."""

import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from lightcone_zk.errors import InvalidGraph, SizeMismatch, TooLarge
from lightcone_zk.graphs import (
    Cycle, Graph, Permutation, adjacency_matrix, apply_permutation, complete_graph,
    cycle_graph, enumerate_cycles, find_hamiltonian_cycle, format_graph, load_graph,
    min_missing_edges, missing_edges, parse_graph, petersen_graph, random_permutation,
)


# ─── Graph Values ────────────────────────────────────────────

def test_from_edges_normalizes():
    G = Graph.from_edges(3, [(2, 1), (3, 2)])
    assert G.edges == frozenset({(1, 2), (2, 3)})
    assert G.has_edge(2, 1)
    assert G.degree(2) == 2


@pytest.mark.parametrize("edges", [[(1, 1)], [(1, 2), (2, 1)], [(1, 4)], [(0, 2)]])
def test_from_edges_rejects_bad_input(edges):
    with pytest.raises(InvalidGraph):
        Graph.from_edges(3, edges)


def test_adjacency_matrix_is_symmetric(f7):
    M = adjacency_matrix(Graph.from_edges(3, [(1, 2), (2, 3)]), f7)
    assert M.to_rows() == [[0, 1, 0], [1, 0, 1], [0, 1, 0]]


# ─── Permutations and Cycles ─────────────────────────────────

def test_permutation_compose_and_inverse():
    p = Permutation((2, 3, 1))
    q = Permutation((1, 3, 2))
    assert p.compose(q).mapping == (2, 1, 3)
    assert p.compose(p.inverse()) == Permutation.identity(3)


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((1, 1, 3))


def test_cycle_canonical_rotation_keeps_orientation():
    assert Cycle((3, 1, 2)).vertices == (1, 2, 3)
    assert Cycle((1, 2, 3)) != Cycle((1, 3, 2))
    assert Cycle((2, 3, 1)).edges() == ((1, 2), (2, 3), (3, 1))


def test_cycle_from_permutation_couples():
    c = Cycle.from_permutation(Permutation((2, 4, 1, 3)))
    assert c.couples() == frozenset({(2, 4), (4, 1), (1, 3), (3, 2)})


def test_cycle_rejects_short_or_repeated():
    with pytest.raises(ValueError):
        Cycle((1, 2))
    with pytest.raises(ValueError):
        Cycle((1, 2, 2))


def test_apply_permutation_size_mismatch(k3):
    with pytest.raises(SizeMismatch):
        apply_permutation(Permutation.identity(4), k3)


@settings(max_examples=50)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), n=st.integers(min_value=3, max_value=8))
def test_permutation_preserves_edge_count_and_hamiltonicity(seed, n):
    rng = random.Random(seed)
    G = cycle_graph(n)
    pi = random_permutation(n, rng)
    H = apply_permutation(pi, G)
    assert H.edge_count == G.edge_count
    C = apply_permutation(pi, Cycle(tuple(range(1, n + 1))))
    assert missing_edges(H, C) == []


@settings(max_examples=50)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), n=st.integers(min_value=3, max_value=7))
def test_inverse_undoes_permutation(seed, n):
    rng = random.Random(seed)
    pi = random_permutation(n, rng)
    G = Graph.from_edges(n, [(i, i + 1) for i in range(1, n)])
    assert apply_permutation(pi.inverse(), apply_permutation(pi, G)) == G


@settings(max_examples=50)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), n=st.integers(min_value=3, max_value=7))
def test_apply_permutation_respects_composition(seed, n):
    rng = random.Random(seed)
    pairs = itertools.combinations(range(1, n + 1), 2)
    G = Graph.from_edges(n, [p for p in pairs if rng.random() < 0.5])
    a, b = random_permutation(n, rng), random_permutation(n, rng)
    assert apply_permutation(a.compose(b), G) == apply_permutation(a, apply_permutation(b, G))


# ─── Enumeration and Search ──────────────────────────────────

@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_enumerate_cycles_count(n):
    cycles = enumerate_cycles(n)
    assert len(cycles) == math.factorial(n - 1)
    assert len(set(cycles)) == len(cycles)


def test_enumerate_cycles_guards():
    with pytest.raises(ValueError):
        enumerate_cycles(2)
    with pytest.raises(TooLarge):
        enumerate_cycles(10)


def test_min_missing_edges(path3, k4, empty4, star4):
    assert min_missing_edges(path3) == 1
    assert min_missing_edges(k4) == 0
    assert min_missing_edges(empty4) == 4
    assert min_missing_edges(star4) == 2


@pytest.mark.parametrize("n", [1, 2])
def test_min_missing_edges_needs_three_vertices(n):
    with pytest.raises(InvalidGraph):
        min_missing_edges(complete_graph(n))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_search_agrees_with_missing_edge_scan_on_every_graph(n):
    """Every edge subset: a cycle is found exactly when some cycle misses no edge."""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for mask in range(1 << len(pairs)):
        G = Graph.from_edges(n, [p for bit, p in enumerate(pairs) if mask >> bit & 1])
        cycle = find_hamiltonian_cycle(G)
        assert (cycle is not None) == (min_missing_edges(G) == 0), sorted(G.edges)
        if cycle is not None:
            assert missing_edges(G, cycle) == []


def _scan_for_cycle(G):
    """Oracle: try every ordering of 2..n after vertex 1."""
    for tail in itertools.permutations(range(2, G.n + 1)):
        order = (1,) + tail
        if all(G.has_edge(order[i], order[(i + 1) % G.n]) for i in range(G.n)):
            return order
    return None


@pytest.mark.slow
@pytest.mark.parametrize("extra", [(), ((1, 3),), ((1, 3), (6, 7)), ((1, 3), (2, 4), (6, 7), (8, 9))])
def test_petersen_variants_match_permutation_scan(extra):
    base = petersen_graph()
    G = Graph(10, base.edges | frozenset(extra))
    found = find_hamiltonian_cycle(G)
    expected = _scan_for_cycle(G)
    assert (found is None) == (expected is None)
    if found is not None:
        assert missing_edges(G, found) == []


def test_petersen_minus_an_edge_has_no_cycle():
    G = Graph(10, petersen_graph().edges - {(1, 2)})
    assert find_hamiltonian_cycle(G) is None


def test_find_hamiltonian_cycle(c5, path3):
    cycle = find_hamiltonian_cycle(c5)
    assert cycle is not None
    assert missing_edges(c5, cycle) == []
    assert find_hamiltonian_cycle(path3) is None


def test_petersen_is_not_hamiltonian():
    G = petersen_graph()
    assert G.edge_count == 15
    assert all(G.degree(v) == 3 for v in range(1, 11))
    assert find_hamiltonian_cycle(G) is None


# ─── Text Format ─────────────────────────────────────────────

def test_parse_and_format():
    text = "# triangle\n3 3\n1 2\n2 3\n\n1 3\n"
    G = parse_graph(text)
    assert G == complete_graph(3)
    assert parse_graph(format_graph(G)) == G


@pytest.mark.parametrize("text", ["", "3 2\n1 2\n", "3 1\n1 2 3\n", "three 1\n1 2\n"])
def test_parse_rejects_malformed(text):
    with pytest.raises(InvalidGraph):
        parse_graph(text)


def test_bundled_graph_files(graphs_dir):
    assert load_graph(str(graphs_dir / "k3.txt")) == complete_graph(3)
    assert load_graph(str(graphs_dir / "petersen.txt")) == petersen_graph()
    assert min_missing_edges(load_graph(str(graphs_dir / "path3.txt"))) == 1
