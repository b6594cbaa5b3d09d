"""Shared fixtures: seeded generators, small prime fields and standard graphs."""

import random
from pathlib import Path

import numpy as np
import pytest

from lightcone_zk.fq import FieldModulus
from lightcone_zk.graphs import complete_graph, cycle_graph, empty_graph, path_graph, star_graph

GRAPHS_DIR = Path(__file__).resolve().parent.parent / "graphs"


@pytest.fixture
def rng():
    return random.Random(20240917)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def f2():
    return FieldModulus.prime(2)


@pytest.fixture
def f3():
    return FieldModulus.prime(3)


@pytest.fixture
def f5():
    return FieldModulus.prime(5)


@pytest.fixture
def f7():
    return FieldModulus.prime(7)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def c5():
    return cycle_graph(5)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def star4():
    return star_graph(4)


@pytest.fixture
def empty4():
    return empty_graph(4)


@pytest.fixture
def graphs_dir():
    return GRAPHS_DIR
