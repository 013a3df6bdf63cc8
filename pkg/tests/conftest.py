import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qffsample.chain import Graph, random_walk_chain
from qffsample.families import corpus

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

CORPUS = corpus()


@pytest.fixture(scope="session")
def corpus_chains():
    return CORPUS


def edges_text(edges):
    return "\n".join(f"{a} {b}" for a, b in edges)


def tri():
    return random_walk_chain(Graph(3, ((0, 1), (1, 2), (0, 2))))


def k4():
    return random_walk_chain(Graph(4, tuple((a, b) for a in range(4) for b in range(a + 1, 4))))


def star3(lazy=False):
    return random_walk_chain(Graph(4, ((0, 1), (0, 2), (0, 3))), lazy=lazy)


def two_state_lazy():
    return random_walk_chain(Graph(2, ((0, 1),)), lazy=True)


@st.composite
def connected_graphs(draw, min_n=2, max_n=8, weighted=False):
    """Random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[(u, v)] = None
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    for a, b in extra:
        if a != b:
            edges[(min(a, b), max(a, b))] = None
    keys = sorted(edges)
    weights = None
    if weighted:
        weights = tuple(draw(st.floats(0.1, 5.0)) for _ in keys)
    return Graph(n, tuple(keys), weights)


@st.composite
def lazy_chains(draw, min_n=2, max_n=8, weighted=True):
    return random_walk_chain(draw(connected_graphs(min_n, max_n, weighted)), lazy=True)


def random_chain(rng, n, weighted=True, density=0.4):
    """Seeded random connected (weighted) graph walk, lazy so it is ergodic."""
    edges = {(int(rng.integers(v)), v) for v in range(1, n)}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < density:
                edges.add((a, b))
    keys = tuple(sorted(edges))
    w = tuple(float(x) for x in rng.uniform(0.2, 3.0, len(keys))) if weighted else None
    return random_walk_chain(Graph(n, keys, w), lazy=bool(rng.random() < 0.5) or n == 2)


def unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
