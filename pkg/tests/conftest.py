import numpy as np
import pytest

from snapfix import shapes
from snapfix.mesh import merge_coplanar_facets

CANONICAL = ("tetrahedron", "cube", "octahedron", "square_pyramid", "icosahedron", "prism8")


def merged(name):
    return merge_coplanar_facets(shapes.builtin(name))


@pytest.fixture(scope="session")
def solids():
    """Merged canonical workpieces by name."""
    return {name: merged(name) for name in CANONICAL}


def random_corpus(seed, n_hull=100, n_halfspace=100):
    """Random convex polytopes: hulls of 10-50 sphere points and simple
    polytopes cut out by random tangent planes."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_hull):
        out.append(merge_coplanar_facets(shapes.random_hull_polytope(rng, int(rng.integers(10, 51)))))
    for _ in range(n_halfspace):
        out.append(merge_coplanar_facets(shapes.random_halfspace_polytope(rng, int(rng.integers(7, 28)))))
    return out


# -- acceptance report -----------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def record():
    """``record(criterion, ok, text)`` adds one line to the acceptance summary."""

    def add(criterion, ok, text):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {text}")
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
