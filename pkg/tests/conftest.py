import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hilbertpoly.polytope import (HRep, ProjectiveMap, VRep, hrep_from_vrep, regular_polygon,
                                  sample_interior, unit_cube, unit_square)

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PENTAGON_B = np.array([(0, 0), (1.4, 0), (1.6, 0.9), (0.5, 1.3), (-0.3, 0.7)], dtype=float)
SHARED_TRIANGLE = np.array([(0, 0), (0.5, 0), (0.25, 0.4)], dtype=float)


def random_polytope(rng, n, max_facets=None, points=None) -> HRep:
    """Hull of Gaussian points, redrawn until it has at most ``max_facets`` facets."""
    points = points or (n + 3)
    while True:
        h = hrep_from_vrep(VRep(rng.normal(size=(points, n))))
        if max_facets is None or h.n_facets <= max_facets:
            return h


def interior_pairs(h, m, rng, shrink=1.0):
    return sample_interior(h, m, rng, shrink), sample_interior(h, m, rng, shrink)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def pentagon():
    return regular_polygon(5)


@pytest.fixture
def cube():
    return unit_cube(3)


@pytest.fixture
def shared_pair():
    return unit_square(), hrep_from_vrep(VRep(PENTAGON_B)), SHARED_TRIANGLE


def random_projective_map(rng, h):
    """Random map x -> (Ax+b)/(w.x+d) with positive denominator on ``h``."""
    n = h.dim
    V = h.vertices
    while True:
        A = np.eye(n) + 0.5 * rng.normal(size=(n, n))
        b = rng.normal(size=n)
        w = rng.normal(size=n)
        w *= 0.8 / max(np.abs(V @ w).max(), 1e-12)  # |w.x| <= 0.8 on the vertices
        T = ProjectiveMap(A, b, w, 1.0)
        if T.admissible_on(h) and np.linalg.cond(A) < 50:
            return T


# one PASS/FAIL line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
