import numpy as np
import pytest

from zdtrade import GameParams


@pytest.fixture
def base_params():
    """Baseline parameter set used throughout: C=5/2/3, e1=0.3, e2=0.5."""
    return GameParams(5, 5, 2, 2, 3, 3, 0.3, 0.5)


@pytest.fixture
def family_small():
    def make(e1, e2):
        return GameParams(5, 5, 2, 2, 3, 3, e1, e2)
    return make


@pytest.fixture
def family_large():
    def make(e1, e2):
        return GameParams(10, 10, 2, 2, 5, 5, e1, e2)
    return make


def power_stationary(m, iters=500_000, tol=1e-15):
    """Independent stationary oracle: plain power iteration to a fixed point."""
    v = np.full(4, 0.25)
    for _ in range(iters):
        nv = v @ m
        if np.max(np.abs(nv - v)) < tol:
            v = nv
            break
        v = nv
    return v / v.sum()


def reference_matrix(p, q, e1, e2):
    """Transition matrix written out entry by entry, as an independent
    cross-check against the composed factor implementation."""
    p1, p2, p3, p4 = p
    q1, q2 = q
    s = (1 - e1) * q1 + e1 * q2
    t = (1 - e1) * (1 - q1) + e1 * (1 - q2)
    return np.array([
        [p1 * q1, p1 * (1 - q1), (1 - p1) * s, (1 - p1) * t],
        [(e2 * p1 + (1 - e2) * p2) * q1,
         (e2 * p1 + (1 - e2) * p2) * (1 - q1),
         (e2 * (1 - p1) + (1 - e2) * (1 - p2)) * s,
         (e2 * (1 - p1) + (1 - e2) * (1 - p2)) * t],
        [p3 * q1, p3 * (1 - q1), (1 - p3) * s, (1 - p3) * t],
        [(e2 * p3 + (1 - e2) * p4) * q1,
         (e2 * p3 + (1 - e2) * p4) * (1 - q1),
         (e2 * (1 - p3) + (1 - e2) * (1 - p4)) * s,
         (e2 * (1 - p3) + (1 - e2) * (1 - p4)) * t],
    ])
