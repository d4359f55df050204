import math
import time
from functools import lru_cache

import numpy as np
import pytest

from crtool import fixtures, spaces, systems
from crtool.chaincost import compute_cost_matrix
from crtool.recurrence import potential_profile


def random_node_map(rng, n, dim=1, perm=False):
    """Random node-exact map on n random points in [0,1]^dim."""
    sp = spaces.point_cloud(rng.random((n, dim)))
    if perm:
        return systems.build_permutation_system(sp, rng.permutation(n))
    f = rng.integers(0, n, n)
    return systems.SystemModel(sp, sp.points[f][:, None, :], "map", "random",
                               escaping=np.zeros(n, dtype=bool))


def random_sampled_map(rng, n):
    """Random map whose images fall off the nodes (sampled mode)."""
    sp = spaces.point_cloud(rng.random((n, 1)))
    imgs = rng.random((n, 1, 1))
    return systems.SystemModel(sp, imgs, "map", "random-sampled", escaping=np.zeros(n, dtype=bool))


@lru_cache(maxsize=None)
def heavy(name, p, **kw):
    """Full-size fixture, cost matrix, profile and cost-matrix seconds; cached per session."""
    sys_ = fixtures.FIXTURES[name](**kw)
    t0 = time.perf_counter()
    c = compute_cost_matrix(sys_, p)
    return sys_, c, potential_profile(c), time.perf_counter() - t0


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line for an acceptance criterion, then assert it."""
    def _report(num, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, f"criterion {num} failed: {detail}"
    return _report


@pytest.fixture
def S3():
    return fixtures.S3()


@pytest.fixture
def C2():
    return fixtures.C2()
