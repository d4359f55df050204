import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crtool import fixtures, invariants, spaces, systems
from crtool.chaincost import compute_cost_matrix
from crtool.errors import SpecError
from crtool.morsegraph import eventual_cycles
from crtool.recurrence import (ExtendedLevel, circulation_cost, components_at, cr_set, critical_values,
                               neg, nonautonomous_potential, pos, potential_profile)

from conftest import random_node_map, random_sampled_map


def prof(system, p=1, **kw):
    return potential_profile(compute_cost_matrix(system, p), **kw)


# levels ---------------------------------------------------------------------

def test_level_order():
    chain = [neg(math.inf), neg(2), neg(0.5), neg(0), pos(0), pos(0.5), pos(math.inf)]
    assert chain == sorted(reversed(chain))
    assert all(a < b for a, b in zip(chain, chain[1:]))
    assert neg(0) != pos(0)


def test_level_parse_tokens():
    assert ExtendedLevel.parse("-0") == neg(0)
    assert ExtendedLevel.parse("+0") == pos(0)
    assert ExtendedLevel.parse("0.1") == pos(0.1)
    assert ExtendedLevel.parse("-inf") == neg(math.inf)
    assert ExtendedLevel.parse("inf") == pos(math.inf)
    with pytest.raises(SpecError):
        ExtendedLevel.parse("abc")
    with pytest.raises(SpecError):
        neg(-1)


@given(st.lists(st.tuples(st.booleans(), st.floats(0, 100)), min_size=2, max_size=20))
def test_embed_weakly_monotone(raw):
    levels = sorted(neg(m) if b else pos(m) for b, m in raw)
    emb = [l.embed for l in levels]
    assert emb == sorted(emb)


@given(st.booleans(), st.floats(0, 1e6))
def test_token_roundtrip(b, m):
    l = neg(m) if b else pos(m)
    assert ExtendedLevel.parse(l.token) == l


# profiles -------------------------------------------------------------------

def test_S3_profile(S3):
    pr = prof(S3)
    assert pr.tau_pos.tolist() == [1, 1, 0]
    assert pr.defect[2] == math.inf
    assert pr.tau == [pos(1), pos(1), neg(math.inf)]


def test_identity_all_neg_inf():
    s = systems.build_map_system(spaces.point_cloud([[0.0], [0.4], [1.0]]), "identity")
    for p in (1, 2, math.inf):
        assert all(t == neg(math.inf) for t in prof(s, p).tau)


def test_C2_all_neg_inf(C2):
    assert prof(C2).tau == [neg(math.inf)] * 2


def test_g_half_small():
    s = fixtures.g_half(41)
    x = s.space.points[:, 0]
    for p in (1, 3, math.inf):
        pr = prof(s, p)
        zero = np.abs(x) < 1e-15
        assert pr.tau[int(np.nonzero(zero)[0][0])] == neg(math.inf)
        assert np.max(np.abs(pr.tau_pos[~zero] - np.abs(x[~zero]) / 2)) <= 1e-12
        # off-zero nodes only enter the negative branch through the sampled-mode gate
        assert np.all(pr.tau_pos[pr.negative] <= pr.theta_rec + pr.eta)


def test_cr_sets_S3(S3):
    pr = prof(S3)
    assert cr_set(pr, pos(1)).tolist() == [0, 1, 2]
    assert cr_set(pr, neg(0)).tolist() == [2]
    assert cr_set(pr, pos(math.inf)).tolist() == [0, 1, 2]


def test_components_S3(S3):
    c = compute_cost_matrix(S3, 1)
    assert components_at(c, pos(1)).as_sets() == [{0}, {1, 2}]
    assert components_at(c, pos(0)).as_sets() == [{2}]


def test_components_identity_separated():
    s = systems.build_map_system(spaces.point_cloud([[0.0], [1.0], [3.0]]), "identity")
    c = compute_cost_matrix(s, 1)
    assert components_at(c, pos(0)).as_sets() == [{0}, {1}, {2}]


def test_components_are_mutual_pair_closure_not_scc():
    # 0 -> 1 -> 2 -> 0 cheaply one way, expensive the other: SCC merges, mutual pairs do not
    sp = spaces.explicit_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    s = systems.build_permutation_system(sp, [1, 2, 0])
    c = compute_cost_matrix(s, 1)
    assert components_at(c, pos(0)).as_sets() == [{0, 1, 2}]
    s = systems.build_map_system(spaces.interval_grid(0, 2, 3), "identity")
    c = compute_cost_matrix(s, 1)
    assert len(components_at(c, pos(0.99))) == 3
    assert len(components_at(c, pos(1))) == 1


def test_critical_values():
    assert critical_values(compute_cost_matrix(fixtures.S3(), 1)) == [0, 1, 2]
    s = systems.build_map_system(spaces.point_cloud([[0.0], [1.0]]), "identity")
    assert critical_values(compute_cost_matrix(s, 1)) == [0, 1]
    assert critical_values(compute_cost_matrix(fixtures.C2(), 1)) == [0]


def test_circulation_identity_zero():
    s = systems.build_map_system(spaces.circle_grid(1.0, 9), "identity")
    assert circulation_cost(prof(s)) == 0


def test_small_f_R_circulation():
    s = fixtures.f_R(200)
    assert circulation_cost(prof(s, 1)) == pytest.approx(0.25, abs=0.02)
    assert circulation_cost(prof(s, math.inf)) <= 3 * s.space.h


def test_nonautonomous_g_half_embedding():
    sp = spaces.interval_grid(0, 2, 5)
    s = systems.build_nonautonomous_system(sp, [0, 1, 2], "autonomous_map", {"map": "g_half"})
    pot = nonautonomous_potential(compute_cost_matrix(s, 1))
    i = int(np.argmin(np.abs(sp.points[:, 0] - 1.0)))
    assert pot[i] == pytest.approx(0.5)
    assert np.all(np.isinf(pot[2 * sp.n:]))


def test_nonautonomous_identity_zero():
    sp = spaces.interval_grid(0, 1, 4)
    s = systems.build_nonautonomous_system(sp, [0, 0.5, 1], "identity")
    pot = nonautonomous_potential(compute_cost_matrix(s, 2))
    assert np.all(pot[:2 * sp.n] == 0)


def test_profile_overrides():
    s = fixtures.f_att(61)
    c = compute_cost_matrix(s, 1)
    pr = potential_profile(c, theta_rec=0.0, eta_def=0.0)
    assert pr.theta_rec == 0 and pr.eta_def == 0
    with pytest.raises(SpecError):
        potential_profile(c, theta_rec=-1.0)


def test_sampled_default_gate():
    s = fixtures.f_att(61)
    pr = prof(s)
    assert pr.eta_grid == pytest.approx(s.space.h / 2)
    assert pr.theta_rec == pytest.approx(3 * pr.eta_grid)


def test_translation_semiflow_small():
    s = fixtures.translation_flow(41, T=1.0)
    for p in (1, 2, math.inf):
        assert prof(s, p).tau_pos.min() >= 1.0 - 1e-9


# properties over random systems ----------------------------------------------

LADDER = invariants.ladder()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 15), st.booleans())
def test_filtration_and_p_nesting(seed, n, sampled):
    rng = np.random.default_rng(seed)
    s = random_sampled_map(rng, n) if sampled else random_node_map(rng, n)
    costs = {p: compute_cost_matrix(s, p) for p in (1.0, 2.0, math.inf)}
    profs = {p: potential_profile(c) for p, c in costs.items()}
    for pr in profs.values():
        assert invariants.filtration(pr, LADDER).ok
    assert invariants.p_nesting(profs, LADDER).ok


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 15), st.floats(0, 2), st.floats(0, 2))
def test_negative_branch_antitone(seed, n, a, b):
    s = random_node_map(np.random.default_rng(seed), n)
    pr = prof(s)
    lo, hi = sorted((a, b))
    assert np.all(pr.members(neg(hi)) <= pr.members(neg(lo)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 15), st.sampled_from([1, 2, math.inf]))
def test_exact_cycle_symmetry(seed, n, p):
    s = random_node_map(np.random.default_rng(seed), n, perm=True)
    pr = prof(s, p)
    assert np.all(np.isinf(pr.defect))
    assert all(t == neg(math.inf) for t in pr.tau)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 15), st.sampled_from([1, 2, math.inf]))
def test_exact_mode_minus0_equals_plus0(seed, n, p):
    s = random_node_map(np.random.default_rng(seed), n)
    pr = prof(s, p)
    assert pr.theta_rec == 0
    assert np.array_equal(pr.members(neg(0)), pr.members(pos(0)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 15), st.sampled_from([1, 2, math.inf]))
def test_omega_limit_reached_at_zero_cost(seed, n, p):
    s = random_node_map(np.random.default_rng(seed), n)
    c = compute_cost_matrix(s, p)
    cid, cycles = eventual_cycles(systems.successor(s, c.step))
    for i in range(n):
        assert np.all(c.rho[i, cycles[cid[i]]] == 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.floats(0, 1))
def test_components_partition_level_set(seed, n, eps):
    s = random_sampled_map(np.random.default_rng(seed), n)
    c = compute_cost_matrix(s, 1)
    pr = potential_profile(c)
    lc = components_at(c, pos(eps), pr)
    members = sorted(x for comp in lc.components for x in comp.tolist())
    assert members == cr_set(pr, pos(eps)).tolist()
    assert [int(comp[0]) for comp in lc.components] == sorted(int(comp[0]) for comp in lc.components)
