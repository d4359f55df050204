"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v` (the lines are printed even when output is captured).
"""
import math
import time

import numpy as np

from crtool import fixtures, invariants
from crtool.chaincost import brute_force_cost, compute_cost_matrix
from crtool.morsegraph import collapse_map, limit_set_morse_graph, morse_graph
from crtool.recurrence import circulation_cost, components_at, cr_set, neg, pos, potential_profile

from conftest import heavy, random_node_map, random_sampled_map


def circ_dist(a, b, c):
    d = np.abs(a - b) % c
    return np.minimum(d, c - d)


def test_criterion_01_f_R_sigma_potential(report):
    s, c, pr, secs = heavy("f_R", 1.0)
    x, h = s.space.points[:, 0], s.space.h
    inner = (x > 0) & (x < 1)
    mid = (x >= 1) & (x < 1.5)
    want = np.where(inner, x - x * x, np.where(mid, 1 - x, -np.inf))
    # skip 2h windows at the jumps to -inf (x = 0 = 2 and x = 3/2)
    away = (circ_dist(x, 0.0, 2.0) > 2 * h) & (np.abs(x - 1.5) > 2 * h)
    finite = (inner | mid) & away
    err = float(np.max(np.abs(pr.tau_embed[finite] - want[finite])))
    tail = x >= 1.5
    neg_tail = bool(np.all(pr.negative[tail]))
    ok = err <= 0.01 and neg_tail and secs <= 60
    report(1, "f_R sigma potential", ok,
           f"sup-error {err:.2e} (tol 1e-2), [3/2,2] NEG: {neg_tail}, cost matrix {secs:.1f}s (limit 60s)")


def test_criterion_02_f_R_level_sets(report):
    s, c, pr, _ = heavy("f_R", 1.0)
    x, h = s.space.points[:, 0], s.space.h
    worst, contiguous = 0.0, True
    for eps in (0.05, 0.1, 0.2):
        r = math.sqrt(1 - 4 * eps)
        lo_f, hi_f = (1 + r) / 2, (1 - r) / 2
        mem = pr.members(pos(eps))
        lo = x[mem & (x >= 0.5)].min()
        hi = x[mem & (x < 0.5)].max()
        worst = max(worst, abs(lo - lo_f) / h, abs(hi - hi_f) / h)
        arc = (x >= lo) | (x <= hi)
        contiguous &= bool(np.array_equal(arc, mem))
    ok = worst <= 2 and contiguous
    report(2, "f_R level-set endpoints", ok, f"max endpoint error {worst:.2f}h (tol 2h), single arc: {contiguous}")


def test_criterion_03_f_R_circulation(report):
    s, _, pr1, _ = heavy("f_R", 1.0)
    _, _, prI, _ = heavy("f_R", math.inf)
    h = s.space.h
    sig, sup = circulation_cost(pr1), circulation_cost(prI)
    ok = abs(sig - 0.25) <= 0.01 and sup <= 3 * h
    report(3, "f_R circulation costs", ok, f"sigma {sig:.6f} (0.25 +- 0.01), l-inf {sup / h:.2f}h (<= 3h)")


def test_criterion_04_g_half(report):
    s = fixtures.g_half()
    x = s.space.points[:, 0]
    zero = x == 0
    err, zero_ok = 0.0, True
    for p in (1, 2, 5, math.inf):
        pr = potential_profile(compute_cost_matrix(s, p))
        err = max(err, float(np.max(np.abs(pr.tau_pos[~zero] - np.abs(x[~zero]) / 2))))
        zero_ok &= pr.tau[int(np.nonzero(zero)[0][0])] == neg(math.inf)
    ok = err <= 1e-12 and zero_ok and zero.sum() == 1
    report(4, "g_half contraction", ok, f"max |tau_pos - |x|/2| = {err:.1e} (tol 1e-12), tau(0) = NEG(inf): {zero_ok}")


def test_criterion_05_f_rep_f_att(report):
    s, _, pr1, _ = heavy("f_rep", 1.0)
    _, _, prI, _ = heavy("f_rep", math.inf)
    x, h = s.space.points[:, 0], s.space.h
    band = np.abs(x) <= 1.4
    e1 = float(np.max(np.abs(pr1.tau_embed[band] - x[band])))
    eI = float(np.max(np.abs(prI.tau_embed[band] - np.maximum(0, x[band]))))
    sa = fixtures.f_att()
    xa = sa.space.points[:, 0]
    att_neg, att_err = True, 0.0
    for p in (1.0, math.inf):
        _, _, pa, _ = heavy("f_att", p)
        att_neg &= bool(np.all(pa.negative[xa <= 0]))
        att_err = max(att_err, float(np.max(np.abs(pa.tau_pos[xa > 0] - xa[xa > 0] / 2))))
    ok = e1 <= 2 * h and eI <= 2 * h and att_neg and att_err <= 1e-12
    report(5, "f_rep / f_att potentials", ok,
           f"f_rep p=1 {e1 / h:.2f}h, p=inf {eI / h:.2f}h (tol 2h); f_att NEG on x<=0: {att_neg}, "
           f"|tau_pos - x/2| {att_err:.1e}")


def test_criterion_06_oracle_equivalence(report):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    mismatches, entries = 0, 0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        s = random_node_map(rng, n)
        for p in (1, 2, math.inf):
            rho = compute_cost_matrix(s, p).rho
            for i in range(n):
                for j in range(n):
                    entries += 1
                    mismatches += rho[i, j] != brute_force_cost(s, p, i, j, max_len=n)
    secs = time.perf_counter() - t0
    ok = mismatches == 0 and secs <= 10
    report(6, "oracle equivalence", ok, f"{mismatches} mismatches over {entries} entries, {secs:.2f}s (limit 10s)")


def test_criterion_07_filtration_and_nesting(report):
    ladder = invariants.ladder()
    bad = []
    rng = np.random.default_rng(7)
    cases = [(name, fixtures.small(name)) for name in sorted(fixtures.FIXTURES)]
    cases += [(f"random{k}", (random_sampled_map if k % 2 else random_node_map)(rng, int(rng.integers(2, 30))))
              for k in range(20)]
    for name, s in cases:
        costs = {p: compute_cost_matrix(s, p) for p in (1.0, 2.0, math.inf)}
        profs = {p: potential_profile(c) for p, c in costs.items()}
        if not invariants.p_monotone(costs).ok:
            bad.append(f"{name}: rho ordering")
        if not all(invariants.filtration(pr, ladder).ok for pr in profs.values()):
            bad.append(f"{name}: filtration")
    report(7, "filtration and p-nesting", not bad,
           f"{len(cases)} systems x {len(ladder)} levels" + (f"; failures {bad}" if bad else ""))


def test_criterion_08_collapse(report):
    _, c, pr, _ = heavy("f_R", 1.0)
    levels = [pos(0), pos(0.05), pos(0.1), pos(0.2), pos(0.3)]
    chks = [invariants.collapse_ladder(c, levels, nu, pr) for nu in (0.0, 0.05)]
    fr_ok = all(k.ok for k in chks)
    rng = np.random.default_rng(8)
    eps = [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
    surj = True
    for _ in range(20):
        s = random_node_map(rng, int(rng.integers(2, 25)), perm=True)
        cs = compute_cost_matrix(s, 1)
        for variant in ("G", "G'"):
            gs = [limit_set_morse_graph(s, components_at(cs, pos(e)), variant, cs) for e in eps]
            for a in range(len(eps)):
                for b in range(a + 1, len(eps)):
                    surj &= collapse_map(gs[a], gs[b]).edge_surjective
    ok = fr_ok and surj
    detail = "; ".join(k.detail for k in chks if not k.ok)
    report(8, "collapse maps", ok,
           f"f_R well_defined/edge_partial/cocycle: {fr_ok}{' ' + detail if detail else ''}; "
           f"permutation edge_surjective: {surj}")


def test_criterion_09_dag(report):
    bad = []
    grid = list(np.linspace(0.0, 1.0, 10))
    cases = [(name, compute_cost_matrix(fixtures.small(name), math.inf)) for name in sorted(fixtures.FIXTURES)]
    cases += [(name + "-full", heavy(name, math.inf)[1]) for name in ("f_R", "c_ex_001")]
    for name, c in cases:
        chk = invariants.dag(c, grid)
        if not chk.ok:
            bad.append(f"{name}: {chk.detail}")
    report(9, "acyclic (eps, nu) graphs at p=inf", not bad,
           f"{len(cases)} fixtures x 55 (eps, nu) pairs" + (f"; cycles {bad}" if bad else ""))


def _cross_edge_threshold(N):
    s = fixtures.counterexample_A(N=N)
    c = compute_cost_matrix(s, 1)
    comps = components_at(c, pos(0.5))
    j, k = comps.comp_id[s.meta["source_node"]], comps.comp_id[s.meta["target_node"]]

    def has(nu):
        return (j, k) in morse_graph(c, pos(0.5), nu, with_hyper=False, components=comps).edges

    lo, hi = 0.0, 4.0
    for _ in range(50):
        mid = (lo + hi) / 2
        lo, hi = (lo, mid) if has(mid) else (mid, hi)
    return has, hi


def test_criterion_10_singular_limit(report):
    lines, ok, thr = [], True, {}
    for N in (10, 50):
        has, t = _cross_edge_threshold(N)
        thr[N] = t
        absent = not has(0.0) and not has(0.999 / (2 * N))
        present = has(2 / N) and has(4 / N)
        ok &= absent and present
        lines.append(f"N={N}: threshold {t:.4f} (absent below {1 / (2 * N):.4f}: {absent}, present at {2 / N:.4f}: {present})")
    ok &= thr[50] < thr[10]
    report(10, "singular-limit threshold", ok, "; ".join(lines))


def test_criterion_11_stagnation_threshold(report):
    s, _, pr, _ = heavy("stagnation", 1.0)
    want = 2 * (math.sqrt(3) - math.pi / 3)
    got = circulation_cost(pr)
    rel = abs(got - want) / want
    report(11, "stagnation circulation threshold", rel <= 0.10,
           f"sigma {got:.4f} vs closed form {want:.4f}, relative error {rel:.1%} (tol 10%)")


def test_criterion_12_c_ex_001(report):
    s, _, pr1, _ = heavy("c_ex_001", 1.0)
    _, _, prI, _ = heavy("c_ex_001", math.inf)
    h = s.space.h
    sig, sup = circulation_cost(pr1), circulation_cost(prI)
    ok = abs(sig - 0.1) <= 2 * h and sup <= 3 * h
    report(12, "c_ex_001 circulation", ok, f"sigma {sig:.7f} (0.1 +- 2h), l-inf {sup / h:.2f}h (<= 3h)")


def test_criterion_13_translation(report):
    worst, ok = [], True
    for T in (1.0, 2.0):
        s = fixtures.translation_flow(T=T)
        for p in (1, 2, math.inf):
            pr = potential_profile(compute_cost_matrix(s, p))
            m = float(pr.tau_pos.min())
            ok &= m >= T - 1e-9
            worst.append(f"T={T:g} p={p}: {m:.12g}")
    report(13, "translation semiflow", ok, ", ".join(worst))


def test_criterion_14_non_increasing(report):
    s = fixtures.non_increasing(N=20)
    c = compute_cost_matrix(s, math.inf)
    a, w = s.meta["alpha"], s.meta["omega"]
    levels = [pos(0), pos(0.1), pos(0.25), pos(0.5)]
    comps = [components_at(c, l) for l in levels]
    gp = [limit_set_morse_graph(s, lc, "G'", c) for lc in comps]
    g = [limit_set_morse_graph(s, lc, "G", c) for lc in comps]
    e0 = (comps[0].comp_id[a], comps[0].comp_id[w])
    e5 = (comps[-1].comp_id[a], comps[-1].comp_id[w])
    lost = e0 in gp[0].edges and not gp[-1].edges
    kept = e5 in g[-1].edges
    maps = [collapse_map(g[k], g[k + 1]) for k in range(len(g) - 1)]
    chain = all(m.well_defined and m.edge_partial for m in maps)
    ok = lost and kept and chain
    report(14, "non-increasing Morse graph", ok,
           f"G' edge at +0 then empty at +0.5: {lost}; G keeps it: {kept}; G collapse chain well_defined/partial: {chain}")
