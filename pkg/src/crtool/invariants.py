"""Runtime invariant checks shared by the `verify` subcommand and the tests."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .chaincost import CostMatrix, compute_cost_matrix
from .morsegraph import collapse_map, compose_vertex_maps, eventual_cycles, morse_graph
from .recurrence import ExtendedLevel, components_at, neg, pos, potential_profile
from .systems import SystemModel, successor

TOL = 1e-9


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def ladder(lo: float = 2.0, hi: float = 2.0, count: int = 40) -> List[ExtendedLevel]:
    """`count` levels from NEG(lo) to POS(hi), always including -0 and +0."""
    half = count // 2
    negs = [neg(a) for a in np.linspace(lo, 0.0, half)]
    poss = [pos(a) for a in np.linspace(0.0, hi, count - half)]
    return sorted(set(negs + poss))


def metric_axioms(space, max_nodes: int = 64, rng=None) -> Check:
    rng = np.random.default_rng(0) if rng is None else rng
    idx = np.arange(space.n)
    if space.n > max_nodes:
        idx = np.sort(rng.choice(space.n, max_nodes, replace=False))
    D = space.pairwise()[np.ix_(idx, idx)]
    ok = np.all(np.diag(D) == 0) and np.allclose(D, D.T, atol=TOL, rtol=0)
    # D[i,k] <= D[i,j] + D[j,k]
    tri = D[:, None, :] <= D[:, :, None] + D[None, :, :] + TOL
    ok = ok and bool(np.all(tri))
    return Check("metric axioms", bool(ok), f"{len(idx)} nodes")


def one_step_bound(c: CostMatrix) -> Check:
    ok = bool(np.all(c.rho <= c.step + c.eta))
    return Check(f"one-step bound p={c.p_label}", ok)


def composition(c: CostMatrix, samples: int = 16, rng=None) -> Check:
    rng = np.random.default_rng(1) if rng is None else rng
    rows = np.arange(c.n) if c.n <= samples else rng.choice(c.n, samples, replace=False)
    rho = c.rho
    ok = True
    for i in rows:
        a = rho[i][:, None]                      # rho[i][j] over j
        if math.isinf(c.p):
            bound = np.maximum(a, rho).min(axis=0)
            ok &= bool(np.all(rho[i] <= bound + c.eta))
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                bound = (np.power(a, c.p) + np.power(rho, c.p)).min(axis=0)
                lhs = np.power(rho[i], c.p)
            ok &= bool(np.all(~(lhs > bound + c.eta)))
    return Check(f"composition p={c.p_label}", ok, f"{len(rows)} sources")


def p_monotone(costs: Dict[float, CostMatrix]) -> Check:
    ps = sorted(costs)
    ok = all(np.all(costs[q].rho <= costs[p].rho + TOL) for p, q in zip(ps, ps[1:]))
    return Check("p-monotonicity " + " >= ".join(costs[p].p_label for p in ps), bool(ok))


def filtration(profile, levels) -> Check:
    sets = [profile.members(l) for l in levels]
    ok = all(np.all(a <= b) for a, b in zip(sets, sets[1:]))
    return Check("filtration nesting", bool(ok), f"{len(levels)} levels")


def p_nesting(profiles: Dict[float, object], levels) -> Check:
    ps = sorted(profiles)
    ok = True
    for l in levels:
        if l.branch != "POS":
            continue
        for p, q in zip(ps, ps[1:]):
            ok &= bool(np.all(profiles[p].members(l) <= profiles[q].members(l)))
    return Check("cr_set nesting across p", ok)


def exact_symmetry(profile, system: SystemModel, C=None) -> Optional[Check]:
    """-0 and +0 agree in exact mode (only meaningful when theta_rec is 0 and the system is node-exact)."""
    if profile.theta_rec != 0 or profile.eta_grid > TOL or system.layered:
        return None
    ok = np.array_equal(profile.members(neg(0.0)), profile.members(pos(0.0)))
    return Check("CR(-0) = CR(+0) in exact mode", bool(ok))


def omega_reachability(c: CostMatrix, system: SystemModel) -> Optional[Check]:
    if system.images.shape[1] != 1 or system.layered or profile_exact(c) is False:
        return None
    succ = successor(system, c.step)
    cid, cycles = eventual_cycles(succ)
    ok = True
    for i in range(c.n):
        if cid[i] >= 0:
            ok &= bool(np.all(c.rho[i, cycles[cid[i]]] <= c.eta))
    return Check(f"omega-limit reachable at zero cost p={c.p_label}", ok)


def profile_exact(c: CostMatrix):
    if c.system is None:
        return None
    return bool(np.all(c.step.min(axis=1)[~c.system.escaping] <= c.eta)) if c.system.escaping is not None else None


def collapse_ladder(c: CostMatrix, levels, nu: float, profile=None) -> Check:
    profile = potential_profile(c) if profile is None else profile
    graphs = [morse_graph(c, l, nu, with_hyper=False, profile=profile) for l in levels]
    bad = []
    maps = {}
    for a, b in itertools.combinations(range(len(levels)), 2):
        m = collapse_map(graphs[a], graphs[b])
        maps[a, b] = m
        if b == a + 1 and not (m.well_defined and m.edge_partial):
            bad.append(f"{levels[a].token}->{levels[b].token}")
    for a, b, d in itertools.combinations(range(len(levels)), 3):
        if compose_vertex_maps(maps[a, b], maps[b, d]) != maps[a, d].vertex_map:
            bad.append(f"cocycle {levels[a].token},{levels[b].token},{levels[d].token}")
    return Check(f"collapse well-defined/partial + cocycle nu={nu:g} p={c.p_label}", not bad, "; ".join(bad))


def dag(c: CostMatrix, eps_values, profile=None) -> Optional[Check]:
    if not math.isinf(c.p):
        return None
    profile = potential_profile(c) if profile is None else profile
    bad = []
    for e in eps_values:
        comps = components_at(c, pos(e), profile)
        for nu in [v for v in eps_values if v <= e]:
            if morse_graph(c, pos(e), nu, with_hyper=False, components=comps).has_cycle():
                bad.append(f"eps={e:g},nu={nu:g}")
    return Check("acyclic (eps,nu) Morse graphs p=inf", not bad, "; ".join(bad))


def check_system(system: SystemModel, ps=(1, 2, math.inf), levels=None, nus=(0.0,),
                 theta_rec=None, eta_def=None, collapse_levels=None) -> List[Check]:
    """Every module-level invariant that applies to this system."""
    out = [metric_axioms(system.space)]
    costs = {float(p): compute_cost_matrix(system, p) for p in ps}
    profiles = {p: potential_profile(c, theta_rec, eta_def) for p, c in costs.items()}
    levels = ladder() if levels is None else levels
    for p, c in costs.items():
        out.append(one_step_bound(c))
        out.append(composition(c))
        out.append(filtration(profiles[p], levels))
        for extra in (exact_symmetry(profiles[p], system), omega_reachability(c, system)):
            if extra is not None:
                out.append(extra)
    if len(costs) > 1:
        out.append(p_monotone(costs))
        out.append(p_nesting(profiles, levels))
    if not system.layered:
        cl = collapse_levels or [neg(0.0), pos(0.0), pos(0.05), pos(0.1), pos(0.2), pos(0.3)]
        for p, c in costs.items():
            for nu in nus:
                out.append(collapse_ladder(c, cl, nu, profiles[p]))
        if math.inf in costs:
            grid = list(np.linspace(0.0, 0.5, 10))
            out.append(dag(costs[math.inf], grid, profiles[math.inf]))
    return out
