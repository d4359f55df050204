"""Morse graphs on the components of a level set.

Two edge notions are provided: (eps, nu)-error edges read directly off the
cost matrix, and limit-set edges built from forward and backward eventual
cycles of a node-exact invertible system.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from .chaincost import CostMatrix
from .errors import SpecError
from .recurrence import ExtendedLevel, LevelComponents, components_at, potential_profile
from .systems import SystemModel, successor

NU_ERROR, LIMIT_G, LIMIT_G_PRIME = "nu-error", "limit-set-G", "limit-set-G'"


@dataclass(frozen=True, eq=False)
class MorseGraphLevel:
    level: ExtendedLevel
    nu: Optional[float]
    components: LevelComponents
    edges: Dict[Tuple[int, int], int]                       # (j, k) -> witness node
    hyper_edges: Dict[Tuple[FrozenSet[int], FrozenSet[int]], int] = field(default_factory=dict)
    variant: str = NU_ERROR
    p: Optional[str] = None
    coords: Optional[np.ndarray] = None

    @property
    def vertices(self):
        return self.components.components

    @property
    def n_vertices(self) -> int:
        return len(self.components)

    def edge_set(self):
        return set(self.edges)

    def has_cycle(self) -> bool:
        return _has_cycle(self.n_vertices, self.edges)

    def vertex_of(self, node: int) -> int:
        return int(self.components.comp_id[node])


def _has_cycle(k, edges) -> bool:
    adj = [[] for _ in range(k)]
    for a, b in edges:
        adj[a].append(b)
    color = [0] * k
    for s in range(k):
        if color[s]:
            continue
        stack = [(s, iter(adj[s]))]
        color[s] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
            elif color[nxt] == 1:
                return True
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(adj[nxt])))
    return False


def _coords(costs: CostMatrix):
    return None if costs.system is None else costs.system.coords()


def morse_graph(costs: CostMatrix, epsilon, nu: float = 0.0, with_hyper: bool = True,
                profile=None, components: Optional[LevelComponents] = None) -> MorseGraphLevel:
    if not nu >= 0:
        raise SpecError("nu must be >= 0")
    level = ExtendedLevel.parse(epsilon)
    if components is None:
        if profile is None:
            profile = potential_profile(costs)
        components = components_at(costs, level, profile)
    rho = costs.rho
    lim = nu + costs.eta
    K = len(components)
    into = np.empty((K, costs.n), dtype=bool)
    out = np.empty((K, costs.n), dtype=bool)
    for c, members in enumerate(components.components):
        into[c] = rho[members].min(axis=0) <= lim
        out[c] = rho[:, members].min(axis=1) <= lim
    wit = np.full((K, K), -1, dtype=np.int32)
    hyper: Dict = {}
    for x in np.nonzero(into.any(axis=0) & out.any(axis=0))[0]:
        A = np.nonzero(into[:, x])[0]
        W = np.nonzero(out[:, x])[0]
        blk = wit[np.ix_(A, W)]
        fresh = blk < 0
        if fresh.any():
            blk[fresh] = x
            wit[np.ix_(A, W)] = blk
        if with_hyper:
            hyper.setdefault((frozenset(A.tolist()), frozenset(W.tolist())), int(x))
    np.fill_diagonal(wit, -1)
    js, ks = np.nonzero(wit >= 0)
    edges = {(int(j), int(k)): int(wit[j, k]) for j, k in zip(js, ks)}
    return MorseGraphLevel(level, float(nu), components, dict(sorted(edges.items())), hyper,
                           NU_ERROR, costs.p_label, _coords(costs))


def eventual_cycles(nxt: np.ndarray):
    """For a partial self-map on 0..n-1 (-1 = undefined) return (cycle id per node or -1, cycle list)."""
    n = len(nxt)
    res = np.full(n, -2, dtype=np.int64)
    state = np.zeros(n, dtype=np.int8)
    cycles = []
    for s in range(n):
        if state[s]:
            continue
        path = []
        v = s
        while v != -1 and state[v] == 0:
            state[v] = 1
            path.append(v)
            v = int(nxt[v])
        if v == -1:
            tail = -1
        elif state[v] == 1:
            cyc = path[path.index(v):]
            cid = len(cycles)
            cycles.append(np.array(cyc))
            for u in cyc:
                res[u] = cid
                state[u] = 2
            path = path[:path.index(v)]
            tail = cid
        else:
            tail = int(res[v])
        for u in reversed(path):
            res[u] = tail
            state[u] = 2
    return res, cycles


def limit_set_morse_graph(system: SystemModel, components: LevelComponents, variant: str = "G",
                          costs: Optional[CostMatrix] = None) -> MorseGraphLevel:
    if system.inverse is None:
        raise SpecError("limit-set Morse graphs need an inverse evolution oracle")
    if variant not in ("G", "G'"):
        raise SpecError("variant must be 'G' or \"G'\"")
    fwd = successor(system, None if costs is None else costs.step)
    w_id, w_cycles = eventual_cycles(fwd)
    a_id, a_cycles = eventual_cycles(np.asarray(system.inverse))
    cid = components.comp_id

    def comps(cyc_id, cycles):
        if cyc_id < 0:
            return set()
        return {int(c) for c in cid[cycles[cyc_id]] if c >= 0}

    edges: Dict[Tuple[int, int], int] = {}
    for x in range(system.n):
        if variant == "G'" and cid[x] >= 0:
            continue
        for j in sorted(comps(a_id[x], a_cycles)):
            for k in sorted(comps(w_id[x], w_cycles)):
                if j != k:
                    edges.setdefault((j, k), x)
    tag = LIMIT_G if variant == "G" else LIMIT_G_PRIME
    return MorseGraphLevel(components.level, None, components, dict(sorted(edges.items())), {}, tag,
                           None if costs is None else costs.p_label, system.coords())


@dataclass(frozen=True)
class CollapseMap:
    source: ExtendedLevel
    target: ExtendedLevel
    vertex_map: Tuple[Optional[int], ...]
    well_defined: bool
    edge_partial: bool
    edge_surjective: bool
    vertex_bijective: bool          # the extra vertex condition for a full (non-partial) collapse
    new_vertices: Tuple[int, ...]   # target vertices hit by no source vertex

    def as_dict(self) -> dict:
        return {"source": self.source.token, "target": self.target.token,
                "vertex_map": list(self.vertex_map), "well_defined": self.well_defined,
                "edge_partial": self.edge_partial, "edge_surjective": self.edge_surjective,
                "vertex_bijective": self.vertex_bijective, "new_vertices": list(self.new_vertices)}


def collapse_map(A: MorseGraphLevel, B: MorseGraphLevel) -> CollapseMap:
    if not A.level < B.level:
        raise SpecError(f"collapse needs increasing levels, got {A.level!r} -> {B.level!r}")
    if A.variant != B.variant or A.nu != B.nu:
        raise SpecError("collapse needs graphs of the same variant and nu")
    vmap = []
    ok = True
    for members in A.vertices:
        ids = set(B.components.comp_id[members].tolist())
        if len(ids) == 1 and -1 not in ids:
            vmap.append(ids.pop())
        else:
            vmap.append(None)
            ok = False
    partial = ok
    images = set()
    for (j, k) in A.edges:
        fj, fk = vmap[j], vmap[k]
        if fj is None or fk is None:
            partial = False
            continue
        if fj == fk:
            continue
        images.add((fj, fk))
        if (fj, fk) not in B.edges:
            partial = False
    surj = partial and all(e in images for e in B.edges)
    hit = [v for v in vmap if v is not None]
    counts = {v: hit.count(v) for v in set(hit)}
    injective_targets = {v for v, c in counts.items() if c == 1}
    collapsed = {v for v, c in counts.items() if c > 1}
    expected = set(range(B.n_vertices)) - collapsed
    bij = ok and injective_targets == expected
    new = tuple(sorted(set(range(B.n_vertices)) - set(hit)))
    return CollapseMap(A.level, B.level, tuple(vmap), ok, partial, surj, bij, new)


def compose_vertex_maps(m1: CollapseMap, m2: CollapseMap) -> Tuple[Optional[int], ...]:
    return tuple(None if v is None else m2.vertex_map[v] for v in m1.vertex_map)


def edge_collapse(edges, edge, new_vertex):
    """Merge the endpoints of `edge` into `new_vertex` and re-target every other edge."""
    a1, a2 = edge
    edges = set(map(tuple, edges))
    if edge not in edges:
        raise SpecError(f"edge {edge!r} is not in the graph")
    if a1 == a2:
        raise SpecError("cannot collapse a loop")
    pair = {a1, a2}
    out = set()
    for x, y in edges - {edge}:
        fx = new_vertex if x in pair else x
        fy = new_vertex if y in pair else y
        out.add((fx, fy))
    return out


# export -------------------------------------------------------------------------------

def _fmt(v) -> str:
    return f"{float(v):.6g}"


def _repr_coord(graph: MorseGraphLevel, members) -> list:
    if graph.coords is None:
        return []
    return [float(f"{c:.12g}") for c in graph.coords[int(members[0])]]


def export_dot(graph: MorseGraphLevel) -> str:
    lines = ["digraph morse {", "  rankdir=LR;",
             f'  label="level {graph.level.token} nu {graph.nu if graph.nu is None else _fmt(graph.nu)} {graph.variant}";']
    for c, members in enumerate(graph.vertices):
        rep = ",".join(_fmt(v) for v in _repr_coord(graph, members))
        lines.append(f'  c{c} [label="c{c}\\nsize {len(members)}\\n({rep})"];')
    for (j, k), w in graph.edges.items():
        lines.append(f"  c{j} -> c{k};")
    hyper = sorted(graph.hyper_edges.items(), key=lambda kv: (sorted(kv[0][0]), sorted(kv[0][1])))
    for h, ((A, W), w) in enumerate(hyper):
        lines.append(f'  h{h} [shape=diamond,label="",width=0.15,height=0.15];')
        for a in sorted(A):
            lines.append(f"  c{a} -> h{h} [style=dashed];")
        for b in sorted(W):
            lines.append(f"  h{h} -> c{b} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dict(graph: MorseGraphLevel) -> dict:
    hyper = sorted(graph.hyper_edges.items(), key=lambda kv: (sorted(kv[0][0]), sorted(kv[0][1])))
    return {
        "level": graph.level.token,
        "nu": graph.nu,
        "p": graph.p,
        "variant": graph.variant,
        "vertices": [{"id": c, "size": int(len(m)), "members": m.tolist(), "repr": _repr_coord(graph, m)}
                     for c, m in enumerate(graph.vertices)],
        "edges": [{"src": j, "dst": k, "witness": w} for (j, k), w in graph.edges.items()],
        "hyper_edges": [{"A": sorted(A), "W": sorted(W), "witness": w} for (A, W), w in hyper],
    }


def export_json(graph: MorseGraphLevel) -> str:
    return json.dumps(graph_to_dict(graph), indent=1, sort_keys=True) + "\n"
