"""Finite dynamical systems: a node set plus admissible one-step images.

A system stores, for each node, a short list of ambient image points.  The
one-step cost from node i to node j is the smallest ambient distance from
an image of i to node j.  Time-layered (nonautonomous) systems also record
which layer each image lands on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import registry
from .errors import IntegratorError, SpecError
from .spaces import MetricSpaceModel, build_space, point_cloud

ETA = 1e-9
SYSTEM_KINDS = ("map", "permutation", "flow", "nonautonomous", "counterexample_A", "example_non_increasing")


@dataclass(frozen=True, eq=False)
class SystemModel:
    space: MetricSpaceModel
    images: np.ndarray                  # (N, m, dim); NaN rows mark missing evolutions
    kind: str
    name: str = ""
    params: dict = field(default_factory=dict)
    inverse: Optional[np.ndarray] = None        # node -> node, -1 when the preimage leaves the model
    escaping: Optional[np.ndarray] = None       # node images outside the modelled region
    layer: Optional[np.ndarray] = None          # nonautonomous: layer of each node
    image_layer: Optional[np.ndarray] = None    # nonautonomous: (N, m) target layer or -1
    time_grid: Optional[np.ndarray] = None
    labels: Optional[list] = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.images.shape[0]

    @property
    def layered(self) -> bool:
        return self.layer is not None

    @property
    def n_layers(self) -> int:
        return 1 if self.layer is None else int(self.layer.max()) + 1

    def space_index(self, u):
        return np.asarray(u) % self.space.n

    def coords(self, u=None) -> np.ndarray:
        if u is None:
            u = np.arange(self.n)
        return self.space.points[self.space_index(u)]

    def label(self, u: int) -> str:
        if self.labels is not None:
            return self.labels[u]
        if self.layered:
            return f"({int(self.layer[u])},{int(self.space_index(u))})"
        return str(u)

    @property
    def absorbing(self) -> np.ndarray:
        return np.all(np.isnan(self.images[..., 0]), axis=1)

    def describe(self) -> dict:
        d = {"kind": self.kind, "name": self.name, "params": self.params, "n": self.n}
        d.update(self.meta)
        return d


# integrator ---------------------------------------------------------------------

def rk4(f: Callable, x, t0: float, duration: float, step: float) -> np.ndarray:
    """Classical fixed-step RK4 from t0 over `duration`; the last step is shortened to land exactly."""
    if not step > 0:
        raise SpecError("integrator step must be positive")
    y = np.array(x, dtype=float, copy=True)
    if duration <= 0:
        return y
    k = int(math.floor(duration / step + 1e-9))
    steps = [step] * k
    rest = duration - k * step
    if rest > 1e-12 * max(duration, 1.0):
        steps.append(rest)
    t = float(t0)
    for dt in steps:
        k1 = f(t, y)
        k2 = f(t + dt / 2, y + dt / 2 * k1)
        k3 = f(t + dt / 2, y + dt / 2 * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        bad = ~np.isfinite(y)
        if np.any(bad):
            row = int(np.argwhere(bad)[0][0])
            raise IntegratorError(f"integrator diverged at node {row} (t={t:.6g})")
    return y


# costs ------------------------------------------------------------------------------

def _row_costs(system: SystemModel, rows: np.ndarray) -> np.ndarray:
    sp = system.space
    n_sp = sp.n
    out = np.full((len(rows), system.n), np.inf)
    for k in range(system.images.shape[1]):
        ys = system.images[rows, k, :]
        ok = ~np.isnan(ys[:, 0])
        if not np.any(ok):
            continue
        d = np.full((len(rows), n_sp), np.inf)
        d[ok] = sp.ambient_distances(ys[ok])
        if not system.layered:
            np.minimum(out, d, out=out)
            continue
        tl = system.image_layer[rows, k]
        for lay in np.unique(tl[tl >= 0]):
            sel = np.nonzero(tl == lay)[0]
            block = slice(int(lay) * n_sp, (int(lay) + 1) * n_sp)
            out[sel, block] = np.minimum(out[sel, block], d[sel])
    return out


def step_cost_matrix(system: SystemModel, chunk: int = 512) -> np.ndarray:
    """Dense matrix of one-step costs; +inf where no evolution connects i to j."""
    C = np.empty((system.n, system.n))
    for s in range(0, system.n, chunk):
        rows = np.arange(s, min(s + chunk, system.n))
        C[rows] = _row_costs(system, rows)
    return C


def one_step_cost(system: SystemModel, i: int, j: int) -> float:
    for v in (i, j):
        if not (0 <= int(v) < system.n):
            raise IndexError(f"node index {v} out of range [0, {system.n})")
    return float(_row_costs(system, np.array([int(i)]))[0, int(j)])


def snapping_gap(system: SystemModel, C: Optional[np.ndarray] = None) -> float:
    """eta_grid: worst distance from a node's best image to the nearest node (escaping nodes skipped)."""
    if C is None:
        C = step_cost_matrix(system)
    best = C.min(axis=1)
    keep = np.isfinite(best)
    if system.escaping is not None:
        keep &= ~system.escaping
    return float(best[keep].max()) if np.any(keep) else 0.0


def successor(system: SystemModel, C: Optional[np.ndarray] = None, tol: float = ETA) -> np.ndarray:
    """Node-level forward map for node-exact evolutions: the nearest node within tol, else -1."""
    if C is None:
        C = step_cost_matrix(system)
    j = np.argmin(C, axis=1)
    ok = C[np.arange(system.n), j] <= tol
    if system.escaping is not None:
        ok &= ~system.escaping
    return np.where(ok, j, -1)


# builders ---------------------------------------------------------------------------

def _check_dim(entry: registry.Entry, space: MetricSpaceModel):
    if space.kind == "matrix":
        raise SpecError("explicit-matrix spaces carry no coordinates; use a permutation system")
    if entry.dim is not None and entry.dim != space.dim:
        raise SpecError(f"{entry.name} acts on dimension {entry.dim}, space has dimension {space.dim}")


def _escape_mask(space, images):
    flat = images.reshape(-1, images.shape[-1])
    inside = space.in_hull(flat).reshape(images.shape[:2])
    return ~np.any(inside, axis=1)


def _eval(fn, pts, **kw):
    out = np.asarray(fn(pts.copy(), **kw), dtype=float)
    if out.shape != pts.shape:
        out = np.broadcast_to(out, pts.shape).copy()
    bad = ~np.all(np.isfinite(out), axis=1)
    if np.any(bad):
        raise SpecError(f"evaluation failed (non-finite image) at node {int(np.argmax(bad))}")
    return out


def build_map_system(space: MetricSpaceModel, name: str, params: Optional[dict] = None,
                     iterates: Optional[Sequence[int]] = None) -> SystemModel:
    """Closed-form map.  `iterates=(N, m)` gives the admissible images f^N..f^m instead of f."""
    entry = registry.lookup(registry.MAPS, name)
    _check_dim(entry, space)
    kw = entry.resolve(params)
    lo, hi = (1, 1) if iterates is None else (int(iterates[0]), int(iterates[1]))
    if lo < 1 or hi < lo:
        raise SpecError("iterate range must satisfy 1 <= N <= m")
    y = space.points.copy()
    imgs = []
    for k in range(1, hi + 1):
        y = _eval(entry.func, y, **kw)
        if k >= lo:
            imgs.append(y)
    images = np.stack(imgs, axis=1)
    meta = {} if iterates is None else {"iterates": [lo, hi]}
    return SystemModel(space, images, "map", name, kw, escaping=_escape_mask(space, images), meta=meta)


def _check_perm(perm, n, what):
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
        raise SpecError(f"{what} is not a bijection on {n} nodes")
    return perm


def build_permutation_system(space: MetricSpaceModel, forward, inverse=None) -> SystemModel:
    n = space.n
    fwd = _check_perm(forward, n, "forward map")
    inv = np.argsort(fwd) if inverse is None else _check_perm(inverse, n, "inverse map")
    if not (np.array_equal(inv[fwd], np.arange(n)) and np.array_equal(fwd[inv], np.arange(n))):
        raise SpecError("inverse does not invert the forward permutation")
    images = space.points[fwd][:, None, :]
    return SystemModel(space, images, "permutation", "permutation", {"forward": fwd.tolist()},
                       inverse=inv, escaping=np.zeros(n, dtype=bool))


def build_flow_system(space: MetricSpaceModel, name: str, params: Optional[dict] = None,
                      T: float = 1.0, m: int = 1, integrator_step: Optional[float] = None) -> SystemModel:
    entry = registry.lookup(registry.FIELDS, name)
    _check_dim(entry, space)
    kw = entry.resolve(params)
    T = float(T)
    if not T > 0:
        raise SpecError("flow base time T must be positive")
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise SpecError("multiplicity m must be an integer >= 1")
    dt = T / 10 if integrator_step is None else float(integrator_step)
    if not 0 < dt <= T:
        raise SpecError("integrator_step must satisfy 0 < step <= T")
    field_fn = lambda t, y: entry.func(t, y, **kw)
    y = space.points.copy()
    imgs = []
    for k in range(1, m + 1):
        y = rk4(field_fn, y, (k - 1) * T, T, dt)
        imgs.append(y)
    images = np.stack(imgs, axis=1)
    return SystemModel(space, images, "flow", name, kw, escaping=_escape_mask(space, images),
                       meta={"T": T, "m": int(m), "integrator_step": dt})


def build_nonautonomous_system(space: MetricSpaceModel, time_grid, name: str,
                               params: Optional[dict] = None, max_layer_skip: int = 1) -> SystemModel:
    entry = registry.lookup(registry.FAMILIES, name)
    _check_dim(entry, space)
    kw = entry.resolve(params)
    s = np.asarray(time_grid, dtype=float)
    if s.ndim != 1 or len(s) < 2:
        raise SpecError("time grid needs at least two instants")
    if np.any(np.diff(s) <= 0):
        raise SpecError("time grid must be strictly increasing")
    if not (isinstance(max_layer_skip, (int, np.integer)) and max_layer_skip >= 1):
        raise SpecError("max_layer_skip must be an integer >= 1")
    L = len(s) - 1
    n = space.n
    N = (L + 1) * n
    images = np.full((N, max_layer_skip, space.dim), np.nan)
    image_layer = np.full((N, max_layer_skip), -1, dtype=np.int64)
    for j in range(L):
        for k in range(1, max_layer_skip + 1):
            if j + k > L:
                break
            y = _eval(lambda x, **a: entry.func(s[j], s[j + k] - s[j], x, **a), space.points, **kw)
            images[j * n:(j + 1) * n, k - 1] = y
            image_layer[j * n:(j + 1) * n, k - 1] = j + k
    layer = np.repeat(np.arange(L + 1), n)
    esc = np.zeros(N, dtype=bool)
    for j in range(L):
        esc[j * n:(j + 1) * n] = _escape_mask(space, images[j * n:(j + 1) * n])
    return SystemModel(space, images, "nonautonomous", name, kw, escaping=esc, layer=layer,
                       image_layer=image_layer, time_grid=s, meta={"max_layer_skip": int(max_layer_skip)})


def build_counterexample_A(eps: float, N: int) -> SystemModel:
    """Two fixed columns x = -1, 1 plus a finite arc (a_n, 2 eps n), |n| <= N, stepping a_n -> a_{n+1}."""
    eps = float(eps)
    if not eps > 0:
        raise SpecError("eps must be positive")
    if int(N) < 2:
        raise SpecError("N must be >= 2")
    N = int(N)
    ks = np.arange(-N, N + 1)
    a = np.where(ks < 0, -1 + 1.0 / np.where(ks == 0, 1, ks), np.where(ks > 0, 1 - 1.0 / np.where(ks == 0, 1, ks), 0.0))
    left = np.stack([np.full(len(ks), -1.0), 2 * eps * ks], axis=1)
    right = np.stack([np.full(len(ks), 1.0), 2 * eps * ks], axis=1)
    arc = np.stack([a, 2 * eps * ks], axis=1)
    pts = np.concatenate([left, right, arc])
    space = point_cloud(pts)
    m = len(ks)
    img = pts.copy()
    img[2 * m:2 * m + m - 1] = arc[1:]
    inv = np.arange(len(pts))
    inv[2 * m + 1:] = np.arange(2 * m, 3 * m - 1)
    inv[2 * m] = -1
    labels = ([f"L{k}" for k in ks] + [f"R{k}" for k in ks] + [f"a{k}" for k in ks])
    return SystemModel(space, img[:, None, :], "map", "counterexample_A", {"eps": eps, "N": N},
                       inverse=inv, escaping=np.zeros(len(pts), dtype=bool), labels=labels,
                       meta={"source_node": 0, "target_node": 2 * m - 1})


def example_non_increasing(N: int) -> SystemModel:
    """Truncation at |n| <= N of the planar example with two fixed points alpha, omega.

    x_n runs from alpha=(0,0) to omega=(3,0) along the axis; y_n comes down
    the line x=2 and leaves along x=1.  Tails beyond the truncation are
    snapped to the limits (x_N -> omega, x_{-N} has predecessor alpha);
    y_N maps to its true off-model successor and is marked escaping.
    """
    N = int(N)
    if N < 1:
        raise SpecError("N must be >= 1")
    ns = np.arange(-N, N + 1)
    xs = np.array([[1.0 / -k, 0.0] if k < 0 else ([2.0, 0.0] if k == 0 else [3.0 - 1.0 / (1 + k), 0.0])
                   for k in ns])
    ys = np.array([[2.0, -k + 0.5] if k < 0 else ([2.0, 0.5] if k == 0 else [1.0, k - 0.5]) for k in ns])
    pts = np.concatenate([[[0.0, 0.0], [3.0, 0.0]], xs, ys])
    space = point_cloud(pts)
    m = len(ns)
    ix = 2 + np.arange(m)
    iy = 2 + m + np.arange(m)
    fwd = np.arange(len(pts))
    fwd[ix[:-1]] = ix[1:]
    fwd[ix[-1]] = 1
    fwd[iy[:-1]] = iy[1:]
    inv = np.arange(len(pts))
    inv[ix[1:]] = ix[:-1]
    inv[ix[0]] = 0
    inv[iy[1:]] = iy[:-1]
    inv[iy[0]] = -1
    images = pts[fwd].copy()
    images[iy[-1]] = [1.0, N + 0.5]
    esc = np.zeros(len(pts), dtype=bool)
    esc[iy[-1]] = True
    labels = ["alpha", "omega"] + [f"x{k}" for k in ns] + [f"y{k}" for k in ns]
    return SystemModel(space, images[:, None, :], "map", "example_non_increasing", {"N": N},
                       inverse=inv, escaping=esc, labels=labels,
                       meta={"alpha": 0, "omega": 1, "x0": int(ix[N])})


def build_system(spec: dict, space_spec: Optional[dict] = None, cap: Optional[int] = None) -> SystemModel:
    """Build from the JSON form {"kind", "name", "params", "T", "m", "integrator_step", ...}."""
    from .spaces import DEFAULT_MAX_NODES
    cap = DEFAULT_MAX_NODES if cap is None else cap
    kind = spec.get("kind")
    params = spec.get("params") or {}
    if kind == "counterexample_A":
        return build_counterexample_A(params.get("eps", 0.5), params.get("N", 10))
    if kind == "example_non_increasing":
        return example_non_increasing(params.get("N", 20))
    if kind not in SYSTEM_KINDS:
        raise SpecError(f"unknown system kind {kind!r}")
    if space_spec is None:
        raise SpecError(f"system kind {kind!r} needs a space")
    space = build_space(space_spec, cap)
    if kind == "map":
        it = spec.get("iterates")
        return build_map_system(space, spec.get("name"), params, it)
    if kind == "permutation":
        return build_permutation_system(space, params.get("forward"), params.get("inverse"))
    if kind == "flow":
        return build_flow_system(space, spec.get("name"), params, spec.get("T", 1.0), spec.get("m", 1),
                                 spec.get("integrator_step"))
    grid = spec.get("time_grid")
    if grid is None:
        raise SpecError("nonautonomous system needs 'time_grid'")
    sys_ = build_nonautonomous_system(space, grid, spec.get("name"), params, spec.get("max_layer_skip", 1))
    if cap is not None and sys_.n > cap:
        from .errors import ResourceLimitError
        raise ResourceLimitError(f"{sys_.n} layered nodes exceed the cap of {cap}")
    return sys_
