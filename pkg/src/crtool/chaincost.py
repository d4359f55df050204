"""All-pairs minimal l^p chain costs over chains of length >= 1.

For p < inf the per-step costs are raised to the p-th power and summed
along the chain (a nonnegative shortest-path problem); for p = inf steps
compose by max (a bottleneck problem).  Both run a dense Dijkstra sweep
from every source, seeded with the one-step row so the empty chain is never
counted and rho[i][i] is a true return cost.

Sums accumulate in chain order, so the kernel reproduces the brute-force
enumeration bit for bit.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from numba import njit

from .errors import ResourceLimitError, SpecError
from .systems import ETA, SystemModel, step_cost_matrix

MAX_P = 64
DEFAULT_MAX_NODES = 4096


def parse_p(p) -> float:
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "+inf", "infinity", "∞"):
            return math.inf
        try:
            p = float(s)
        except ValueError:
            raise SpecError(f"p must be a number in [1, {MAX_P}] or 'inf', got {p!r}") from None
    p = float(p)
    if math.isinf(p) and p > 0:
        return math.inf
    if not 1 <= p <= MAX_P:
        raise SpecError(f"p must lie in [1, {MAX_P}] or be 'inf' (got {p}); use 'inf' for larger p")
    return p


def p_label(p: float) -> str:
    return "inf" if math.isinf(p) else (str(int(p)) if float(p).is_integer() else repr(p))


def to_weight(c, p):
    if math.isinf(p) or p == 1:
        return np.asarray(c, dtype=float)
    return np.power(c, p)


def from_weight(w, p):
    if math.isinf(p) or p == 1:
        return np.asarray(w, dtype=float)
    return np.power(w, 1.0 / p)


@njit(cache=True)
def _sweep(W, s, bottleneck, out):
    n = W.shape[0]
    done = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        out[v] = W[s, v]
    for _ in range(n):
        u = -1
        du = np.inf
        for v in range(n):
            if not done[v] and out[v] < du:
                du = out[v]
                u = v
        if u < 0:
            break
        done[u] = True
        for v in range(n):
            if done[v]:
                continue
            w = W[u, v]
            if bottleneck:
                c = w if w > du else du
            else:
                c = du + w
            if c < out[v]:
                out[v] = c


@njit(cache=True)
def _allpairs(W, bottleneck):
    n = W.shape[0]
    R = np.empty((n, n))
    for s in range(n):
        _sweep(W, s, bottleneck, R[s])
    return R


@dataclass(frozen=True, eq=False)
class CostMatrix:
    n: int
    p: float
    rho: np.ndarray
    cap: Optional[float] = None
    eta: float = ETA
    system: Optional[SystemModel] = None
    step: Optional[np.ndarray] = None

    @property
    def p_label(self) -> str:
        return p_label(self.p)


def chain_costs_from_steps(C: np.ndarray, p, cap: Optional[float] = None) -> np.ndarray:
    p = parse_p(p)
    W = to_weight(np.asarray(C, dtype=float), p)
    if cap is not None:
        W = np.where(W > to_weight(cap, p), np.inf, W)
    R = from_weight(_allpairs(np.ascontiguousarray(W), math.isinf(p)), p)
    if cap is not None:
        R = np.where(R > cap, np.inf, R)
    return R


def compute_cost_matrix(system: SystemModel, p, cap: Optional[float] = None,
                        max_nodes: int = DEFAULT_MAX_NODES, eta: float = ETA) -> CostMatrix:
    p = parse_p(p)
    if system.n > max_nodes:
        raise ResourceLimitError(
            f"{system.n} nodes exceed the dense limit of {max_nodes}; use a coarser grid "
            "or a per-source streaming run")
    if cap is not None and not cap > 0:
        raise SpecError("cap must be positive")
    C = step_cost_matrix(system)
    rho = chain_costs_from_steps(C, p, cap)
    rho.setflags(write=False)
    return CostMatrix(system.n, p, rho, cap, eta, system, C)


def brute_force_matrix(C: np.ndarray, p, max_len: int) -> np.ndarray:
    """Exhaustive minimum over every node sequence of length 1..max_len, all pairs at once."""
    p = parse_p(p)
    n = C.shape[0]
    if n > 8 or max_len > 8:
        raise ResourceLimitError("brute force is limited to n <= 8 and max_len <= 8")
    if max_len < 1:
        raise SpecError("max_len must be >= 1")
    W = to_weight(np.asarray(C, dtype=float), p)
    best = W.copy()
    for L in range(2, max_len + 1):
        mids = np.array(list(itertools.product(range(n), repeat=L - 1)), dtype=np.int64)
        acc = W[:, mids[:, 0]]                       # (n sources, M)
        for k in range(1, L - 1):
            step = W[mids[:, k - 1], mids[:, k]]
            acc = np.maximum(acc, step) if math.isinf(p) else acc + step
        last = W[mids[:, -1], :]                     # (M, n targets)
        if math.isinf(p):
            tot = np.maximum(acc[:, :, None], last[None, :, :])
        else:
            tot = acc[:, :, None] + last[None, :, :]
        best = np.minimum(best, tot.min(axis=1))
    return from_weight(best, p)


def brute_force_cost(system: SystemModel, p, i: int, j: int, max_len: int) -> float:
    """Exhaustive minimum over the chains from i to j only."""
    p = parse_p(p)
    n = system.n
    if n > 8 or max_len > 8:
        raise ResourceLimitError("brute force is limited to n <= 8 and max_len <= 8")
    if max_len < 1:
        raise SpecError("max_len must be >= 1")
    W = to_weight(step_cost_matrix(system), p)
    best = W[i, j]
    for L in range(2, max_len + 1):
        mids = _middles(n, L - 1)
        tot = W[i, mids[:, 0]]
        # left fold, the same summation order as the shortest-path kernel
        for k in range(1, L):
            nxt = mids[:, k] if k < L - 1 else j
            step = W[mids[:, k - 1], nxt]
            tot = np.maximum(tot, step) if math.isinf(p) else tot + step
        best = min(best, tot.min())
    return float(from_weight(best, p))


@lru_cache(maxsize=64)
def _middles(n: int, k: int) -> np.ndarray:
    out = np.array(list(itertools.product(range(n), repeat=k)), dtype=np.int64)
    out.setflags(write=False)
    return out


def save_cost_matrix(costs: CostMatrix, path) -> tuple[Path, Path]:
    """Row-major little-endian doubles in `path`, header in `path`.json."""
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(costs.rho, dtype="<f8").tobytes())
    header = {"n": costs.n, "p": costs.p_label, "cap": costs.cap, "eta": costs.eta}
    hpath = path.with_name(path.name + ".json")
    hpath.write_text(json.dumps(header, sort_keys=True) + "\n")
    return path, hpath


def load_cost_matrix(path) -> CostMatrix:
    path = Path(path)
    header = json.loads(path.with_name(path.name + ".json").read_text())
    n = int(header["n"])
    rho = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(n, n).copy()
    return CostMatrix(n, parse_p(header["p"]), rho, header.get("cap"), header.get("eta", ETA))
