"""Two-sided recurrence filtration on a cost matrix.

Levels live in (-inf, -0] + [+0, +inf].  A node enters the positive side at
its return cost rho[x][x]; it sits on the negative side, down to its defect,
when it returns for (almost) free and no cheaply reachable point fails to
come back at least as cheaply.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import total_ordering
from typing import List, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .chaincost import CostMatrix
from .errors import SpecError
from .systems import snapping_gap

NEG, POS = "NEG", "POS"


@total_ordering
@dataclass(frozen=True)
class ExtendedLevel:
    branch: str
    magnitude: float

    def __post_init__(self):
        if self.branch not in (NEG, POS):
            raise SpecError(f"branch must be NEG or POS, got {self.branch!r}")
        if not (self.magnitude >= 0):
            raise SpecError(f"level magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, "magnitude", float(self.magnitude))

    def _key(self):
        return (0, -self.magnitude) if self.branch == NEG else (1, self.magnitude)

    def __lt__(self, other):
        return self._key() < other._key()

    def __eq__(self, other):
        return isinstance(other, ExtendedLevel) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def embed(self) -> float:
        return -self.magnitude if self.branch == NEG else self.magnitude

    @property
    def token(self) -> str:
        sign = "-" if self.branch == NEG else "+"
        m = self.magnitude
        if math.isinf(m):
            return sign + "inf"
        return sign + (str(int(m)) if m.is_integer() and m < 1e15 else repr(m))

    def __repr__(self):
        return f"{self.branch}({self.magnitude:g})"

    @classmethod
    def parse(cls, tok) -> "ExtendedLevel":
        """'-0', '+0', '0.1', '+0.1', '-0.5', '-inf', 'inf'; unsigned means positive."""
        if isinstance(tok, ExtendedLevel):
            return tok
        if isinstance(tok, (int, float)) and not isinstance(tok, bool):
            v = float(tok)
            return cls(NEG, -v) if (v < 0 or math.copysign(1, v) < 0) else cls(POS, v)
        if not isinstance(tok, str):
            raise SpecError(f"cannot parse level {tok!r}")
        s = tok.strip()
        branch = NEG if s.startswith("-") else POS
        body = s[1:] if s[:1] in "+-" else s
        try:
            mag = float(body)
        except ValueError:
            raise SpecError(f"cannot parse level {tok!r}") from None
        if mag < 0 or math.isnan(mag):
            raise SpecError(f"cannot parse level {tok!r}")
        return cls(branch, mag)


def neg(a) -> ExtendedLevel:
    return ExtendedLevel(NEG, a)


def pos(a) -> ExtendedLevel:
    return ExtendedLevel(POS, a)


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    tau_pos: np.ndarray
    defect: np.ndarray
    negative: np.ndarray          # node is on the negative branch
    theta_rec: float
    eta_def: float
    eta: float
    eta_grid: float
    costs: Optional[CostMatrix] = None
    layered: bool = False

    @property
    def n(self) -> int:
        return len(self.tau_pos)

    @property
    def tau(self) -> List[ExtendedLevel]:
        return [ExtendedLevel(NEG, d) if ng else ExtendedLevel(POS, t)
                for t, d, ng in zip(self.tau_pos, self.defect, self.negative)]

    @property
    def tau_embed(self) -> np.ndarray:
        return np.where(self.negative, -self.defect, self.tau_pos)

    def members(self, level) -> np.ndarray:
        level = ExtendedLevel.parse(level)
        if level.branch == POS:
            return (self.tau_pos <= level.magnitude + self.eta) | self.negative
        if math.isinf(level.magnitude):
            return self.negative & np.isinf(self.defect)
        return self.negative & (self.defect > level.magnitude + self.eta)


def _defaults(costs: CostMatrix, theta_rec, eta_def):
    eta_grid = 0.0
    if costs.system is not None:
        eta_grid = snapping_gap(costs.system, costs.step)
    exact = eta_grid <= costs.eta
    if theta_rec is None:
        theta_rec = 0.0 if exact else 3.0 * eta_grid
    if eta_def is None:
        eta_def = theta_rec
    if not (theta_rec >= 0 and eta_def >= 0 and math.isfinite(theta_rec) and math.isfinite(eta_def)):
        raise SpecError("theta_rec and eta_def must be finite and >= 0")
    return float(theta_rec), float(eta_def), eta_grid


def potential_profile(costs: CostMatrix, theta_rec: Optional[float] = None,
                      eta_def: Optional[float] = None) -> PotentialProfile:
    if costs.system is not None and costs.system.layered:
        return nonautonomous_profile(costs, theta_rec, eta_def)
    theta_rec, eta_def, eta_grid = _defaults(costs, theta_rec, eta_def)
    rho = costs.rho
    eta = costs.eta
    tau_pos = np.diag(rho).copy()
    violators = rho.T > rho + (eta_def + eta)
    defect = np.where(violators, rho, np.inf).min(axis=1)
    negative = (tau_pos <= theta_rec + eta) & (defect > eta)
    return PotentialProfile(tau_pos, defect, negative, theta_rec, eta_def, eta, eta_grid, costs)


def cr_set(profile: PotentialProfile, level) -> np.ndarray:
    return np.nonzero(profile.members(level))[0]


@dataclass(frozen=True, eq=False)
class LevelComponents:
    level: ExtendedLevel
    components: List[np.ndarray]
    comp_id: np.ndarray           # -1 outside the level set

    def __len__(self):
        return len(self.components)

    def as_sets(self):
        return [set(c.tolist()) for c in self.components]


def components_at(costs: CostMatrix, level, profile: Optional[PotentialProfile] = None) -> LevelComponents:
    level = ExtendedLevel.parse(level)
    if profile is None:
        profile = potential_profile(costs)
    member = profile.members(level)
    thr = level.magnitude if level.branch == POS else 0.0
    rho = costs.rho
    lim = thr + costs.eta
    within = (rho <= lim) & np.isfinite(rho) if math.isinf(thr) else rho <= lim
    mutual = within & within.T & member[:, None] & member[None, :]
    idx = np.nonzero(member)[0]
    comp_id = np.full(costs.n, -1, dtype=np.int64)
    if len(idx) == 0:
        return LevelComponents(level, [], comp_id)
    sub = csr_matrix(mutual[np.ix_(idx, idx)])
    _, lab = connected_components(sub, directed=False)
    # relabel so components are ordered by their smallest member
    order = {}
    for node, l in zip(idx, lab):
        order.setdefault(l, len(order))
    lab = np.array([order[l] for l in lab])
    comp_id[idx] = lab
    comps = [idx[lab == k] for k in range(len(order))]
    return LevelComponents(level, comps, comp_id)


def critical_values(costs: CostMatrix) -> List[float]:
    rho = costs.rho
    iu = np.triu_indices(costs.n)
    vals = np.concatenate([np.diag(rho), np.maximum(rho, rho.T)[iu]])
    vals = np.unique(vals[np.isfinite(vals)])
    if len(vals) == 0:
        return []
    keep = [vals[0]]
    for v in vals[1:]:
        if v - keep[-1] > costs.eta:
            keep.append(v)
    return [float(v) for v in keep]


def circulation_cost(profile: PotentialProfile) -> float:
    t = profile.tau_pos
    if len(t) == 0:
        return 0.0
    if np.any(np.isinf(t)):
        return math.inf
    return float(max(np.max(t), 0.0))


# time-layered systems ------------------------------------------------------------

def _layout(costs: CostMatrix):
    sys_ = costs.system
    if sys_ is None or not sys_.layered:
        raise SpecError("cost matrix does not come from a time-layered system")
    return sys_.space.n, sys_.n_layers


def nonautonomous_potential(costs: CostMatrix) -> np.ndarray:
    """Cheapest return of (j, i) to the same space node i at any later layer."""
    n, L = _layout(costs)
    out = np.full(costs.n, np.inf)
    R = costs.rho.reshape(L, n, L, n)
    ii = np.arange(n)
    for j in range(L - 1):
        later = R[j, ii, j + 1:, ii]           # (n, later layers)
        out[j * n:(j + 1) * n] = later.min(axis=1)
    return out


def nonautonomous_profile(costs: CostMatrix, theta_rec=None, eta_def=None) -> PotentialProfile:
    """Profile whose positive part is the later-layer return cost.

    The defect of (j, i) is the best, over later layers j', of the cheapest
    reachable z that fails to reach (j', i) at most as cheaply.
    """
    n, L = _layout(costs)
    theta_rec, eta_def, eta_grid = _defaults(costs, theta_rec, eta_def)
    rho = costs.rho
    eta = costs.eta
    tau_pos = nonautonomous_potential(costs)
    defect = np.zeros(costs.n)
    for u in range(costs.n):
        j, i = divmod(u, n)
        best = 0.0
        for jj in range(j + 1, L):
            t = jj * n + i
            viol = rho[:, t] > rho[u] + (eta_def + eta)
            d = rho[u][viol].min() if np.any(viol) else np.inf
            best = max(best, d)
        defect[u] = best
    negative = (tau_pos <= theta_rec + eta) & (defect > eta)
    return PotentialProfile(tau_pos, defect, negative, theta_rec, eta_def, eta, eta_grid, costs, layered=True)
