"""Finite metric-space models.

Grid kinds carry coordinates and measure off-node points in the ambient
metric (the full line, the circle, or the flat torus).  Explicit matrices
have no ambient space; there a point is identified with its node index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ResourceLimitError, SpecError

DEFAULT_MAX_NODES = 4096

KINDS = ("interval", "circle", "torus", "cloud", "matrix")


@dataclass(frozen=True, eq=False)
class MetricSpaceModel:
    kind: str
    points: np.ndarray                        # (n, dim)
    h: float = 0.0
    circumferences: Optional[np.ndarray] = None   # per axis, circle/torus only
    bounds: Optional[tuple] = None                # interval only
    matrix: Optional[np.ndarray] = None           # explicit kind only
    spec: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_1d(self) -> bool:
        return self.kind in ("interval", "circle")

    def _check_index(self, i):
        if not (0 <= int(i) < self.n):
            raise IndexError(f"node index {i} out of range [0, {self.n})")

    def _axis_gaps(self, diff):
        if self.circumferences is None:
            return np.abs(diff)
        c = self.circumferences
        r = np.mod(np.abs(diff), c)
        return np.minimum(r, c - r)

    def distance(self, i: int, j: int) -> float:
        self._check_index(i)
        self._check_index(j)
        if self.kind == "matrix":
            return float(self.matrix[i, j])
        return self.distance_to_ambient(self.points[i], j)

    def distance_to_ambient(self, y, j: int) -> float:
        self._check_index(j)
        y = self._as_points(y)[0]
        return float(self.ambient_distances(y[None, :])[0, j])

    def _as_points(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.dim:
            raise SpecError(f"ambient point has dimension {y.shape[1]}, space has {self.dim}")
        return y

    def ambient_distances(self, ys) -> np.ndarray:
        """Distance matrix (len(ys), n) from arbitrary ambient points to every node."""
        ys = self._as_points(ys)
        if self.kind == "matrix":
            idx = np.rint(ys[:, 0]).astype(np.int64)
            out = np.full((len(ys), self.n), np.inf)
            ok = (np.abs(ys[:, 0] - idx) < 1e-9) & (idx >= 0) & (idx < self.n)
            out[ok] = self.matrix[idx[ok]]
            return out
        diff = ys[:, None, :] - self.points[None, :, :]
        gaps = self._axis_gaps(diff)
        if self.dim == 1:
            return gaps[..., 0]
        return np.sqrt(np.sum(gaps * gaps, axis=-1))

    def pairwise(self) -> np.ndarray:
        if self.kind == "matrix":
            return self.matrix.copy()
        return self.ambient_distances(self.points)

    def in_hull(self, ys, tol: float = 1e-9) -> np.ndarray:
        """True for ambient points inside the modelled region (always true on closed kinds)."""
        ys = self._as_points(ys)
        if self.kind == "interval":
            a, b = self.bounds
            return (ys[:, 0] >= a - tol) & (ys[:, 0] <= b + tol)
        return np.ones(len(ys), dtype=bool)

    def wrap(self, ys) -> np.ndarray:
        """Reduce coordinates to the fundamental domain (circle/torus), identity otherwise."""
        ys = np.asarray(ys, dtype=float)
        if self.circumferences is None:
            return ys
        return np.mod(ys, self.circumferences)

    def to_dict(self) -> dict:
        return dict(self.spec)


def _count(n, cap):
    if n is None:
        raise SpecError("node count 'n' is required")
    n = int(n)
    if n < 1:
        raise SpecError("node count must be >= 1")
    if cap is not None and n > cap:
        raise ResourceLimitError(
            f"{n} nodes exceeds the cap of {cap}; use a coarser grid or raise the cap")
    return n


def interval_grid(a: float, b: float, n: int, cap: Optional[int] = DEFAULT_MAX_NODES) -> MetricSpaceModel:
    n = _count(n, cap)
    a, b = float(a), float(b)
    if not b >= a:
        raise SpecError(f"interval bounds must satisfy a <= b, got [{a}, {b}]")
    if n > 1 and b == a:
        raise SpecError("degenerate interval with more than one node")
    pts = np.linspace(a, b, n) if n > 1 else np.array([a])
    h = (b - a) / (n - 1) if n > 1 else 0.0
    return MetricSpaceModel("interval", pts[:, None], h=h, bounds=(a, b),
                            spec={"kind": "interval", "bounds": [a, b], "n": n})


def circle_grid(c: float, n: int, cap: Optional[int] = DEFAULT_MAX_NODES) -> MetricSpaceModel:
    n = _count(n, cap)
    c = float(c)
    if not c > 0:
        raise SpecError(f"circumference must be positive, got {c}")
    pts = np.arange(n) * (c / n)
    return MetricSpaceModel("circle", pts[:, None], h=c / n, circumferences=np.array([c]),
                            spec={"kind": "circle", "circumference": c, "n": n})


def torus_grid(cs: Sequence[float], n, cap: Optional[int] = DEFAULT_MAX_NODES) -> MetricSpaceModel:
    cs = np.asarray(cs, dtype=float)
    if cs.ndim != 1 or len(cs) < 1:
        raise SpecError("torus needs a list of circumferences")
    if np.any(cs <= 0):
        raise SpecError(f"circumferences must be positive, got {cs.tolist()}")
    ns = [int(n)] * len(cs) if np.isscalar(n) else [int(k) for k in n]
    if len(ns) != len(cs) or min(ns) < 1:
        raise SpecError("torus node counts must be positive, one per axis")
    _count(int(np.prod(ns)), cap)
    axes = [np.arange(k) * (c / k) for k, c in zip(ns, cs)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    h = max(c / k for k, c in zip(ns, cs))
    return MetricSpaceModel("torus", pts, h=h, circumferences=cs,
                            spec={"kind": "torus", "circumferences": cs.tolist(), "n": n if np.isscalar(n) else ns})


def point_cloud(points, cap: Optional[int] = DEFAULT_MAX_NODES) -> MetricSpaceModel:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise SpecError("point cloud needs a non-empty list of coordinate tuples")
    _count(pts.shape[0], cap)
    if not np.all(np.isfinite(pts)):
        raise SpecError("point coordinates must be finite")
    return MetricSpaceModel("cloud", pts, spec={"kind": "cloud", "points": pts.tolist()})


def explicit_matrix(matrix, cap: Optional[int] = DEFAULT_MAX_NODES) -> MetricSpaceModel:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise SpecError("distance matrix must be square and non-empty")
    _count(m.shape[0], cap)
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise SpecError("distance matrix entries must be finite and non-negative")
    if not np.array_equal(m, m.T):
        raise SpecError("distance matrix must be symmetric")
    if np.any(np.diag(m) != 0):
        raise SpecError("distance matrix must have a zero diagonal")
    pts = np.arange(m.shape[0], dtype=float)[:, None]
    return MetricSpaceModel("matrix", pts, matrix=m, spec={"kind": "matrix", "matrix": m.tolist()})


def build_space(spec: dict, cap: Optional[int] = DEFAULT_MAX_NODES) -> MetricSpaceModel:
    """Build a space from its JSON description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("space spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "interval":
        bounds = spec.get("bounds")
        if bounds is None or len(bounds) != 2:
            raise SpecError("interval needs 'bounds': [a, b]")
        return interval_grid(bounds[0], bounds[1], spec.get("n"), cap)
    if kind == "circle":
        if "circumference" not in spec:
            raise SpecError("circle needs 'circumference'")
        return circle_grid(spec["circumference"], spec.get("n"), cap)
    if kind == "torus":
        if "circumferences" not in spec:
            raise SpecError("torus needs 'circumferences'")
        if spec.get("n") is None:
            raise SpecError("node count 'n' is required")
        return torus_grid(spec["circumferences"], spec["n"], cap)
    if kind == "cloud":
        if "points" not in spec:
            raise SpecError("cloud needs 'points'")
        return point_cloud(spec["points"], cap)
    if kind == "matrix":
        if "matrix" not in spec:
            raise SpecError("matrix kind needs 'matrix'")
        return explicit_matrix(spec["matrix"], cap)
    raise SpecError(f"unknown space kind {kind!r}; expected one of {', '.join(KINDS)}")
