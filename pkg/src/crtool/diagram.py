"""Recurrence diagrams, parameter sweeps and their text exports."""
from __future__ import annotations

import copy
import io
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .chaincost import compute_cost_matrix
from .errors import CRError, SpecError
from .recurrence import (ExtendedLevel, PotentialProfile, circulation_cost, neg, pos,
                         potential_profile)
from .systems import build_system

DEFAULT_MAX_LEVELS = 256


@dataclass(frozen=True, eq=False)
class Diagram:
    level_grid: List[ExtendedLevel]
    membership: np.ndarray          # (levels, nodes) bool
    coords: np.ndarray
    profile: PotentialProfile
    space: object = None

    @property
    def n(self) -> int:
        return self.membership.shape[1]


def auto_levels(profile: PotentialProfile, max_levels: Optional[int] = DEFAULT_MAX_LEVELS) -> List[ExtendedLevel]:
    """Levels where some membership changes, padded at both ends; thinned evenly past max_levels."""
    t = profile.tau_pos[np.isfinite(profile.tau_pos) & ~profile.negative]
    d = profile.defect[profile.negative & np.isfinite(profile.defect)]
    levels = {pos(0.0), neg(0.0)}
    levels.update(pos(float(v)) for v in np.unique(np.maximum(t, 0.0)))
    levels.update(neg(float(v)) for v in np.unique(d))
    if np.any(profile.negative & np.isinf(profile.defect)):
        levels.add(neg(math.inf))
    finite_tau = profile.tau_pos[np.isfinite(profile.tau_pos)]
    if len(finite_tau):
        levels.add(pos(float(max(finite_tau.max(), 0.0))))
    if len(d):
        levels.add(neg(float(d.max())))
    grid = sorted(levels)
    if max_levels is not None and len(grid) > max_levels:
        keep = np.unique(np.round(np.linspace(0, len(grid) - 1, max_levels)).astype(int))
        grid = [grid[k] for k in keep]
    return grid


def build_diagram(profile: PotentialProfile, level_grid="auto", coords=None, space=None,
                  max_levels: Optional[int] = DEFAULT_MAX_LEVELS) -> Diagram:
    if isinstance(level_grid, str) and level_grid == "auto":
        grid = auto_levels(profile, max_levels)
    else:
        grid = sorted(ExtendedLevel.parse(l) for l in level_grid)
    if not grid:
        raise SpecError("empty level grid")
    member = np.stack([profile.members(l) for l in grid])
    if coords is None and profile.costs is not None and profile.costs.system is not None:
        coords = profile.costs.system.coords()
        space = profile.costs.system.space if space is None else space
    if coords is None:
        coords = np.arange(profile.n, dtype=float)[:, None]
    return Diagram(grid, member, np.asarray(coords, dtype=float), profile, space)


# formatting helpers ----------------------------------------------------------------

def _num(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _jnum(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == int(v) and abs(v) < 1e15:
        return int(v)
    return v


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _coord_cols(coords):
    return [f"x{k}" for k in range(coords.shape[1])]


def _profile_coords(profile: PotentialProfile):
    if profile.costs is not None and profile.costs.system is not None:
        return profile.costs.system.coords()
    return np.arange(profile.n, dtype=float)[:, None]


def export_table(obj, fmt: str = "csv") -> str:
    """CSV or JSON for a PotentialProfile or a Diagram; deterministic bytes."""
    if fmt not in ("csv", "json"):
        raise SpecError(f"unknown table format {fmt!r}")
    if isinstance(obj, PotentialProfile):
        return _profile_table(obj, fmt)
    if isinstance(obj, Diagram):
        return _diagram_table(obj, fmt)
    if isinstance(obj, SweepResult):
        return _sweep_table(obj, fmt)
    raise SpecError(f"cannot export {type(obj).__name__}")


def _profile_table(pr: PotentialProfile, fmt):
    coords = _profile_coords(pr)
    tau = pr.tau
    if fmt == "json":
        return _dumps({
            "node_index": list(range(pr.n)),
            "coords": [[_jnum(c) for c in row] for row in coords],
            "tau_pos": [_jnum(v) for v in pr.tau_pos],
            "defect": [_jnum(v) for v in pr.defect],
            "tau_branch": [t.branch for t in tau],
            "tau_magnitude": [_jnum(t.magnitude) for t in tau],
            "theta_rec": _jnum(pr.theta_rec), "eta_def": _jnum(pr.eta_def),
            "eta": _jnum(pr.eta), "eta_grid": _jnum(pr.eta_grid),
        })
    buf = io.StringIO()
    buf.write(",".join(["node_index"] + _coord_cols(coords) + ["tau_pos", "defect", "tau_branch", "tau_magnitude"]) + "\n")
    for i in range(pr.n):
        row = [str(i)] + [_num(c) for c in coords[i]] + [_num(pr.tau_pos[i]), _num(pr.defect[i]),
                                                          tau[i].branch, _num(tau[i].magnitude)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _diagram_table(dg: Diagram, fmt):
    if fmt == "json":
        return _dumps({
            "levels": [{"branch": l.branch, "magnitude": _jnum(l.magnitude)} for l in dg.level_grid],
            "coords": [[_jnum(c) for c in row] for row in dg.coords],
            "membership": [[int(b) for b in row] for row in dg.membership],
        })
    buf = io.StringIO()
    buf.write(",".join(["level_branch", "level_magnitude", "node"] + _coord_cols(dg.coords) + ["member"]) + "\n")
    cstr = [",".join(_num(c) for c in row) for row in dg.coords]
    for l, row in zip(dg.level_grid, dg.membership):
        head = f"{l.branch},{_num(l.magnitude)},"
        for i in range(dg.n):
            buf.write(f"{head}{i},{cstr[i]},{int(row[i])}\n")
    return buf.getvalue()


# SVG ---------------------------------------------------------------------------------

def render_svg(dg: Diagram, x_range=None, y_range=None, width: int = 640, height: int = 400,
               precision: int = 6) -> str:
    """State coordinate on x, embedded level on y; members filled, NEG(inf) hatched at the bottom."""
    sp = dg.space
    if dg.coords.shape[1] != 1 or (sp is not None and not sp.is_1d):
        raise SpecError("SVG diagrams need a one-dimensional state space; use export_table instead")
    f = lambda v: f"{float(v):.{precision}g}"
    xs = dg.coords[:, 0]
    if x_range is None:
        if sp is not None and sp.kind == "circle":
            x_range = (0.0, float(sp.circumferences[0]))
        elif len(xs):
            x_range = (float(xs.min()), float(xs.max()))
        else:
            x_range = (0.0, 1.0)
    if x_range[1] <= x_range[0]:
        x_range = (x_range[0] - 0.5, x_range[0] + 0.5)
    emb = np.array([l.embed for l in dg.level_grid])
    fin = emb[np.isfinite(emb)]
    if y_range is None:
        lo = float(min(fin.min(), 0.0)) if len(fin) else -1.0
        hi = float(max(fin.max(), 0.0)) if len(fin) else 1.0
        pad = 0.08 * (hi - lo) if hi > lo else 0.5
        y_range = (lo - pad, hi + pad)
    ml, mr, mt, mb = 56, 16, 16, 40
    pw, ph = width - ml - mr, height - mt - mb
    (x0, x1), (y0, y1) = x_range, y_range
    X = lambda v: ml + (v - x0) / (x1 - x0) * pw
    Y = lambda v: mt + (y1 - min(max(v, y0), y1)) / (y1 - y0) * ph

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
           'patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="#333" stroke-width="2"/>'
           '</pattern></defs>',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']

    # per node: lowest grid level with membership
    if dg.n and len(dg.level_grid):
        first = np.where(dg.membership.any(axis=0), dg.membership.argmax(axis=0), -1)
        order = np.argsort(xs, kind="stable")
        sx = xs[order]
        gaps = np.diff(sx)
        half = np.empty(len(sx))
        step = float(np.median(gaps)) if len(gaps) else (x1 - x0)
        half[:] = step / 2
        runs = []
        for idx in order:
            k = first[idx]
            if k < 0:
                continue
            bottom = emb[k]
            cx = xs[idx]
            l, r = cx - step / 2, cx + step / 2
            if runs and runs[-1][2] == bottom and abs(runs[-1][1] - l) < 1e-9 * max(1.0, abs(l)):
                runs[-1][1] = r
            else:
                runs.append([l, r, bottom])
        for l, r, bottom in runs:
            l, r = max(l, x0), min(r, x1)
            if r <= l:
                continue
            yb = Y(bottom) if math.isfinite(bottom) else mt + ph
            out.append(f'<rect x="{f(X(l))}" y="{f(mt)}" width="{f(X(r) - X(l))}" height="{f(yb - mt)}" '
                       f'fill="#4a7ebb" stroke="none"/>')
            if bottom == -math.inf:
                out.append(f'<rect x="{f(X(l))}" y="{f(mt + ph - 8)}" width="{f(X(r) - X(l))}" height="8" '
                           f'fill="url(#hatch)" stroke="none"/>')
    # axes
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{ml}" y1="{f(Y(0))}" x2="{ml + pw}" y2="{f(Y(0))}" stroke="#999" stroke-dasharray="4 3"/>')
    for t in np.linspace(x0, x1, 5):
        out.append(f'<text x="{f(X(t))}" y="{height - mb + 16}" font-size="11" text-anchor="middle">{f(t)}</text>')
    for t in np.linspace(y0, y1, 5):
        out.append(f'<text x="{ml - 4}" y="{f(Y(t) + 4)}" font-size="11" text-anchor="end">{f(t)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 6}" font-size="12" text-anchor="middle">state</text>')
    out.append(f'<text x="14" y="{mt + ph / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {f(mt + ph / 2)})">level</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# sweeps ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepResult:
    parameter: str
    values: List[float]
    profiles: List[PotentialProfile]
    diagrams: List[Diagram]
    circulation: List[float]


def parameter_sweep(family_spec: dict, p, level_grid="auto", theta_rec=None, eta_def=None,
                    cap: Optional[int] = None) -> SweepResult:
    """family_spec: {"system": {...}, "space": {...}, "parameter": name, "values": [...]}."""
    try:
        base, space_spec = family_spec["system"], family_spec.get("space")
        name, values = family_spec["parameter"], list(family_spec["values"])
    except (KeyError, TypeError):
        raise SpecError("sweep spec needs 'system', 'parameter' and 'values'") from None
    if not values:
        raise SpecError("sweep needs at least one parameter value")
    profiles, diagrams, circ = [], [], []
    for mu in values:
        spec = copy.deepcopy(base)
        spec.setdefault("params", {})[name] = mu
        try:
            sys_ = build_system(spec, space_spec, cap)
        except CRError as exc:
            raise type(exc)(f"sweep member {name}={mu!r} failed: {exc}") from None
        pr = potential_profile(compute_cost_matrix(sys_, p), theta_rec, eta_def)
        profiles.append(pr)
        diagrams.append(build_diagram(pr, level_grid))
        circ.append(circulation_cost(pr))
    return SweepResult(name, values, profiles, diagrams, circ)


def _sweep_table(sw: SweepResult, fmt):
    if fmt == "json":
        return _dumps({
            "parameter": sw.parameter,
            "members": [{"value": _jnum(mu), "circulation_cost": _jnum(c),
                         "levels": [{"branch": l.branch, "magnitude": _jnum(l.magnitude)} for l in dg.level_grid],
                         "membership": [[int(b) for b in row] for row in dg.membership]}
                        for mu, c, dg in zip(sw.values, sw.circulation, sw.diagrams)],
        })
    buf = io.StringIO()
    ncoord = sw.diagrams[0].coords.shape[1]
    buf.write(",".join(["mu", "level_branch", "level_magnitude", "node"] + [f"x{k}" for k in range(ncoord)] + ["member"]) + "\n")
    for mu, dg in zip(sw.values, sw.diagrams):
        cstr = [",".join(_num(c) for c in row) for row in dg.coords]
        for l, row in zip(dg.level_grid, dg.membership):
            head = f"{_num(mu)},{l.branch},{_num(l.magnitude)},"
            for i in range(dg.n):
                buf.write(f"{head}{i},{cstr[i]},{int(row[i])}\n")
    return buf.getvalue()
