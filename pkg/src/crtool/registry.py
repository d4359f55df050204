"""Named maps, vector fields and nonautonomous step families.

Every callable works on coordinate arrays of shape (n, dim).  Maps take
``(x, **params)``; fields take ``(t, x, **params)``; nonautonomous
families take ``(s, dt, x, **params)`` and return the position at time
``s + dt`` of the point sitting at ``x`` at time ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from .errors import SpecError


@dataclass(frozen=True)
class Param:
    default: object
    doc: str
    check: Callable = lambda v: True
    rule: str = ""


@dataclass(frozen=True)
class Entry:
    name: str
    func: Callable
    doc: str
    params: Dict[str, Param] = field(default_factory=dict)
    dim: int | None = 1

    def resolve(self, given: dict | None) -> dict:
        given = dict(given or {})
        unknown = sorted(set(given) - set(self.params))
        if unknown:
            raise SpecError(f"{self.name}: unknown parameter(s) {', '.join(unknown)}")
        out = {}
        for key, par in self.params.items():
            val = given.get(key, par.default)
            if val is None:
                raise SpecError(f"{self.name}: parameter {key!r} is required")
            if not par.check(val):
                raise SpecError(f"{self.name}: parameter {key}={val!r} outside range ({par.rule})")
            out[key] = val
        return out

    def describe(self) -> str:
        ps = ", ".join(
            f"{k}={p.default!r}: {p.doc}" + (f" [{p.rule}]" if p.rule else "")
            for k, p in self.params.items())
        return f"{self.name:<24s} {self.doc}" + (f" ({ps})" if ps else "")


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v)


def _pos(v):
    return _num(v) and v > 0


def _posint(v):
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


# closed-form user expressions ----------------------------------------------

_SYMBOLS = ("x", "y", "z", "w")


def _lambdify(expr, dim, with_time=False):
    import sympy

    exprs = expr if isinstance(expr, (list, tuple)) else [expr]
    if len(exprs) != dim:
        raise SpecError(f"expression needs {dim} component(s), got {len(exprs)}")
    names = list(_SYMBOLS[:dim]) + (["t"] if with_time else [])
    syms = sympy.symbols(names)
    local = {n: s for n, s in zip(names, syms)}
    try:
        parsed = [sympy.sympify(e, locals=local) for e in exprs]
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise SpecError(f"cannot parse expression {expr!r}: {exc}") from None
    extra = set().union(*(p.free_symbols for p in parsed)) - set(syms)
    if extra:
        raise SpecError(f"expression uses unknown symbols {sorted(map(str, extra))}")
    fns = [sympy.lambdify(syms, p, "numpy") for p in parsed]

    def call(args):
        cols = [np.broadcast_to(np.asarray(f(*args), dtype=float), args[0].shape) for f in fns]
        return np.stack(cols, axis=1)
    return call


def expr_map(x, expr="x"):
    fn = _lambdify(expr, x.shape[1])
    return fn([x[:, k] for k in range(x.shape[1])])


def expr_field(t, x, expr="0"):
    fn = _lambdify(expr, x.shape[1], with_time=True)
    return fn([x[:, k] for k in range(x.shape[1])] + [np.full(len(x), float(t))])


# maps -------------------------------------------------------------------------

def f_R(x):
    # circle of circumference 2: squaring on [0,1], identity on [1,2]
    u = np.mod(x, 2.0)
    return np.where(u <= 1.0, u * u, u)


def g_half(x):
    return x / 2.0


def f_rep(x):
    return np.where(x <= 0, x, 2.0 * x)


def f_att(x):
    return np.where(x <= 0, x, x / 2.0)


def identity(x):
    return np.array(x, dtype=float, copy=True)


def translation(x, R=1.0):
    return x + R


def tent(x, mu=2.0):
    return mu * np.minimum(x, 1.0 - x)


def logistic(x, mu=4.0):
    return mu * x * (1.0 - x)


def time_one_of(x, field="line_attract", params=None, t=1.0, integrator_step=0.01):
    from .systems import rk4
    entry = lookup(FIELDS, field)
    kw = entry.resolve(params)
    return rk4(lambda s, y: entry.func(s, y, **kw), x, 0.0, float(t), float(integrator_step))


def cos_gradient_time_one(x, integrator_step=0.001):
    # negative gradient of H = cos x is sin x
    from .systems import rk4
    return rk4(lambda s, y: np.sin(y), x, 0.0, 1.0, float(integrator_step))


# fields -----------------------------------------------------------------------

def line_attract(t, x):
    return -x


def line_repel(t, x):
    return np.array(x, dtype=float, copy=True)


def v_rep(t, x):
    return np.where(x <= 0, 0.0, x)


def v_att(t, x):
    return np.where(x <= 0, 0.0, -x)


def circle_stagnation(t, x, mu=2.0, k=1):
    # X = -h' with h(x) = x - mu sin(kx) on R/2piZ
    return mu * k * np.cos(k * x) - 1.0


def wildcos(t, x):
    # X = -h' with h(x) = x^2 cos(1/x), h(0) = 0
    out = np.zeros_like(x, dtype=float)
    nz = x != 0
    u = x[nz]
    out[nz] = -(2.0 * u * np.cos(1.0 / u) + np.sin(1.0 / u))
    return out


def _psi2(y):
    u = np.mod(y, 1.0)
    on = ((u > 0.25) & (u < 0.5)) | (u > 0.75)
    return np.where(on, np.sin(4.0 * np.pi * u) ** 2, 0.0)


def torus_psi2(t, x):
    out = np.empty_like(x, dtype=float)
    out[:, 0] = 1.0
    out[:, 1] = _psi2(x[:, 1])
    return out


def circle_psi_delta(t, x, delta=0.1, speed=0.0, ramp=0.2):
    # on R/Z: zero on [0, delta], linear ramps of width `ramp` at both ends of
    # (delta, 1), constant `speed` in between; speed 0 means speed = delta
    s = speed or delta
    u = np.mod(x, 1.0)
    inner = np.clip(np.minimum(u - delta, 1.0 - u) / ramp, 0.0, 1.0)
    return np.where(u > delta, s * inner, 0.0)


def constant_field(t, x, speed=1.0):
    return np.full_like(x, float(speed), dtype=float)


# nonautonomous step families ---------------------------------------------------

def na_autonomous_map(s, dt, x, map="g_half", params=None):
    k = int(round(dt))
    if abs(dt - k) > 1e-9:
        raise SpecError("autonomous_map needs integer time increments")
    entry = lookup(MAPS, map)
    kw = entry.resolve(params)
    y = np.array(x, dtype=float)
    for _ in range(k):
        y = entry.func(y, **kw)
    return y


def na_linear_decay(s, dt, x, rate=1.0):
    return x * np.exp(-rate * dt)


def na_identity(s, dt, x):
    return np.array(x, dtype=float, copy=True)


def na_forced_decay(s, dt, x, a=1.0, omega=1.0, integrator_step=0.01):
    # dx/dt = -x + a cos(omega t)
    from .systems import rk4
    return rk4(lambda t, y: -y + a * np.cos(omega * t), x, float(s), float(dt), float(integrator_step))


_P_R = Param(1.0, "shift", _num, "finite real")
_P_MU = Param(2.0, "amplitude", lambda v: _num(v) and v > 1, "mu > 1")
_P_K = Param(1, "wave number", _posint, "integer >= 1")

MAPS: Dict[str, Entry] = {e.name: e for e in [
    Entry("f_R", f_R, "circle R/2Z: x^2 on [0,1], identity on [1,2]"),
    Entry("g_half", g_half, "contraction x/2", dim=None),
    Entry("f_rep", f_rep, "x for x<=0, 2x for x>0"),
    Entry("f_att", f_att, "x for x<=0, x/2 for x>0"),
    Entry("identity", identity, "identity map", dim=None),
    Entry("translation", translation, "x + R", {"R": _P_R}, dim=None),
    Entry("tent", tent, "tent map mu*min(x,1-x) on [0,1]",
          {"mu": Param(2.0, "height", lambda v: _num(v) and 0 <= v <= 2, "0 <= mu <= 2")}),
    Entry("logistic", logistic, "logistic map mu*x*(1-x) on [0,1]",
          {"mu": Param(4.0, "growth", lambda v: _num(v) and 0 <= v <= 4, "0 <= mu <= 4")}),
    Entry("time_one_of", time_one_of, "time-t map of a registered field (RK4)",
          {"field": Param("line_attract", "field name", lambda v: v in FIELDS, "registered field"),
           "params": Param({}, "field parameters", lambda v: isinstance(v, dict), "object"),
           "t": Param(1.0, "flow time", _pos, "t > 0"),
           "integrator_step": Param(0.01, "RK4 step", _pos, "> 0")}, dim=None),
    Entry("cos_gradient_time_one", cos_gradient_time_one, "time-one map of dx/dt = sin x (gradient of cos)",
          {"integrator_step": Param(0.001, "RK4 step", _pos, "> 0")}),
    Entry("expr", expr_map, "user closed form in x (y, z, w for further axes)",
          {"expr": Param(None, "sympy expression or list per axis",
                         lambda v: isinstance(v, (str, list)), "string or list")}, dim=None),
]}

FIELDS: Dict[str, Entry] = {e.name: e for e in [
    Entry("line_attract", line_attract, "Z = -x"),
    Entry("line_repel", line_repel, "Y = x"),
    Entry("v_rep", v_rep, "0 for x<=0, x for x>0"),
    Entry("v_att", v_att, "0 for x<=0, -x for x>0"),
    Entry("circle_stagnation", circle_stagnation, "mu k cos(kx) - 1 on R/2piZ",
          {"mu": _P_MU, "k": _P_K}),
    Entry("wildcos", wildcos, "negative gradient of x^2 cos(1/x)"),
    Entry("torus_psi2", torus_psi2, "(1, psi2(y)) on R^2/Z^2, psi2 = sin^2(4 pi y) off [0,1/4]u[1/2,3/4]", dim=2),
    Entry("circle_psi_delta", circle_psi_delta, "psi d/dx on R/Z with zero set [0, delta]",
          {"delta": Param(0.1, "length of the singular arc", lambda v: _num(v) and 0 < v < 0.5, "0 < delta < 1/2"),
           "speed": Param(0.0, "plateau speed, 0 means equal to delta", lambda v: _num(v) and v >= 0, ">= 0"),
           "ramp": Param(0.2, "ramp width", lambda v: _num(v) and 0 < v <= 0.4, "0 < ramp <= 0.4")}),
    Entry("translation", constant_field, "constant field", {"speed": Param(1.0, "speed", _num, "finite real")}, dim=None),
    Entry("expr", expr_field, "user closed form in x (y, z, w) and t",
          {"expr": Param(None, "sympy expression or list per axis",
                         lambda v: isinstance(v, (str, list)), "string or list")}, dim=None),
]}

FAMILIES: Dict[str, Entry] = {e.name: e for e in [
    Entry("autonomous_map", na_autonomous_map, "time-independent iteration of a registered map",
          {"map": Param("g_half", "map name", lambda v: v in MAPS, "registered map"),
           "params": Param({}, "map parameters", lambda v: isinstance(v, dict), "object")}, dim=None),
    Entry("linear_decay", na_linear_decay, "x exp(-rate dt)", {"rate": Param(1.0, "decay rate", _num, "finite real")}, dim=None),
    Entry("identity", na_identity, "no motion", dim=None),
    Entry("forced_decay", na_forced_decay, "dx/dt = -x + a cos(omega t)",
          {"a": Param(1.0, "forcing amplitude", _num, "finite real"),
           "omega": Param(1.0, "forcing frequency", _num, "finite real"),
           "integrator_step": Param(0.01, "RK4 step", _pos, "> 0")}),
]}


def lookup(table: Dict[str, Entry], name: str) -> Entry:
    try:
        return table[name]
    except KeyError:
        raise SpecError(f"unknown name {name!r}; registered: {', '.join(sorted(table))}") from None
