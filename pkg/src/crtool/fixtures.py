"""Builtin fixtures: the small hand-checkable systems and the worked examples.

Each factory takes an optional size argument so tests can run coarse
versions quickly.
"""
from __future__ import annotations

import math

import numpy as np

from . import spaces, systems


def S3(n=None):
    """Line nodes 0, 1, 2 with 0 -> 1 -> 2 -> 2."""
    sp = spaces.interval_grid(0.0, 2.0, 3)
    return systems.SystemModel(sp, sp.points[[1, 2, 2]][:, None, :], "map", "S3",
                               escaping=np.zeros(3, dtype=bool))


def C2(n=None):
    """Two nodes on the line swapped by the map."""
    return systems.build_permutation_system(spaces.interval_grid(0.0, 1.0, 2), [1, 0])


def f_R(n=2000):
    return systems.build_map_system(spaces.circle_grid(2.0, n), "f_R")


def g_half(n=401):
    return systems.build_map_system(spaces.interval_grid(-2.0, 2.0, n), "g_half")


def f_rep(n=1201):
    return systems.build_map_system(spaces.interval_grid(-3.0, 3.0, n), "f_rep")


def f_att(n=1201):
    return systems.build_map_system(spaces.interval_grid(-3.0, 3.0, n), "f_att")


def c_ex_001(n=2000, delta=0.1):
    """Time-one map of psi d/dx on R/Z with psi vanishing exactly on [0, delta]."""
    return systems.build_map_system(
        spaces.circle_grid(1.0, n), "time_one_of",
        {"field": "circle_psi_delta", "params": {"delta": delta}, "t": 1.0, "integrator_step": 0.01})


def c_ex_001_flow(n=400, delta=0.1, T=1.0, m=2):
    return systems.build_flow_system(spaces.circle_grid(1.0, n), "circle_psi_delta",
                                     {"delta": delta}, T=T, m=m, integrator_step=0.01)


def stagnation(n=1000, mu=2.0, k=1, T=0.05, m=4):
    return systems.build_flow_system(spaces.circle_grid(2 * math.pi, n), "circle_stagnation",
                                     {"mu": mu, "k": k}, T=T, m=m, integrator_step=T / 10)


def translation_flow(n=201, T=1.0, m=3):
    return systems.build_flow_system(spaces.interval_grid(0.0, 10.0, n), "translation",
                                     {"speed": 1.0}, T=T, m=m, integrator_step=T)


def line_attract(n=201, T=math.log(2), m=1):
    return systems.build_flow_system(spaces.interval_grid(-2.0, 2.0, n), "line_attract", T=T, m=m,
                                     integrator_step=T / 100)


def wildcos(n=401, T=0.1, m=2):
    return systems.build_flow_system(spaces.interval_grid(-1.5, 1.5, n), "wildcos", T=T, m=m,
                                     integrator_step=T / 50)


def torus_psi2(n=16, T=0.25, m=2):
    return systems.build_flow_system(spaces.torus_grid([1.0, 1.0], n), "torus_psi2", T=T, m=m,
                                     integrator_step=T / 10)


def cos_gradient(n=200):
    return systems.build_map_system(spaces.circle_grid(2 * math.pi, n), "cos_gradient_time_one",
                                    {"integrator_step": 0.01})


def counterexample_A(n=None, eps=0.5, N=10):
    return systems.build_counterexample_A(eps, N)


def non_increasing(n=None, N=20):
    return systems.example_non_increasing(N)


def decay_layers(n=21, layers=4):
    return systems.build_nonautonomous_system(spaces.interval_grid(0.0, 1.0, n), list(range(layers)),
                                              "linear_decay", {"rate": 1.0}, max_layer_skip=2)


FIXTURES = {
    "S3": S3, "C2": C2, "f_R": f_R, "g_half": g_half, "f_rep": f_rep, "f_att": f_att,
    "c_ex_001": c_ex_001, "c_ex_001_flow": c_ex_001_flow, "stagnation": stagnation,
    "translation_flow": translation_flow, "line_attract": line_attract, "wildcos": wildcos,
    "torus_psi2": torus_psi2, "cos_gradient": cos_gradient, "counterexample_A": counterexample_A,
    "non_increasing": non_increasing, "decay_layers": decay_layers,
}

# coarse sizes for exhaustive property sweeps
SMALL = {
    "S3": None, "C2": None, "f_R": 120, "g_half": 41, "f_rep": 61, "f_att": 61, "c_ex_001": 100,
    "c_ex_001_flow": 80, "stagnation": 100, "translation_flow": 41, "line_attract": 41,
    "wildcos": 81, "torus_psi2": 8, "cos_gradient": 60, "counterexample_A": None,
    "non_increasing": None, "decay_layers": 11,
}


def small(name):
    return FIXTURES[name](SMALL[name]) if SMALL[name] is not None else FIXTURES[name]()
