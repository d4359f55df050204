"""Coarse chain recurrence on finite discretizations of maps and flows."""
from .spaces import MetricSpaceModel, build_space
from .systems import (SystemModel, build_counterexample_A, build_flow_system, build_map_system,
                      build_nonautonomous_system, build_permutation_system, build_system,
                      example_non_increasing, one_step_cost)
from .chaincost import CostMatrix, brute_force_cost, compute_cost_matrix
from .recurrence import (ExtendedLevel, PotentialProfile, circulation_cost, components_at, cr_set,
                         critical_values, neg, nonautonomous_potential, pos, potential_profile)
from .morsegraph import (CollapseMap, MorseGraphLevel, collapse_map, edge_collapse, export_dot,
                         limit_set_morse_graph, morse_graph)
from .diagram import Diagram, build_diagram, export_table, parameter_sweep, render_svg
from . import fixtures

__version__ = "0.1.0"
