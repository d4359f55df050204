"""crtool command line.

Exit codes: 0 ok, 1 usage, 2 invalid config, 3 resource limit, 4 invariant
violation or internal failure.  Levels are signed tokens; pass them with
'=' when they start with '-' (``--levels=-0,+0,+0.1``).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from . import registry
from .chaincost import compute_cost_matrix, save_cost_matrix
from .config import JobConfig, parse_config, parse_levels, parse_p_token
from .diagram import build_diagram, export_table, parameter_sweep, render_svg
from .errors import CRError, InvariantViolation, SpecError
from .fixtures import FIXTURES
from .invariants import check_system
from .morsegraph import (collapse_map, compose_vertex_maps, export_dot, export_json,
                         limit_set_morse_graph, morse_graph)
from .recurrence import ExtendedLevel, circulation_cost, components_at, critical_values, potential_profile
from .systems import build_system


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _floats(s: str) -> List[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {s!r}") from None


class Job:
    """Lazily built pipeline for one config."""

    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        self._system = self._costs = self._profile = None

    @property
    def system(self):
        if self._system is None:
            self._system = build_system(self.cfg.system, self.cfg.space, self.cfg.max_nodes)
        return self._system

    @property
    def costs(self):
        if self._costs is None:
            self._costs = compute_cost_matrix(self.system, self.cfg.p, self.cfg.cap, self.cfg.max_nodes)
        return self._costs

    @property
    def profile(self):
        if self._profile is None:
            self._profile = potential_profile(self.costs, self.cfg.theta_rec, self.cfg.eta_def)
        return self._profile

    def levels(self, override):
        if override:
            return parse_levels(override)
        if self.cfg.levels != "auto":
            return list(self.cfg.levels)
        return None

    def outputs(self, *fmts):
        return [o for o in self.cfg.outputs if o.format in fmts]


def _load(args) -> Job:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read config {args.config}: {exc}") from None
    cfg = parse_config(text)
    if getattr(args, "p", None) is not None:
        cfg.p = parse_p_token(args.p)
    if getattr(args, "theta_rec", None) is not None:
        cfg.theta_rec = args.theta_rec
    if getattr(args, "eta_def", None) is not None:
        cfg.eta_def = args.eta_def
    if getattr(args, "max_nodes", None) is not None:
        cfg.max_nodes = args.max_nodes
    if getattr(args, "nu", None) is not None:
        cfg.nu = args.nu
    return Job(cfg)


def _format(path, default):
    ext = Path(path).suffix.lower().lstrip(".")
    return ext if ext in ("csv", "json", "svg", "dot", "rho") else default


# subcommands ----------------------------------------------------------------------------

def cmd_potential(args):
    job = _load(args)
    targets = [(p, _format(p, "csv")) for p in (args.out or [])]
    targets += [(o.path, o.format) for o in job.outputs("csv", "json", "rho")]
    if not targets:
        targets = [("-", "csv")]
    for path, fmt in targets:
        if fmt == "rho":
            save_cost_matrix(job.costs, path)
        else:
            _emit(export_table(job.profile, fmt), path)
    pr = job.profile
    print(f"nodes={pr.n} p={job.costs.p_label} theta_rec={pr.theta_rec:.6g} eta_grid={pr.eta_grid:.6g} "
          f"circulation_cost={circulation_cost(pr):.6g}", file=sys.stderr)
    return 0


def cmd_components(args):
    job = _load(args)
    levels = job.levels(args.levels) or [ExtendedLevel("POS", v) for v in critical_values(job.costs)]
    doc = {"p": job.costs.p_label, "levels": []}
    for l in levels:
        comps = components_at(job.costs, l, job.profile)
        doc["levels"].append({"level": l.token, "components": [c.tolist() for c in comps.components]})
    out = args.out or next((o.path for o in job.outputs("json")), None)
    _emit(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", out)
    return 0


def _graph(job, level, nu, variant, with_hyper=True):
    if variant == "nu":
        return morse_graph(job.costs, level, nu, with_hyper=with_hyper, profile=job.profile)
    comps = components_at(job.costs, level, job.profile)
    return limit_set_morse_graph(job.system, comps, variant, job.costs)


def cmd_morse(args):
    job = _load(args)
    if args.epsilon is None:
        lv = job.levels(None)
        if not lv or len(lv) != 1:
            raise UsageError("morse needs --epsilon (or exactly one level in the config)")
        level = lv[0]
    else:
        level = ExtendedLevel.parse(args.epsilon)
    g = _graph(job, level, job.cfg.nu, args.variant, not args.no_hyper)
    dots = ([args.dot] if args.dot else []) + [o.path for o in job.outputs("dot")]
    jsons = ([args.json] if args.json else []) + [o.path for o in job.outputs("json")]
    if not dots and not jsons:
        dots = ["-"]
    for path in dots:
        _emit(export_dot(g), path)
    for path in jsons:
        _emit(export_json(g), path)
    return 0


def cmd_collapse(args):
    job = _load(args)
    levels = job.levels(args.levels)
    if not levels or len(levels) < 2:
        raise UsageError("collapse needs at least two levels (--levels)")
    levels = sorted(set(levels))
    graphs = [_graph(job, l, job.cfg.nu, args.variant, False) for l in levels]
    steps = [collapse_map(a, b) for a, b in zip(graphs, graphs[1:])]
    cocycle = True
    for i in range(len(levels)):
        for j in range(i + 1, len(levels)):
            for k in range(j + 1, len(levels)):
                direct = collapse_map(graphs[i], graphs[k]).vertex_map
                if compose_vertex_maps(collapse_map(graphs[i], graphs[j]), collapse_map(graphs[j], graphs[k])) != direct:
                    cocycle = False
    report = {
        "p": job.costs.p_label, "nu": job.cfg.nu if args.variant == "nu" else None, "variant": args.variant,
        "levels": [l.token for l in levels], "vertices": [g.n_vertices for g in graphs],
        "edges": [len(g.edges) for g in graphs], "steps": [s.as_dict() for s in steps], "cocycle": cocycle,
        "all_well_defined": all(s.well_defined for s in steps),
        "all_edge_partial": all(s.edge_partial for s in steps),
    }
    out = args.out or next((o.path for o in job.outputs("json")), None)
    _emit(json.dumps(report, indent=1, sort_keys=True) + "\n", out)
    for s in steps:
        print(f"{s.source.token} -> {s.target.token}: well_defined={s.well_defined} "
              f"edge_partial={s.edge_partial} edge_surjective={s.edge_surjective}", file=sys.stderr)
    expected = args.variant != "G'"
    if expected and not (report["all_well_defined"] and report["all_edge_partial"] and cocycle):
        raise InvariantViolation("collapse ladder violates the partial-collapse property")
    return 0


def cmd_diagram(args):
    job = _load(args)
    grid = job.levels(args.levels) or "auto"
    dg = build_diagram(job.profile, grid, max_levels=job.cfg.max_levels)
    targets = []
    for flag, fmt in ((args.svg, "svg"), (args.csv, "csv"), (args.json, "json")):
        if flag:
            targets.append((flag, fmt))
    targets += [(o.path, o.format) for o in job.outputs("svg", "csv", "json")]
    if not targets:
        targets = [("-", "svg")]
    style = {"width": args.width, "height": args.height, "precision": args.precision}
    if args.x_range:
        style["x_range"] = tuple(_floats(args.x_range))
    if args.y_range:
        style["y_range"] = tuple(_floats(args.y_range))
    for path, fmt in targets:
        _emit(render_svg(dg, **style) if fmt == "svg" else export_table(dg, fmt), path)
    return 0


def cmd_sweep(args):
    job = _load(args)
    spec = dict(job.cfg.sweep or {})
    if args.parameter:
        spec["parameter"] = args.parameter
    if args.values:
        spec["values"] = _floats(args.values)
    if "parameter" not in spec or "values" not in spec:
        raise UsageError("sweep needs a parameter and values (config 'sweep' or --parameter/--values)")
    grid = job.levels(args.levels) or "auto"
    res = parameter_sweep({"system": job.cfg.system, "space": job.cfg.space, **spec}, job.cfg.p, grid,
                          job.cfg.theta_rec, job.cfg.eta_def, job.cfg.max_nodes)
    targets = [(p, _format(p, "csv")) for p in (args.out or [])]
    targets += [(o.path, o.format) for o in job.outputs("csv", "json")]
    if not targets:
        targets = [("-", "csv")]
    for path, fmt in targets:
        _emit(export_table(res, fmt), path)
    for mu, c in zip(res.values, res.circulation):
        print(f"{res.parameter}={mu:g} circulation_cost={c:.6g}", file=sys.stderr)
    return 0


def cmd_examples(args):
    lines = ["# maps (system kind 'map')"]
    lines += [e.describe() for e in registry.MAPS.values()]
    lines += ["", "# fields (system kind 'flow')"]
    lines += [e.describe() for e in registry.FIELDS.values()]
    lines += ["", "# step families (system kind 'nonautonomous')"]
    lines += [e.describe() for e in registry.FAMILIES.values()]
    lines += ["", "# builders (no space needed)",
              f"{'counterexample_A':<24s} two fixed columns plus a stepping arc (eps=0.5: positive real, N=10: integer >= 2)",
              f"{'example_non_increasing':<24s} alpha/omega planar example truncated at |n| <= N (N=20: integer >= 1)",
              f"{'permutation':<24s} node bijection on any space (forward: list, inverse: list, optional)",
              "", "# builtin fixtures (tests and verify)"]
    lines += [f"{name:<24s} {(fn.__doc__ or '').strip().splitlines()[0] if fn.__doc__ else ''}".rstrip()
              for name, fn in FIXTURES.items()]
    print("\n".join(lines))
    return 0


def cmd_verify(args):
    job = _load(args)
    ps = sorted({1.0, 2.0, math.inf, job.cfg.p})
    nus = sorted({0.0, job.cfg.nu})
    results = check_system(job.system, ps, nus=nus, theta_rec=job.cfg.theta_rec, eta_def=job.cfg.eta_def)
    for r in results:
        print(("PASS " if r.ok else "FAIL ") + r.name + (f" ({r.detail})" if r.detail else ""))
    bad = [r for r in results if not r.ok]
    if bad:
        raise InvariantViolation(f"{len(bad)} invariant check(s) failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="crtool", description="Coarse chain recurrence on finite models.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def job_parser(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="JSON job config")
        sp.add_argument("--p", help="override p: 1..64 or inf")
        sp.add_argument("--theta-rec", type=float, dest="theta_rec")
        sp.add_argument("--eta-def", type=float, dest="eta_def")
        sp.add_argument("--max-nodes", type=int, dest="max_nodes")
        return sp

    sp = job_parser("potential", "per-node potentials (CSV/JSON, or .rho cost dump)")
    sp.add_argument("--out", action="append", help="output path; format from extension")
    sp.set_defaults(func=cmd_potential)

    sp = job_parser("components", "component partition per level (JSON)")
    sp.add_argument("--levels", help="comma-separated signed levels; default: critical values")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_components)

    variants = ["nu", "G", "G'"]
    sp = job_parser("morse", "Morse graph at one level (DOT/JSON)")
    sp.add_argument("--epsilon", help="level token, e.g. +0.1 or -0")
    sp.add_argument("--nu", type=float)
    sp.add_argument("--variant", choices=variants, default="nu")
    sp.add_argument("--no-hyper", action="store_true")
    sp.add_argument("--dot")
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_morse)

    sp = job_parser("collapse", "collapse maps along a level ladder (JSON report)")
    sp.add_argument("--levels")
    sp.add_argument("--nu", type=float)
    sp.add_argument("--variant", choices=variants, default="nu")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_collapse)

    sp = job_parser("diagram", "recurrence diagram (SVG/CSV/JSON)")
    sp.add_argument("--levels")
    sp.add_argument("--svg")
    sp.add_argument("--csv")
    sp.add_argument("--json")
    sp.add_argument("--x-range", dest="x_range")
    sp.add_argument("--y-range", dest="y_range")
    sp.add_argument("--width", type=int, default=640)
    sp.add_argument("--height", type=int, default=400)
    sp.add_argument("--precision", type=int, default=6)
    sp.set_defaults(func=cmd_diagram)

    sp = job_parser("sweep", "one-parameter sweep (CSV/JSON)")
    sp.add_argument("--parameter")
    sp.add_argument("--values")
    sp.add_argument("--levels")
    sp.add_argument("--out", action="append")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("examples", help="list registered maps, fields, families and fixtures")
    sp.set_defaults(func=cmd_examples)

    sp = job_parser("verify", "run the invariant suite on the configured system")
    sp.add_argument("--nu", type=float)
    sp.set_defaults(func=cmd_verify)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("crtool: a subcommand is required (see --help)")
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except CRError as exc:
        print(f"crtool: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"crtool: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        print(f"crtool: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
