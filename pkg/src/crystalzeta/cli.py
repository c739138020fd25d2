"""Command-line frontend.

Subcommands: ``preset list``, ``preset show``, ``lattice info``,
``lattice check``, ``zeta eval``, ``dist table|cf|levy``,
``walk simulate|cf``, ``verify cf``.  Tables are CSV by default
(``--format json`` mirrors them); ``--figure PATH`` additionally renders
a matplotlib figure next to the delimited output.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
The seed flag defaults to the fixed constant 0 so that any command run
twice with the same flags produces byte-identical output.  Configuration
comes from explicit flags and files only; environment variables are
never consulted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import plotting, presets
from .distributions import (
    characteristic_function_grid,
    shintani_distribution,
    compound_poisson_law,
)
from .graphs import (
    LatticeError,
    PeriodicRealization,
    betti,
    check_nondegenerate,
    is_maximal_abelian,
    lattice_to_config,
    load_lattice,
)
from .verify import compare_cf
from .walks import simulate, simulate_endpoints, walk_cf
from .zeta import (
    ConvergenceError,
    FiniteEulerSpec,
    FiniteWeights,
    PoissonWeights,
    PoleError,
    PolynomialEulerSpec,
    ShintaniZetaSpec,
    TruncationPolicy,
    finite_euler_eval,
    polynomial_euler_eval,
    primes_up_to,
    shintani_eval,
)

DEFAULT_SEED = 0


class CliError(Exception):
    """Configuration or usage problem; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Lattice selection shared by commands: exactly one source."""

    preset: str | None
    lattice_file: str | None

    def __post_init__(self):
        if (self.preset is None) == (self.lattice_file is None):
            raise CliError("choose exactly one of --preset or --lattice")

    def realization(self) -> PeriodicRealization:
        if self.preset is not None:
            try:
                return presets.get_preset(self.preset)
            except KeyError as exc:
                raise CliError(str(exc)) from None
        try:
            return load_lattice(self.lattice_file)
        except (OSError, json.JSONDecodeError, LatticeError) as exc:
            raise CliError(f"cannot load lattice config: {exc}") from None


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise CliError(f"expected comma-separated numbers, got {text!r}") from None


def _write_rows(rows: list[dict], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        text = buf.getvalue()
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _t_grid(dim: int, t_min: float, t_max: float, t_points: int) -> np.ndarray:
    """Product grid with about t_points nodes in total."""
    if t_points < 1:
        raise CliError("--t-points must be positive")
    if dim == 1:
        return np.linspace(t_min, t_max, t_points)[:, None]
    per_axis = max(2, round(t_points ** (1.0 / dim)))
    axes = [np.linspace(t_min, t_max, per_axis) for _ in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _flatten_t(ts: np.ndarray) -> list[dict]:
    return [{f"t{j}": float(t[j]) for j in range(ts.shape[1])} for t in ts]


# ---------------------------------------------------------------- preset


def cmd_preset_list(args) -> int:
    rows = [{"preset": name} for name in presets.preset_names()]
    _write_rows(rows, args.format, args.out)
    return 0


def cmd_preset_show(args) -> int:
    cfg = RunConfig(args.preset, None)
    text = json.dumps(lattice_to_config(cfg.realization()), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- lattice


def cmd_lattice_info(args) -> int:
    real = RunConfig(args.preset, args.lattice).realization()
    lat = real.lattice
    rows = [
        {
            "vertices": lat.base.num_vertices,
            "oriented_edges": lat.base.num_oriented_edges,
            "betti": betti(lat.base),
            "dim": lat.dim,
            "maximal_abelian": is_maximal_abelian(lat),
        }
    ]
    _write_rows(rows, args.format, args.out)
    return 0


def cmd_lattice_check(args) -> int:
    real = RunConfig(args.preset, args.lattice).realization()
    violations = check_nondegenerate(real, tol=args.tol)
    rows = [{"violation": v} for v in violations]
    if not violations:
        rows = [{"violation": "none"}]
    _write_rows(rows, args.format, args.out)
    return 1 if violations else 0


# ---------------------------------------------------------------- zeta


def _load_zeta_spec(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read spec file: {exc}") from None
    kind = cfg.get("kind")
    try:
        if kind == "finite_euler":
            return FiniteEulerSpec(
                dim=int(cfg["dim"]),
                coeffs=tuple(float(x) for x in cfg["coeffs"]),
                directions=tuple(tuple(float(x) for x in a) for a in cfg["directions"]),
            )
        if kind == "polynomial_euler":
            cutoff = int(cfg.get("prime_cutoff", 10_000))
            raw = cfg["coeffs"]
            if isinstance(raw, dict) and "all" in raw:
                val = float(raw["all"])
                table = {
                    (l, int(p)): val
                    for l in range(len(cfg["directions"]))
                    for p in primes_up_to(cutoff)
                }
            else:
                table = {(int(l), int(p)): float(a) for l, p, a in raw}
            return PolynomialEulerSpec.from_dict(
                int(cfg["dim"]),
                [tuple(float(x) for x in a) for a in cfg["directions"]],
                table,
                prime_cutoff=cutoff,
            )
        if kind == "shintani":
            w = cfg["weights"]
            if "finite" in w:
                weights = FiniteWeights.from_dict(
                    {tuple(int(i) for i in key): complex(val) for key, val in w["finite"]}
                )
            else:
                p = w["poisson"]
                weights = PoissonWeights(
                    rate=float(p["rate"]),
                    base=int(p["base"]),
                    sigma=tuple(float(x) for x in p["sigma"]),
                )
            return ShintaniZetaSpec(
                dim=int(cfg["dim"]),
                form_matrix=tuple(tuple(float(x) for x in row) for row in cfg["form_matrix"]),
                shifts=tuple(float(x) for x in cfg["shifts"]),
                directions=tuple(tuple(float(x) for x in a) for a in cfg["directions"]),
                weights=weights,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed spec file: {exc}") from None
    raise CliError(f"unknown spec kind {kind!r}; use finite_euler, polynomial_euler, or shintani")


def cmd_zeta_eval(args) -> int:
    spec = _load_zeta_spec(args.spec)
    sigma = np.array(_parse_floats(args.sigma))
    if sigma.shape != (spec.dim,):
        raise CliError(f"--sigma must have {spec.dim} components")
    ts = _t_grid(spec.dim, args.t_min, args.t_max, args.t_points)
    rows = []
    for t in ts:
        s = sigma + 1j * t
        if isinstance(spec, FiniteEulerSpec):
            value, tail = finite_euler_eval(spec, s), 0.0
        elif isinstance(spec, PolynomialEulerSpec):
            value, tail = polynomial_euler_eval(spec, s)
        else:
            value, tail = shintani_eval(spec, s, TruncationPolicy(args.max_terms))
        row = {}
        for j in range(spec.dim):
            row[f"s{j}_re"] = float(s[j].real)
            row[f"s{j}_im"] = float(s[j].imag)
        row.update(value_re=value.real, value_im=value.imag, tail_bound=tail)
        rows.append(row)
    _write_rows(rows, args.format, args.out)
    return 0


# ---------------------------------------------------------------- dist


def _preset_step_distribution(args):
    """Finite step law of a preset at a chosen base vertex."""
    name = args.preset
    sigma = _parse_floats(args.sigma) if args.sigma else None
    spec = presets.finite_walk(
        name,
        weights=_parse_floats(args.weights) if args.weights else None,
        weights_y=_parse_floats(args.weights_y) if args.weights_y else None,
        reach=args.range_n,
        sigma=sigma,
    )
    vertex = args.vertex or spec.start.vertex
    if vertex not in spec.kernels:
        raise CliError(f"preset {name!r} has no base vertex {vertex!r}")
    return spec.kernels[vertex].dist


def cmd_dist_table(args) -> int:
    if args.riemann_sigma is not None:
        if args.riemann_sigma <= 1:
            raise CliError("--riemann-sigma must exceed 1 for the series to converge")
        from .distributions import riemann_zeta_distribution

        dist = riemann_zeta_distribution(args.riemann_sigma, args.n_max)
    elif args.poisson_rate is not None:
        if args.preset != "line":
            raise CliError("--poisson-rate applies to the line preset only")
        sigma_val = _parse_floats(args.sigma)[0] if args.sigma else 2.0
        spec, sigma = presets.line_poisson_spec(args.poisson_rate, sigma_val)
        dist = shintani_distribution(spec, sigma)
    else:
        if args.preset is None:
            raise CliError("choose a --preset or --riemann-sigma")
        dist = _preset_step_distribution(args)
    rows = []
    for p, m in zip(dist.points, dist.masses):
        row = {f"x{j}": float(p[j]) for j in range(dist.dim)}
        row["mass"] = float(m)
        rows.append(row)
    _write_rows(rows, args.format, args.out)
    if args.figure:
        plotting.save_pmf_figure(dist, args.figure)
    return 0


def _dist_cf_object(args):
    if args.law == "euler":
        try:
            spec, sigma = presets.euler_product_spec(args.preset, args.ratio)
        except (KeyError, ValueError) as exc:
            raise CliError(str(exc)) from None
        return compound_poisson_law(spec, sigma)
    return _preset_step_distribution(args)


def cmd_dist_cf(args) -> int:
    if args.preset is None:
        raise CliError("--preset is required")
    obj = _dist_cf_object(args)
    dim = obj.dim
    ts = _t_grid(dim, args.t_min, args.t_max, args.t_points)
    values = characteristic_function_grid(obj, None, ts)
    rows = []
    for t, v in zip(ts, values):
        row = {f"t{j}": float(t[j]) for j in range(dim)}
        row.update(cf_re=v.real, cf_im=v.imag, cf_abs=abs(v))
        rows.append(row)
    _write_rows(rows, args.format, args.out)
    if args.figure:
        plotting.save_cf_values_figure(ts, values, args.figure)
    return 0


def cmd_dist_levy(args) -> int:
    if args.preset is None:
        raise CliError("--preset is required")
    try:
        law = presets.euler_product_law(args.preset, args.ratio)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc)) from None
    rows = []
    for loc, w in zip(law.levy.locations, law.levy.weights):
        row = {f"x{j}": float(loc[j]) for j in range(law.dim)}
        row["weight"] = float(w)
        rows.append(row)
    _write_rows(rows, args.format, args.out)
    if args.figure:
        plotting.save_levy_figure(law.levy, args.figure)
    return 0


# ---------------------------------------------------------------- walk


def _walk_spec(args):
    try:
        if args.walk == "infinite":
            return presets.infinite_walk(args.preset, ratio=args.ratio)
        return presets.finite_walk(
            args.preset,
            weights=_parse_floats(args.weights) if args.weights else None,
            weights_y=_parse_floats(args.weights_y) if args.weights_y else None,
            reach=args.range_n,
        )
    except (KeyError, ValueError, LatticeError) as exc:
        raise CliError(str(exc)) from None


def cmd_walk_simulate(args) -> int:
    spec = _walk_spec(args)
    trajectories = simulate(spec, args.steps, args.paths, args.seed, workers=args.threads)
    rows = []
    d = spec.dim
    for tr in trajectories:
        for step, (pt, xyz) in enumerate(zip(tr.points, tr.realized)):
            row = {"path": tr.path_index, "step": step, "vertex": pt.vertex}
            for j in range(d):
                row[f"cell{j}"] = int(pt.cell[j])
            for j in range(d):
                row[f"x{j}"] = float(xyz[j])
            rows.append(row)
    _write_rows(rows, args.format, args.out)
    if args.figure:
        plotting.save_trajectory_figure(trajectories, args.figure)
    return 0


def _cf_comparison(spec, args):
    ts = _t_grid(spec.dim, args.t_min, args.t_max, args.t_points)
    try:
        analytic = lambda t: walk_cf(spec, args.steps, t)  # noqa: E731
        _ = analytic(ts[0])  # raise early when undefined
    except LatticeError as exc:
        raise CliError(str(exc)) from None
    endpoints = simulate_endpoints(spec, args.steps, args.paths, args.seed, workers=args.threads)
    return compare_cf(analytic, endpoints, ts)


def cmd_walk_cf(args) -> int:
    spec = _walk_spec(args)
    comp = _cf_comparison(spec, args)
    _write_rows(comp.rows(), args.format, args.out)
    if args.figure:
        plotting.save_cf_figure(comp, args.figure)
    return 0


def cmd_verify_cf(args) -> int:
    spec = _walk_spec(args)
    comp = _cf_comparison(spec, args)
    ok = comp.passes(args.threshold)
    header = f"{'t':>28} {'analytic':>22} {'empirical':>22} {'abs_dev':>12}"
    print(header)
    for row in comp.rows():
        t = ",".join(f"{x:.3f}" for x in row["t"])
        ana = f"{row['analytic_re']:+.5f}{row['analytic_im']:+.5f}i"
        emp = f"{row['empirical_re']:+.5f}{row['empirical_im']:+.5f}i"
        print(f"{t:>28} {ana:>22} {emp:>22} {row['abs_dev']:>12.6f}")
    print(
        f"max |analytic - empirical| = {comp.max_abs_dev:.6f} over {len(comp.grid)} points; "
        f"threshold {args.threshold}/sqrt({comp.n_samples}) = {comp.threshold(args.threshold):.6f}: "
        + ("PASS" if ok else "FAIL")
    )
    if args.figure:
        plotting.save_cf_figure(comp, args.figure)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def _add_lattice_source(p: argparse.ArgumentParser, lattice_file: bool = True) -> None:
    p.add_argument("--preset", help="built-in lattice name")
    if lattice_file:
        p.add_argument("--lattice", help="path to a lattice config (JSON)")


def _add_table_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output file (default stdout)")


def _add_grid_flags(p: argparse.ArgumentParser, points: int = 25) -> None:
    p.add_argument("--t-min", type=float, default=-math.pi)
    p.add_argument("--t-max", type=float, default=math.pi)
    p.add_argument("--t-points", type=int, default=points)


def _add_preset_law_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--vertex", help="base vertex for multi-vertex presets")
    p.add_argument("--weights", help="comma-separated step weights")
    p.add_argument("--weights-y", help="y-vertex weights (hexagonal)")
    p.add_argument("--range-n", type=int, default=1, help="triangular kernel reach N")
    p.add_argument("--sigma", help="comma-separated tilt vector")
    p.add_argument("--ratio", type=float, default=2.0 / 3.0, help="per-factor geometric ratio")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="crystalzeta",
        description="Lattices, zeta-generated laws, and random walks.",
    )
    groups = ap.add_subparsers(dest="group", required=True)

    g_preset = groups.add_parser("preset", help="built-in lattices").add_subparsers(
        dest="cmd", required=True
    )
    p = g_preset.add_parser("list", help="list preset names")
    _add_table_flags(p)
    p.set_defaults(func=cmd_preset_list)
    p = g_preset.add_parser("show", help="dump a preset as a lattice config")
    p.add_argument("--preset", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_preset_show)

    g_lat = groups.add_parser("lattice", help="inspect lattices").add_subparsers(
        dest="cmd", required=True
    )
    p = g_lat.add_parser("info", help="sizes, Betti number, maximality")
    _add_lattice_source(p)
    _add_table_flags(p)
    p.set_defaults(func=cmd_lattice_info)
    p = g_lat.add_parser("check", help="non-degeneracy check")
    _add_lattice_source(p)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_table_flags(p)
    p.set_defaults(func=cmd_lattice_check)

    g_zeta = groups.add_parser("zeta", help="evaluate zeta specs").add_subparsers(
        dest="cmd", required=True
    )
    p = g_zeta.add_parser("eval", help="evaluate a spec on a grid of arguments")
    p.add_argument("--spec", required=True, help="spec file (JSON)")
    p.add_argument("--sigma", required=True, help="real part, comma-separated")
    p.add_argument("--max-terms", type=int, default=200)
    _add_grid_flags(p)
    _add_table_flags(p)
    p.set_defaults(func=cmd_zeta_eval)

    g_dist = groups.add_parser("dist", help="distributions and transforms").add_subparsers(
        dest="cmd", required=True
    )
    p = g_dist.add_parser("table", help="probability mass table")
    p.add_argument("--preset")
    _add_preset_law_flags(p)
    p.add_argument("--poisson-rate", type=float, help="Poisson law on the line preset")
    p.add_argument("--riemann-sigma", type=float, help="one-dimensional Dirichlet-series law")
    p.add_argument("--n-max", type=int, default=10_000)
    p.add_argument("--figure", help="also render a figure to this path")
    _add_table_flags(p)
    p.set_defaults(func=cmd_dist_table)
    p = g_dist.add_parser("cf", help="characteristic function on a grid")
    p.add_argument("--preset")
    p.add_argument("--law", choices=["step", "euler"], default="step")
    _add_preset_law_flags(p)
    _add_grid_flags(p)
    p.add_argument("--figure")
    _add_table_flags(p)
    p.set_defaults(func=cmd_dist_cf)
    p = g_dist.add_parser("levy", help="Levy measure atoms of the product law")
    p.add_argument("--preset")
    p.add_argument("--ratio", type=float, default=2.0 / 3.0)
    p.add_argument("--figure")
    _add_table_flags(p)
    p.set_defaults(func=cmd_dist_levy)

    g_walk = groups.add_parser("walk", help="simulate walks").add_subparsers(
        dest="cmd", required=True
    )
    p = g_walk.add_parser("simulate", help="sample trajectories to CSV")
    p.add_argument("--preset", required=True)
    p.add_argument("--walk", choices=["finite", "infinite"], default="finite")
    _add_preset_law_flags(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=os.cpu_count())
    p.add_argument("--figure")
    _add_table_flags(p)
    p.set_defaults(func=cmd_walk_simulate)
    p = g_walk.add_parser("cf", help="analytic versus empirical endpoint transform")
    p.add_argument("--preset", required=True)
    p.add_argument("--walk", choices=["finite", "infinite"], default="finite")
    _add_preset_law_flags(p)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=os.cpu_count())
    _add_grid_flags(p)
    p.add_argument("--figure")
    _add_table_flags(p)
    p.set_defaults(func=cmd_walk_cf)

    g_verify = groups.add_parser("verify", help="statistical cross-checks").add_subparsers(
        dest="cmd", required=True
    )
    p = g_verify.add_parser("cf", help="threshold test of the endpoint transform")
    p.add_argument("--preset", required=True)
    p.add_argument("--walk", choices=["finite", "infinite"], default="finite")
    _add_preset_law_flags(p)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=os.cpu_count())
    p.add_argument("--threshold", type=float, default=4.0, help="pass bound c/sqrt(paths)")
    _add_grid_flags(p)
    p.add_argument("--figure")
    p.set_defaults(func=cmd_verify_cf)

    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LatticeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
