"""Command-line front end.

Subcommands build topologies, run the simulator, the exact solver, bound
evaluations and verification sweeps, and write deterministic CSV or JSON
artifacts. Exit codes: 0 ok, 2 usage or configuration error, 3 runtime
failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import exact as ex
from .sim import ESTIMATORS, SimConfig, simulate
from .topology import ConfigError, NodeSubset, TopologySpec, build_network

CSV_HEADER = "# gossip-age v1"

_CONFIG_TO_ARG = {
    "kind": ("topology", str),
    "d": ("dim", int),
    "side": ("side", int),
    "n": ("n", int),
    "lambda": ("lam", float),
    "lambda_e": ("lam_e", float),
    "seed": ("seed", int),
    "reps": ("reps", int),
    "horizon": ("horizon", float),
    "warmup": ("warmup", float),
    "estimator": ("estimator", str),
    "format": ("format", str),
    "out": ("out", str),
}

SIMULATE_COLUMNS = (
    "topology,n,lambda,lambda_e,estimator,seed,reps,horizon,warmup,estimate,stderr,"
    "events_source_self,events_source_push,events_gossip_accepted,events_gossip_rejected"
)

SWEEP_COLUMNS = "n,topology,estimate,stderr,bound_n13,bound_18,bound_145,bound_closed"


class VerificationFailure(Exception):
    pass


def load_config(path: str) -> dict[str, str]:
    items: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        items[key.strip()] = value.strip()
    return items


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    items = load_config(args.config)
    unknown = set(items) - set(_CONFIG_TO_ARG)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, value in items.items():
        arg_name, cast = _CONFIG_TO_ARG[key]
        if getattr(args, arg_name, None) is None:
            try:
                setattr(args, arg_name, cast(value))
            except ValueError as exc:
                raise ConfigError(f"config key {key}: {exc}") from exc


def _spec_from_args(args: argparse.Namespace) -> TopologySpec:
    return TopologySpec(
        kind=args.topology if args.topology is not None else "torus-grid",
        n=args.n,
        dimension=args.dim if args.dim is not None else 2,
        side=args.side,
        lam=args.lam if args.lam is not None else 1.0,
        lam_e=args.lam_e if args.lam_e is not None else 1.0,
    )


def _sim_config(args: argparse.Namespace) -> SimConfig:
    return SimConfig(
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed if args.seed is not None else 1,
        replications=args.reps if args.reps is not None else 3,
        estimator=getattr(args, "estimator", None) or "symmetry-averaged",
    )


@dataclass
class _Output:
    path: str

    def write_text(self, text: str) -> None:
        if self.path in ("-", ""):
            sys.stdout.write(text)
        else:
            Path(self.path).write_text(text, encoding="utf-8")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rows_to_csv(columns: str, rows: list[list]) -> str:
    lines = [CSV_HEADER, columns]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _rows_to_json(columns: str, rows: list[list]) -> str:
    names = columns.split(",")
    return json.dumps([dict(zip(names, row)) for row in rows], indent=2) + "\n"


def _emit_rows(args, columns: str, rows: list[list]) -> None:
    fmt = args.format or "csv"
    text = _rows_to_csv(columns, rows) if fmt == "csv" else _rows_to_json(columns, rows)
    _Output(args.out or "-").write_text(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    cfg = _sim_config(args)
    net = build_network(spec)
    horizon, warmup = cfg.resolve(net)
    result = simulate(net, cfg)
    row = [
        str(net.tag), net.n, net.lam, net.source_self_rate, cfg.estimator,
        cfg.seed, cfg.replications, horizon, warmup, result.estimate, result.stderr,
        result.events["source-self"], result.events["source-push"],
        result.events["gossip-accepted"], result.events["gossip-rejected"],
    ]
    _emit_rows(args, SIMULATE_COLUMNS, [row])
    return 0


def cmd_exact(args: argparse.Namespace) -> int:
    if (args.format or "csv") != "csv":
        raise ConfigError("the exact subcommand writes CSV tables; use --format csv")
    spec = _spec_from_args(args)
    net = build_network(spec)
    table = ex.solve_version_ages(net, ex.SolverLimits(args.cap))
    out = _Output(args.out or "-")
    buf = io.StringIO()
    table.to_csv(buf)
    out.write_text(buf.getvalue())
    singles = table.singleton_ages()
    print(
        f"{net.tag}: {len(table)} connected subsets, "
        f"v_singleton mean={np.mean(singles)!r} min={min(singles)!r} max={max(singles)!r}",
        file=sys.stderr,
    )
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    if (args.format or "json") != "json":
        raise ConfigError("bound reports are JSON; use --format json")
    report = bnd.build_bound_report(
        n=args.n,
        lam_e=args.lam_e if args.lam_e is not None else 1.0,
        lam=args.lam if args.lam is not None else 1.0,
        j=args.j,
        v_max=args.vmax,
    )
    _Output(args.out or "-").write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return 0


def cmd_isoperimetry(args: argparse.Namespace) -> int:
    side = args.side
    n = side * side
    sizes = [args.j] if args.j is not None else list(range(1, n))
    net = build_network(TopologySpec("torus-grid", side=side))
    rows = []
    for j in sizes:
        min_e, witness = bnd.min_boundary_bruteforce(side, j)
        lower = bnd.min_incoming_edges_bound(n, j)
        try:
            spiral_e = bnd.edge_partition(net, bnd.spiral_subset(side, j)).e_total
        except ValueError:  # spiral does not fit without wrapping
            spiral_e = ""
        rows.append([j, min_e, f"{witness.mask:#x}", lower, spiral_e])
    _emit_rows(args, "j,min_E,witness,lower_bound,spiral_E", rows)
    return 0


def run_verification(n_max: int = 10_000, floor_alpha: float = bnd.SQRT3) -> list[tuple[str, bool, str]]:
    """Run the standing checks; returns (name, ok, detail) per check.

    ``floor_alpha`` exists so the harness itself can be fault-tested by
    weakening the smooth side of the floor inequality.
    """
    checks: list[tuple[str, bool, str]] = []

    margins = bnd.floor_inequality_margins(n_max, alpha=floor_alpha)[1:]
    worst = int(np.argmin(margins)) + 1
    checks.append(
        (
            f"floor-inequality n=1..{n_max}",
            bool((margins >= 0).all()),
            f"min margin {margins.min():.6g} at n={worst}",
        )
    )

    ratio = bnd.ratio_function_checks()
    checks.append(
        (
            "ratio-functions",
            ratio.ok,
            f"f_min={ratio.f_min:.3g} f_tail={ratio.f_tail:.3g} g_max_slope={ratio.g_max_slope:.3g}",
        )
    )

    quad, closed = bnd.beta_constant()
    checks.append(
        ("beta-identity", abs(quad - closed) < 1e-8, f"|quadrature-closed|={abs(quad - closed):.3g}")
    )

    for spec in (
        TopologySpec("torus-grid", side=4),
        TopologySpec("ring", n=6),
        TopologySpec("complete", n=5),
    ):
        net = build_network(spec)
        table = ex.solve_version_ages(net)
        full = (1 << net.n) - 1
        ok = True
        worst_gap = 0.0
        for mask in table.masks_by_size():
            if mask == full:
                continue
            subset = NodeSubset.from_mask(mask)
            v = table.ages[mask]
            lo = ex.subset_age_lower_bound(net, subset, table)
            hi = ex.subset_age_upper_bound(net, subset, table)
            if not (lo <= v + 1e-9 and v <= hi + 1e-9):
                ok = False
                worst_gap = max(worst_gap, lo - v, v - hi)
        checks.append((f"sandwich-bounds {net.tag}", ok, f"{len(table)} subsets" if ok else f"violation {worst_gap:.3g}"))

    net = build_network(TopologySpec("torus-grid", side=4))
    table = ex.solve_version_ages(net)
    full = (1 << net.n) - 1
    ok = True
    for mask in table.masks_by_size():
        j = mask.bit_count()
        if mask == full or j > 12:
            continue
        nbr = _neighbor_mask(net, mask)
        v_max = max(table.ages[mask | (1 << i)] for i in range(net.n) if nbr >> i & 1)
        bound = bnd.grid_age_bound(v_max, j, net.n, net.source_self_rate, net.lam)
        if bound < table.ages[mask] - 1e-9:
            ok = False
    checks.append(("grid-bound-domination torus-grid-d2-L4", ok, "j<=12 exhaustive"))
    return checks


def _neighbor_mask(net, mask: int) -> int:
    out = 0
    for i in range(net.n):
        if mask >> i & 1:
            for j in net.out_neighbors[i]:
                out |= 1 << j
    return out & ~mask


def cmd_verify(args: argparse.Namespace) -> int:
    checks = run_verification(n_max=args.n_max if args.n_max is not None else 10_000)
    failed = [c for c in checks if not c[1]]
    for name, ok, detail in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
    if args.out and args.out != "-":
        rows = [[name, "ok" if ok else "FAIL", detail] for name, ok, detail in checks]
        _emit_rows(args, "check,status,detail", rows)
    if failed:
        raise VerificationFailure(f"{len(failed)} verification check(s) failed")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.full:
        sides = list(range(10, 101, 10))
    elif args.sides:
        sides = [int(s) for s in args.sides.split(",") if s.strip()]
    else:
        sides = [10, 20, 30, 40]
    if any(s < 3 for s in sides):
        raise ConfigError(f"torus sides must be >= 3, got {sides}")
    dim = args.dim if args.dim is not None else 2
    lam = args.lam if args.lam is not None else 1.0
    lam_e = args.lam_e if args.lam_e is not None else 1.0
    cfg = _sim_config(args)
    rows = []
    for side in sides:
        spec = TopologySpec("torus-grid", side=side, dimension=dim, lam=lam, lam_e=lam_e)
        try:
            net = build_network(spec)
            result = simulate(net, cfg)
        except Exception as exc:
            print(f"sweep row side={side} failed: {exc}", file=sys.stderr)
            continue
        n = spec.n
        rows.append(
            [
                n, str(net.tag), result.estimate, result.stderr,
                n ** (1.0 / 3.0), 1.8 * n ** (1.0 / 3.0), 1.45 * n ** (1.0 / 3.0),
                bnd.closed_form_bound(n, lam_e, lam),
            ]
        )
    rows.sort(key=lambda r: r[0])
    _emit_rows(args, SWEEP_COLUMNS, rows)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_topology_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", choices=("torus-grid", "ring", "line", "complete"), default=None)
    p.add_argument("--dim", type=int, default=None, help="grid dimension (default 2)")
    p.add_argument("--side", type=int, default=None, help="grid side length")
    p.add_argument("--n", type=int, default=None, help="node count")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="total gossip rate per node")
    p.add_argument("--lambda-e", dest="lam_e", type=float, default=None, help="source self-update rate")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None, help="replications (default 3)")
    p.add_argument("--horizon", type=float, default=None, help="simulated time (default 200 n / lambda)")
    p.add_argument("--warmup", type=float, default=None, help="discarded initial time (default 10%% of horizon)")
    p.add_argument("--estimator", choices=ESTIMATORS, default=None)


def _add_io_flags(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--out", default=None, help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help=f"default {default_format}")
    p.add_argument("--config", default=None, help="flat key=value config file; flags override")


def _add_noop_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="accepted everywhere; this command is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossip-age", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo version-age estimate for one topology")
    _add_topology_flags(p)
    _add_sim_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="solve the age recursion for every connected subset")
    _add_topology_flags(p)
    _add_io_flags(p)
    _add_noop_seed(p)
    p.add_argument("--cap", type=int, default=16, help="exact-solver node cap")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bounds", help="evaluate the analytic bounds as a JSON report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--lambda-e", dest="lam_e", type=float, default=None)
    p.add_argument("--j", type=int, default=None, help="subset size for size-dependent entries")
    p.add_argument("--vmax", type=float, default=None, help="expansion-age cap for the recursion bound")
    _add_io_flags(p, default_format="json")
    _add_noop_seed(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("isoperimetry", help="exhaustive minimum incoming-edge counts on a small torus")
    p.add_argument("--side", type=int, required=True)
    p.add_argument("--j", type=int, default=None, help="single subset size (default: all)")
    _add_io_flags(p)
    _add_noop_seed(p)
    p.set_defaults(func=cmd_isoperimetry)

    p = sub.add_parser("verify", help="run the standing numeric verification checks")
    p.add_argument("--n-max", type=int, default=None, help="floor inequality range (default 10000)")
    _add_io_flags(p)
    _add_noop_seed(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="grid sweep with simulation estimates and reference curves")
    p.add_argument("--sides", default=None, help="comma-separated side lengths (default 10,20,30,40)")
    p.add_argument("--full", action="store_true", help="sides 10..100 step 10")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--lambda-e", dest="lam_e", type=float, default=None)
    _add_sim_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if exc.code is not None else 0
        return code if isinstance(code, int) else 2
    try:
        _apply_config(args)
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # runtime failures
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
