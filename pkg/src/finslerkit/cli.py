"""Command-line interface: verification suites, pointwise curvature queries,
geodesic traces, grid scans and navigation transforms.

Exit codes: 0 success, 1 verification failure, 2 usage error.  All reports
are JSON with sorted keys (byte-stable given seed and version); trajectories
are CSV.  The default seed comes from FINSLER_SEED when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, gallery
from .curvature import flag_curvature, riemann
from .errors import FinslerError
from .measures import (
    constant_density_field,
    randers_density_field,
    s_curvature,
)
from .metrics import RiemannianField, ball_domain
from .navigation import DriftField, volume_preservation_check, zermelo_general, zermelo_riemannian
from .spray import geodesic_integrate, randers_spray, spray_from_metric
from .verify import run_verification


def _default_seed() -> int:
    env = os.environ.get("FINSLER_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"finsler: FINSLER_SEED must be an integer, got {env!r}")
    return 42


def _parse_vector(text: str, want: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{want} must be a comma-separated list of numbers, got {text!r}")


class UsageError(Exception):
    pass


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _entry_and_spray(spec: str):
    entry = gallery.parse_spec(spec)
    G = randers_spray(entry.randers) if entry.randers is not None else spray_from_metric(entry.metric)
    return entry, G


def _density(entry):
    if entry.randers is not None:
        return randers_density_field(entry.randers)
    if entry.name == "minkowski":
        return constant_density_field(1.0)
    return None


# -- subcommands -----------------------------------------------------------------


def cmd_verify(args) -> int:
    entry = gallery.parse_spec(args.metric)
    tols = {}
    for item in args.tol or []:
        k, eq, v = item.partition("=")
        if not eq:
            raise UsageError(f"--tol expects check=value, got {item!r}")
        tols[k] = float(v)
    t0 = time.time()
    report = run_verification(entry, points=args.points, seed=args.seed, tol_overrides=tols or None)
    elapsed = time.time() - t0
    _emit_json(report.to_dict(), args.out)
    print(f"finsler verify {args.metric}: {'pass' if report.passed else 'FAIL'} "
          f"({len(report.checks)} checks, {elapsed:.1f}s)", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_curvature(args) -> int:
    entry, G = _entry_and_spray(args.metric)
    x = _parse_vector(args.at, "--at")
    y = _parse_vector(args.dir, "--dir")
    if len(x) != entry.dim or len(y) != entry.dim:
        raise UsageError(f"point and direction must have dimension {entry.dim}")
    R = riemann(G, x, y)
    payload = {
        "metric": entry.name,
        "params": entry.params,
        "at": x,
        "dir": y,
        "riemann": R.matrix.tolist(),
        "ricci": R.ricci,
        "seed": args.seed,
    }
    sigma = _density(entry)
    if sigma is not None:
        payload["s_curvature"] = s_curvature(G, sigma, x, y)
    if args.flag:
        u = _parse_vector(args.flag, "--flag")
        payload["flag"] = u
        payload["flag_curvature"] = flag_curvature(entry.metric, x, y, u, G=G)
    _emit_json(payload, args.out)
    return 0


def cmd_geodesic(args) -> int:
    entry, G = _entry_and_spray(args.metric)
    x0 = _parse_vector(getattr(args, "from"), "--from")
    y0 = _parse_vector(args.dir, "--dir")
    traj = geodesic_integrate(G, x0, y0, T=args.time, dt=args.dt, speed_check=entry.metric)
    n = entry.dim
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"v{i + 1}" for i in range(n)]
        + ["F", "boundary_exit"]
    )
    lines = [",".join(header)]
    last = len(traj.t) - 1
    for k in range(len(traj.t)):
        exit_flag = 1 if (traj.boundary_exit and k == last) else 0
        row = (
            [repr(float(traj.t[k]))]
            + [repr(float(v)) for v in traj.x[k]]
            + [repr(float(v)) for v in traj.v[k]]
            + [repr(float(traj.speed[k])), str(exit_flag)]
        )
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def _parse_grid(spec: str) -> list[tuple[str, np.ndarray]]:
    axes = []
    for item in spec.split(","):
        name, eq, rng = item.partition("=")
        parts = rng.split(":")
        if not eq or len(parts) != 3:
            raise UsageError(f"grid axis must be name=lo:hi:count, got {item!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        axes.append((name.strip(), np.linspace(lo, hi, count)))
    return axes


def cmd_scan(args) -> int:
    entry, G = _entry_and_spray(args.metric)
    axes = _parse_grid(args.grid)
    if len(axes) != entry.dim:
        raise UsageError(f"grid must have {entry.dim} axes for {entry.name}")
    y = _parse_vector(args.dir, "--dir") if args.dir else [1.0] + [0.0] * (entry.dim - 1)
    u = _parse_vector(args.flag, "--flag") if args.flag else None
    sigma = _density(entry)
    quantity = args.quantity
    from .metrics import cartan_norm, cartan_second_norm

    grids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    shape = grids[0].shape
    values = np.full(shape, np.nan)
    it = np.nditer(grids[0], flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        x = [float(g[idx]) for g in grids]
        if not entry.metric.domain.contains(x):
            continue
        try:
            if quantity == "K":
                uu = u if u is not None else ([0.0, 1.0] + [0.0] * (entry.dim - 2))
                values[idx] = flag_curvature(entry.metric, x, y, uu, G=G)
            elif quantity == "Ric":
                values[idx] = riemann(G, x, y).ricci
            elif quantity == "S":
                if sigma is None:
                    raise UsageError(f"no differentiable density available for {entry.name}")
                values[idx] = s_curvature(G, sigma, x, y)
            elif quantity == "cartan":
                values[idx] = cartan_norm(entry.metric, x, samples=args.samples, seed=args.seed)
            elif quantity == "cartan2":
                values[idx] = cartan_second_norm(
                    entry.metric, x, samples=args.samples, seed=args.seed
                )
            else:
                raise UsageError(f"unknown quantity {quantity!r}")
        except FinslerError:
            continue
    payload = {
        "metric": entry.name,
        "params": entry.params,
        "quantity": quantity,
        "axes": [{"name": a[0], "values": a[1].tolist()} for a in axes],
        "dir": y,
        "seed": args.seed,
        "values": np.where(np.isnan(values), None, values).tolist(),
    }
    _emit_json(payload, args.out)
    return 0


_DRIFTS = {
    "radial": lambda dom: DriftField(dom, lambda x: [-v for v in x], name="radial"),
    "rotation": lambda dom: DriftField(
        dom, lambda x: [-x[1], x[0]] + [0.0] * (dom.dim - 2), name="rotation"
    ),
}


def _parse_drift(spec: str, dom) -> DriftField:
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name in _DRIFTS:
        return _DRIFTS[name](dom)
    if name == "constant":
        comps = {}
        for item in rest.split(","):
            k, eq, v = item.partition("=")
            if not eq:
                raise UsageError(f"malformed drift component {item!r}")
            comps[k.strip()] = float(v)
        vec = [comps.get(f"v{i + 1}", 0.0) for i in range(dom.dim)]
        return DriftField(dom, lambda x: list(vec), name="constant")
    raise UsageError(f"unknown drift {spec!r}; use radial, rotation, or constant:v1=..,v2=..")


def cmd_navigate(args) -> int:
    alpha_entry = gallery.parse_spec(args.alpha)
    riemannian = alpha_entry.randers is not None and all(
        np.max(np.abs(alpha_entry.randers.beta.value(list(p)))) == 0.0
        for p in alpha_entry.metric.domain.sample_points(8, seed=1)
    )
    if not riemannian:
        raise UsageError("--alpha must name a Riemannian gallery metric (e.g. euclidean:n=2)")
    alpha = alpha_entry.randers.alpha
    dom = alpha.domain
    if args.alpha.startswith("euclidean"):
        dom = ball_domain(alpha.dim, name=f"nav-ball{alpha.dim}")
        alpha = RiemannianField(dom, alpha.matrix, name=alpha.name)
    drift = _parse_drift(args.drift, dom)
    rd = zermelo_riemannian(alpha, drift)
    x = _parse_vector(args.at, "--at") if args.at else [0.0] * alpha.dim
    payload = {
        "alpha": args.alpha,
        "drift": args.drift,
        "at": x,
        "a_tilde": [[float(v) for v in row] for row in rd.alpha.matrix(x)],
        "b_tilde": [float(v) for v in rd.beta.covector(x)],
        "seed": args.seed,
    }
    if args.dir:
        y = _parse_vector(args.dir, "--dir")
        payload["dir"] = y
        payload["F_tilde_closed_form"] = float(rd.finsler()(x, y))
        payload["F_tilde_root_solve"] = zermelo_general(alpha.finsler(), drift, x, y)
    if args.check_volume:
        gap = volume_preservation_check(
            alpha.finsler(), drift, x, n_samples=args.samples, seed=args.seed
        )
        payload["volume_preservation"] = {
            "sigma_source": gap.sigma_f.value,
            "sigma_source_stderr": gap.sigma_f.stderr,
            "sigma_navigation": gap.sigma_nav.value,
            "sigma_navigation_stderr": gap.sigma_nav.stderr,
            "rel_gap": gap.rel_gap,
            "n_samples": args.samples,
        }
    _emit_json(payload, args.out)
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="finsler",
        description="Numerical engine for Finsler metrics on a chart: "
        "verification, curvature, geodesics, scans, navigation.",
    )
    p.add_argument("--version", action="version", version=f"finsler {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    seed_kw = dict(type=int, default=_default_seed(), help="random seed (default: FINSLER_SEED or 42)")

    v = sub.add_parser("verify", help="run the identity-verification battery for a metric")
    v.add_argument("metric", help="metric spec, e.g. rotation2d or slab:kappa=0.5")
    v.add_argument("--points", type=int, default=200)
    v.add_argument("--seed", **seed_kw)
    v.add_argument("--tol", action="append", metavar="CHECK=VALUE", help="override a check tolerance")
    v.add_argument("--out", help="write the JSON report to a file")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("curvature", help="Riemann matrix, Ricci, S and optional flag curvature at a point")
    c.add_argument("metric")
    c.add_argument("--at", required=True, help="chart point, comma-separated")
    c.add_argument("--dir", required=True, help="tangent direction, comma-separated")
    c.add_argument("--flag", help="transverse flag edge, comma-separated")
    c.add_argument("--seed", **seed_kw)
    c.add_argument("--out")
    c.set_defaults(func=cmd_curvature)

    g = sub.add_parser("geodesic", help="integrate a geodesic and emit a CSV trace")
    g.add_argument("metric")
    g.add_argument("--from", required=True, help="start point")
    g.add_argument("--dir", required=True, help="initial velocity")
    g.add_argument("--time", type=float, default=1.0)
    g.add_argument("--dt", type=float, default=1e-3)
    g.add_argument("--out", help="CSV output path (default: stdout)")
    g.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("scan", help="evaluate a curvature quantity on a chart grid")
    s.add_argument("metric")
    s.add_argument("--quantity", choices=["K", "S", "Ric", "cartan", "cartan2"], required=True)
    s.add_argument("--grid", required=True, help="axes as name=lo:hi:count, comma-separated")
    s.add_argument("--dir", help="tangent direction (default e1)")
    s.add_argument("--flag", help="flag edge for K (default e2)")
    s.add_argument("--samples", type=int, default=1024, help="samples for torsion norms")
    s.add_argument("--seed", **seed_kw)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    n = sub.add_parser("navigate", help="shortest-time transform of a Riemannian metric by a drift")
    n.add_argument("--alpha", required=True, help="Riemannian source, e.g. euclidean:n=2")
    n.add_argument("--drift", required=True, help="radial | rotation | constant:v1=..,v2=..")
    n.add_argument("--at", help="chart point (default origin)")
    n.add_argument("--dir", help="tangent vector for pointwise values")
    n.add_argument("--check-volume", action="store_true", help="Monte-Carlo volume preservation check")
    n.add_argument("--samples", type=int, default=1_000_000)
    n.add_argument("--seed", **seed_kw)
    n.add_argument("--out")
    n.set_defaults(func=cmd_navigate)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"finsler: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"finsler: {e}", file=sys.stderr)
        return 2
    except FinslerError as e:
        print(f"finsler: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
