"""Identity-verification battery for gallery metrics.

Runs every check applicable to a metric (homogeneity, positive definiteness,
spray cross-oracles, curvature and S-curvature identities, torsion bounds,
volume checks) with seeded sampling and produces a machine-readable report.
Each check carries the mathematical claim it certifies, the sample count,
seed, tolerance, and the worst residual observed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics as M
from .curvature import (
    k0_residuals,
    randers_ricci_trace,
    ricci_2d,
    riemann,
    riemann_entries,
)
from .diffcore import directional_derivatives, log
from .metrics import metric_entries
from .gallery import GalleryEntry
from .measures import (
    bh_density_mc,
    constant_density_field,
    randers_density,
    randers_density_field,
    randers_s_curvature,
    s_curvature,
    s_curvature_dynamic,
    s_zero_criterion,
)
from .spray import geodesic_integrate, projective_residual, randers_spray, spray_from_metric


@dataclass
class CheckResult:
    check_id: str
    claim: str
    n_samples: int
    seed: int
    max_residual: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    metric: str
    params: dict
    seed: int
    points: int
    checks: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "params": self.params,
            "seed": self.seed,
            "points": self.points,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }


def _sample_sites(entry: GalleryEntry, n: int, seed: int):
    pts = entry.metric.domain.sample_points(n, seed)
    rng = np.random.default_rng([seed, 0xF1])
    dirs = rng.normal(size=(n, entry.dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return pts, dirs


def _cols(mat: np.ndarray) -> list:
    return [mat[:, i] for i in range(mat.shape[1])]


def max_riemann_residual(G, pts: np.ndarray, dirs: np.ndarray) -> float:
    """max |R^i_k| over a batch of (x, y) sites, evaluated in one array pass."""
    R = riemann_entries(G, _cols(pts), _cols(dirs))
    return max(
        float(np.max(np.abs(np.asarray(entry, dtype=float)))) for row in R for entry in row
    )


def max_flag_deviation(F, G, pts, dirs, flags, constant: float) -> float:
    """max |K(P, y) - constant| over a batch of flags (array pass)."""
    n = pts.shape[1]
    cx, cy = _cols(pts), _cols(dirs)
    g = metric_entries(F, cx, cy)
    R = riemann_entries(G, cx, cy)
    u = _cols(flags)
    gyy = sum(g[i][j] * cy[i] * cy[j] for i in range(n) for j in range(n))
    guu = sum(g[i][j] * u[i] * u[j] for i in range(n) for j in range(n))
    gyu = sum(g[i][j] * cy[i] * u[j] for i in range(n) for j in range(n))
    denom = gyy * guu - gyu * gyu
    Ru = [sum(R[i][k] * u[k] for k in range(n)) for i in range(n)]
    num = sum(g[i][j] * u[i] * Ru[j] for i in range(n) for j in range(n))
    good = denom > 1e-10 * np.asarray(gyy * guu, dtype=float)
    K = np.asarray(num, dtype=float)[good] / np.asarray(denom, dtype=float)[good]
    return float(np.max(np.abs(K - constant)))


def max_s_residual(G, sigma, pts, dirs) -> float:
    """max |S| via the local formula over a batch of (x, y) sites."""
    n = pts.shape[1]
    cx, cy = _cols(pts), _cols(dirs)
    div = None
    for i in range(n):
        e = [0.0] * n
        e[i] = 1.0
        res = directional_derivatives(lambda xs, ys: G(xs, ys)[i], cx, cy, y_dirs=[(e, 1)])
        term = res.partial([1])
        div = term if div is None else div + term
    res = directional_derivatives(lambda xs, ys: log(sigma(xs)), cx, cy, x_dirs=[(cy, 1)])
    return float(np.max(np.abs(np.asarray(div - res.partial([1]), dtype=float))))


def run_verification(
    entry: GalleryEntry,
    points: int = 200,
    seed: int = 42,
    tol_overrides: dict | None = None,
) -> VerificationReport:
    tols = {
        "f_homogeneity": 1e-12,
        "euler_identity": 1e-12,
        "g_recovers_f2": 1e-10,
        "g_zero_homogeneity": 1e-10,
        "spray_homogeneity": 1e-10,
        "spray_cross_oracle": 1e-8,
        "riemann_zero": 1e-7,
        "ricci_2d_agrees": 1e-7,
        "flag_constant": 1e-6,
        "s_zero": 1e-8,
        "s_three_way_closed": 1e-8,
        "s_three_way_dynamic": 1e-6,
        "s_zero_criterion": 1e-10,
        "k0_residuals": 1e-7,
        "ricci_trace_conditions": 1e-7,
        "cartan_bound": 1e-9,
        "cartan_second_bound": 1e-9,
        "cartan_second_profile": 1e-6,
        "volume_closed_vs_mc": 1e-2,
        "projective_flat": 1e-8,
        "projective_nonflat": 0.0,
        "geodesic_speed": 1e-6,
    }
    if entry.name == "funk":
        tols["flag_constant"] = 1e-7
    if tol_overrides:
        tols.update(tol_overrides)

    checks: list[CheckResult] = []
    ref = entry.reference
    F = entry.metric
    rd = entry.randers
    G = randers_spray(rd) if rd is not None else spray_from_metric(F)
    n_small = max(10, points // 10)
    pts, dirs = _sample_sites(entry, points, seed)
    pts_small, dirs_small = pts[:n_small], dirs[:n_small]

    def add(check_id, claim, n_samples, residual, detail=None):
        tol = tols[check_id]
        checks.append(
            CheckResult(
                check_id=check_id,
                claim=claim,
                n_samples=n_samples,
                seed=seed,
                max_residual=float(residual),
                tolerance=tol,
                passed=bool(residual <= tol),
                detail=detail or {},
            )
        )

    # homogeneity / metric sanity ------------------------------------------
    base = M.check_metric(F, n_points=min(points, 100), seed=seed)
    add("f_homogeneity", "F(x, t y) = t F(x, y) for t > 0", base["n_points"], base["homogeneity"])
    add("euler_identity", "y^i dF/dy^i = F", base["n_points"], base["euler"])
    add("g_recovers_f2", "g_y(y, y) = F(x, y)^2", base["n_points"], base["g_recovers_F2"])

    res = 0.0
    for x, y in zip(pts_small, dirs_small):
        g1 = M.fundamental_tensor(F, list(x), list(y)).g
        for lam in (0.5, 2.0, 7.0):
            g2 = M.fundamental_tensor(F, list(x), list(lam * y)).g
            res = max(res, float(np.max(np.abs(g2 - g1)) / (1.0 + np.max(np.abs(g1)))))
    add("g_zero_homogeneity", "g_{t y} = g_y for t > 0", n_small, res)

    res = 0.0
    for x, y in zip(pts_small, dirs_small):
        gv = np.array([float(v) for v in G(list(x), list(y))])
        for lam in (0.5, 2.0, 7.0):
            gl = np.array([float(v) for v in G(list(x), list(lam * y))])
            res = max(res, float(np.max(np.abs(gl - lam * lam * gv)) / (1.0 + np.max(np.abs(gv)))))
    add("spray_homogeneity", "G^i(x, t y) = t^2 G^i(x, y)", n_small, res)

    # spray cross-oracle ----------------------------------------------------
    if rd is not None:
        Gg = spray_from_metric(F)
        res = 0.0
        for x, y in zip(pts_small, dirs_small):
            a = np.array([float(v) for v in G(list(x), list(y))])
            b = np.array([float(v) for v in Gg(list(x), list(y))])
            res = max(res, float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b)))))
        add(
            "spray_cross_oracle",
            "closed-form and metric-derived sprays agree",
            n_small,
            res,
        )

    # curvature -------------------------------------------------------------
    if ref.flag_curvature is not None and ref.flag_curvature == 0.0:
        res = max_riemann_residual(G, pts, dirs)
        add("riemann_zero", "R^i_k = 0 at sampled (x, y)", len(pts), res)

    if ref.flag_curvature is not None:
        rng = np.random.default_rng([seed, 0xF2])
        m = min(points, 100)
        flags = rng.normal(size=(m, entry.dim))
        res = max_flag_deviation(F, G, pts[:m], dirs[:m], flags, ref.flag_curvature)
        add(
            "flag_constant",
            f"flag curvature equals {ref.flag_curvature}",
            m,
            res,
            detail={"constant": ref.flag_curvature},
        )

    if entry.dim == 2:
        res = 0.0
        for x, y in zip(pts_small, dirs_small):
            r_full = riemann(G, list(x), list(y)).ricci
            r_2d = ricci_2d(G, list(x), list(y))
            res = max(res, abs(r_full - r_2d) / (1.0 + abs(r_full)))
        add("ricci_2d_agrees", "two-dimensional trace shortcut equals tr R", n_small, res)

    # S-curvature -----------------------------------------------------------
    sigma = None
    if rd is not None:
        sigma = randers_density_field(rd)
    elif entry.name in ("minkowski",):
        sigma = constant_density_field(1.0)
    if sigma is not None and ref.s_curvature == 0.0:
        res = max_s_residual(G, sigma, pts, dirs)
        add("s_zero", "S(x, y) = 0 at sampled (x, y)", len(pts), res)

    if rd is not None:
        res_closed = 0.0
        res_dyn = 0.0
        m = max(5, n_small // 2)
        for x, y in zip(pts_small[:m], dirs_small[:m]):
            s_cf = randers_s_curvature(rd, list(x), list(y))
            s_gen = s_curvature(G, sigma, list(x), list(y))
            s_dyn = s_curvature_dynamic(F, sigma, list(x), list(y), dt=5e-4, G=G)
            scale = 1.0 + abs(s_cf)
            res_closed = max(res_closed, abs(s_gen - s_cf) / scale)
            res_dyn = max(res_dyn, abs(s_dyn - s_cf) / scale)
        add(
            "s_three_way_closed",
            "local-formula S equals closed-form S",
            m,
            res_closed,
        )
        add(
            "s_three_way_dynamic",
            "distortion-rate S equals closed-form S",
            m,
            res_dyn,
        )

        if ref.s_curvature == 0.0:
            res = 0.0
            for x in pts_small:
                res = max(res, float(np.max(np.abs(s_zero_criterion(rd, list(x))))))
            add(
                "s_zero_criterion",
                "r_ij + b_i s_j + b_j s_i = 0",
                n_small,
                res,
            )

        if ref.s_curvature == 0.0 and ref.flag_curvature == 0.0:
            res_a = res_b = 0.0
            for x, y in zip(pts_small, dirs_small):
                out = k0_residuals(rd, list(x), list(y))
                res_a = max(res_a, float(np.max(np.abs(out.residual_a))))
                res_b = max(res_b, float(np.max(np.abs(out.residual_b))))
            add(
                "k0_residuals",
                "rational and 1/alpha curvature blocks vanish",
                n_small,
                max(res_a, res_b),
                detail={"residual_a": res_a, "residual_b": res_b},
            )
            res = 0.0
            for x, y in zip(pts_small, dirs_small):
                rt = randers_ricci_trace(rd, list(x), list(y))
                res = max(res, abs(rt.value), abs(rt.trace_condition), abs(rt.ricci_bar_condition))
            add(
                "ricci_trace_conditions",
                "traced curvature and both Ricci-vanishing conditions are zero",
                n_small,
                res,
            )

    # torsion bounds ---------------------------------------------------------
    if rd is not None:
        res_c = res_c2 = 0.0
        detail = {}
        for x in pts_small[: max(3, n_small // 3)]:
            nb = M.beta_norm(rd, list(x))
            cn = M.cartan_norm(F, list(x), samples=1024, seed=seed)
            c2n = M.cartan_second_norm(F, list(x), samples=1024, seed=seed)
            bound_c = 3.0 / math.sqrt(2.0) * math.sqrt(1.0 - math.sqrt(1.0 - nb * nb))
            bound_c2 = 13.5 * nb
            res_c = max(res_c, cn - bound_c)
            res_c2 = max(res_c2, c2n - bound_c2)
            detail = {"cartan_norm": cn, "cartan_bound": bound_c,
                      "cartan_second_norm": c2n, "cartan_second_bound": bound_c2}
        add(
            "cartan_bound",
            "||C|| <= 3/sqrt(2) sqrt(1 - sqrt(1 - ||beta||^2))",
            max(3, n_small // 3),
            max(res_c, 0.0),
            detail=detail,
        )
        add(
            "cartan_second_bound",
            "||C~|| <= 13.5 ||beta||",
            max(3, n_small // 3),
            max(res_c2, 0.0),
            detail=detail,
        )
        if ref.cartan2_profile is not None:
            x0 = [0.0] * entry.dim
            est = M.cartan_second_norm(F, x0, samples=4096, seed=seed)
            grid = np.linspace(0.0, 2.0 * math.pi, 200_001)
            target = float(np.max(np.abs(ref.cartan2_profile(grid))))
            add(
                "cartan_second_profile",
                "||C~|| equals the closed-form angle-profile maximum",
                4096,
                abs(est - target),
                detail={"estimate": est, "profile_max": target},
            )

    # volume ------------------------------------------------------------------
    if rd is not None or ref.density is not None:
        x0 = list(pts[0])
        mc = bh_density_mc(F, x0, n_samples=200_000, seed=seed)
        closed = randers_density(rd, x0) if rd is not None else float(ref.density)
        gap = abs(mc.value - closed) / max(abs(closed), 1e-300)
        add(
            "volume_closed_vs_mc",
            "closed-form density matches Monte-Carlo estimate",
            mc.n_samples,
            gap,
            detail={"mc": mc.value, "mc_stderr": mc.stderr, "closed_form": closed},
        )

    # projective behaviour ------------------------------------------------------
    if ref.projectively_flat is True:
        res = 0.0
        for x, y in zip(pts_small, dirs_small):
            res = max(res, float(np.max(np.abs(projective_residual(G, list(x), list(y))))))
        add(
            "projective_flat",
            "G^i y^j - G^j y^i = 0 (straight-line geodesics in the chart)",
            n_small,
            res,
        )
    elif ref.projectively_flat is False:
        observed = 0.0
        for x, y in zip(pts_small, dirs_small):
            observed = max(observed, float(np.max(np.abs(projective_residual(G, list(x), list(y))))))
        add(
            "projective_nonflat",
            "chart projective residual exceeds 1e-3 somewhere (not projectively flat)",
            n_small,
            max(0.0, 1e-3 - observed),
            detail={"observed_max": observed},
        )

    # geodesic speed conservation -------------------------------------------------
    x0, y0 = list(pts[0]), list(dirs[0] * 0.5)
    traj = geodesic_integrate(G, x0, y0, T=0.5, dt=2e-3, speed_check=F, speed_rtol=0.5)
    drift = float(np.max(np.abs(traj.speed - traj.speed[0])) / abs(traj.speed[0]))
    add(
        "geodesic_speed",
        "F(dx/dt) is constant along geodesics",
        len(traj.t),
        drift,
    )

    return VerificationReport(
        metric=entry.name,
        params=entry.params,
        seed=seed,
        points=points,
        checks=checks,
        passed=all(c.passed for c in checks),
    )
