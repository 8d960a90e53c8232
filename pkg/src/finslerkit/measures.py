"""Volume densities, distortion and the S-curvature.

Three independent S-curvature routes are provided: the local formula from
the spray and the volume density, the dynamic definition (rate of change of
distortion along a short geodesic), and the Randers closed form.  They are
cross-checked in tests; only differentiable density sources are accepted by
the local formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _linalg
from .diffcore import directional_derivatives, log, sqrt, value
from .errors import MetricError
from .metrics import FinslerField, RandersData, RiemannianField, fundamental_tensor
from .spray import SprayField, beta_table, geodesic_integrate

DIFFERENTIABLE_METHODS = ("closed-form-randers", "riemannian-det", "constant")


@dataclass(frozen=True)
class VolumeDensity:
    """Chart density sigma(x) of a volume form sigma(x) dx^1 ... dx^n."""

    sigma: Callable
    method: str

    def __call__(self, x):
        return self.sigma(x)

    @property
    def differentiable(self) -> bool:
        return self.method in DIFFERENTIABLE_METHODS


@dataclass
class McDensity:
    """Monte-Carlo density estimate with its standard error."""

    value: float
    stderr: float
    n_samples: int
    seed: int


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _det_generic(a):
    """Determinant of a small list-matrix of generic scalars (PD assumed)."""
    L = _linalg.cholesky(a)
    return _linalg.det_from_cholesky(L)


def randers_density(randers: RandersData, x) -> float:
    """sigma_F(x) = (1 - ||beta||^2)^{(n+1)/2} sqrt(det a)."""
    return float(value(_randers_sigma(randers, x)))


def _randers_sigma(randers: RandersData, x):
    n = randers.dim
    a = randers.alpha.matrix(x)
    b = randers.beta.covector(x)
    a_inv, det = _linalg.spd_factor(a)
    beta2 = _linalg.quad_form(a_inv, b, b)
    return sqrt(1.0 - beta2) ** (n + 1) * sqrt(det)


def randers_density_field(randers: RandersData) -> VolumeDensity:
    return VolumeDensity(
        sigma=lambda x: _randers_sigma(randers, x), method="closed-form-randers"
    )


def riemannian_density_field(alpha: RiemannianField) -> VolumeDensity:
    return VolumeDensity(
        sigma=lambda x: sqrt(_det_generic(alpha.matrix(x))), method="riemannian-det"
    )


def constant_density_field(c: float = 1.0) -> VolumeDensity:
    return VolumeDensity(sigma=lambda x: c, method="constant")


# -- Monte Carlo Busemann-Hausdorff density ------------------------------------


def _indicatrix_box(F: FinslerField, x, n_dirs: int = 2048, inflate: float = 1.10):
    """Axis-aligned box covering {F(x, .) < 1} from sampled boundary points.

    Boundary points are d / F(x, d) over many directions d; the box is the
    componentwise hull, inflated for safety.  Raises MetricError if F fails
    to be positive on some sampled ray (unbounded indicatrix).
    """
    n = F.dim
    rng = np.random.default_rng([11, n_dirs])
    dirs = rng.normal(size=(n_dirs, n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    ys = [dirs[:, i] for i in range(n)]
    xs = [np.full(n_dirs, float(v)) for v in x]
    fvals = np.asarray(F(xs, ys), dtype=float)
    if np.any(fvals <= 1e-14):
        raise MetricError("indicatrix is unbounded: F vanishes on a sampled ray")
    pts = dirs / fvals[:, None]
    if float(np.max(np.abs(pts))) > 1e4:
        raise MetricError("indicatrix is unbounded (or too eccentric to box)")
    lo = pts.min(axis=0) * inflate
    hi = pts.max(axis=0) * inflate
    return lo, hi


def bh_density_mc(
    F: FinslerField, x, n_samples: int = 1_000_000, seed: int = 0,
    values: Optional[Callable] = None,
) -> McDensity:
    """Busemann-Hausdorff density sigma_F(x) = Vol(B^n) / Vol{F(x, .) < 1}
    by seeded Monte Carlo over a bounding box of the indicatrix.

    `values`, when given, replaces the metric evaluation on sample batches
    (used to rate an independently-computed norm, e.g. a navigation metric
    solved pointwise).  Estimates are deterministic per seed.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 1e4")
    n = F.dim
    lo, hi = _indicatrix_box(F, x)
    box_vol = float(np.prod(hi - lo))
    rng = np.random.default_rng([seed, 0xB11])
    hits = 0
    chunk = 200_000
    done = 0
    evaluate = values
    if evaluate is None:

        def evaluate(ys_cols):
            m = len(ys_cols[0])
            xcols = [np.full(m, float(v)) for v in x]
            return np.asarray(F(xcols, ys_cols), dtype=float)

    while done < n_samples:
        m = min(chunk, n_samples - done)
        pts = rng.uniform(lo, hi, size=(m, n))
        fv = evaluate([pts[:, i] for i in range(n)])
        hits += int(np.count_nonzero(fv < 1.0))
        done += m
    p = hits / n_samples
    vol = box_vol * p
    if vol <= 0.0:
        raise MetricError("Monte Carlo indicatrix volume estimate is zero")
    se_vol = box_vol * math.sqrt(max(p * (1.0 - p), 1e-300) / n_samples)
    sigma = unit_ball_volume(n) / vol
    return McDensity(
        value=sigma, stderr=sigma * se_vol / vol, n_samples=n_samples, seed=seed
    )


# -- distortion and S-curvature -------------------------------------------------


def distortion(F: FinslerField, sigma: VolumeDensity, x, y) -> float:
    """mu(x, y) = ln( sqrt(det g(x, y)) / sigma(x) )."""
    g = fundamental_tensor(F, x, y)
    return 0.5 * math.log(g.det) - math.log(float(value(sigma(x))))


@dataclass(frozen=True)
class DistortionScalar:
    """The distortion mu as an evaluable scalar on the slit tangent bundle;
    0-homogeneous in y since g is."""

    metric: FinslerField
    density: VolumeDensity

    def __call__(self, x, y) -> float:
        return distortion(self.metric, self.density, x, y)


def s_curvature(G: SprayField, sigma: VolumeDensity, x, y) -> float:
    """S(x, y) = dG^i/dy^i - y^i d/dx^i [ ln sigma(x) ].

    Requires a differentiable density source; Monte-Carlo densities are
    rejected so sampling noise is never presented as curvature.
    """
    if not sigma.differentiable:
        raise MetricError(
            f"density method {sigma.method!r} is not differentiable; "
            "use a closed-form or determinant density"
        )
    n = len(y)
    div = 0.0
    for i in range(n):
        e = [0.0] * n
        e[i] = 1.0
        res = directional_derivatives(lambda xs, ys: G(xs, ys)[i], x, y, y_dirs=[(e, 1)])
        div += float(value(res.partial([1])))
    res = directional_derivatives(lambda xs, ys: log(sigma(xs)), x, y, x_dirs=[(list(y), 1)])
    dlog = float(value(res.partial([1])))
    return div - dlog


def s_curvature_dynamic(
    F: FinslerField,
    sigma: VolumeDensity,
    x,
    y,
    dt: float = 5e-4,
    G: Optional[SprayField] = None,
) -> float:
    """S as the t-derivative of the distortion along the geodesic through (x, y):
    central difference of mu(c'(t)) at t = 0 with a short Runge-Kutta arc."""
    from .spray import spray_from_metric

    if G is None:
        G = spray_from_metric(F)
    sub = 8
    fwd = geodesic_integrate(G, x, y, dt, dt / sub)
    bwd = geodesic_integrate(G, x, y, -dt, dt / sub)
    mu_f = distortion(F, sigma, list(fwd.x[-1]), list(fwd.v[-1]))
    mu_b = distortion(F, sigma, list(bwd.x[-1]), list(bwd.v[-1]))
    return (mu_f - mu_b) / (2.0 * dt)


@dataclass
class RhoGradient:
    """rho = ln sqrt(1 - ||beta||^2) and its gradient rho_i = -b^j b_{j|i} / (1 - ||beta||^2)."""

    value: float
    grad: np.ndarray


def rho_gradient(randers: RandersData, x) -> RhoGradient:
    tbl = beta_table(randers, x, order=1)
    n = randers.dim
    b_up = _linalg.matvec(tbl.a_inv, tbl.b)
    beta2 = _linalg.sum_prod(tbl.b, b_up)
    denom = 1.0 - float(value(beta2))
    if denom <= 0.0:
        raise MetricError("||beta|| >= 1: invalid Randers data")
    grad = np.array(
        [
            -float(value(sum(b_up[j] * tbl.b_cov[j][i] for j in range(n)))) / denom
            for i in range(n)
        ]
    )
    return RhoGradient(value=0.5 * math.log(denom), grad=grad)


def randers_s_curvature(randers: RandersData, x, y) -> float:
    """Closed form S = (n+1) { P - rho_0 } with P = (r_00 - 2 alpha s_0)/(2F)."""
    n = randers.dim
    tbl = beta_table(randers, x, order=1)
    c = tbl.contract(y)
    alpha = math.sqrt(float(value(c.alpha2)))
    beta_v = float(value(_linalg.sum_prod(tbl.b, y)))
    P = (float(value(c.r00)) - 2.0 * alpha * float(value(c.s0))) / (2.0 * (alpha + beta_v))
    rho = rho_gradient(randers, x)
    rho0 = float(rho.grad @ np.asarray(y, dtype=float))
    return (n + 1) * (P - rho0)


def s_zero_criterion(randers: RandersData, x) -> np.ndarray:
    """Symmetric residual r_ij + b_i s_j + b_j s_i; zero iff S = 0 at x."""
    tbl = beta_table(randers, x, order=1)
    n = randers.dim
    return np.array(
        [
            [
                float(value(tbl.r[i][j] + tbl.b[i] * tbl.s_form[j] + tbl.b[j] * tbl.s_form[i]))
                for j in range(n)
            ]
            for i in range(n)
        ]
    )
