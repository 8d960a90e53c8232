"""Geodesic coefficients, Levi-Civita data, covariant tables for beta,
geodesic integration and projective-flatness residuals.

Spray fields evaluate on jets, so curvature operators can differentiate
through them; the generic construction from F and the Randers closed form
are independent routes that must agree and are cross-checked in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _linalg
from .diffcore import TaylorResult, directional_derivatives, sqrt, value
from .errors import DomainError, IntegrationError, MetricError
from .metrics import (
    ChartDomain,
    FinslerField,
    RandersData,
    RiemannianField,
    metric_entries,
)


@dataclass(frozen=True)
class SprayField:
    """Geodesic coefficients G^i(x, y) as an evaluable vector field.

    `provenance` records how the coefficients were built:
    generic-from-F, randers-closed-form, levi-civita or analytic-gallery.
    """

    domain: ChartDomain
    func: Callable
    provenance: str
    metric: Optional[FinslerField] = None

    def __call__(self, x, y):
        return self.func(x, y)

    @property
    def dim(self) -> int:
        return self.domain.dim


def _basis(n, i):
    e = [0.0] * n
    e[i] = 1.0
    return e


# -- generic spray from the metric itself ------------------------------------


def spray_from_metric(F: FinslerField) -> SprayField:
    """Spray with G^i = 1/4 g^{il} { [F^2]_{x^k y^l} y^k - [F^2]_{x^l} }.

    This is the standard contraction of the displayed Christoffel-style
    formula; it needs one directional x-derivative along y and one x-gradient
    of F^2 besides g itself, and evaluates on jets.
    """
    n = F.dim

    def G(x, y):
        g = metric_entries(F, x, y)
        g_inv, _ = _linalg.spd_factor(g)
        rhs = []
        for l in range(n):
            mixed = directional_derivatives(
                F.squared, x, y, x_dirs=[(y, 1)], y_dirs=[(_basis(n, l), 1)]
            ).partial([1, 1])
            grad = directional_derivatives(
                F.squared, x, y, x_dirs=[(_basis(n, l), 1)]
            ).partial([1])
            rhs.append(mixed - grad)
        return [0.25 * _linalg.sum_prod(g_inv[i], rhs) for i in range(n)]

    return SprayField(F.domain, G, provenance="generic-from-F", metric=F)


# -- Levi-Civita data ----------------------------------------------------------


@dataclass
class ChristoffelField:
    """Levi-Civita coefficients Gamma^i_{jk}(x) of a Riemannian metric."""

    x: tuple
    gamma: np.ndarray  # (n, n, n), symmetric in the last two slots

    def spray_value(self, y) -> np.ndarray:
        return 0.5 * np.einsum("ijk,j,k->i", self.gamma, y, y)


def _christoffel_entries(alpha: RiemannianField, x):
    """Gamma as nested lists of generic scalars (jet-safe)."""
    n = alpha.dim
    a0 = alpha.matrix(x)
    da = [None] * n  # da[k][i][j] = d a_ij / d x^k
    for k in range(n):
        res = directional_derivatives(
            lambda xs, ys: alpha.matrix(xs), x, [], x_dirs=[(_basis(n, k), 1)]
        )
        da[k] = [
            [TaylorResult(res.root[i][j], res.tags, res.orders).partial([1]) for j in range(n)]
            for i in range(n)
        ]
    a_inv, _ = _linalg.spd_factor(a0)
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                acc = None
                for l in range(n):
                    t = a_inv[i][l] * (da[j][k][l] + da[k][j][l] - da[l][j][k])
                    acc = t if acc is None else acc + t
                gamma[i][j][k] = gamma[i][k][j] = acc * 0.5
    return gamma


def christoffels(alpha: RiemannianField, x) -> ChristoffelField:
    """Levi-Civita coefficients at a chart point (floats)."""
    gamma = _christoffel_entries(alpha, x)
    n = alpha.dim
    arr = np.array(
        [[[float(value(gamma[i][j][k])) for k in range(n)] for j in range(n)] for i in range(n)]
    )
    return ChristoffelField(x=tuple(float(v) for v in x), gamma=arr)


def levi_civita_spray(alpha: RiemannianField) -> SprayField:
    """Quadratic spray G^i = 1/2 Gamma^i_{jk}(x) y^j y^k of a Riemannian metric."""
    n = alpha.dim

    def G(x, y):
        gamma = _christoffel_entries(alpha, x)
        out = []
        for i in range(n):
            acc = None
            for j in range(n):
                for k in range(n):
                    t = gamma[i][j][k] * y[j] * y[k]
                    acc = t if acc is None else acc + t
            out.append(acc * 0.5)
        return out

    return SprayField(alpha.domain, G, provenance="levi-civita", metric=alpha.finsler())


# -- covariant tables for beta -------------------------------------------------


@dataclass
class BetaTable:
    """Pointwise covariant data of (alpha, beta) used by Randers formulas.

    All index gymnastics use a^{ij}; `s_up_cov[i][j][k]` is s^i_{j|k} and
    `s_form_cov[j][k]` is s_{j|k}.  Second-order entries are present only
    when the table was built with order=2.
    """

    x: tuple
    a: list
    a_inv: list
    b: list
    gamma: list
    b_cov: list        # b_{i|j}
    r: list            # r_ij
    s: list            # s_ij
    s_up: list         # s^i_j
    s_form: list       # s_j = b_i s^i_j
    s_form_cov: Optional[list] = None  # s_{j|k}
    s_up_cov: Optional[list] = None    # s^i_{j|k}

    def contract(self, y) -> "BetaContractions":
        n = len(self.b)
        y = list(y)
        y_low = _linalg.matvec(self.a, y)
        alpha2 = _linalg.sum_prod(y_low, y)
        s0 = _linalg.sum_prod(self.s_form, y)
        r00 = _linalg.quad_form(self.r, y, y)
        si0 = [_linalg.sum_prod(self.s_up[i], y) for i in range(n)]
        sk0 = [_linalg.sum_prod(self.s[k], y) for k in range(n)]
        out = BetaContractions(
            y=y, y_low=y_low, alpha2=alpha2, r00=r00, s0=s0, si0=si0, sk0=sk0
        )
        if self.s_form_cov is not None:
            out.s00 = _linalg.quad_form(self.s_form_cov, y, y)
            out.s0k = [
                _linalg.sum_prod([self.s_form_cov[p][k] for p in range(n)], y)
                for k in range(n)
            ]
            out.sk0_cov = [_linalg.sum_prod(self.s_form_cov[k], y) for k in range(n)]
            out.si_00 = [
                _linalg.quad_form(self.s_up_cov[i], y, y) for i in range(n)
            ]
            out.si_k0 = [
                [_linalg.sum_prod(self.s_up_cov[i][k], y) for k in range(n)]
                for i in range(n)
            ]
            out.si_0k = [
                [
                    _linalg.sum_prod([self.s_up_cov[i][p][k] for p in range(n)], y)
                    for k in range(n)
                ]
                for i in range(n)
            ]
        return out


@dataclass
class BetaContractions:
    """y-contractions of a BetaTable (index 0 means contraction with y)."""

    y: list
    y_low: list
    alpha2: object
    r00: object
    s0: object
    si0: list
    sk0: list              # s_{k0} = s_{kp} y^p
    s00: object = None     # s_{0|0}
    s0k: Optional[list] = None   # s_{0|k}
    sk0_cov: Optional[list] = None  # s_{k|0}
    si_00: Optional[list] = None    # s^i_{0|0}
    si_k0: Optional[list] = None    # s^i_{k|0}
    si_0k: Optional[list] = None    # s^i_{0|k}


def _vector_partials(fn, x, n, order):
    """Values, first and (optionally) second partials of a vector-valued x-function."""
    vals = fn(x)
    m = len(vals)
    d1 = [[None] * n for _ in range(m)]  # d1[i][k] = d f_i / dx^k
    d2 = [[[None] * n for _ in range(n)] for _ in range(m)] if order >= 2 else None
    for k in range(n):
        for l in range(k, n):
            if order < 2 and l != k:
                continue
            if k == l:
                res = directional_derivatives(
                    lambda xs, ys: fn(xs), x, [], x_dirs=[(_basis(n, k), 2 if order >= 2 else 1)]
                )
                for i in range(m):
                    sub = TaylorResult(res.root[i], res.tags, res.orders)
                    d1[i][k] = sub.partial([1])
                    if order >= 2:
                        d2[i][k][k] = sub.partial([2])
            else:
                res = directional_derivatives(
                    lambda xs, ys: fn(xs), x, [],
                    x_dirs=[(_basis(n, k), 1), (_basis(n, l), 1)],
                )
                for i in range(m):
                    sub = TaylorResult(res.root[i], res.tags, res.orders)
                    d2[i][k][l] = d2[i][l][k] = sub.partial([1, 1])
    return vals, d1, d2


def _beta_raw(randers: RandersData, x, order: int):
    """Raw partials of a_ij and b_i up to the requested x-order."""
    n = randers.dim
    a_flat = lambda xs: [e for row in randers.alpha.matrix(xs) for e in row]
    a_vals, a_d1, a_d2 = _vector_partials(a_flat, x, n, order)
    b_vals, b_d1, b_d2 = _vector_partials(randers.beta.covector, x, n, order)
    a0 = [[a_vals[i * n + j] for j in range(n)] for i in range(n)]
    da = [[[a_d1[i * n + j][k] for k in range(n)] for j in range(n)] for i in range(n)]
    d2a = None
    if order >= 2:
        d2a = [
            [[[a_d2[i * n + j][k][l] for l in range(n)] for k in range(n)] for j in range(n)]
            for i in range(n)
        ]
        d2b = [[[b_d2[i][k][l] for l in range(n)] for k in range(n)] for i in range(n)]
    else:
        d2b = None
    db = [[b_d1[i][k] for k in range(n)] for i in range(n)]
    return a0, da, d2a, b_vals, db, d2b


def beta_table(randers: RandersData, x, order: int = 2) -> BetaTable:
    """Covariant derivative tables of beta with respect to alpha at x.

    Second covariant derivatives are assembled from raw coordinate partials
    plus Christoffel corrections, so the same pipeline serves any Randers
    data, not just metrics with closed-form tables.
    """
    n = randers.dim
    a0, da, d2a, b, db, d2b = _beta_raw(randers, x, order)
    a_inv, _ = _linalg.spd_factor(a0)

    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                acc = None
                for l in range(n):
                    t = a_inv[i][l] * (da[l][j][k] + da[l][k][j] - da[j][k][l])
                    acc = t if acc is None else acc + t
                gamma[i][j][k] = gamma[i][k][j] = acc * 0.5

    # note index order: da[i][j][k] = d a_{i j} / d x^k
    b_cov = [
        [
            db[i][j] - _sum(b[l] * gamma[l][i][j] for l in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    r = [[(b_cov[i][j] + b_cov[j][i]) * 0.5 for j in range(n)] for i in range(n)]
    s = [[(b_cov[i][j] - b_cov[j][i]) * 0.5 for j in range(n)] for i in range(n)]
    s_up = [[_sum(a_inv[i][p] * s[p][j] for p in range(n)) for j in range(n)] for i in range(n)]
    s_form = [_sum(b[i] * s_up[i][j] for i in range(n)) for j in range(n)]

    table = BetaTable(
        x=tuple(x), a=a0, a_inv=a_inv, b=b, gamma=gamma,
        b_cov=b_cov, r=r, s=s, s_up=s_up, s_form=s_form,
    )
    if order < 2:
        return table

    # raw coordinate partials of s_ij, a^{ij}, s^i_j and s_j
    ds = [
        [[(d2b[i][j][k] - d2b[j][i][k]) * 0.5 for k in range(n)] for j in range(n)]
        for i in range(n)
    ]
    d_ainv = [
        [
            [
                -_sum(
                    a_inv[i][p] * da[p][q][k] * a_inv[q][j]
                    for p in range(n)
                    for q in range(n)
                )
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    d_sup = [
        [
            [
                _sum(d_ainv[i][p][k] * s[p][j] + a_inv[i][p] * ds[p][j][k] for p in range(n))
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    d_sform = [
        [
            _sum(db[i][k] * s_up[i][j] + b[i] * d_sup[i][j][k] for i in range(n))
            for k in range(n)
        ]
        for j in range(n)
    ]

    # covariant derivatives: 1-form s_j and (1,1)-tensor s^i_j
    s_form_cov = [
        [
            d_sform[j][k] - _sum(s_form[l] * gamma[l][j][k] for l in range(n))
            for k in range(n)
        ]
        for j in range(n)
    ]
    s_up_cov = [
        [
            [
                d_sup[i][j][k]
                + _sum(gamma[i][l][k] * s_up[l][j] for l in range(n))
                - _sum(gamma[l][j][k] * s_up[i][l] for l in range(n))
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    table.s_form_cov = s_form_cov
    table.s_up_cov = s_up_cov
    return table


def _sum(it):
    acc = None
    for t in it:
        acc = t if acc is None else acc + t
    return 0.0 if acc is None else acc


# -- Randers closed-form spray -------------------------------------------------


def randers_spray(randers: RandersData) -> SprayField:
    """Spray via G^i = G~^i + P y^i + Q^i with
    P = (r_00 - 2 alpha s_0) / (2F) and Q^i = alpha s^i_0."""
    n = randers.dim

    def G(x, y):
        tbl = beta_table(randers, x, order=1)
        c = tbl.contract(y)
        alpha = sqrt(c.alpha2)
        beta_v = _linalg.sum_prod(tbl.b, y)
        P = (c.r00 - 2.0 * alpha * c.s0) / (2.0 * (alpha + beta_v))
        out = []
        for i in range(n):
            gt = None
            for j in range(n):
                for k in range(n):
                    t = tbl.gamma[i][j][k] * y[j] * y[k]
                    gt = t if gt is None else gt + t
            out.append(gt * 0.5 + P * y[i] + alpha * c.si0[i])
        return out

    return SprayField(
        randers.domain, G, provenance="randers-closed-form", metric=randers.finsler()
    )


# -- geodesics -----------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled geodesic: times, positions, velocities and an exit flag."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    boundary_exit: bool
    speed: Optional[np.ndarray] = None

    def rows(self):
        for k in range(len(self.t)):
            yield self.t[k], self.x[k], self.v[k]


def geodesic_integrate(
    G: SprayField,
    x0: Sequence[float],
    y0: Sequence[float],
    T: float,
    dt: float = 1e-3,
    speed_check: Optional[FinslerField] = None,
    speed_rtol: float = 0.01,
    guard: Optional[Callable] = None,
) -> Trajectory:
    """Fixed-step classical Runge-Kutta solution of x'' + 2 G(x, x') = 0.

    Integration stops with `boundary_exit=True` when the path leaves the
    chart domain (or the optional guard fails).  If `speed_check` is given,
    F(x'(t)) is recorded and a drift beyond `speed_rtol` raises
    IntegrationError.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    G.domain.require(x0)
    n = len(x0)
    steps = max(1, int(round(abs(T) / dt)))
    h = (T / steps) if T != 0 else dt

    def rhs(state):
        x = state[:n]
        v = state[n:]
        acc = G(list(x), list(v))
        return np.concatenate([v, -2.0 * np.array([float(value(a)) for a in acc])])

    state = np.concatenate([np.asarray(x0, dtype=float), np.asarray(y0, dtype=float)])
    ts = [0.0]
    xs = [state[:n].copy()]
    vs = [state[n:].copy()]
    speeds = None
    f0 = None
    if speed_check is not None:
        f0 = float(speed_check(list(state[:n]), list(state[n:])))
        speeds = [f0]
    exited = False
    for k in range(steps):
        try:
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * h * k1)
            k3 = rhs(state + 0.5 * h * k2)
            k4 = rhs(state + h * k3)
        except (MetricError, DomainError):
            # a Runge-Kutta stage left the chart; stop at the last good state
            exited = True
            break
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xk = state[:n]
        if not G.domain.contains(xk) or (guard is not None and not guard(xk)):
            exited = True
            break
        ts.append((k + 1) * h)
        xs.append(xk.copy())
        vs.append(state[n:].copy())
        if speed_check is not None:
            fk = float(speed_check(list(xk), list(state[n:])))
            speeds.append(fk)
            if abs(fk - f0) > speed_rtol * abs(f0):
                raise IntegrationError(
                    f"geodesic speed drifted from {f0} to {fk} at t={(k + 1) * h}"
                )
    return Trajectory(
        t=np.array(ts),
        x=np.array(xs),
        v=np.array(vs),
        boundary_exit=exited,
        speed=None if speeds is None else np.array(speeds),
    )


def projective_residual(G: SprayField, x, y) -> np.ndarray:
    """Antisymmetric matrix G^i y^j - G^j y^i; zero iff G is proportional to y.

    Chart-level proxy for straight-line geodesics (projective flatness in the
    chart): the matrix vanishes at (x, y) exactly when G^i = P y^i there.
    """
    gv = np.array([float(value(t)) for t in G(list(x), list(y))])
    yv = np.asarray(y, dtype=float)
    return np.outer(gv, yv) - np.outer(yv, gv)
