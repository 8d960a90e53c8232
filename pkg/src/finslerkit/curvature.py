"""Riemann curvature, Ricci and flag curvature, plus the Randers residual
checkers that characterize vanishing curvature when the S-curvature is zero.

The Riemann operator is assembled from derivatives of the spray:

    R^i_k = 2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k
            + 2 G^j d^2G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k

Everything here differentiates *through* spray fields with jets, so any
spray that evaluates generically (closed-form or built from F) works.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .diffcore import TaylorResult, directional_derivatives, value
from .errors import DegenerateFlagError
from .metrics import FinslerField, RandersData, RiemannianField, fundamental_tensor
from .spray import (
    SprayField,
    beta_table,
    levi_civita_spray,
    randers_spray,
    spray_from_metric,
)


@dataclass
class RiemannOperator:
    """R_y as a matrix R^i_k at (x, y), with trace and optional lowered form."""

    matrix: np.ndarray
    ricci: float
    lowered: Optional[np.ndarray] = None

    def apply(self, u) -> np.ndarray:
        return self.matrix @ np.asarray(u, dtype=float)


def _basis(n, i):
    e = [0.0] * n
    e[i] = 1.0
    return e


def _spray_derivatives(G: SprayField, x, y):
    """Values and the spray partials entering R^i_k, all at (x, y).

    Returns (Gval, dGdx[k][i], mixed[k][i] = y^j d2G^i/dx^j dy^k,
    dGdy[i][j], hess[i][j][k]).
    """
    n = len(y)
    Gval = G(list(x), list(y))
    dGdx = []
    for k in range(n):
        res = directional_derivatives(lambda xs, ys: G(xs, ys), x, y, x_dirs=[(_basis(n, k), 1)])
        dGdx.append([TaylorResult(res.root[i], res.tags, res.orders).partial([1]) for i in range(n)])
    mixed = []
    for k in range(n):
        res = directional_derivatives(
            lambda xs, ys: G(xs, ys), x, y,
            x_dirs=[(list(y), 1)], y_dirs=[(_basis(n, k), 1)],
        )
        mixed.append(
            [TaylorResult(res.root[i], res.tags, res.orders).partial([1, 1]) for i in range(n)]
        )
    dGdy = [[None] * n for _ in range(n)]
    hess = [[[None] * n for _ in range(n)] for _ in range(n)]
    for j in range(n):
        for k in range(j, n):
            if j == k:
                res = directional_derivatives(
                    lambda xs, ys: G(xs, ys), x, y, y_dirs=[(_basis(n, j), 2)]
                )
                for i in range(n):
                    sub = TaylorResult(res.root[i], res.tags, res.orders)
                    dGdy[i][j] = sub.partial([1])
                    hess[i][j][j] = sub.partial([2])
            else:
                res = directional_derivatives(
                    lambda xs, ys: G(xs, ys), x, y,
                    y_dirs=[(_basis(n, j), 1), (_basis(n, k), 1)],
                )
                for i in range(n):
                    sub = TaylorResult(res.root[i], res.tags, res.orders)
                    hess[i][j][k] = hess[i][k][j] = sub.partial([1, 1])
    return Gval, dGdx, mixed, dGdy, hess


def riemann_entries(G: SprayField, x, y) -> list:
    """R^i_k as a nested list of generic scalars (jet-safe inputs allowed)."""
    n = len(y)
    Gval, dGdx, mixed, dGdy, hess = _spray_derivatives(G, x, y)
    R = [[None] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            acc = 2.0 * dGdx[k][i] - mixed[k][i]
            for j in range(n):
                acc = acc + 2.0 * (Gval[j] * hess[i][j][k]) - dGdy[i][j] * dGdy[j][k]
            R[i][k] = acc
    return R


def riemann(G: SprayField, x, y) -> RiemannOperator:
    """Riemann curvature operator at (x, y) from the four-term spray formula."""
    n = len(y)
    R = riemann_entries(G, x, y)
    mat = np.array([[float(value(R[i][k])) for k in range(n)] for i in range(n)])
    lowered = None
    if G.metric is not None:
        g = fundamental_tensor(G.metric, x, y)
        lowered = g.g @ mat
    return RiemannOperator(matrix=mat, ricci=float(np.trace(mat)), lowered=lowered)


def ricci(G: SprayField, x, y) -> float:
    """Ricci scalar: trace of the Riemann operator."""
    return riemann(G, x, y).ricci


def ricci_2d(G: SprayField, x, y) -> float:
    """Two-dimensional Ricci shortcut.

    With S = dG^1/du + dG^2/dv (u, v the tangent coordinates):

        Ric = 2 { G^1_x + G^2_y + G^1_u G^2_v - G^1_v G^2_u }
              - S^2 - (u d_x + v d_y - 2G^1 d_u - 2G^2 d_v)(S)
    """
    if G.dim != 2:
        raise ValueError("ricci_2d requires a two-dimensional spray")
    Gval, dGdx, mixed, dGdy, hess = _spray_derivatives(G, x, y)

    def S_func(xs, ys):
        r1 = directional_derivatives(lambda a, b: G(a, b)[0], xs, ys, y_dirs=[([1.0, 0.0], 1)])
        r2 = directional_derivatives(lambda a, b: G(a, b)[1], xs, ys, y_dirs=[([0.0, 1.0], 1)])
        return r1.partial([1]) + r2.partial([1])

    S0 = S_func(list(x), list(y))
    dS = []
    for k in range(2):
        res = directional_derivatives(lambda xs, ys: S_func(xs, ys), x, y, x_dirs=[(_basis(2, k), 1)])
        dS.append(res.partial([1]))
    for k in range(2):
        res = directional_derivatives(lambda xs, ys: S_func(xs, ys), x, y, y_dirs=[(_basis(2, k), 1)])
        dS.append(res.partial([1]))
    val = (
        2.0 * (dGdx[0][0] + dGdx[1][1] + dGdy[0][0] * dGdy[1][1] - dGdy[0][1] * dGdy[1][0])
        - S0 * S0
        - (y[0] * dS[0] + y[1] * dS[1] - 2.0 * Gval[0] * dS[2] - 2.0 * Gval[1] * dS[3])
    )
    return float(value(val))


def flag_curvature(F: FinslerField, x, y, u, G: Optional[SprayField] = None) -> float:
    """Flag curvature K(P, y) for the flag P = span{y, u} with pole y.

    K = g_y(R_y(u), u) / [ g_y(y,y) g_y(u,u) - g_y(y,u)^2 ].
    Raises DegenerateFlagError when u is (numerically) parallel to y.
    """
    g = fundamental_tensor(F, x, y)
    gyy = g.inner(y, y)
    guu = g.inner(u, u)
    gyu = g.inner(y, u)
    denom = gyy * guu - gyu * gyu
    if denom <= 1e-10 * gyy * guu:
        raise DegenerateFlagError("flag edge is parallel to the pole")
    if G is None:
        G = spray_from_metric(F)
    R = riemann(G, x, y)
    return float(np.asarray(u) @ g.g @ R.apply(u)) / denom


# -- curvature via a reference spray ------------------------------------------


@dataclass(frozen=True)
class DifferenceField:
    """Spray difference H^i = G^i - G_ref^i with its horizontal derivative.

    `value` evaluates H; `horizontal` evaluates
    H^i_{|k} = dH^i/dx^k + H^j d^2G_ref^i/dy^j dy^k - dH^i/dy^j dG_ref^j/dy^k.
    Both are jet-safe, and H inherits 2-homogeneity in y from the sprays.
    """

    spray: SprayField
    reference: SprayField

    def value(self, xs, ys):
        a = self.spray(xs, ys)
        b = self.reference(xs, ys)
        return [ai - bi for ai, bi in zip(a, b)]

    def horizontal(self, xs, ys):
        n = len(ys)
        H = self.value
        G_ref = self.reference
        Hval = H(xs, ys)
        dHdx = []
        for k in range(n):
            res = directional_derivatives(H, xs, ys, x_dirs=[(_basis(n, k), 1)])
            dHdx.append(
                [TaylorResult(res.root[i], res.tags, res.orders).partial([1]) for i in range(n)]
            )
        dHdy = [[None] * n for _ in range(n)]
        dRefdy = [[None] * n for _ in range(n)]
        refHess = [[[None] * n for _ in range(n)] for _ in range(n)]
        for j in range(n):
            for k in range(j, n):
                if j == k:
                    res = directional_derivatives(H, xs, ys, y_dirs=[(_basis(n, j), 2)])
                    resR = directional_derivatives(G_ref, xs, ys, y_dirs=[(_basis(n, j), 2)])
                    for i in range(n):
                        sub = TaylorResult(res.root[i], res.tags, res.orders)
                        subR = TaylorResult(resR.root[i], resR.tags, resR.orders)
                        dHdy[i][j] = sub.partial([1])
                        dRefdy[i][j] = subR.partial([1])
                        refHess[i][j][j] = subR.partial([2])
                else:
                    resR = directional_derivatives(
                        G_ref, xs, ys, y_dirs=[(_basis(n, j), 1), (_basis(n, k), 1)]
                    )
                    for i in range(n):
                        subR = TaylorResult(resR.root[i], resR.tags, resR.orders)
                        refHess[i][j][k] = refHess[i][k][j] = subR.partial([1, 1])
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for k in range(n):
                acc = dHdx[k][i]
                for j in range(n):
                    acc = acc + Hval[j] * refHess[i][j][k] - dHdy[i][j] * dRefdy[j][k]
                out[i][k] = acc
        return out


def riemann_via_difference(
    G: SprayField,
    G_ref: SprayField,
    x,
    y,
    riemann_ref: Optional[Callable] = None,
) -> RiemannOperator:
    """Assemble R from the reference spray's curvature plus H-terms,
    H^i = G^i - G_ref^i:

        R^i_k = R~^i_k + 2 H^i_{|k} - y^j (H^i_{|j})_{y^k}
                + 2 H^j (H^i)_{y^j y^k} - (H^i)_{y^j} (H^j)_{y^k}
    """
    n = len(y)
    diff = DifferenceField(spray=G, reference=G_ref)
    H = diff.value
    H_cov = diff.horizontal

    base = riemann_ref(x, y) if riemann_ref is not None else riemann(G_ref, x, y)
    Hc = H_cov(list(x), list(y))
    # y^j (H^i_{|j})_{y^k}: differentiate each column j of H_cov in y^k, then contract
    dHc = [[[None] * n for _ in range(n)] for _ in range(n)]  # [i][j][k]
    for k in range(n):
        res = directional_derivatives(
            lambda xs, ys: H_cov(xs, ys), x, y, y_dirs=[(_basis(n, k), 1)]
        )
        for i in range(n):
            for j in range(n):
                sub = TaylorResult(res.root[i][j], res.tags, res.orders)
                dHc[i][j][k] = sub.partial([1])
    Hval = H(list(x), list(y))
    dHdy = [[None] * n for _ in range(n)]
    hessH = [[[None] * n for _ in range(n)] for _ in range(n)]
    for j in range(n):
        for k in range(j, n):
            if j == k:
                res = directional_derivatives(H, x, y, y_dirs=[(_basis(n, j), 2)])
                for i in range(n):
                    sub = TaylorResult(res.root[i], res.tags, res.orders)
                    dHdy[i][j] = sub.partial([1])
                    hessH[i][j][j] = sub.partial([2])
            else:
                res = directional_derivatives(
                    H, x, y, y_dirs=[(_basis(n, j), 1), (_basis(n, k), 1)]
                )
                for i in range(n):
                    sub = TaylorResult(res.root[i], res.tags, res.orders)
                    hessH[i][j][k] = hessH[i][k][j] = sub.partial([1, 1])
    mat = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            acc = base.matrix[i][k] + 2.0 * float(value(Hc[i][k]))
            for j in range(n):
                acc -= float(value(y[j] * dHc[i][j][k]))
                acc += 2.0 * float(value(Hval[j] * hessH[i][j][k]))
                acc -= float(value(dHdy[i][j] * dHdy[j][k]))
            mat[i][k] = acc
    lowered = None
    if G.metric is not None:
        g = fundamental_tensor(G.metric, x, y)
        lowered = g.g @ mat
    return RiemannOperator(matrix=mat, ricci=float(np.trace(mat)), lowered=lowered)


# -- Randers zero-curvature residuals ------------------------------------------


@dataclass
class K0Residuals:
    """Residuals of the two vanishing-curvature conditions for S = 0 Randers data.

    residual_a is the alpha-rational block (including the Riemannian curvature
    of alpha); residual_b is the coefficient of 1/alpha.  Both vanish iff the
    full Riemann curvature vanishes, given S = 0; `s_zero_max` flags how well
    the S = 0 hypothesis holds at x.
    """

    residual_a: np.ndarray
    residual_b: np.ndarray
    s_zero_max: float


def _k0_blocks(randers: RandersData, x, y):
    """The rational and alpha^{-1} blocks of R^i_k minus the alpha-curvature term."""
    n = randers.dim
    tbl = beta_table(randers, x, order=2)
    c = tbl.contract(y)
    a2 = c.alpha2
    ylow = c.y_low
    A = np.zeros((n, n))
    B = np.zeros((n, n))
    s_j_sj0 = float(sum(tbl.s_form[j] * c.si0[j] for j in range(n)))
    for i in range(n):
        for k in range(n):
            d = 1.0 if i == k else 0.0
            a_ik = (
                (c.s00 * d - c.s0k[k] * y[i])
                + (c.sk0_cov[k] - c.s0k[k]) * y[i]
                + c.s0 * (c.s0 * d - tbl.s_form[k] * y[i])
                - (
                    a2 * sum(tbl.s_up[i][j] * tbl.s_up[j][k] for j in range(n))
                    - sum(tbl.s_up[i][j] * c.si0[j] for j in range(n)) * ylow[k]
                )
                + 3.0 * c.sk0[k] * c.si0[i]
            )
            b_ik = (
                s_j_sj0 * (a2 * d - ylow[k] * y[i])
                + a2 * (s_j_sj0 * d - sum(tbl.s_form[j] * tbl.s_up[j][k] for j in range(n)) * y[i])
                + a2 * (c.si_k0[i][k] - c.si_0k[i][k])
                - (a2 * c.si_0k[i][k] - c.si_00[i] * ylow[k])
            )
            A[i][k] = float(value(a_ik))
            B[i][k] = float(value(b_ik))
    s_zero = np.array(
        [
            [
                float(value(tbl.r[i][j] + tbl.b[i] * tbl.s_form[j] + tbl.b[j] * tbl.s_form[i]))
                for j in range(n)
            ]
            for i in range(n)
        ]
    )
    return A, B, float(np.max(np.abs(s_zero))), tbl, c


def k0_residuals(randers: RandersData, x, y) -> K0Residuals:
    """Residuals of the two curvature-vanishing conditions at (x, y).

    residual_a = Rbar^i_k + [rational block]; residual_b = [1/alpha block].
    Rbar is the Riemann curvature of alpha (Levi-Civita spray).
    """
    A, B, s_zero_max, _, _ = _k0_blocks(randers, x, y)
    Rbar = riemann(levi_civita_spray(randers.alpha), x, y).matrix
    return K0Residuals(residual_a=Rbar + A, residual_b=B, s_zero_max=s_zero_max)


@dataclass
class RicciTrace:
    """Traced curvature of an S = 0 Randers metric plus the two
    Ricci-vanishing condition residuals."""

    value: float
    trace_condition: float       # s^k_{0|k} - (n-1) s_j s^j_0
    ricci_bar_condition: float   # Ric(alpha) + (n-1)(s_{0|0}+s_0^2) - alpha^2 s^k_j s^j_k + 2 s_{k0} s^k_0


def randers_ricci_trace(randers: RandersData, x, y) -> RicciTrace:
    """Trace formula for the Ricci curvature of an S = 0 Randers metric:

        Ric = Ric(alpha) + (n-1){ s_{0|0} + s_0 s_0 } + 2 s_{k0} s^k_0
              - alpha^2 s^k_j s^j_k + 2 { s^k_{0|k} - (n-1) s_j s^j_0 } alpha
    """
    n = randers.dim
    tbl = beta_table(randers, x, order=2)
    c = tbl.contract(y)
    alpha = float(value(c.alpha2)) ** 0.5
    ric_bar = riemann(levi_civita_spray(randers.alpha), x, y).ricci
    sk0_sk0 = float(sum(c.sk0[k] * c.si0[k] for k in range(n)))
    skj_sjk = float(sum(tbl.s_up[k][j] * tbl.s_up[j][k] for k in range(n) for j in range(n)))
    sk_0k = float(sum(c.si_0k[k][k] for k in range(n)))
    s_j_sj0 = float(sum(tbl.s_form[j] * c.si0[j] for j in range(n)))
    a2 = float(value(c.alpha2))
    val = (
        ric_bar
        + (n - 1) * (float(value(c.s00)) + float(value(c.s0)) ** 2)
        + 2.0 * sk0_sk0
        - a2 * skj_sjk
        + 2.0 * (sk_0k - (n - 1) * s_j_sj0) * alpha
    )
    return RicciTrace(
        value=val,
        trace_condition=sk_0k - (n - 1) * s_j_sj0,
        ricci_bar_condition=ric_bar
        + (n - 1) * (float(value(c.s00)) + float(value(c.s0)) ** 2)
        - a2 * skj_sjk
        + 2.0 * sk0_sk0,
    )


def gauss_curvature_riemannian(alpha: RiemannianField, x) -> float:
    """Sectional (Gauss) curvature of a 2D Riemannian metric at x."""
    if alpha.dim != 2:
        raise ValueError("gauss curvature is defined for 2D metrics")
    G = levi_civita_spray(alpha)
    y = [1.0, 0.0]
    u = [0.0, 1.0]
    R = riemann(G, x, y)
    a = alpha.value(x)
    denom = float((np.array(y) @ a @ y) * (np.array(u) @ a @ u) - (np.array(y) @ a @ u) ** 2)
    return float(np.asarray(u) @ a @ R.apply(u)) / denom


def randers_riemann(randers: RandersData, x, y) -> RiemannOperator:
    """Riemann operator through the Randers closed-form spray (fast path)."""
    return riemann(randers_spray(randers), x, y)
