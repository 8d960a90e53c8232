"""Built-in metrics with analytic reference data.

Each entry couples a metric (generic Finsler field or Randers data) with
whatever closed forms are known for it: spray coefficients, covariant tables,
curvature constants, densities.  The references are test oracles, never code
paths: engine computations must reproduce them within module tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .diffcore import sqrt, value
from .errors import MetricError
from .metrics import (
    ChartDomain,
    FinslerField,
    OneFormField,
    RandersData,
    RiemannianField,
    ball_domain,
    cylinder_domain,
    whole_space_domain,
    zero_one_form,
)
from .navigation import DriftField, zermelo_riemannian


@dataclass
class Reference:
    """Optional analytic providers attached to a gallery entry."""

    flag_curvature: Optional[float] = None     # constant K, when known
    s_curvature: Optional[float] = None        # constant S (0 for the core examples)
    s_curvature_fn: Optional[Callable] = None  # S(x, y) when non-constant but closed-form
    density: Optional[float] = None            # constant sigma_F, when known
    projectively_flat: Optional[bool] = None
    spray: Optional[Callable] = None           # G^i(x, y) closed form
    spray_alpha: Optional[Callable] = None     # Levi-Civita G~^i(x, y) of alpha
    tables: Optional[Callable] = None          # x -> dict of covariant tables
    gauss_alpha: Optional[Callable] = None     # Gauss curvature of alpha (2D)
    cartan2_profile: Optional[Callable] = None # theta -> C~ ratio profile (slab)
    ricci_fn: Optional[Callable] = None        # Ric(x, y) closed form


@dataclass
class GalleryEntry:
    name: str
    params: dict
    metric: FinslerField
    randers: Optional[RandersData] = None
    drift: Optional[DriftField] = None        # navigation data used to build it
    source_alpha: Optional[RiemannianField] = None
    reference: Reference = field(default_factory=Reference)
    note: str = ""

    @property
    def dim(self) -> int:
        return self.metric.dim


# -- helpers -------------------------------------------------------------------


def _dot(u, v):
    acc = u[0] * v[0]
    for i in range(1, len(u)):
        acc = acc + u[i] * v[i]
    return acc


def euclidean_alpha(n: int, domain: Optional[ChartDomain] = None) -> RiemannianField:
    dom = domain or whole_space_domain(n)
    eye = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    return RiemannianField(dom, lambda x: eye, name=f"euclidean{n}")


# -- entries ---------------------------------------------------------------------


def euclidean(n: int = 2) -> GalleryEntry:
    """Flat Euclidean norm; everything vanishes."""
    alpha = euclidean_alpha(n)
    rd = RandersData(alpha, zero_one_form(alpha.domain), name=f"euclidean{n}")
    ref = Reference(
        flag_curvature=0.0,
        s_curvature=0.0,
        density=1.0,
        projectively_flat=True,
        spray=lambda x, y: [0.0] * n,
    )
    return GalleryEntry("euclidean", {"n": n}, rd.finsler(), randers=rd, reference=ref)


def minkowski(n: int = 2, eps: float = 0.3) -> GalleryEntry:
    """An x-independent (locally Minkowskian) non-Riemannian norm:
    F = sqrt(|y|^2 + eps * (sum y_i^4) / |y|^2).  Flat and S-free but with
    nonvanishing Cartan torsion."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    dom = whole_space_domain(n)

    def func(x, y):
        q2 = _dot(y, y)
        q4 = _dot([yi * yi for yi in y], [yi * yi for yi in y])
        return sqrt(q2 + eps * q4 / q2)

    ref = Reference(
        flag_curvature=0.0,
        s_curvature=0.0,
        projectively_flat=True,
        spray=lambda x, y: [0.0] * n,
    )
    return GalleryEntry(
        "minkowski", {"n": n, "eps": eps},
        FinslerField(dom, func, name=f"minkowski{n}"), reference=ref,
    )


def funk(n: int = 2) -> GalleryEntry:
    """Navigation metric of the Euclidean ball with inward radial drift
    v = -x: unit-ball metric with constant flag curvature -1/4, straight
    geodesics, and unit volume density."""
    dom = ball_domain(n, name=f"funk-ball{n}")
    alpha = euclidean_alpha(n, dom)
    drift = DriftField(dom, lambda x: [-xi for xi in x], name="radial")
    rd = zermelo_riemannian(alpha, drift)
    rd = RandersData(rd.alpha, rd.beta, name=f"funk{n}")
    F = rd.finsler()
    ref = Reference(
        flag_curvature=-0.25,
        density=1.0,
        projectively_flat=True,
        s_curvature_fn=lambda x, y: 0.5 * (n + 1) * float(F(list(x), list(y))),
        ricci_fn=lambda x, y: -0.25 * (n - 1) * float(F(list(x), list(y))) ** 2,
    )
    return GalleryEntry(
        "funk", {"n": n}, F, randers=rd, drift=drift, source_alpha=alpha, reference=ref,
        note="shortest-time deformation of the flat ball by the inward radial field",
    )


def shen_flat(n: int = 2) -> GalleryEntry:
    """Projectively flat zero-curvature metric on the unit ball:

        F = ( sqrt(|y|^2 - (|x|^2 |y|^2 - <x,y>^2)) + <x,y> )^2
            / ( (1 - |x|^2)^2 sqrt(|y|^2 - (|x|^2 |y|^2 - <x,y>^2)) )

    The radicand is clamped at zero when a float rounding error drives it
    slightly negative near the boundary of its positivity set.
    """
    dom = ball_domain(n, name=f"shen-ball{n}")

    def func(x, y):
        xy = _dot(x, y)
        y2 = _dot(y, y)
        x2 = _dot(x, x)
        rad = y2 - (x2 * y2 - xy * xy)
        base = value(rad)
        if isinstance(base, np.ndarray):
            if np.any(base < -1e-12 * np.asarray(value(y2))):
                raise MetricError("degenerate radicand outside the unit ball")
            if isinstance(rad, np.ndarray):
                rad = np.maximum(rad, 1e-300)
        elif float(base) <= 0.0:
            if float(base) < -1e-12 * float(value(y2)):
                raise MetricError("degenerate radicand outside the unit ball")
            rad = 1e-300  # rounding guard at the boundary of positivity
        root = sqrt(rad)
        one_minus = 1.0 - x2
        num = root + xy
        return num * num / (one_minus * one_minus * root)

    ref = Reference(flag_curvature=0.0, projectively_flat=True)
    return GalleryEntry(
        "shen_flat", {"n": n}, FinslerField(dom, func, name=f"shen-flat{n}"), reference=ref,
    )


# -- the rotating-disk and rotating-cylinder metrics -----------------------------


def _rotation_randers(n: int, dom: ChartDomain) -> tuple[RandersData, DriftField, RiemannianField]:
    """Navigation data of flat space with the rotation field (-x2, x1, 0, ...)."""
    alpha = euclidean_alpha(n, dom)

    def vfield(x):
        out = [0.0] * n
        out[0] = -x[1]
        out[1] = x[0]
        return out

    drift = DriftField(dom, vfield, name="rotation")

    def matrix(x):
        delta = 1.0 - (x[0] * x[0] + x[1] * x[1])
        w = vfield(x)
        return [
            [(w[i] * w[j] + (delta if i == j else 0.0)) / (delta * delta) for j in range(n)]
            for i in range(n)
        ]

    def covector(x):
        delta = 1.0 - (x[0] * x[0] + x[1] * x[1])
        return [x[1] / delta, -x[0] / delta] + [0.0] * (n - 2)

    rd = RandersData(
        alpha=RiemannianField(dom, matrix, name=f"rotation-alpha{n}"),
        beta=OneFormField(dom, covector, name=f"rotation-beta{n}"),
        name=f"rotation{n}",
    )
    return rd, drift, alpha


def _rotation_tables(x) -> dict:
    """Closed-form covariant tables of the rotating-disk Randers data."""
    X, Y = x[0], x[1]
    delta = 1.0 - X * X - Y * Y
    d2 = delta * delta
    a = np.array([[ (1 - X * X) / d2, -X * Y / d2], [-X * Y / d2, (1 - Y * Y) / d2]])
    b = np.array([Y / delta, -X / delta])
    r = np.array([[-2 * X * Y / d2, (X * X - Y * Y) / d2], [(X * X - Y * Y) / d2, 2 * X * Y / d2]])
    s = np.array([[0.0, 1.0 / d2], [-1.0 / d2, 0.0]])
    s_form = np.array([X / delta, Y / delta])
    return {"a": a, "b": b, "r": r, "s": s, "s_form": s_form}


def _rotation_spray_alpha(x, y):
    """Levi-Civita coefficients of the rotating-disk alpha."""
    X, Y = x[0], x[1]
    u, v = y[0], y[1]
    delta = 1.0 - X * X - Y * Y
    beta_t = -(-Y * u + X * v) / delta
    xuyv = X * u + Y * v
    g1 = -X * (u * u + v * v) / (2.0 * delta) - (Y * xuyv - v) / delta * beta_t + xuyv / delta * u
    g2 = -Y * (u * u + v * v) / (2.0 * delta) + (X * xuyv - u) / delta * beta_t + xuyv / delta * v
    return [g1, g2]


def _rotation_spray(n):
    """Closed-form spray of the rotating metric (disk n=2, cylinder n>=3)."""

    def spray(x, y):
        X, Y = x[0], x[1]
        u, v = y[0], y[1]
        delta = 1.0 - X * X - Y * Y
        y2 = _dot(y, y)
        rad = (-Y * u + X * v) ** 2 + y2 * delta
        F = (sqrt(rad) - (-Y * u + X * v)) / delta
        xuyv = X * u + Y * v
        g1 = -X * y2 / (2.0 * delta) - (Y * xuyv - v) / delta * F
        g2 = -Y * y2 / (2.0 * delta) + (X * xuyv - u) / delta * F
        return [g1, g2] + [0.0] * (n - 2)

    return spray


def rotation2d() -> GalleryEntry:
    """Rotating-disk metric: zero flag curvature and zero S-curvature on the
    unit disk, not projectively flat."""
    dom = ball_domain(2, name="disk")
    rd, drift, alpha = _rotation_randers(2, dom)
    ref = Reference(
        flag_curvature=0.0,
        s_curvature=0.0,
        density=1.0,
        projectively_flat=False,
        spray=_rotation_spray(2),
        spray_alpha=_rotation_spray_alpha,
        tables=_rotation_tables,
        gauss_alpha=lambda x: -(5.0 + x[0] ** 2 + x[1] ** 2) / (1.0 - x[0] ** 2 - x[1] ** 2),
    )
    return GalleryEntry(
        "rotation2d", {}, rd.finsler(), randers=rd, drift=drift, source_alpha=alpha,
        reference=ref, note="unit disk stirred by the rotation field (-y, x)",
    )


def cylinder(n: int = 3) -> GalleryEntry:
    """Rotating-cylinder metric in dimension n >= 3: the first two coordinates
    carry the rotation, the rest are flat; K = 0 and S = 0."""
    if n < 3:
        raise ValueError("cylinder requires n >= 3")
    dom = cylinder_domain(n)
    rd, drift, alpha = _rotation_randers(n, dom)
    ref = Reference(
        flag_curvature=0.0,
        s_curvature=0.0,
        density=1.0,
        projectively_flat=False,
        spray=_rotation_spray(n),
    )
    return GalleryEntry(
        "cylinder", {"n": n}, rd.finsler(), randers=rd, drift=drift, source_alpha=alpha,
        reference=ref, note="rotating tank: drift (-y, x, 0, ...) on the solid cylinder",
    )


# -- rotating three-sphere --------------------------------------------------------


def _s3_alpha(dom: ChartDomain) -> RiemannianField:
    """Round metric of the unit three-sphere in central-projection coordinates:
    a_ij = [ (1+|x|^2) delta_ij - x_i x_j ] / (1+|x|^2)^2."""

    def matrix(x):
        s2 = 1.0 + _dot(x, x)
        return [
            [((s2 if i == j else 0.0) - x[i] * x[j]) / (s2 * s2) for j in range(3)]
            for i in range(3)
        ]

    return RiemannianField(dom, matrix, name="round-s3")


def _s3_unit_field(x):
    """Unit left-invariant field of the quaternionic frame, pushed to the chart.

    With the chart q = (1, x)/sqrt(1+|x|^2) and right multiplication by the
    imaginary unit i, the integral curves push forward to
    W = (1 + x1^2, x1 x2 + x3, x1 x3 - x2); the round metric gives |W| = 1.
    """
    x1, x2, x3 = x[0], x[1], x[2]
    return [1.0 + x1 * x1, x1 * x2 + x3, x1 * x3 - x2]


def bao_shen_s3(eps: float = 0.3) -> GalleryEntry:
    """Navigation deformation of the round three-sphere by eps times a unit
    left-invariant (Killing) field; constant flag curvature 1 for |eps| < 1."""
    if not abs(eps) < 1.0:
        raise ValueError("|eps| must be < 1")
    dom = ChartDomain(
        dim=3,
        contains=lambda x: float(_dot(x, x)) < 9.0,
        name="s3-chart",
        sample_box=((-0.6, 0.6),) * 3,
    )
    alpha = _s3_alpha(dom)
    drift = DriftField(dom, lambda x: [eps * w for w in _s3_unit_field(x)], name="hopf")
    rd = zermelo_riemannian(alpha, drift)
    rd = RandersData(rd.alpha, rd.beta, name=f"bao-shen-s3({eps})")
    ref = Reference(flag_curvature=1.0, s_curvature=0.0, projectively_flat=False)
    return GalleryEntry(
        "bao_shen_s3", {"eps": eps}, rd.finsler(), randers=rd, drift=drift,
        source_alpha=alpha, reference=ref,
        note="round sphere in central projection, drifted along the quaternionic frame",
    )


# -- constant-coefficient slab -----------------------------------------------------


def slab_kappa(kappa: float = 0.5) -> GalleryEntry:
    """Flat Randers norm F = |y| + kappa y_1 on the plane.

    Locally Minkowskian, with the exact second-torsion angle profile
    6 k (k + cos t)/(1 + k cos t) - 7.5 k cos t on the unit circle.
    """
    if not 0.0 <= kappa < 1.0:
        raise ValueError("kappa must lie in [0, 1)")
    dom = whole_space_domain(2)
    alpha = euclidean_alpha(2, dom)
    beta = OneFormField(dom, lambda x: [kappa, 0.0], name=f"slab-form({kappa})")
    rd = RandersData(alpha, beta, name=f"slab({kappa})")

    def profile(theta):
        c = np.cos(theta)
        return 6.0 * kappa * (kappa + c) / (1.0 + kappa * c) - 7.5 * kappa * c

    ref = Reference(
        flag_curvature=0.0,
        s_curvature=0.0,
        density=(1.0 - kappa * kappa) ** 1.5,
        projectively_flat=True,
        spray=lambda x, y: [0.0, 0.0],
        cartan2_profile=profile,
    )
    return GalleryEntry(
        "slab", {"kappa": kappa}, rd.finsler(), randers=rd, reference=ref,
    )


# -- registry ------------------------------------------------------------------------


_BUILDERS = {
    "euclidean": euclidean,
    "minkowski": minkowski,
    "funk": funk,
    "shen_flat": shen_flat,
    "rotation2d": rotation2d,
    "cylinder": cylinder,
    "bao_shen_s3": bao_shen_s3,
    "slab": slab_kappa,
    "slab_kappa": slab_kappa,
}


def names() -> list[str]:
    return sorted(set(_BUILDERS) - {"slab_kappa"})


def make(name: str, **params) -> GalleryEntry:
    """Build a gallery entry by name; raises ValueError for unknown names or
    out-of-range parameters."""
    key = name.replace("-", "_")
    if key not in _BUILDERS:
        raise ValueError(f"unknown gallery metric {name!r}; known: {', '.join(names())}")
    return _BUILDERS[key](**params)


def parse_spec(spec: str) -> GalleryEntry:
    """Parse a CLI metric spec of the form `name[:key=val,...]`."""
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            k, eq, v = item.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {item!r} in metric spec {spec!r}")
            try:
                params[k.strip()] = int(v)
            except ValueError:
                try:
                    params[k.strip()] = float(v)
                except ValueError:
                    raise ValueError(f"non-numeric parameter {item!r} in metric spec {spec!r}")
    return make(name.strip(), **params)
