"""Metric representations and the pointwise tensors built directly from F.

A Finsler metric is represented by its evaluable norm F(x, y) on the slit
tangent bundle of a single chart.  Riemannian metrics and Randers data
(alpha + beta) are structured special cases.  From F alone this module
computes the fundamental tensor g_y, the first and second Cartan torsions,
and sampled estimates of their pointwise norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import _linalg
from .diffcore import directional_derivatives, sqrt, value
from .errors import DomainError, MetricError

BOUNDARY_BETA_GUARD = 1.0 - 1e-12


@dataclass(frozen=True)
class ChartDomain:
    """An open subset of R^n described by a predicate plus a sampling box."""

    dim: int
    contains: Callable[[Sequence[float]], bool]
    name: str
    sample_box: tuple = ()

    def require(self, x) -> None:
        if not self.contains(x):
            raise DomainError(f"point {tuple(float(v) for v in x)} outside domain {self.name}")

    def sample_points(self, n: int, seed: int, shrink: float = 1.0) -> np.ndarray:
        """Deterministic interior points, rejection-sampled from the box."""
        if not self.sample_box:
            raise ValueError(f"domain {self.name} has no sampling box")
        rng = np.random.default_rng([seed, 0xD0])
        lo = np.array([b[0] for b in self.sample_box])
        hi = np.array([b[1] for b in self.sample_box])
        mid = 0.5 * (lo + hi)
        lo = mid + shrink * (lo - mid)
        hi = mid + shrink * (hi - mid)
        out = []
        while len(out) < n:
            cand = rng.uniform(lo, hi, size=(4 * n, self.dim))
            for row in cand:
                if self.contains(row):
                    out.append(row)
                    if len(out) == n:
                        break
        return np.array(out)


def ball_domain(n: int, radius: float = 1.0, name: str = "", margin: float = 1e-9) -> ChartDomain:
    # the sampling box stays clear of the rim, where round-off is amplified
    # by the metric blow-up; the chart predicate itself covers the open ball
    r2 = (radius - margin) ** 2
    return ChartDomain(
        dim=n,
        contains=lambda x: float(sum(v * v for v in x)) < r2,
        name=name or f"ball{n}(r={radius})",
        sample_box=tuple((-radius * 0.62, radius * 0.62) for _ in range(n)),
    )


def whole_space_domain(n: int, box: float = 1.0, name: str = "") -> ChartDomain:
    return ChartDomain(
        dim=n,
        contains=lambda x: True,
        name=name or f"R^{n}",
        sample_box=tuple((-box, box) for _ in range(n)),
    )


def cylinder_domain(n: int, radius: float = 1.0, margin: float = 1e-9) -> ChartDomain:
    r2 = (radius - margin) ** 2
    return ChartDomain(
        dim=n,
        contains=lambda x: float(x[0] * x[0] + x[1] * x[1]) < r2,
        name=f"cylinder{n}(r={radius})",
        sample_box=((-0.62, 0.62), (-0.62, 0.62)) + tuple((-1.0, 1.0) for _ in range(n - 2)),
    )


@dataclass(frozen=True)
class FinslerField:
    """A Finsler metric as an evaluable scalar F(x, y), y != 0.

    The callable must be written with generic arithmetic (diffcore.sqrt and
    friends) so it also evaluates on jets and on arrays of batched points.
    """

    domain: ChartDomain
    func: Callable
    name: str = "finsler"

    def __call__(self, x, y):
        return self.func(x, y)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def squared(self, x, y):
        f = self.func(x, y)
        return f * f


@dataclass(frozen=True)
class RiemannianField:
    """Riemannian metric a_ij(x); the callable returns an n x n nested list."""

    domain: ChartDomain
    matrix: Callable
    name: str = "riemannian"

    @property
    def dim(self) -> int:
        return self.domain.dim

    def value(self, x) -> np.ndarray:
        return np.array(self.matrix(x), dtype=float)

    def norm(self, x, y):
        a = self.matrix(x)
        return sqrt(_linalg.quad_form(a, y, y))

    def finsler(self) -> FinslerField:
        return FinslerField(self.domain, lambda x, y: self.norm(x, y), name=self.name)


@dataclass(frozen=True)
class OneFormField:
    """A 1-form b_i(x); the callable returns a length-n list."""

    domain: ChartDomain
    covector: Callable
    name: str = "one-form"

    def value(self, x) -> np.ndarray:
        return np.array(self.covector(x), dtype=float)

    def pairing(self, x, y):
        b = self.covector(x)
        return _linalg.sum_prod(b, y)


def zero_one_form(domain: ChartDomain) -> OneFormField:
    n = domain.dim
    return OneFormField(domain, lambda x: [0.0] * n, name="zero")


@dataclass(frozen=True)
class RandersData:
    """Randers structure F = alpha + beta with ||beta||_alpha < 1."""

    alpha: RiemannianField
    beta: OneFormField
    name: str = "randers"

    @property
    def domain(self) -> ChartDomain:
        return self.alpha.domain

    @property
    def dim(self) -> int:
        return self.alpha.dim

    def __call__(self, x, y):
        return self.alpha.norm(x, y) + self.beta.pairing(x, y)

    @cached_property
    def field(self) -> FinslerField:
        return FinslerField(self.domain, self.__call__, name=self.name)

    def finsler(self) -> FinslerField:
        return self.field


def beta_norm(randers: RandersData, x) -> float:
    """||beta||_alpha(x) = sqrt(a^{ij} b_i b_j); must be < 1 for validity."""
    a = [[float(value(e)) for e in row] for row in randers.alpha.matrix(x)]
    b = [float(value(e)) for e in randers.beta.covector(x)]
    a_inv, _ = _linalg.spd_factor(a)
    return math.sqrt(max(_linalg.quad_form(a_inv, b, b), 0.0))


def require_valid_randers(randers: RandersData, x) -> None:
    nb = beta_norm(randers, x)
    if nb >= BOUNDARY_BETA_GUARD:
        raise MetricError(f"||beta||_alpha = {nb} at {tuple(x)}: metric degenerates")


# -- fundamental tensor -----------------------------------------------------


@dataclass
class FundamentalTensor:
    """g_ij(x, y) = 1/2 d^2(F^2)/dy^i dy^j with its inverse and determinant."""

    g: np.ndarray
    g_inv: np.ndarray
    det: float

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.g @ np.asarray(v))


def metric_entries(F: FinslerField, x, y) -> list:
    """Entries of g as a nested list of generic scalars (jet-safe)."""
    n = len(y)
    g = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            if i == j:
                res = directional_derivatives(F.squared, x, y, y_dirs=[(_basis(n, i), 2)])
                gij = res.partial([2])
            else:
                res = directional_derivatives(
                    F.squared, x, y, y_dirs=[(_basis(n, i), 1), (_basis(n, j), 1)]
                )
                gij = res.partial([1, 1])
            g[i][j] = g[j][i] = gij * 0.5
    return g


def _basis(n, i):
    e = [0.0] * n
    e[i] = 1.0
    return e


def _require_nonzero(y):
    if all(float(value(v)) == 0.0 for v in y):
        raise MetricError("tangent vector must be nonzero (slit tangent bundle)")


def fundamental_tensor(F: FinslerField, x, y) -> FundamentalTensor:
    """Fundamental tensor at (x, y); raises MetricError when not PD."""
    _require_nonzero(y)
    g = metric_entries(F, x, y)
    g_arr = np.array([[float(value(e)) for e in row] for row in g])
    try:
        L = np.linalg.cholesky(g_arr)
    except np.linalg.LinAlgError as e:
        raise MetricError(f"fundamental tensor not positive definite at x={tuple(x)}") from e
    inv_l = np.linalg.inv(L)
    g_inv = inv_l.T @ inv_l
    det = float(np.prod(np.diag(L)) ** 2)
    return FundamentalTensor(g=g_arr, g_inv=g_inv, det=det)


# -- Cartan torsions ---------------------------------------------------------


def cartan_first(F: FinslerField, x, y, u, v, w):
    """First Cartan torsion C_y(u, v, w): quarter of the third y-derivative of F^2."""
    res = directional_derivatives(F.squared, x, y, y_dirs=[(u, 1), (v, 1), (w, 1)])
    return res.partial([1, 1, 1]) * 0.25


def cartan_second(F: FinslerField, x, y, u, v, w, z):
    """Second Cartan torsion C~_y(u, v, w, z): quarter of the fourth y-derivative."""
    res = directional_derivatives(F.squared, x, y, y_dirs=[(u, 1), (v, 1), (w, 1), (z, 1)])
    return res.partial([1, 1, 1, 1]) * 0.25


# -- torsion norms ------------------------------------------------------------
#
# The pointwise norms are suprema over unit flags {y, u} with g_y(y, u) = 0.
# Both y and u are search variables.  In dimension 2 the orthogonal
# complement of y is a line, so a fine angle grid plus local refinement is
# effectively exact; in higher dimension the estimate is a seeded sampled
# lower bound.


def _perp_2d(g, y):
    gy0 = g[0][0] * y[0] + g[0][1] * y[1]
    gy1 = g[1][0] * y[0] + g[1][1] * y[1]
    return [-gy1, gy0]


def _torsion_ratio_2d(F, x, theta, second: bool):
    """Norm integrand on the angle grid (theta may be an ndarray)."""
    y = [np.cos(theta), np.sin(theta)]
    g = metric_entries(F, x, y)
    u = _perp_2d(g, y)
    guu = _linalg.quad_form(g, u, u)
    fval = F(x, y)
    if second:
        val = cartan_second(F, x, y, u, u, u, u)
        return fval * fval * np.abs(val) / (guu * guu)
    val = cartan_first(F, x, y, u, u, u)
    return fval * np.abs(val) / guu**1.5


def _golden_max(fun, lo, hi, tol=1e-10):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return max(fc, fd)


def _norm_2d(F, x, samples, second):
    thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    vals = _torsion_ratio_2d(F, x, thetas, second)
    k = int(np.argmax(vals))
    dt = 2.0 * math.pi / samples
    scalar = lambda t: float(_torsion_ratio_2d(F, x, float(t), second))
    return _golden_max(scalar, thetas[k] - dt, thetas[k] + dt)


def _fibonacci_sphere(m: int) -> np.ndarray:
    """m near-uniform directions on the 2-sphere (golden-angle lattice)."""
    k = np.arange(m)
    z = 1.0 - (2.0 * k + 1.0) / m
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _norm_sampled(F, x, samples, seed, second):
    """Batched sampled lower bound: y on the unit sphere (Fibonacci lattice
    when the sphere is 2-dimensional), u Gram-Schmidt orthogonalized against
    y in g_y."""
    n = F.dim
    rng = np.random.default_rng([seed, 0xC2 if second else 0xC1])
    if n == 3:
        ys = _fibonacci_sphere(samples)
    else:
        ys = rng.normal(size=(samples, n))
        ys /= np.linalg.norm(ys, axis=1)[:, None]
    us = rng.normal(size=(samples, n))
    cx = [np.full(samples, float(v)) for v in x]
    cy = [ys[:, i] for i in range(n)]
    cu = [us[:, i] for i in range(n)]
    g = metric_entries(F, cx, cy)
    gyy = _linalg.quad_form(g, cy, cy)
    gyu = _linalg.quad_form(g, cy, cu)
    coef = gyu / gyy
    u = [cu[i] - coef * cy[i] for i in range(n)]
    guu = _linalg.quad_form(g, u, u)
    fval = np.asarray(F(cx, cy), dtype=float)
    good = guu > 1e-14
    if second:
        val = np.abs(np.asarray(cartan_second(F, cx, cy, u, u, u, u), dtype=float))
        ratio = fval * fval * val / (guu * guu)
    else:
        val = np.abs(np.asarray(cartan_first(F, cx, cy, u, u, u), dtype=float))
        ratio = fval * val / guu**1.5
    return float(np.max(ratio[good])) if np.any(good) else 0.0


def cartan_norm(F: FinslerField, x, samples: int = 4096, seed: int = 0) -> float:
    """Sampled estimate of ||C||_x (exact up to refinement in dimension 2)."""
    if F.dim == 2:
        return _norm_2d(F, x, samples, second=False)
    return _norm_sampled(F, x, samples, seed, second=False)


def cartan_second_norm(F: FinslerField, x, samples: int = 4096, seed: int = 0) -> float:
    """Sampled estimate of ||C~||_x (exact up to refinement in dimension 2)."""
    if F.dim == 2:
        return _norm_2d(F, x, samples, second=True)
    return _norm_sampled(F, x, samples, seed, second=True)


# -- sanity battery -----------------------------------------------------------


def check_metric(F: FinslerField, n_points: int = 100, seed: int = 7) -> dict:
    """Homogeneity, Euler identity, positive definiteness and g-recovers-F^2
    residuals over seeded samples; raises MetricError on non-PD g."""
    pts = F.domain.sample_points(n_points, seed)
    rng = np.random.default_rng([seed, 0xA1])
    dirs = rng.normal(size=(n_points, F.dim))
    hom = euler = recover = 0.0
    for x, y in zip(pts, dirs):
        x = list(x)
        y = list(y / np.linalg.norm(y))
        f1 = float(F(x, y))
        for lam in (0.5, 2.0, 7.0):
            flam = float(F(x, [lam * v for v in y]))
            hom = max(hom, abs(flam - lam * f1) / max(abs(f1), 1e-30))
        res = directional_derivatives(F.func, x, y, y_dirs=[(y, 1)])
        euler = max(euler, abs(float(res.partial([1])) - f1) / max(abs(f1), 1e-30))
        g = fundamental_tensor(F, x, y)
        recover = max(recover, abs(g.inner(y, y) - f1 * f1) / max(f1 * f1, 1e-30))
    return {
        "homogeneity": hom,
        "euler": euler,
        "g_recovers_F2": recover,
        "n_points": n_points,
        "seed": seed,
    }
