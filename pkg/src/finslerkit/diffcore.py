"""Exact higher-order differentiation of scalar fields on chart x tangent space.

Derivatives are computed with nested truncated-Taylor (jet) arithmetic: each
differentiation variable gets its own univariate jet, and jets nest through a
monotone tag so that towers of arbitrary depth stay well ordered.  Fields must
be written with ordinary arithmetic plus the generic `sqrt`/`log`/`exp`/
`sin`/`cos` helpers from this module; they then evaluate unchanged on floats,
on numpy arrays (batched points) and on jets.

A fully independent finite-difference oracle (`fd_oracle`) mirrors `jet_eval`
for cross-validation; it never touches jet arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, OrderCapError

X_ORDER_CAP = 2
Y_ORDER_CAP = 4
DEFAULT_FD_STEP = 1e-4

_TAGS = itertools.count(1)

_FACT = [math.factorial(k) for k in range(10)]


class Jet:
    """Truncated univariate Taylor expansion with ring-valued coefficients.

    ``coeffs[k]`` is the k-th Taylor coefficient; coefficients may be floats,
    numpy arrays, or jets of a *smaller* tag, so towers nest canonically
    (tags strictly decrease from root to leaf).  Arithmetic between jets of
    different tags treats the smaller-tag operand as a constant.
    """

    __slots__ = ("tag", "coeffs")
    __array_ufunc__ = None  # keep numpy from broadcasting over jets

    def __init__(self, tag: int, coeffs: list):
        self.tag = tag
        self.coeffs = coeffs

    # -- helpers ----------------------------------------------------------

    def _scalar_add(self, s):
        c = list(self.coeffs)
        c[0] = c[0] + s
        return Jet(self.tag, c)

    def _scalar_mul(self, s):
        return Jet(self.tag, [c * s for c in self.coeffs])

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            if other.tag == self.tag:
                a, b = self.coeffs, other.coeffs
                if len(a) < len(b):
                    a, b = b, a
                out = [a[k] + b[k] if k < len(b) else a[k] for k in range(len(a))]
                return Jet(self.tag, out)
            if other.tag > self.tag:
                return other._scalar_add(self)
        return self._scalar_add(other)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.tag, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, Jet):
            return self.__add__(-other)
        return self._scalar_add(-other)

    def __rsub__(self, other):
        return (-self)._scalar_add(other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            if other.tag == self.tag:
                a, b = self.coeffs, other.coeffs
                n = max(len(a), len(b))
                out = []
                for k in range(n):
                    lo = max(0, k - len(b) + 1)
                    hi = min(k, len(a) - 1)
                    acc = a[lo] * b[k - lo]
                    for i in range(lo + 1, hi + 1):
                        acc = acc + a[i] * b[k - i]
                    out.append(acc)
                return Jet(self.tag, out)
            if other.tag > self.tag:
                return other._scalar_mul(self)
        return self._scalar_mul(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            if other.tag == self.tag:
                a, b = self.coeffs, other.coeffs
                n = max(len(a), len(b))
                out = []
                for k in range(n):
                    acc = a[k] if k < len(a) else 0.0
                    for j in range(k):
                        bi = k - j
                        if bi < len(b):
                            acc = acc - out[j] * b[bi]
                    out.append(acc / b[0])
                return Jet(self.tag, out)
            if other.tag > self.tag:
                return Jet(other.tag, [self] + [0.0] * (len(other.coeffs) - 1)) / other
        return Jet(self.tag, [c / other for c in self.coeffs])

    def __rtruediv__(self, other):
        return Jet(self.tag, [other] + [0.0] * (len(self.coeffs) - 1)) / self

    def __pow__(self, p):
        if isinstance(p, int) or (isinstance(p, float) and p.is_integer()):
            p = int(p)
            if p == 0:
                return Jet(self.tag, [1.0] + [0.0] * (len(self.coeffs) - 1))
            if p < 0:
                return 1.0 / self.__pow__(-p)
            out = self
            for _ in range(p - 1):
                out = out * self
            return out
        if p == 0.5:
            return self.sqrt()
        return (self.log() * p).exp()

    # -- analytic functions (coefficient recurrences) ----------------------

    def sqrt(self):
        a = self.coeffs
        s0 = sqrt(a[0])
        out = [s0]
        for k in range(1, len(a)):
            acc = a[k]
            for j in range(1, k):
                acc = acc - out[j] * out[k - j]
            out.append(acc / (2.0 * s0))
        return Jet(self.tag, out)

    def log(self):
        a = self.coeffs
        out = [log(a[0])]
        for k in range(1, len(a)):
            acc = a[k]
            for j in range(1, k):
                acc = acc - (j / k) * out[j] * a[k - j]
            out.append(acc / a[0])
        return Jet(self.tag, out)

    def exp(self):
        a = self.coeffs
        out = [exp(a[0])]
        for k in range(1, len(a)):
            acc = a[1] * out[k - 1]
            for j in range(2, k + 1):
                if j < len(a):
                    acc = acc + j * (a[j] * out[k - j])
            out.append(acc / k)
        return Jet(self.tag, out)

    def sin(self):
        return _sincos(self)[0]

    def cos(self):
        return _sincos(self)[1]

    def __repr__(self):
        return f"Jet(tag={self.tag}, coeffs={self.coeffs!r})"


def _sincos(j: Jet):
    a = j.coeffs
    s = [sin(a[0])]
    c = [cos(a[0])]
    for k in range(1, len(a)):
        sa = a[1] * c[k - 1]
        ca = a[1] * s[k - 1]
        for i in range(2, k + 1):
            if i < len(a):
                sa = sa + i * (a[i] * c[k - i])
                ca = ca + i * (a[i] * s[k - i])
        s.append(sa / k)
        c.append((-1.0 / k) * ca)
    return Jet(j.tag, s), Jet(j.tag, c)


# -- generic scalar functions (float / ndarray / Jet) --------------------


def sqrt(u):
    if isinstance(u, Jet):
        return u.sqrt()
    if isinstance(u, np.ndarray):
        return np.sqrt(u)
    return math.sqrt(u)


def log(u):
    if isinstance(u, Jet):
        return u.log()
    if isinstance(u, np.ndarray):
        return np.log(u)
    return math.log(u)


def exp(u):
    if isinstance(u, Jet):
        return u.exp()
    if isinstance(u, np.ndarray):
        return np.exp(u)
    return math.exp(u)


def sin(u):
    if isinstance(u, Jet):
        return u.sin()
    if isinstance(u, np.ndarray):
        return np.sin(u)
    return math.sin(u)


def cos(u):
    if isinstance(u, Jet):
        return u.cos()
    if isinstance(u, np.ndarray):
        return np.cos(u)
    return math.cos(u)


def value(u):
    """Strip all jet structure, returning the underlying base scalar."""
    while isinstance(u, Jet):
        u = u.coeffs[0]
    return u


# -- seeding, evaluation and extraction -----------------------------------


class TaylorResult:
    """Result of evaluating a field on seeded jets.

    `tags` are in seeding order; `partial(multi)` returns the mixed partial
    for per-variable derivative orders `multi` (aligned with `tags`).
    """

    def __init__(self, root, tags: list[int], orders: list[int]):
        self.root = root
        self.tags = tags
        self.orders = orders
        # navigate outermost (largest) tag first
        self._desc = sorted(range(len(tags)), key=lambda i: -tags[i])

    def partial(self, multi: Sequence[int]):
        obj = self.root
        for i in self._desc:
            d = multi[i]
            if d > self.orders[i]:
                raise OrderCapError(f"order {d} exceeds seeded order {self.orders[i]}")
            obj = _component(obj, self.tags[i], d)
        scale = 1
        for d in multi:
            scale *= _FACT[d]
        return obj * scale if scale != 1 else obj

    @property
    def value(self):
        return self.partial([0] * len(self.tags))


def _component(obj, tag: int, d: int):
    if isinstance(obj, Jet) and obj.tag == tag:
        return obj.coeffs[d] if d < len(obj.coeffs) else 0.0
    # value independent of this variable
    return obj if d == 0 else 0.0


def _seed_linear(base, dirs):
    """Point components base[i] + sum_a t_a * dirs[a][0][i], jets in each t_a."""
    tags, orders = [], []
    pts = list(base)
    for vec, order in dirs:
        if order <= 0:
            continue
        t = next(_TAGS)
        tags.append(t)
        orders.append(order)
        gen = Jet(t, [0.0, 1.0] + [0.0] * (order - 1))
        pts = [p + gen * v if _nonzero(v) else p for p, v in zip(pts, vec)]
    return pts, tags, orders


def _nonzero(v):
    return not (isinstance(v, float) and v == 0.0) and not (isinstance(v, int) and v == 0)


def directional_derivatives(
    f: Callable,
    x: Sequence,
    y: Sequence,
    x_dirs: Sequence[tuple[Sequence, int]] = (),
    y_dirs: Sequence[tuple[Sequence, int]] = (),
) -> TaylorResult:
    """Mixed Taylor data of t -> f(x + sum t_a p_a, y + sum t_b q_b) at t=0.

    Variables are ordered x_dirs then y_dirs in the returned result.
    """
    xs, tx, ox = _seed_linear(x, x_dirs)
    ys, ty, oy = _seed_linear(y, y_dirs)
    root = f(xs, ys)
    return TaylorResult(root, tx + ty, ox + oy)


def coordinate_derivatives(
    f: Callable,
    x: Sequence,
    y: Sequence,
    orders_x: Sequence[int],
    orders_y: Sequence[int],
) -> TaylorResult:
    """Taylor data with one jet per coordinate carrying a nonzero order.

    Result variables are ordered: x coordinates with order > 0 (ascending
    index), then y coordinates with order > 0.
    """
    n = len(x)
    x_dirs = [(_basis(n, i), k) for i, k in enumerate(orders_x) if k > 0]
    y_dirs = [(_basis(len(y), i), k) for i, k in enumerate(orders_y) if k > 0]
    return directional_derivatives(f, x, y, x_dirs, y_dirs)


def _basis(n: int, i: int):
    e = [0.0] * n
    e[i] = 1.0
    return e


# -- public request / value types ------------------------------------------


@dataclass(frozen=True)
class JetRequest:
    """A mixed partial-derivative query at a chart point and tangent vector."""

    base_x: tuple
    base_y: tuple
    orders_x: tuple
    orders_y: tuple

    def __post_init__(self):
        object.__setattr__(self, "base_x", tuple(float(v) for v in self.base_x))
        object.__setattr__(self, "base_y", tuple(float(v) for v in self.base_y))
        object.__setattr__(self, "orders_x", tuple(int(k) for k in self.orders_x))
        object.__setattr__(self, "orders_y", tuple(int(k) for k in self.orders_y))
        if len(self.orders_x) != len(self.base_x) or len(self.orders_y) != len(self.base_y):
            raise ValueError("order multi-indices must match coordinate dimensions")
        if any(k < 0 for k in self.orders_x + self.orders_y):
            raise ValueError("derivative orders must be non-negative")
        if sum(self.orders_x) > X_ORDER_CAP:
            raise OrderCapError(
                f"total x-order {sum(self.orders_x)} exceeds cap {X_ORDER_CAP}"
            )
        if sum(self.orders_y) > Y_ORDER_CAP:
            raise OrderCapError(
                f"total y-order {sum(self.orders_y)} exceeds cap {Y_ORDER_CAP}"
            )


@dataclass
class JetValue:
    """Field value plus every requested mixed partial (componentwise-below)."""

    value: float
    partials: dict = field(default_factory=dict)

    def partial(self, orders_x: Sequence[int], orders_y: Sequence[int]) -> float:
        return self.partials[(tuple(orders_x), tuple(orders_y))]


def _sub_multi_indices(orders):
    return itertools.product(*(range(k + 1) for k in orders))


def jet_eval(f: Callable, req: JetRequest) -> JetValue:
    """Evaluate a scalar field and its mixed partials via jet arithmetic.

    Returns every partial with multi-index componentwise at most the request.
    Deterministic and exact to floating point rounding for smooth fields.
    """
    try:
        res = coordinate_derivatives(f, req.base_x, req.base_y, req.orders_x, req.orders_y)
    except DomainError as e:
        raise DomainError(f"field evaluation failed at x={req.base_x}, y={req.base_y}: {e}") from e
    xi = [i for i, k in enumerate(req.orders_x) if k > 0]
    yi = [i for i, k in enumerate(req.orders_y) if k > 0]
    out = {}
    for ox in _sub_multi_indices(req.orders_x):
        for oy in _sub_multi_indices(req.orders_y):
            multi = [ox[i] for i in xi] + [oy[i] for i in yi]
            out[(ox, oy)] = float(value(res.partial(multi)))
    zero = (tuple(0 for _ in req.orders_x), tuple(0 for _ in req.orders_y))
    return JetValue(value=out[zero], partials=out)


# -- finite-difference oracle ----------------------------------------------

_STENCILS = {
    0: ((0, 1.0),),
    1: ((1, 0.5), (-1, -0.5)),
    2: ((1, 1.0), (0, -2.0), (-1, 1.0)),
    3: ((2, 0.5), (1, -1.0), (-1, 1.0), (-2, -0.5)),
    4: ((2, 1.0), (1, -4.0), (0, 6.0), (-1, -4.0), (-2, 1.0)),
}


def _fd_single(f, x, y, orders_x, orders_y, h):
    """Tensor-product central-difference estimate, O(h^2)."""
    axes = [("x", i, k) for i, k in enumerate(orders_x) if k > 0]
    axes += [("y", i, k) for i, k in enumerate(orders_y) if k > 0]
    total = 0.0
    for combo in itertools.product(*(_STENCILS[k] for (_, _, k) in axes)):
        xs = list(x)
        ys = list(y)
        w = 1.0
        for (kind, i, k), (shift, wgt) in zip(axes, combo):
            if kind == "x":
                xs[i] = xs[i] + shift * h
            else:
                ys[i] = ys[i] + shift * h
            w *= wgt / h**k
        total += w * f(xs, ys)
    return total


# Cancellation noise in a central stencil of total order d grows like eps/h^d,
# so a single step cannot serve every order: 1e-4 is right up to d=2 but
# useless at d=4.  Auto steps balance truncation (O(h^4) after Richardson)
# against cancellation per total order.
_AUTO_STEPS = {0: 1e-4, 1: 1e-4, 2: 1e-4, 3: 5e-3, 4: 2e-2, 5: 4e-2, 6: 6e-2}


def fd_oracle(f: Callable, req: JetRequest, step: float | None = None) -> JetValue:
    """Central-difference derivative oracle with one Richardson level.

    Error is O(step^4) for smooth fields; entirely independent of the jet
    machinery.  With ``step=None`` each partial uses a step suited to its
    total order.  Raises DomainError if the stencil leaves the field's
    domain.
    """
    if step is not None and step <= 0:
        raise ValueError("step must be positive")
    out = {}
    for ox in _sub_multi_indices(req.orders_x):
        for oy in _sub_multi_indices(req.orders_y):
            h = step if step is not None else _AUTO_STEPS[sum(ox) + sum(oy)]
            coarse = _fd_single(f, req.base_x, req.base_y, ox, oy, h)
            fine = _fd_single(f, req.base_x, req.base_y, ox, oy, h / 2.0)
            out[(ox, oy)] = (4.0 * fine - coarse) / 3.0
    zero = (tuple(0 for _ in req.orders_x), tuple(0 for _ in req.orders_y))
    return JetValue(value=out[zero], partials=out)
