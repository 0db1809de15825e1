"""Geometric convex functions: inf-convolution vs the inf-max sum, the
ratio transform phi -> sup_y (<x,y> - 1)/phi(y), and level-set polarity.

Functions are finite maxima of affine pieces max_j (<a_j, x> + b_j) with
phi(0) = 0 and phi >= 0 (a zero piece is always included), optionally
restricted to a polytope domain (value +inf outside), which covers convex
indicators.  The transforms here are verification-oriented lattice fields,
not symbolic objects; level sets, however, are extracted as exact polytopes
wherever the representation allows (n <= 2).

Convention for the ratio transform at phi(y) = 0: the quotient counts as
+inf when <x, y> > 1 and is skipped otherwise (the lower-semicontinuous
closure); rays along which phi grows linearly contribute their asymptotic
slope ratio <x, u> / slope(u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bodies import (
    ConvexBody,
    contains_point,
    direction_net,
    polar,
    scale,
    support,
)
from .errors import DimensionMismatch, GridTooCoarse, OriginNotInterior
from .grids import GridSpec, SampledField
from .report import CheckReport


@dataclass(frozen=True)
class GeomConvexFn:
    """max of affine pieces, 0 at the origin, nonnegative; +inf off the domain."""

    slopes: np.ndarray          # (m, n)
    offsets: np.ndarray         # (m,)
    domain: Optional[ConvexBody] = None

    def __post_init__(self):
        slopes = np.atleast_2d(np.asarray(self.slopes, dtype=float))
        offsets = np.asarray(self.offsets, dtype=float).ravel()
        if len(slopes) != len(offsets):
            raise ValueError("need one offset per affine piece")
        if np.any(offsets > 1e-12):
            raise ValueError("offsets must be <= 0 so that phi(0) = 0")
        if slopes.shape[1] not in (1, 2):
            raise DimensionMismatch("geometric convex functions live in n <= 2")
        # the zero piece pins phi(0) = 0 and phi >= 0
        slopes = np.vstack([slopes, np.zeros((1, slopes.shape[1]))])
        offsets = np.append(np.minimum(offsets, 0.0), 0.0)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "offsets", offsets)
        if self.domain is not None and not contains_point(self.domain, np.zeros(self.dim)):
            raise ValueError("domain must contain the origin (phi(0) = 0)")

    @property
    def dim(self) -> int:
        return self.slopes.shape[1]

    @classmethod
    def from_pieces(cls, slopes, offsets=None, domain=None) -> "GeomConvexFn":
        slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        if offsets is None:
            offsets = np.zeros(len(slopes))
        return cls(slopes, np.asarray(offsets, dtype=float), domain)

    @classmethod
    def indicator(cls, body: ConvexBody) -> "GeomConvexFn":
        """Convex indicator: 0 on the body, +inf outside."""
        return cls(np.zeros((1, body.dim)), np.zeros(1), body)

    @classmethod
    def abs_value(cls) -> "GeomConvexFn":
        return cls.from_pieces([[1.0], [-1.0]])

    def evaluate_many(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        vals = np.max(x @ self.slopes.T + self.offsets, axis=1)
        if self.domain is not None:
            inside = _inside_mask(self.domain, x)
            vals = np.where(inside, vals, np.inf)
        return vals

    def __call__(self, x) -> float:
        return float(self.evaluate_many(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def epi_scaled(self, lam: float) -> "GeomConvexFn":
        """(lam * phi)(x) = lam * phi(x / lam): same slopes, scaled offsets."""
        dom = None if self.domain is None else scale(self.domain, lam)
        return GeomConvexFn(self.slopes, lam * self.offsets, dom)

    def arg_scaled(self, lam: float) -> "GeomConvexFn":
        """(lam . phi)(x) = phi(x / lam): scaled slopes, same offsets."""
        dom = None if self.domain is None else scale(self.domain, lam)
        return GeomConvexFn(self.slopes / lam, self.offsets, dom)

    def max_slope(self) -> float:
        return float(np.max(np.linalg.norm(self.slopes, axis=1)))


def _inside_mask(body: ConvexBody, x: np.ndarray) -> np.ndarray:
    if body.is_ball:
        return np.linalg.norm(x, axis=1) <= body.radius + 1e-12
    if body.affine_rank() == body.dim:
        A, b = body.facets()
        return np.all(x @ A.T <= b + 1e-12, axis=1)
    return np.array([contains_point(body, p) for p in x])


# ---------------------------------------------------------------------------
# exact lower level sets (n <= 2)
# ---------------------------------------------------------------------------

def lower_level_set(phi: GeomConvexFn, s: float) -> ConvexBody:
    """{x : phi(x) <= s} as an exact polytope; raises if unbounded."""
    if s <= 0:
        raise ValueError("level must be positive (phi(0) = 0 needs s > 0)")
    rows_a, rows_c = [], []
    for a, b in zip(phi.slopes, phi.offsets):
        if np.linalg.norm(a) <= 1e-14:
            continue  # 0 <= s - b always (b <= 0 < s)
        rows_a.append(a)
        rows_c.append(s - b)
    if phi.domain is not None:
        A, c = phi.domain.facets()
        rows_a.extend(A)
        rows_c.extend(c)
    A = np.array(rows_a) if rows_a else np.zeros((0, phi.dim))
    c = np.array(rows_c)

    if phi.dim == 1:
        hi, lo = np.inf, -np.inf
        for a, ci in zip(A[:, 0], c):
            if a > 0:
                hi = min(hi, ci / a)
            elif a < 0:
                lo = max(lo, ci / a)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise ValueError("level set is unbounded; the function is not coercive")
        return ConvexBody.interval(lo, hi)

    if len(A) == 0:
        raise ValueError("level set is unbounded; the function is not coercive")
    net = direction_net(2, 256)
    if np.any(np.max(net @ A.T, axis=1) <= 1e-12):
        raise ValueError("level set is unbounded; the function is not coercive")
    pts = []
    m = len(A)
    for i in range(m):
        for j in range(i + 1, m):
            M = np.array([A[i], A[j]])
            det = np.linalg.det(M)
            if abs(det) < 1e-12:
                continue
            p = np.linalg.solve(M, [c[i], c[j]])
            if np.all(A @ p <= c + 1e-9 * max(1.0, np.max(np.abs(c)))):
                pts.append(p)
    if not pts:
        raise ValueError("empty level set (inconsistent constraints)")
    return ConvexBody.polytope(np.array(pts))


# ---------------------------------------------------------------------------
# lattice convolutions
# ---------------------------------------------------------------------------

def _lattice_op(op, F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """out[i] = min_j op(F[j], G[i - j]) on the doubled lattice."""
    if F.ndim == 1:
        n = len(F)
        out = np.full(2 * n - 1, np.inf)
        for j in range(n):
            if not np.isfinite(F[j]):
                continue
            seg = out[j:j + n]
            np.minimum(seg, op(F[j], G), out=seg)
        return out
    n0, n1 = F.shape
    out = np.full((2 * n0 - 1, 2 * n1 - 1), np.inf)
    for j0 in range(n0):
        for j1 in range(n1):
            if not np.isfinite(F[j0, j1]):
                continue
            block = out[j0:j0 + n0, j1:j1 + n1]
            np.minimum(block, op(F[j0, j1], G), out=block)
    return out


def _sampled(phi: GeomConvexFn, grid: GridSpec) -> np.ndarray:
    return phi.evaluate_many(grid.points()).reshape((grid.npts,) * grid.dim)


def _iterated_lattice(op, phis: Sequence[GeomConvexFn], grid: GridSpec) -> SampledField:
    if grid.dim not in (1, 2):
        raise GridTooCoarse("lattice convolutions support n <= 2")
    acc = _sampled(phis[0], grid)
    cur = grid
    for phi in phis[1:]:
        acc = _lattice_op(op, acc, _sampled(phi, cur))
        cur = cur.doubled()
    return SampledField(cur, acc)


def inf_convolution(phi: GeomConvexFn, psi: GeomConvexFn,
                    grid: GridSpec) -> SampledField:
    """Discrete min-plus convolution; output on the doubled lattice."""
    return _iterated_lattice(np.add, [phi, psi], grid)


def oplus_cvx(phi: GeomConvexFn, psi: GeomConvexFn, grid: GridSpec) -> SampledField:
    """Discrete inf-max convolution (the level-set sum on convex functions)."""
    return _iterated_lattice(np.maximum, [phi, psi], grid)


def sandwich_check(phis: Sequence[GeomConvexFn], lambdas: Sequence[float],
                   grid: GridSpec, tol: Optional[float] = None) -> CheckReport:
    """Verify (sum lam)^(-1) g1 <= g2 <= (min lam)^(-1) g1 on the lattice,
    where g1 is the inf-convolution and g2 the inf-max sum of the scaled pieces.
    """
    lambdas = [float(l) for l in lambdas]
    if len(phis) != len(lambdas) or not phis:
        raise ValueError("need one positive weight per function")
    if any(l <= 0 for l in lambdas):
        raise ValueError("weights must be positive")
    g1 = _iterated_lattice(np.add, [p.epi_scaled(l) for p, l in zip(phis, lambdas)], grid)
    g2 = _iterated_lattice(np.maximum, [p.arg_scaled(l) for p, l in zip(phis, lambdas)], grid)
    if tol is None:
        step = float(np.max(grid.step))
        lip = max(p.max_slope() for p in phis) * max(1.0, 1.0 / min(lambdas))
        tol = 4.0 * step * lip * math.sqrt(grid.dim)

    lo_slack = g2.values - g1.values / sum(lambdas)
    hi_slack = g1.values / min(lambdas) - g2.values
    finite = np.isfinite(g1.values) & np.isfinite(g2.values)
    lower_margin = float(np.min(lo_slack[finite]))
    upper_margin = float(np.min(hi_slack[finite]))
    margin = min(lower_margin, upper_margin)
    # equality means one of the two bounds is tight at every lattice point
    tightness = float(np.max(np.minimum(lo_slack, hi_slack)[finite]))
    scale_val = max(1.0, float(np.max(np.abs(g2.values[finite]))) if finite.any() else 1.0)
    rel_tol = tol / scale_val
    if margin / scale_val < -rel_tol:
        verdict = "violated"
    elif tightness / scale_val <= 1e-9:
        verdict = "holds-with-equality"
    else:
        verdict = "holds"
    return CheckReport(
        name="sandwich",
        statement="inf-convolution and inf-max sum agree within the weight "
                  "bounds: (sum lam)^-1 * box <= oplus <= (min lam)^-1 * box",
        left=lower_margin, right=0.0, margin=margin / scale_val,
        verdict=verdict, tol=rel_tol,
        details={"lower_margin": lower_margin, "upper_margin": upper_margin,
                 "lattice_tol": tol, "finite_points": int(finite.sum())},
        witness=None)


# ---------------------------------------------------------------------------
# the ratio transform
# ---------------------------------------------------------------------------

def a_transform_values(phi: GeomConvexFn, x: np.ndarray,
                       y_halfwidth: float = 8.0, y_npts: int = 97,
                       ndirs: int = 64) -> np.ndarray:
    """sup_y (<x, y> - 1)/phi(y) evaluated at the rows of x.

    Finite net over y, plus asymptotic ray terms <x,u>/slope(u) for functions
    finite on all of R^n; phi(y) = 0 contributes +inf iff <x, y> > 1.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = phi.dim
    if phi.domain is not None:
        y_halfwidth = min(y_halfwidth, phi.domain.bounding_radius() * 1.01)
    ygrid = GridSpec.cube(y_halfwidth, n, y_npts)
    Y = ygrid.points()
    vals = phi.evaluate_many(Y)
    finite = np.isfinite(vals)
    pos = finite & (vals > 1e-12)
    zero = finite & (vals <= 1e-12)
    Ypos, vpos = Y[pos], vals[pos]
    Yzero = Y[zero]

    out = np.full(len(x), -np.inf)
    chunk = max(1, 2_000_000 // max(len(Ypos), 1))
    for k in range(0, len(x), chunk):
        xs = x[k:k + chunk]
        if len(Ypos):
            ratios = (xs @ Ypos.T - 1.0) / vpos
            out[k:k + chunk] = np.max(ratios, axis=1)
        if len(Yzero):
            trigger = np.any(xs @ Yzero.T > 1.0 + 1e-12, axis=1)
            out[k:k + chunk] = np.where(trigger, np.inf, out[k:k + chunk])
    if phi.domain is None:
        U = direction_net(n, ndirs)
        slopes_u = np.max(U @ phi.slopes.T, axis=1)
        grows = slopes_u > 1e-12
        if grows.any():
            asym = np.max((x @ U[grows].T) / slopes_u[grows], axis=1)
            out = np.maximum(out, asym)
        flat = ~grows
        if flat.any():
            runaway = np.any(x @ U[flat].T > 1e-12, axis=1)
            out = np.where(runaway, np.inf, out)
    else:
        out = np.maximum(out, 0.0)  # y off the domain: finite numerator over +inf
    return out


def a_transform(phi: GeomConvexFn, grid: GridSpec, **kwargs) -> SampledField:
    """Sampled ratio transform on the lattice."""
    vals = a_transform_values(phi, grid.points(), **kwargs)
    return SampledField(grid, vals.reshape((grid.npts,) * grid.dim))


# ---------------------------------------------------------------------------
# level-set polarity
# ---------------------------------------------------------------------------

def star_dual(phi: GeomConvexFn, heights: Sequence[float]) -> list[ConvexBody]:
    """Level sets of the dual function: K_t(phi^*) = polar of K_{1/t}(phi)."""
    out = []
    for t in heights:
        if t <= 0:
            raise ValueError("dual heights must be positive")
        out.append(polar(lower_level_set(phi, 1.0 / t)))
    return out


def polarity_sandwich_check(phi: GeomConvexFn, t: float,
                            grid_npts: int = 81, y_npts: int = 129) -> CheckReport:
    """Check polar(K_{1/t}(phi)) <= K_t(transform) <= 2 * polar(K_{1/t}(phi)).

    The middle set is extracted from a lattice sampling of the ratio
    transform; margins are support-function slacks over a direction net,
    with the lattice step absorbed into the tolerance.
    """
    level = lower_level_set(phi, 1.0 / t)
    try:
        p = polar(level)
    except OriginNotInterior:
        raise
    reach = 2.0 * p.bounding_radius() * 1.25
    grid = GridSpec.cube(reach, phi.dim, grid_npts)
    pts = grid.points()
    vals = a_transform_values(phi, pts, y_halfwidth=max(8.0, level.bounding_radius() * 4),
                              y_npts=y_npts)
    inside = pts[vals <= t * (1 + 1e-9)]
    if len(inside) == 0:
        inside = np.zeros((1, phi.dim))
    q = ConvexBody.polytope(inside)

    net = direction_net(phi.dim, 64)
    h_p = np.array([support(p, u) for u in net])
    h_q = np.array([support(q, u) for u in net])
    h_2p = 2.0 * h_p
    left_margin = float(np.min(h_q - h_p))      # polar inside extracted set
    right_margin = float(np.min(h_2p - h_q))    # extracted set inside 2 * polar
    step = float(np.max(grid.step)) * math.sqrt(phi.dim)
    scale_val = max(1.0, float(np.max(h_2p)))
    margin = min(left_margin, right_margin)
    rel_tol = 2.5 * step / scale_val
    verdict = "holds" if margin / scale_val >= -rel_tol else "violated"
    return CheckReport(
        name="polarity-sandwich",
        statement="polars of the sublevel sets sandwich the sublevel sets of "
                  "the ratio transform within a factor of 2",
        left=left_margin, right=0.0, margin=margin / scale_val,
        verdict=verdict, tol=rel_tol,
        details={"t": t, "left_margin": left_margin, "right_margin": right_margin,
                 "lattice_step": step},
        witness=None)
