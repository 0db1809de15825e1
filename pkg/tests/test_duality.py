"""Convex-function side: inf-convolution vs inf-max sum, ratio transform,
level-set polarity."""

import math

import numpy as np
import pytest

from qcvx.bodies import ConvexBody, approx_equal, contains, minkowski_sum, polar
from qcvx.duality import (
    GeomConvexFn,
    a_transform,
    a_transform_values,
    inf_convolution,
    lower_level_set,
    oplus_cvx,
    polarity_sandwich_check,
    sandwich_check,
    star_dual,
)
from qcvx.errors import OriginNotInterior
from qcvx.generators import random_geom_convex_fn
from qcvx.grids import GridSpec

ABS = GeomConvexFn.abs_value()


def test_geometric_normalization():
    phi = GeomConvexFn.from_pieces([[1.0, 0.5]], [-0.25])
    assert phi([0.0, 0.0]) == 0.0
    assert np.all(phi.evaluate_many(np.random.default_rng(0).normal(size=(50, 2))) >= 0)
    with pytest.raises(ValueError):
        GeomConvexFn.from_pieces([[1.0]], [0.5])  # positive offset breaks phi(0)=0


def test_indicator_evaluation():
    ind = GeomConvexFn.indicator(ConvexBody.interval(-1, 1))
    assert ind([0.5]) == 0.0
    assert math.isinf(ind([2.0]))


# -- lower level sets ----------------------------------------------------------

def test_lower_level_set_abs():
    body = lower_level_set(ABS, 2.0)
    assert approx_equal(body, ConvexBody.interval(-2, 2))


def test_lower_level_set_unbounded_rejected():
    one_sided = GeomConvexFn.from_pieces([[1.0]])
    with pytest.raises(ValueError):
        lower_level_set(one_sided, 1.0)


def test_lower_level_set_2d():
    gauge = GeomConvexFn.from_pieces([[1, 0], [-1, 0], [0, 1], [0, -1]])
    body = lower_level_set(gauge, 1.5)
    assert approx_equal(body, ConvexBody.box([-1.5, -1.5], [1.5, 1.5]))


# -- convolutions ---------------------------------------------------------------

def test_inf_convolution_with_indicator_is_distance_like():
    # phi box 1_K = inf over K of phi(x - y); both operations coincide here
    ind = GeomConvexFn.indicator(ConvexBody.interval(-1, 1))
    grid = GridSpec.cube(3.0, 1, 121)
    box = inf_convolution(ABS, ind, grid)
    osum = oplus_cvx(ABS, ind, grid)
    xs = box.grid.axes()[0]
    mask = np.abs(xs) <= 3
    expected = np.maximum(np.abs(xs[mask]) - 1, 0.0)
    assert np.max(np.abs(box.values[mask] - expected)) < 1e-12
    assert np.max(np.abs(box.values[mask] - osum.values[mask])) < 1e-12


def test_inf_convolution_with_zero():
    zero = GeomConvexFn.from_pieces([[0.0]])
    field = inf_convolution(zero, zero, GridSpec.cube(2.0, 1, 41))
    assert np.max(np.abs(field.values)) == 0.0


def test_oplus_cvx_indicator_sum():
    K = ConvexBody.box([-1, -1], [0.5, 0.5])
    T = ConvexBody.box([-0.5, -0.5], [1, 1])
    field = oplus_cvx(GeomConvexFn.indicator(K), GeomConvexFn.indicator(T),
                      GridSpec.cube(1.2, 2, 25))
    s = minkowski_sum(K, T)
    pts = field.grid.points()
    vals = field.values.ravel()
    A, b = s.facets()
    depth = np.max(pts @ A.T - b, axis=1)
    band = 2.5 * float(np.max(field.grid.step))
    off_band = np.abs(depth) > band
    inside = depth <= 0
    assert np.all(np.isfinite(vals[off_band]) == inside[off_band])


def test_oplus_cvx_midpoint_convex():
    rng = np.random.default_rng(5)
    phi, psi = random_geom_convex_fn(rng, 1), random_geom_convex_fn(rng, 1)
    field = oplus_cvx(phi, psi, GridSpec.cube(4.0, 1, 161))
    v = field.values
    step_bound = 4 * float(np.max(field.grid.step)) * max(phi.max_slope(), psi.max_slope())
    mid = 0.5 * (v[:-2] + v[2:]) - v[1:-1]
    assert np.min(mid) > -step_bound


def test_oplus_cvx_matches_level_set_route():
    # lower level sets of the inf-max sum are the sums of the lower level sets
    rng = np.random.default_rng(11)
    phi, psi = random_geom_convex_fn(rng, 2), random_geom_convex_fn(rng, 2)
    field = oplus_cvx(phi, psi, GridSpec.cube(4.0, 2, 41))
    for s in (0.5, 1.0):
        expected = minkowski_sum(lower_level_set(phi, s), lower_level_set(psi, s))
        pts = field.grid.points()
        inside = field.values.ravel() <= s
        cell = float(np.linalg.norm(field.grid.step))
        for p in pts[inside][::7]:
            assert contains(expected, ConvexBody.polytope([p]), cell)


# -- sandwich -------------------------------------------------------------------

def test_sandwich_single_function_identity():
    rep = sandwich_check([ABS], [1.0], GridSpec.cube(3.0, 1, 81))
    assert rep.verdict == "holds-with-equality"


def test_sandwich_pair_factor_two():
    psi = GeomConvexFn.from_pieces([[2.0], [-2.0]])
    rep = sandwich_check([ABS, psi], [1.0, 1.0], GridSpec.cube(3.0, 1, 121))
    assert rep.ok
    assert rep.details["lower_margin"] >= 0.0
    assert rep.details["upper_margin"] >= 0.0


@pytest.mark.parametrize("seed", range(6))
def test_sandwich_random_triples(seed):
    rng = np.random.default_rng(seed)
    fns = [random_geom_convex_fn(rng, 1) for _ in range(3)]
    lams = rng.uniform(0.5, 2.0, 3).tolist()
    rep = sandwich_check(fns, lams, GridSpec.cube(4.0, 1, 81))
    assert rep.ok, rep.to_json()


# -- ratio transform ------------------------------------------------------------

def test_a_transform_abs_is_self_dual():
    grid = GridSpec.cube(3.0, 1, 61)
    field = a_transform(ABS, grid)
    xs = grid.axes()[0]
    assert np.max(np.abs(field.values - np.abs(xs))) < 1e-9


def test_a_transform_at_origin_is_zero():
    rng = np.random.default_rng(3)
    for _ in range(5):
        phi = random_geom_convex_fn(rng, 2)
        assert a_transform_values(phi, [[0.0, 0.0]])[0] == pytest.approx(0.0, abs=1e-12)


def test_a_transform_indicator_gives_polar_indicator():
    ind = GeomConvexFn.indicator(ConvexBody.interval(-1, 1))
    vals = a_transform_values(ind, [[0.5], [0.99], [1.5]])
    assert vals[0] == pytest.approx(0.0, abs=1e-12)
    assert vals[1] == pytest.approx(0.0, abs=1e-12)
    assert math.isinf(vals[2])


def test_a_transform_against_fine_net():
    rng = np.random.default_rng(8)
    phi = random_geom_convex_fn(rng, 2)
    xs = rng.normal(size=(10, 2))
    coarse = a_transform_values(phi, xs, y_npts=49)
    fine = a_transform_values(phi, xs, y_npts=193)
    assert np.all(fine >= coarse - 1e-12)  # finer nets only improve the sup
    assert np.max(np.abs(fine - coarse) / np.maximum(np.abs(fine), 1.0)) < 5e-2


# -- polarity -------------------------------------------------------------------

def test_star_dual_abs_self_dual():
    for t in (0.5, 1.0, 2.0):
        [body] = star_dual(ABS, [t])
        assert approx_equal(body, ConvexBody.interval(-t, t), 1e-9)


def test_star_dual_involution():
    rng = np.random.default_rng(4)
    phi = random_geom_convex_fn(rng, 2)
    for t in (0.5, 1.0, 2.0):
        # applying the level-set duality twice returns the original level set
        [kt_star] = star_dual(phi, [1.0 / t])        # = polar of K_t(phi)
        recovered = polar(kt_star)
        assert approx_equal(recovered, lower_level_set(phi, t), 1e-7)


def test_star_dual_monotone_in_height():
    rng = np.random.default_rng(6)
    phi = random_geom_convex_fn(rng, 2)
    bodies = star_dual(phi, [0.5, 1.0, 2.0])
    assert contains(bodies[1], bodies[0], 1e-9)
    assert contains(bodies[2], bodies[1], 1e-9)


def test_star_dual_needs_origin_interior():
    ind = GeomConvexFn.indicator(ConvexBody.polytope([[0, 0], [1, 0], [0, 1]]))
    with pytest.raises(OriginNotInterior):
        star_dual(ind, [1.0])


def test_polarity_sandwich_abs():
    rep = polarity_sandwich_check(ABS, 1.0)
    assert rep.ok
    assert rep.details["left_margin"] >= -rep.tol


@pytest.mark.parametrize("seed", range(5))
def test_polarity_sandwich_random(seed):
    from qcvx.generators import conditioned_geom_convex_fn

    rng = np.random.default_rng(seed)
    phi = conditioned_geom_convex_fn(rng, 2)
    for t in (0.5, 1.0, 2.0):
        rep = polarity_sandwich_check(phi, t)
        assert rep.ok, rep.to_json()
        assert rep.details["right_margin"] >= -rep.tol  # factor 2 never violated
