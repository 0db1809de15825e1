"""Body arithmetic: Minkowski sums, volume, support, polarity, containment."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcvx.bodies import (
    ConvexBody,
    approx_equal,
    body_from_json,
    body_to_json,
    contains,
    contains_point,
    direction_net,
    minkowski_sum,
    polar,
    scale,
    support,
    volume,
)
from qcvx.errors import (
    DimensionMismatch,
    EmptyBody,
    NonpositiveScale,
    OriginNotInterior,
    UnsupportedMix,
)

UNIT_SQUARE = ConvexBody.box([0, 0], [1, 1])
SYM_SQUARE = ConvexBody.box([-1, -1], [1, 1])


def random_polytope(rng, dim, npts=8, spread=1.0):
    return ConvexBody.polytope(rng.uniform(-spread, spread, (npts, dim)))


# -- construction and canonicalization --------------------------------------

def test_polytope_canonicalization_drops_interior_points():
    body = ConvexBody.polytope([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5], [0.25, 0.75]])
    assert len(body.vertices) == 4
    assert approx_equal(body, UNIT_SQUARE)


def test_vertices_sorted_lexicographically():
    body = ConvexBody.polytope([[1, 1], [0, 0], [1, 0], [0, 1]])
    assert body.vertices.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_degenerate_polytopes_survive():
    seg = ConvexBody.polytope([[0, 0], [2, 2], [1, 1]])
    assert len(seg.vertices) == 2
    point = ConvexBody.polytope([[0.5, 0.5], [0.5, 0.5]])
    assert point.is_point
    assert volume(seg) == 0.0


def test_ball_and_empty_variants():
    ball = ConvexBody.ball(2.0, 2)
    assert ball.radius == 2.0
    assert ConvexBody.empty(3).is_empty
    with pytest.raises(ValueError):
        ConvexBody.ball(-1.0, 2)


# -- minkowski sum -----------------------------------------------------------

def test_interval_sum():
    a = ConvexBody.interval(0, 1)
    s = minkowski_sum(a, a)
    assert approx_equal(s, ConvexBody.interval(0, 2))


def test_square_plus_square_is_double_square():
    s = minkowski_sum(UNIT_SQUARE, UNIT_SQUARE)
    assert approx_equal(s, ConvexBody.box([0, 0], [2, 2]))
    assert len(s.vertices) == 4


def test_square_plus_segment_hexagon_vs_pairwise_hull():
    seg = ConvexBody.polytope([[0, 0], [1, 1]])
    hexagon = minkowski_sum(UNIT_SQUARE, seg)
    assert len(hexagon.vertices) == 6
    pairwise = (UNIT_SQUARE.vertices[:, None, :] + seg.vertices[None, :, :]).reshape(-1, 2)
    assert approx_equal(hexagon, ConvexBody.polytope(pairwise))


def test_ball_plus_ball_and_absorbing_empty():
    assert minkowski_sum(ConvexBody.ball(1, 2), ConvexBody.ball(0.5, 2)).radius == 1.5
    assert minkowski_sum(ConvexBody.empty(2), UNIT_SQUARE).is_empty


def test_ball_polytope_mix_rejected():
    with pytest.raises(UnsupportedMix):
        minkowski_sum(ConvexBody.ball(1, 2), UNIT_SQUARE)


def test_zero_ball_is_neutral():
    assert approx_equal(minkowski_sum(ConvexBody.ball(0.0, 2), UNIT_SQUARE), UNIT_SQUARE)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        minkowski_sum(UNIT_SQUARE, ConvexBody.interval(0, 1))


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_sum_commutative_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_polytope(rng, 2, 5) for _ in range(3))
    assert approx_equal(minkowski_sum(a, b), minkowski_sum(b, a))
    left = minkowski_sum(minkowski_sum(a, b), c)
    right = minkowski_sum(a, minkowski_sum(b, c))
    assert approx_equal(left, right, 1e-8)


# -- scale and volume --------------------------------------------------------

def test_scale_examples():
    assert scale(ConvexBody.ball(1, 2), 2).radius == 2
    tripled = scale(UNIT_SQUARE, 3)
    assert approx_equal(tripled, ConvexBody.box([0, 0], [3, 3]))
    with pytest.raises(NonpositiveScale):
        scale(UNIT_SQUARE, 0.0)


def test_volume_examples():
    assert volume(UNIT_SQUARE) == 1.0
    assert volume(ConvexBody.ball(1, 2)) == pytest.approx(math.pi, rel=1e-15)
    assert volume(ConvexBody.ball(1, 3)) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert volume(ConvexBody.empty(2)) == 0.0
    cube = ConvexBody.box([0, 0, 0], [1, 1, 1])
    assert volume(cube) == pytest.approx(1.0, rel=1e-12)


def test_volume_monte_carlo_3d():
    rng = np.random.default_rng(7)
    body = random_polytope(rng, 3, 10)
    lo = body.vertices.min(axis=0)
    hi = body.vertices.max(axis=0)
    nsamples = 1_000_000
    pts = rng.uniform(lo, hi, (nsamples, 3))
    A, b = body.facets()
    inside = np.all(pts @ A.T <= b + 1e-12, axis=1)
    box = float(np.prod(hi - lo))
    p = inside.mean()
    estimate = box * p
    sigma = box * math.sqrt(p * (1 - p) / nsamples)
    assert abs(volume(body) - estimate) < 3 * sigma


@given(st.integers(0, 10_000), st.floats(0.1, 5.0))
@settings(max_examples=25, deadline=None)
def test_volume_homogeneity(seed, lam):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 4))
    body = random_polytope(rng, dim, 8)
    assert volume(scale(body, lam)) == pytest.approx(lam ** dim * volume(body), rel=1e-9)


# -- support -----------------------------------------------------------------

def test_support_examples():
    assert support(UNIT_SQUARE, [1, 0]) == 1.0
    assert support(ConvexBody.ball(2.5, 2), [0, 1]) == 2.5
    with pytest.raises(EmptyBody):
        support(ConvexBody.empty(2), [1, 0])
    with pytest.raises(ValueError):
        support(UNIT_SQUARE, [1, 1])  # not a unit vector


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_support_additive_under_sum(seed):
    rng = np.random.default_rng(seed)
    a = random_polytope(rng, 2, 6)
    b = random_polytope(rng, 2, 6)
    s = minkowski_sum(a, b)
    for u in direction_net(2, 16):
        assert support(s, u) == pytest.approx(support(a, u) + support(b, u), abs=1e-9)


@given(st.integers(0, 10_000), st.floats(0.1, 4.0))
@settings(max_examples=25, deadline=None)
def test_support_positively_homogeneous(seed, lam):
    rng = np.random.default_rng(seed)
    a = random_polytope(rng, 3, 6)
    for u in direction_net(3, 8):
        assert support(scale(a, lam), u) == pytest.approx(lam * support(a, u), rel=1e-10)


# -- polar -------------------------------------------------------------------

def test_polar_examples():
    assert polar(ConvexBody.ball(2, 2)).radius == 0.5
    cross = polar(SYM_SQUARE)
    expected = ConvexBody.polytope([[1, 0], [-1, 0], [0, 1], [0, -1]])
    assert approx_equal(cross, expected)
    with pytest.raises(OriginNotInterior):
        polar(ConvexBody.box([1, 1], [2, 2]))
    with pytest.raises(OriginNotInterior):
        polar(ConvexBody.ball(0.0, 2))


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_polar_involution_on_symmetric_hexagons(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (3, 2))
    body = ConvexBody.polytope(np.vstack([pts, -pts]))
    if body.affine_rank() < 2:
        return
    assert approx_equal(polar(polar(body)), body, 1e-8)


def test_polar_reverses_containment():
    rng = np.random.default_rng(3)
    small = ConvexBody.polytope(np.vstack([p := rng.uniform(-1, 1, (4, 2)), -p]))
    big = minkowski_sum(small, SYM_SQUARE)
    assert contains(big, small)
    assert contains(polar(small), polar(big))


def test_polar_involution_3d():
    cube = ConvexBody.box([-1, -1, -1], [1, 1, 1])
    octa = polar(cube)
    assert len(octa.vertices) == 6
    assert approx_equal(polar(octa), cube, 1e-9)


# -- containment -------------------------------------------------------------

def test_contains_examples():
    k = SYM_SQUARE
    assert contains(scale(k, 2), k)
    assert contains(k, k)
    assert contains(SYM_SQUARE, ConvexBody.ball(1.0, 2))
    assert not contains(ConvexBody.ball(1.0, 2), SYM_SQUARE)
    assert contains(k, ConvexBody.empty(2))
    assert not contains(ConvexBody.empty(2), k)


def test_volume_monotone_under_containment():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = random_polytope(rng, 2, 8)
        b = random_polytope(rng, 2, 8)
        if contains(a, b):
            assert volume(a) >= volume(b) - 1e-12


def test_contains_point_degenerate():
    seg = ConvexBody.polytope([[0, 0], [1, 1]])
    assert contains_point(seg, [0.5, 0.5])
    assert not contains_point(seg, [0.5, 0.6])


# -- json --------------------------------------------------------------------

def test_json_round_trip():
    for body in (UNIT_SQUARE, ConvexBody.ball(1.5, 3), ConvexBody.empty(1)):
        clone = body_from_json(body_to_json(body))
        assert approx_equal(body, clone, 1e-15)
    encoded = body_to_json(UNIT_SQUARE)
    assert encoded["type"] == "polytope"
    assert body_to_json(ConvexBody.ball(1.5, 3)) == {"type": "ball", "radius": 1.5, "dim": 3}
