from __future__ import annotations

import math

import numpy as np
import pytest

from engine.errors import IncompatibleUnion, InvalidCantorParameters, NonPositiveScale, UnsupportedKind
from engine.geometry import RFD_KINDS, build_rfd, parse_geometry, scaled, translated, union
from engine.strings import cantor_string

SQRT3 = math.sqrt(3.0)


@pytest.mark.parametrize(
    "kind,params,measure",
    [
        ("ball", {"N": 2}, math.pi),
        ("ball", {"N": 3, "R": 2.0}, 4.0 / 3.0 * math.pi * 8.0),
        ("torus", {}, 2.0 * math.pi**2 * 2.0),
        ("gasket", {}, SQRT3 / 4.0),
        ("cantor", {"delta": None}, 1.0),
        ("cantor", {"delta": 0.5}, 2.0),
        ("interval", {"start": 1.0, "end": 4.0}, 3.0),
        ("cusp", {"alpha": 2.0}, 1.0 / 3.0),
        ("polygon", {"vertices": [[0, 0], [2, 0], [2, 1], [0, 1]]}, 2.0),
    ],
)
def test_region_measures(kind, params, measure):
    r = build_rfd(kind, **params)
    assert r.measure == pytest.approx(measure, rel=1e-14)
    if r.has_exact_tube and math.isfinite(r.dmax):
        assert r.tube(r.dmax * 1.5) == pytest.approx(measure, rel=1e-12)


def test_layered_families_add_up_to_region():
    for r in (build_rfd("gasket"), build_rfd("cantor", delta=None), build_rfd("cantor_graph")):
        assert math.fsum(f.measure(r.N) for f in r.families) == pytest.approx(r.measure, rel=1e-14)


@pytest.mark.parametrize("t", [0.05, 0.2, 0.4])
def test_exact_tubes(t):
    assert build_rfd("ball", N=2).tube(t) == pytest.approx(math.pi * (2 * t - t * t), rel=1e-14)
    assert build_rfd("torus").tube(t) == pytest.approx(2 * math.pi**2 * 2.0 * (2 * t - t * t), rel=1e-14)
    square = build_rfd("polygon", vertices=[[0, 0], [1, 0], [1, 1], [0, 1]])
    assert square.tube(t) == pytest.approx(4 * t - 4 * t * t, rel=1e-14)


def test_unit_segment_in_the_plane():
    r = build_rfd("unit_segment", N=2, delta=0.5)
    assert r.tube(0.1) == pytest.approx(0.2 + math.pi * 0.01)
    with pytest.raises(UnsupportedKind):
        build_rfd("unit_segment", N=3)


def test_cantor_distance_oracle():
    r = build_rfd("cantor", delta=None)
    d = r.distance(np.array([[0.5], [0.4], [0.0], [1.0 / 9.0 + 1e-3]]))
    assert d == pytest.approx([1.0 / 6.0, 0.4 - 1.0 / 3.0, 0.0, 1e-3], abs=1e-14)


def test_gasket_distance_at_middle_centroid():
    r = build_rfd("gasket")
    d = r.distance(np.array([[0.5, SQRT3 / 6.0]]))
    assert d[0] == pytest.approx(SQRT3 / 12.0, rel=1e-12)


def test_non_regular_polygon_has_no_layers():
    r = build_rfd("polygon", vertices=[[0, 0], [2, 0], [2, 1], [0, 1]])
    assert not r.layered
    assert not r.has_exact_tube
    with pytest.raises(UnsupportedKind):
        r.tube(0.1)


def test_string_realisation_matches_string():
    r = build_rfd("string", string=cantor_string())
    assert r.measure == pytest.approx(1.0, rel=1e-14)
    assert r.dim_hint == pytest.approx(math.log(2.0) / math.log(3.0))


def test_scaling_and_translation():
    ball = build_rfd("ball", N=2)
    big = scaled(ball, 2.0)
    assert big.measure == pytest.approx(4 * math.pi)
    assert big.tube(0.2) == pytest.approx(4 * ball.tube(0.1), rel=1e-14)
    moved = translated(ball, [5.0, 0.0])
    assert moved.region.indicator(np.array([[5.2, 0.1]]))[0]
    assert moved.distance(np.array([[5.0, 0.5]]))[0] == pytest.approx(0.5)
    with pytest.raises(NonPositiveScale):
        scaled(ball, 0.0)
    with pytest.raises(UnsupportedKind):
        translated(ball, [1.0])


def test_union_of_disjoint_balls():
    a = build_rfd("ball", N=2)
    b = translated(build_rfd("ball", N=2), [3.0, 0.0])
    u = union([a, b])
    assert u.measure == pytest.approx(2 * math.pi)
    assert u.layered
    assert u.tube(0.1) == pytest.approx(2 * a.tube(0.1))


def test_union_rejects_overlap_and_mixed_dimensions():
    ball = build_rfd("ball", N=2)
    with pytest.raises(IncompatibleUnion):
        union([ball, translated(ball, [0.5, 0.0])])
    with pytest.raises(IncompatibleUnion):
        union([ball, build_rfd("interval")])
    with pytest.raises(IncompatibleUnion):
        union([])


def test_parse_geometry():
    r = parse_geometry("ball:N=3,R=2")
    assert r.N == 3
    assert r.params["R"] == 2.0
    tri = parse_geometry("polygon:vertices=0 0;1 0;0 1")
    assert tri.measure == pytest.approx(0.5)
    assert parse_geometry("cantor:m=3,a=0.2,delta=none").params["delta"] is None


@pytest.mark.parametrize("spec", ["klein_bottle", "ball:Q=1"])
def test_parse_geometry_rejects(spec):
    with pytest.raises(UnsupportedKind):
        parse_geometry(spec)


def test_cantor_delta_below_gap_rejected():
    with pytest.raises(InvalidCantorParameters):
        build_rfd("cantor", delta=0.1)


def test_every_kind_is_registered():
    assert {"ball", "torus", "gasket", "cantor_product", "cusp", "exp_cusp", "string_rfd"} <= set(RFD_KINDS)


def test_exp_cusp_tube_is_positive_and_increasing():
    r = build_rfd("exp_cusp")
    v = [r.tube(t) for t in (0.02, 0.04, 0.08, 0.3)]
    assert all(x > 0 for x in v)
    assert v == sorted(v)


@pytest.mark.parametrize(
    "alias,kind,params",
    [
        ("polygon_boundary", "polygon", {"vertices": [[0, 0], [3, 0], [0, 1]]}),
        ("sierpinski_gasket", "gasket", {}),
    ],
)
def test_aliases_build_the_same_drum(alias, kind, params):
    a, b = build_rfd(alias, **params), build_rfd(kind, **params)
    assert a.measure == pytest.approx(b.measure, rel=1e-15)
    pts = np.array([[0.2, 0.1], [0.5, 0.25]])
    assert a.distance(pts) == pytest.approx(b.distance(pts), abs=1e-15)
