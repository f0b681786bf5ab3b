from __future__ import annotations

import math

import numpy as np
import pytest

from engine.cantor import GeneralizedCantorSet, distance_expr, tube_volume_closed
from engine.dirichlet import DirichletPolynomial
from engine.errors import (
    AllZeroCoefficients,
    ArityMismatch,
    ContourContainsOtherPole,
    DegenerateDimension,
    EmptyWindow,
    NotAPole,
    PoleHit,
)
from engine.merozeta import (
    ENTIRE_FACTORS,
    POLE_CSV_HEADER,
    MeroExpr,
    MeroTerm,
    TransferDirection,
    classify_fractality,
    contour_residue,
    eval_expr,
    expr_from_dict,
    mellin_check,
    poles_in_window,
    poles_csv,
    positive_reach_zeta,
    residue,
    residue_at,
    scale_expr,
    tube_distance_transfer,
)
from engine.types import FractalityClass, Window

GASKET_F = DirichletPolynomial.of((3, 0.5))
TERNARY_F = DirichletPolynomial.of((2, 1.0 / 3.0))


def _expr(*terms: MeroTerm, label: str = "") -> MeroExpr:
    return MeroExpr(tuple(terms), label=label)


def gasket_like() -> MeroExpr:
    # 2^-s / (s (s-1) (1 - 3 * 2^-s))
    return _expr(
        MeroTerm(coeff=1.0, base=0.5, rational_poles=((0j, 1), (1 + 0j, 1)), dirichlet_denoms=((GASKET_F, 1),)),
        label="gasket-like",
    )


def ball_disk() -> MeroExpr:
    return _expr(MeroTerm(coeff=2 * math.pi, rational_poles=((0j, 1), (1 + 0j, 1))), label="disk")


def cantor_graph() -> MeroExpr:
    # 2 / (s (3^s - 2) (s - 1))
    return _expr(
        MeroTerm(coeff=2.0, base=1.0 / 3.0, rational_poles=((0j, 1), (1 + 0j, 1)), dirichlet_denoms=((TERNARY_F, 1),)),
        label="cantor-graph",
    )


def test_eval_disk_at_two_is_area():
    assert eval_expr(ball_disk(), 2.0) == pytest.approx(math.pi, rel=1e-15)


def test_eval_cantor_graph_at_two():
    assert eval_expr(cantor_graph(), 2.0) == pytest.approx(1.0 / 7.0, rel=1e-14)


@pytest.mark.parametrize("s", [0.0, 1.0, math.log(3.0) / math.log(2.0)])
def test_eval_at_pole_raises(s):
    with pytest.raises(PoleHit):
        eval_expr(gasket_like(), s)


def test_gasket_poles_in_window():
    dims = poles_in_window(gasket_like(), Window.parse("-1:3:30"))
    assert len(dims) == 9
    D = math.log(3.0) / math.log(2.0)
    p = 2 * math.pi / math.log(2.0)
    line = [d for d in dims if abs(d.re - D) < 1e-9]
    assert len(line) == 7
    assert sorted(round(d.im / p) for d in line) == [-3, -2, -1, 0, 1, 2, 3]
    assert all(d.order == 1 and not d.cancelled for d in dims)
    assert all(d.principal == (abs(d.re - D) < 1e-9) for d in dims)
    ims = sorted(d.im for d in line)
    assert all(abs((b - a) - p) < 1e-10 for a, b in zip(ims, ims[1:]))


def test_disk_poles_are_real_and_simple():
    dims = poles_in_window(ball_disk(), Window.parse("-1:3:10"))
    assert [(d.re, d.im, d.order) for d in dims] == [(0.0, 0.0, 1), (1.0, 0.0, 1)]
    assert dims[1].residue == pytest.approx(2 * math.pi)
    assert dims[0].residue == pytest.approx(-2 * math.pi)


def test_analytic_and_contour_residues_agree():
    e = gasket_like()
    D = math.log(3.0) / math.log(2.0)
    for w in (D, complex(D, 2 * math.pi / math.log(2.0)), 0.0, 1.0):
        assert abs(residue(e, w) - contour_residue(e, w)) <= 1e-8 * max(1.0, abs(residue(e, w)))


def test_dirichlet_residue_closed_form():
    e = gasket_like()
    D = math.log(3.0) / math.log(2.0)
    # d/ds (1 - 3 * 2^-s) = 3 log 2 * 2^-s, and 3 * 2^-D = 1
    expected = 2.0**-D / (D * (D - 1) * math.log(2.0))
    assert residue(e, D).real == pytest.approx(expected, rel=1e-12)


def test_double_pole_principal_part():
    e = _expr(MeroTerm(coeff=1.0, base=2.0, rational_poles=((1 + 0j, 2),)))
    c2, c1 = residue_at(e, 1.0)
    assert c2 == pytest.approx(2.0, rel=1e-9)
    assert c1 == pytest.approx(2.0 * math.log(2.0), rel=1e-9)
    dims = poles_in_window(e, Window.parse("0:2:1"))
    assert dims[0].order == 2


def test_numerator_zero_cancels_pole():
    e = _expr(MeroTerm(numerator=(-1.0, 1.0), rational_poles=((1 + 0j, 1),)))
    dims = poles_in_window(e, Window.parse("0:2:1"))
    assert len(dims) == 1
    assert dims[0].cancelled
    assert not dims[0].principal


def test_not_a_pole():
    with pytest.raises(NotAPole):
        residue(ball_disk(), 0.5)


def test_nearby_poles_rejected():
    e = _expr(MeroTerm(rational_poles=((1 + 0j, 1), (1.0001 + 0j, 1))))
    with pytest.raises(ContourContainsOtherPole):
        poles_in_window(e, Window.parse("0:2:1"))
    with pytest.raises(ContourContainsOtherPole):
        residue(e, 1.0)


def test_empty_window():
    with pytest.raises(EmptyWindow):
        Window.parse("2:1:5")
    with pytest.raises(EmptyWindow):
        Window.parse("0:1")


def test_scale_expr_values_and_residues():
    e = gasket_like()
    assert scale_expr(e, 1.0)(2.5) == pytest.approx(e(2.5))
    assert eval_expr(scale_expr(e, 0.5), 2.0) == pytest.approx(eval_expr(e, 2.0) / 4, rel=1e-14)
    D = math.log(3.0) / math.log(2.0)
    assert residue(scale_expr(e, 2.0), D) == pytest.approx(2.0**D * residue(e, D), rel=1e-10)


def test_positive_reach_torus():
    R, r = 2.0, 1.0
    tube = positive_reach_zeta([0.0, 0.0, 8 * math.pi * R * r], 3, 0.5)
    dims = poles_in_window(tube, Window.parse("-1:4:5"))
    assert [d.re for d in dims] == [2.0]
    assert residue(tube, 2.0) == pytest.approx(8 * math.pi * R * r, rel=1e-12)

    dist = tube_distance_transfer(tube, TransferDirection.TUBE_TO_DISTANCE, 3, 0.5, 8 * math.pi * R * r * 0.5)
    assert residue(dist, 2.0) == pytest.approx((3 - 2) * residue(tube, 2.0), rel=1e-10)


def test_positive_reach_dimension_is_top_index():
    e = positive_reach_zeta([0.0, 0.0, 0.0, 1.5], 4, 1.0)
    assert e.rational_pole_points() == [3 + 0j]


def test_positive_reach_errors():
    with pytest.raises(AllZeroCoefficients):
        positive_reach_zeta([0.0, 0.0], 2, 1.0)
    with pytest.raises(ArityMismatch):
        positive_reach_zeta([1.0], 2, 1.0)


def test_distance_to_tube_on_cantor_set():
    C = GeneralizedCantorSet(2, 1.0 / 3.0)
    dist = distance_expr(C, 0.5)
    tube = tube_distance_transfer(dist, "distance->tube", 1, 0.5, 2.0)
    for s in (0.9, 1.4 + 2.0j, 3.0):
        expected = (eval_expr(dist, s) - 0.5 ** (s - 1) * 2.0) / (1 - s)
        assert abs(eval_expr(tube, s) - expected) < 1e-12 * max(1.0, abs(expected))
    assert residue(dist, C.D) == pytest.approx((1 - C.D) * residue(tube, C.D), rel=1e-10)


def test_transfer_rejects_pole_at_N():
    with pytest.raises(DegenerateDimension):
        tube_distance_transfer(ball_disk(), "tube->distance", 1, 1.0, 1.0)


def test_classification():
    assert classify_fractality(gasket_like(), Window.parse("-1:3:30")).kind is FractalityClass.CRITICALLY_FRACTAL
    assert classify_fractality(ball_disk(), Window.parse("-1:3:10")).kind is FractalityClass.NOT_FRACTAL

    result = classify_fractality(cantor_graph(), Window.parse("-1:2:20"))
    assert result.kind is FractalityClass.STRICTLY_SUBCRITICAL
    assert result.D == pytest.approx(1.0)
    assert result.dims == pytest.approx([math.log(2.0) / math.log(3.0)])
    assert result.render() == "strictly_subcritically_fractal d=[0.63093]"


def test_entire_factors():
    Z, I = ENTIRE_FACTORS["Z"], ENTIRE_FACTORS["I"]
    assert Z.quadrature(0.0).real == pytest.approx(math.pi / 2, rel=1e-12)
    assert Z.quadrature(1.0).real == pytest.approx(math.sqrt(2) * math.log(1 + math.sqrt(2)), rel=1e-10)
    assert Z(0.0).real == pytest.approx(math.pi / 2, rel=1e-9)
    assert I(2.0).real == pytest.approx(1.0, rel=1e-12)
    assert I(-1.0).real == pytest.approx(math.sqrt(2) / 2, rel=1e-12)


def test_square_factor_interpolant_matches_quadrature():
    Z = ENTIRE_FACTORS["Z"]
    rng = np.random.default_rng(3)
    s = rng.uniform(-2.0, 4.0, 300) + 1j * rng.uniform(-40.0, 40.0, 300)
    s[:4] = [-2.0 - 40.0j, 4.0 + 40.0j, 1.0, 0.5 + 39.9j]
    fast = Z(s)
    slow = Z.quadrature(s, tol=1e-13)
    assert np.max(np.abs(fast - slow)) <= 1e-9 * max(1.0, float(np.max(np.abs(slow))))


def test_square_factor_outside_the_box_uses_quadrature():
    Z = ENTIRE_FACTORS["Z"]
    for s in (6.0 + 1.0j, 1.0 + 55.0j, -3.0):
        assert Z(s) == Z.quadrature(s)


def test_pole_csv():
    text = poles_csv(poles_in_window(ball_disk(), Window.parse("-1:3:10")))
    lines = text.strip().splitlines()
    assert lines[0] == ",".join(POLE_CSV_HEADER)
    assert len(lines) == 3


def test_expression_json_round_trip():
    e = cantor_graph()
    back = expr_from_dict(e.to_dict())
    for s in (2.0, 0.3 + 5.0j):
        assert back(s) == pytest.approx(e(s), rel=1e-15)


def test_mellin_check_on_cantor_set():
    C = GeneralizedCantorSet(2, 1.0 / 3.0)
    report = mellin_check(
        lambda t: tube_volume_closed(C, t),
        distance_expr(C, 0.5),
        N=1,
        s_list=[0.8, 0.9 + 1.0j],
        t_sat=0.5,
        measure=2.0,
        ratio=1.0 / 3.0,
    )
    assert report.passed, report
