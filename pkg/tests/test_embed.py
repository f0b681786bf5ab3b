from __future__ import annotations

import math

import pytest

from engine.cantor import GeneralizedCantorSet, tube_volume_closed
from engine.embed import (
    CantorDust,
    DustConfig,
    cantor_dust_zeta,
    cantor_tube_zeta,
    embed_tube_zeta,
    embedding_check,
    embedding_error_term,
    error_term_bound,
    error_term_residue,
    gamma_ratio_factor,
    gamma_ratio_residue,
    kneser_invariant,
    residue_transfer,
    segment_tube_zeta,
    strip_zeta,
)
from engine.errors import InvalidInput, NotAPole, PoleHit, UnsupportedKind
from engine.geometry import build_rfd
from engine.rfd import box_dimension_fit, distance_zeta_numeric, log_grid, tube_function_numeric, tube_zeta_numeric
from engine.types import FractalityClass, Window

LOG3_2 = math.log(2.0) / math.log(3.0)
LOG3_4 = math.log(4.0) / math.log(3.0)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / abs(b)


def _segment(s: complex, delta: float) -> complex:
    return segment_tube_zeta(s, delta, N=1)


@pytest.mark.parametrize("s", [0.3, 1.7 + 2.0j, -2.5])
def test_gamma_ratio_without_extra_dimensions_is_one(s):
    assert gamma_ratio_factor(2, 0, s) == 1.0


@pytest.mark.parametrize("N", [1, 2, 3])
def test_gamma_ratio_at_s_equal_N(N):
    assert gamma_ratio_factor(N, 1, N).real == pytest.approx(2.0, rel=1e-14)
    assert gamma_ratio_factor(N, 2, N).real == pytest.approx(math.pi, rel=1e-14)


@pytest.mark.parametrize("s", [0.3, 1.7 + 2.0j, -2.5, 0.5 - 4.0j])
def test_gamma_ratio_composes(s):
    whole = gamma_ratio_factor(1, 3, s)
    assert _rel(gamma_ratio_factor(1, 1, s) * gamma_ratio_factor(2, 2, s), whole) < 1e-12
    assert _rel(gamma_ratio_factor(1, 2, s) * gamma_ratio_factor(3, 1, s), whole) < 1e-12


def test_gamma_ratio_poles_and_zeros():
    with pytest.raises(PoleHit):
        gamma_ratio_factor(1, 1, 3.0)
    with pytest.raises(PoleHit):
        gamma_ratio_factor(1, 2, 3.0)
    assert gamma_ratio_factor(1, 1, 4.0) == 0j
    with pytest.raises(InvalidInput):
        gamma_ratio_factor(0, 1, 0.5)


def test_residue_parity_in_M():
    assert gamma_ratio_residue(1, 2, 0).real == pytest.approx(-2 * math.pi, rel=1e-10)
    for k in (1, 2, 3):
        assert abs(gamma_ratio_residue(1, 2, k)) < 1e-10
    assert gamma_ratio_residue(1, 1, 0).real == pytest.approx(-2.0, rel=1e-10)
    for k in (1, 2, 3):
        assert abs(gamma_ratio_residue(1, 1, k)) > 1e-3


def test_kneser_invariant_survives_embedding():
    C = GeneralizedCantorSet(2, 1.0 / 3.0)
    content = 2.524
    for M in (1, 2, 3):
        lifted = residue_transfer(content, 1, M, C.D).real
        assert kneser_invariant(lifted, C.D, 1 + M) == pytest.approx(kneser_invariant(content, C.D, 1), rel=1e-12)


@pytest.mark.parametrize("s", [0.9, 1.5 + 2.0j])
def test_cantor_tube_zeta_matches_quadrature(ternary, s):
    closed = cantor_tube_zeta(ternary, s, 0.5)
    numeric = tube_zeta_numeric(build_rfd("cantor", delta=0.5), s, 0.5)
    assert _rel(closed, numeric) < 1e-8


def test_cantor_tube_zeta_needs_re_s_above_D(ternary):
    with pytest.raises(UnsupportedKind):
        cantor_tube_zeta(ternary, 0.5, 0.5)


@pytest.mark.parametrize("s", [1.5, 2.5 + 1.0j])
def test_planar_segment_tube_zeta(s):
    numeric = tube_zeta_numeric(build_rfd("unit_segment", N=2, delta=0.5), s, 0.5)
    assert _rel(segment_tube_zeta(s, 0.5, N=2), numeric) < 1e-8


@pytest.mark.parametrize("s", [1.5, 2.2 + 1.0j])
def test_embedding_lifts_segment_to_the_plane(s):
    lifted = embed_tube_zeta(_segment, s, 0.5, N=1, M=1)
    assert _rel(lifted, segment_tube_zeta(s, 0.5, N=2)) < 1e-7


def test_embedding_splits_into_gamma_and_error_terms():
    s, delta = 1.5, 0.5
    whole = embed_tube_zeta(_segment, s, delta, N=1)
    split = gamma_ratio_factor(1, 1, s) * _segment(s, delta) + embedding_error_term(_segment, s, delta, N=1)
    assert _rel(split, whole) < 1e-8
    with pytest.raises(UnsupportedKind):
        embed_tube_zeta(_segment, 3.5, delta, N=1)


def test_error_term_bound_on_cantor_set(ternary):
    delta = 1.0 / 3.0
    tube = lambda s, d: cantor_tube_zeta(ternary, s, d)
    bound = error_term_bound(0.9, delta, tube_volume_closed(ternary, delta), 1)
    assert abs(embedding_error_term(tube, 0.9, delta, N=1)) <= bound


def test_error_term_residue_cancels_gamma_pole(ternary):
    tube = lambda s, d: cantor_tube_zeta(ternary, s, d)
    res = error_term_residue(tube, 1, 1, 0, 0.5)
    assert _rel(res, 2.0 * tube(3.0, 0.5)) < 1e-9


@pytest.mark.slow
def test_embedding_check_on_planar_cantor_set(ternary):
    planar = build_rfd("cantor_embedded", delta=1.0 / 3.0)
    report = embedding_check(lambda s, d: cantor_tube_zeta(ternary, s, d), planar, [0.9], 1.0 / 3.0)
    assert report.passed, report


def test_dust_at_two_is_the_square():
    assert cantor_dust_zeta(2.0).real == pytest.approx(1.0, abs=1e-8)


def test_dust_candidate_poles_raise():
    with pytest.raises(PoleHit):
        cantor_dust_zeta(LOG3_4)
    with pytest.raises(PoleHit):
        cantor_dust_zeta(0.0)


@pytest.mark.slow
@pytest.mark.parametrize("s", [1.5, 2.2])
def test_strip_routes_agree(s):
    direct = strip_zeta(s, DustConfig(route="strip"))
    continued = strip_zeta(s, DustConfig(route="error_term"))
    assert _rel(continued, direct) < 1e-6


def test_dust_candidates():
    dust = CantorDust()
    assert dust.D == pytest.approx(LOG3_4)
    pts = dust.candidate_points(Window.parse("-0.5:1.5:6"))
    assert len(pts) == 7
    assert 0j in pts
    assert sum(1 for p in pts if abs(p.real - LOG3_2) < 1e-12) == 3


def test_dust_residue_at_zero():
    assert CantorDust().residue(0.0).real == pytest.approx(2 * math.pi, rel=1e-10)


def test_dust_rejects_non_candidates():
    dust = CantorDust()
    with pytest.raises(NotAPole):
        dust.residue(0.5)
    with pytest.raises(NotAPole):
        dust.residue(complex(LOG3_4, 1.0))


@pytest.mark.slow
def test_dust_is_critically_fractal():
    result = CantorDust().classify(Window.parse("-0.5:1.5:6"))
    assert result.kind is FractalityClass.CRITICALLY_FRACTAL
    assert result.D == pytest.approx(LOG3_4)


@pytest.mark.slow
def test_dust_agrees_with_monte_carlo():
    value, err = distance_zeta_numeric(build_rfd("cantor_product"), 2.5, samples=400_000, seed=1)
    assert abs(value - cantor_dust_zeta(2.5)) <= 5 * err + 1e-6


def test_embedded_cantor_set_keeps_its_box_dimension():
    grid = log_grid(1e-7, 1e-3, 120)
    ambient = box_dimension_fit(tube_function_numeric(build_rfd("cantor", delta=None), grid), N=1, t_range=(1e-7, 1e-3))
    planar = box_dimension_fit(tube_function_numeric(build_rfd("cantor_embedded"), grid), N=2, t_range=(1e-7, 1e-3))
    assert planar.D == pytest.approx(ambient.D, abs=0.02)
    assert planar.D == pytest.approx(LOG3_2, abs=0.02)
