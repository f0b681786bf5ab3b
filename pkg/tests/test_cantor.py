from __future__ import annotations

import math

import numpy as np
import pytest

from engine.cantor import (
    content_bounds_from_oracle,
    drum_independence,
    drum_zeta_expr,
    gcs_create,
    gcs_distance_zeta_closed,
    gcs_intervals,
    quasiperiodic_drum_build,
    relative_distance_expr,
    relative_tube_expr,
    tube_csv,
    tube_gauge,
    tube_samples,
    tube_volume_closed,
    tube_volume_oracle,
    union_measure,
)
from engine.errors import DepthOverflow, InsufficientDepth, InvalidCantorParameters, NonPositiveT, PoleHit
from engine.merozeta import contour_residue, residue

LOG3_2 = math.log(2.0) / math.log(3.0)


@pytest.mark.parametrize("m,a,D", [(2, 1.0 / 3.0, LOG3_2), (3, 1.0 / 9.0, 0.5), (4, 1.0 / 16.0, 0.5)])
def test_dimension(m, a, D):
    C, inv = gcs_create(m, a)
    assert C.D == pytest.approx(D, rel=1e-14)
    assert inv.D == C.D
    assert C.a == pytest.approx(m ** (-1.0 / C.D))


@pytest.mark.parametrize("m,a", [(1, 0.1), (2, 0.5), (2, 0.0), (3, 0.4), (2.5, 0.1)])
def test_invalid_parameters(m, a):
    with pytest.raises(InvalidCantorParameters):
        gcs_create(m, a)


def test_ternary_contents():
    _, inv = gcs_create(2, 1.0 / 3.0)
    assert inv.M_lower == pytest.approx(2.495, abs=1e-4)
    assert inv.M_upper == pytest.approx(2.583, abs=1e-4)
    assert inv.M_lower < inv.res_tube_at_D < inv.M_upper
    assert inv.res_tube_at_D == pytest.approx(2.524, abs=5e-4)
    assert inv.res_distance_at_D == pytest.approx((1 - inv.D) * inv.res_tube_at_D, rel=1e-14)
    assert inv.closed_form_trusted


def test_content_bounds_from_oracle_match_closed_forms(cantor_set):
    _, inv = gcs_create(cantor_set.m, cantor_set.a)
    lower, upper = content_bounds_from_oracle(cantor_set)
    assert lower == pytest.approx(inv.M_lower, rel=1e-8)
    assert upper == pytest.approx(inv.M_upper, rel=1e-8)


def test_intervals_depth_zero_and_one():
    C, _ = gcs_create(2, 1.0 / 3.0)
    assert gcs_intervals(C, 0).tolist() == [[0.0, 1.0]]
    iv = gcs_intervals(C, 1)
    assert iv[0] == pytest.approx([0.0, 1.0 / 3.0])
    assert iv[1] == pytest.approx([2.0 / 3.0, 1.0])


def test_intervals_three_copies():
    C, _ = gcs_create(3, 0.2)
    iv = gcs_intervals(C, 1)
    assert len(iv) == 3
    assert np.diff(iv, axis=1).ravel() == pytest.approx([0.2] * 3)
    assert (iv[1:, 0] - iv[:-1, 1]) == pytest.approx([0.2, 0.2])
    assert iv[-1, 1] == pytest.approx(1.0)


def test_intervals_union_shrinks_with_depth(ternary):
    measures = [union_measure(gcs_intervals(ternary, k)) for k in range(6)]
    assert measures == pytest.approx([(2.0 / 3.0) ** k for k in range(6)])


def test_depth_overflow(ternary):
    with pytest.raises(DepthOverflow):
        gcs_intervals(ternary, 30)


@pytest.mark.parametrize("t,expected", [(1.0 / 6.0, 4.0 / 3.0), (1.0 / 18.0, 8.0 / 9.0), (0.75, 2.5)])
def test_tube_volume_values(ternary, t, expected):
    assert tube_volume_closed(ternary, t) == pytest.approx(expected, rel=1e-15)
    assert tube_volume_oracle(ternary, t) == pytest.approx(expected, rel=1e-14)


def test_oracle_at_fixed_depth(ternary):
    assert tube_volume_oracle(ternary, 1.0 / 18.0, depth=6) == pytest.approx(8.0 / 9.0, rel=1e-14)
    with pytest.raises(InsufficientDepth):
        tube_volume_oracle(ternary, 0.01, depth=1)


def test_nonpositive_t(ternary):
    with pytest.raises(NonPositiveT):
        tube_volume_closed(ternary, 0.0)
    with pytest.raises(NonPositiveT):
        tube_volume_oracle(ternary, -1.0)


def test_closed_form_matches_oracle(cantor_set):
    rng = np.random.default_rng(7)
    for t in np.exp(rng.uniform(math.log(1e-8), math.log(cantor_set.c), 50)):
        closed = tube_volume_closed(cantor_set, float(t))
        oracle = tube_volume_oracle(cantor_set, float(t))
        assert abs(closed - oracle) <= 1e-12 * (1 + oracle)


def test_tube_monotone_and_bounded(ternary):
    ts = np.geomspace(1e-6, 2.0, 200)
    v = np.array([tube_volume_closed(ternary, float(t)) for t in ts])
    assert np.all(np.diff(v) >= 0)
    assert np.all(v <= 1 + 2 * ts + 1e-15)


def test_multiplicative_periodicity(cantor_set):
    C = cantor_set
    for t in np.geomspace(C.c * C.a**3, C.c * 0.999, 20):
        t = float(t)
        lhs = tube_volume_closed(C, C.a * t) / (C.a * t) ** (1 - C.D)
        rhs = tube_volume_closed(C, t) / t ** (1 - C.D)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert tube_gauge(C, math.log(1 / t)) == pytest.approx(rhs, rel=1e-12)


def test_distance_zeta_at_one_is_tube_measure(ternary):
    assert gcs_distance_zeta_closed(ternary, 0.5, 1.0) == pytest.approx(2.0, rel=1e-14)


def test_distance_zeta_pole_hit(ternary):
    with pytest.raises(PoleHit):
        gcs_distance_zeta_closed(ternary, 0.5, 0.0)


def test_distance_residue_at_D(ternary):
    _, inv = gcs_create(2, 1.0 / 3.0)
    e = relative_distance_expr(ternary)
    r = residue(e, ternary.D)
    assert r.real == pytest.approx(0.9316, abs=1e-4)
    assert abs(r.imag) < 1e-12
    assert r.real == pytest.approx(inv.res_distance_at_D, rel=1e-10)
    assert abs(contour_residue(e, ternary.D) - inv.res_distance_at_D) <= 1e-8


def test_tube_residue_is_average_content(ternary):
    _, inv = gcs_create(2, 1.0 / 3.0)
    r = residue(relative_tube_expr(ternary), ternary.D)
    assert r.real == pytest.approx(inv.res_tube_at_D, rel=1e-8)


def test_tube_samples_csv(ternary):
    samples = tube_samples(ternary, [1e-3, 1e-2, 1e-1])
    text = tube_csv(ternary, samples)
    lines = text.strip().splitlines()
    assert lines[0] == "t,volume,normalized"
    assert len(lines) == 4


def test_quasiperiodic_drum():
    drum = quasiperiodic_drum_build(0.5, 3)
    assert drum.m_list == [2, 3, 5]
    assert drum.quasiperiods == pytest.approx([2 * math.log(2), 2 * math.log(3), 2 * math.log(5)])
    assert drum.a_list == pytest.approx([1 / 4, 1 / 9, 1 / 25])
    assert drum.quasiperiods == sorted(drum.quasiperiods)
    assert drum.nonremovable


def test_single_component_lattice():
    drum = quasiperiodic_drum_build(0.5, 1)
    pts = drum.lattice_points(20.0)
    p = drum.periods[0]
    assert all(z.real == 0.5 for z in pts)
    assert sorted(round(z.imag / p) for z in pts) == list(range(-int(20.0 // p), int(20.0 // p) + 1))


def test_drum_zeta_has_pole_at_D():
    drum = quasiperiodic_drum_build(0.5, 2)
    e = drum_zeta_expr(drum)
    assert abs(residue(e, 0.5)) > 0


def test_drum_independence_certificate():
    certs = drum_independence(quasiperiodic_drum_build(0.5, 3), qmax=10_000)
    assert certs["quasiperiods"].independent
    assert certs["log_m"].independent


def test_drum_rejects_bad_dimension():
    with pytest.raises(InvalidCantorParameters):
        quasiperiodic_drum_build(1.2, 2)
