from __future__ import annotations

import math

import numpy as np
import pytest

from engine.cantor import gcs_create, gcs_distance_zeta_closed, tube_volume_closed
from engine.errors import DegenerateD, InsufficientRange, NonPositiveT
from engine.geometry import build_rfd
from engine.rfd import (
    ScalingCheck,
    TubeScalingCheck,
    UnionCheck,
    box_dimension_fit,
    cantor_level_pieces,
    check_tube_samples,
    distance_zeta_numeric,
    flatness_probe,
    functional_equation_check,
    lipschitz_check,
    log_grid,
    minkowski_content_estimate,
    tube_function_numeric,
    tube_samples_csv,
    tube_samples_from_csv,
    tube_zeta_numeric,
    verify_identities,
)

LOG3_2 = math.log(2.0) / math.log(3.0)
RECTANGLE = [[0, 0], [2, 0], [2, 1], [0, 1]]


def _rectangle_tube(t: float) -> float:
    return 2.0 - (2.0 - 2.0 * t) * (1.0 - 2.0 * t)


def _sampled_s(re_lo: float, re_hi: float, n: int, im_max: float = 4.0, seed: int = 0) -> list[complex]:
    rng = np.random.default_rng(seed)
    return list(rng.uniform(re_lo, re_hi, n) + 1j * rng.uniform(-im_max, im_max, n))


@pytest.mark.parametrize(
    "kind,params",
    [("ball", {"N": 2}), ("torus", {}), ("gasket", {}), ("cantor", {"delta": 0.5}), ("cusp", {"alpha": 2.0})],
)
def test_distance_zeta_at_N_is_measure(kind, params):
    r = build_rfd(kind, **params)
    value, _ = distance_zeta_numeric(r, r.N)
    assert value.real == pytest.approx(r.measure, rel=1e-9)


@pytest.mark.parametrize("s", [3.0, 2.5 + 4.0j])
def test_disk_distance_zeta_closed_form(s):
    value, err = distance_zeta_numeric(build_rfd("ball", N=2), s)
    expected = 2 * math.pi / (s * (s - 1))
    assert abs(value - expected) <= 1e-9 * abs(expected)
    assert err < 1e-8


@pytest.mark.parametrize("s", [2.0, 0.9 + 3.0j])
def test_cantor_distance_zeta_matches_closed_form(ternary, s):
    value, _ = distance_zeta_numeric(build_rfd("cantor", delta=0.5), s)
    expected = gcs_distance_zeta_closed(ternary, 0.5, s)
    assert abs(value - expected) <= 1e-9 * abs(expected)


def test_monte_carlo_at_N_covers_the_box_exactly():
    value, err = distance_zeta_numeric(build_rfd("cantor_product"), 2.0, samples=20_000, seed=5)
    assert value.real == pytest.approx(1.0, rel=1e-12)
    assert err == pytest.approx(0.0, abs=1e-12)


def test_log_grid():
    grid = log_grid(1e-4, 1e-1, 4)
    assert grid == pytest.approx([1e-4, 1e-3, 1e-2, 1e-1])
    with pytest.raises(NonPositiveT):
        log_grid(0.0, 1.0, 5)


def test_exact_tube_samples_follow_cantor_closed_form(ternary):
    samples = tube_function_numeric(build_rfd("cantor", delta=0.5), log_grid(1e-5, 0.4, 25))
    assert samples.method == "exact"
    for t, v in zip(samples.t, samples.volume):
        assert v == pytest.approx(tube_volume_closed(ternary, t), rel=1e-12)
    assert check_tube_samples(samples, measure=2.0).passed


def test_monte_carlo_tube_of_rectangle():
    r = build_rfd("polygon", vertices=RECTANGLE)
    grid = [0.05, 0.1, 0.2]
    first = tube_function_numeric(r, grid, samples=20_000, seed=3)
    again = tube_function_numeric(r, grid, samples=20_000, seed=3)
    assert first.method == "montecarlo"
    assert first.volume == again.volume
    for t, v, se in zip(first.t, first.volume, first.stderr):
        assert abs(v - _rectangle_tube(t)) <= 5 * se + 1e-12
    assert check_tube_samples(first, measure=2.0).passed


def test_tube_rejects_nonpositive_t():
    with pytest.raises(NonPositiveT):
        tube_function_numeric(build_rfd("ball", N=2), [0.1, 0.0])


def test_tube_csv_round_trip(tmp_path):
    samples = tube_function_numeric(build_rfd("ball", N=2), log_grid(1e-3, 0.5, 12))
    path = tmp_path / "ball.csv"
    path.write_text(tube_samples_csv(samples), encoding="utf-8")
    back = tube_samples_from_csv(path)
    assert back.t == samples.t
    assert back.volume == samples.volume
    assert back.method == "exact"
    assert back.stderr is None
    assert back.label == "ball"


def test_box_dimension_of_relative_cantor_set():
    samples = tube_function_numeric(build_rfd("cantor", delta=None), log_grid(1e-7, 1e-3, 120))
    fit = box_dimension_fit(samples, N=1, t_range=(1e-7, 1e-3))
    assert fit.D == pytest.approx(LOG3_2, abs=0.01)
    assert fit.D_lower <= fit.D_upper <= 1.0
    assert fit.window_slopes


def test_box_dimension_of_cusp_is_negative():
    samples = tube_function_numeric(build_rfd("cusp", alpha=2.0), log_grid(1e-5, 1e-2, 40))
    fit = box_dimension_fit(samples, N=2, t_range=(1e-5, 1e-2))
    assert fit.D == pytest.approx(-1.0, abs=0.01)


@pytest.mark.slow
def test_box_dimension_of_cantor_dust_by_monte_carlo():
    samples = tube_function_numeric(build_rfd("cantor_product"), log_grid(1e-4, 1e-1, 25), samples=1_000_000, seed=2)
    fit = box_dimension_fit(samples, N=2, t_range=(1e-4, 1e-1))
    assert fit.D == pytest.approx(math.log(4.0) / math.log(3.0), abs=0.03)


def test_box_dimension_needs_three_decades():
    samples = tube_function_numeric(build_rfd("ball", N=2), log_grid(1e-3, 1e-1, 20))
    with pytest.raises(InsufficientRange):
        box_dimension_fit(samples, N=2, t_range=(1e-3, 1e-1))
    short = tube_function_numeric(build_rfd("ball", N=2), log_grid(1e-6, 1e-1, 5))
    with pytest.raises(InsufficientRange):
        box_dimension_fit(short, N=2)


def test_minkowski_content_of_disk():
    samples = tube_function_numeric(build_rfd("ball", N=2), log_grid(1e-6, 1e-1, 60))
    est = minkowski_content_estimate(samples, N=2, D=1.0)
    assert est.lower == pytest.approx(2 * math.pi, rel=1e-4)
    assert est.upper == pytest.approx(2 * math.pi, rel=1e-4)
    assert est.average == pytest.approx(2 * math.pi, rel=1e-2)
    with pytest.raises(DegenerateD):
        minkowski_content_estimate(samples, N=2, D=2.0)


def test_minkowski_contents_of_cantor_set():
    _, inv = gcs_create(2, 1.0 / 3.0)
    samples = tube_function_numeric(build_rfd("cantor", delta=None), log_grid(1e-9, 1e-4, 1000))
    est = minkowski_content_estimate(samples, N=1, D=inv.D, t_range=(1e-9, 1e-4))
    assert est.lower == pytest.approx(inv.M_lower, abs=0.01)
    assert est.upper == pytest.approx(inv.M_upper, abs=0.01)
    assert est.average == pytest.approx(inv.res_tube_at_D, rel=1e-2)


@pytest.mark.parametrize(
    "kind,params,re_range",
    [
        ("ball", {"N": 2}, (1.3, 3.5)),
        ("torus", {}, (2.3, 3.5)),
        ("cantor", {"delta": 0.5}, (0.8, 2.0)),
        ("gasket", {}, (1.8, 3.5)),
    ],
)
def test_functional_equation(kind, params, re_range):
    s_list = _sampled_s(*re_range, n=10)
    report = functional_equation_check(build_rfd(kind, **params), s_list)
    assert report.passed, report
    assert len(report.checks) == 10


def test_tube_zeta_of_disk():
    assert tube_zeta_numeric(build_rfd("ball", N=2), 3.0, 1.0).real == pytest.approx(2 * math.pi / 3, rel=1e-9)


def test_scaling_and_tube_scaling_identities():
    report = verify_identities(
        build_rfd("ball", N=2),
        [ScalingCheck(2.0, _sampled_s(1.5, 3.5, n=20, seed=1)), TubeScalingCheck(2.0, [0.1, 0.5])],
    )
    assert report.passed, report
    assert len(report.checks) == 22


def test_union_identity_on_first_cantor_level():
    parts = cantor_level_pieces()
    assert len(parts) == 3
    report = verify_identities(build_rfd("cantor", delta=None), [UnionCheck(parts, _sampled_s(0.8, 2.0, n=20, seed=2))])
    assert report.passed, report
    assert len(report.checks) == 20


@pytest.mark.parametrize("kind,params", [("ball", {"N": 2}), ("cantor_product", {}), ("polygon", {"vertices": RECTANGLE})])
def test_distance_oracles_are_lipschitz(kind, params):
    check = lipschitz_check(build_rfd(kind, **params), seed=11)
    assert check.passed, check


def test_lipschitz_skipped_without_oracle():
    check = lipschitz_check(build_rfd("cantor_graph"))
    assert check.passed
    assert check.details["skipped"] == "no oracle"


def test_flat_cusp_is_a_flatness_candidate():
    check = flatness_probe(build_rfd("exp_cusp"))
    assert check.passed
    assert check.details["flatness"] == "inf"
