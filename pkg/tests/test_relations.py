from __future__ import annotations

import math

import pytest
from sympy import Rational

from engine.errors import InvalidInput
from engine.relations import (
    best_rational,
    common_generator,
    continued_fraction,
    convergents,
    log_independence_certificate,
    rational_relation_scan,
)


def test_continued_fraction_of_dyadic_terminates():
    assert continued_fraction(3.125, 10) == [3, 8]


def test_convergents_of_golden_ratio_are_fibonacci():
    phi = (1 + math.sqrt(5)) / 2
    conv = convergents(continued_fraction(phi, 8))
    assert [int(c.q) for c in conv] == [1, 1, 2, 3, 5, 8, 13, 21]


@pytest.mark.parametrize(
    "x,expected",
    [(0.75, Rational(3, 4)), (-2.5, Rational(-5, 2)), (0.0, Rational(0))],
)
def test_best_rational(x, expected):
    assert best_rational(x, 100, 1e-12) == expected


def test_best_rational_respects_qmax():
    assert best_rational(math.pi, 100, 1e-12) is None


def test_commensurate_logs_are_related():
    res = rational_relation_scan([math.log(2.0), math.log(8.0)])
    assert not res.independent
    assert res.coefficients == [3, -1]
    assert res.residual < 1e-12


def test_three_term_relation_found():
    xs = [math.log(2.0), math.log(3.0), math.log(6.0)]
    res = rational_relation_scan(xs)
    assert not res.independent
    assert abs(sum(c * x for c, x in zip(res.coefficients, xs))) < 1e-10


def test_independent_logs_of_primes():
    res = rational_relation_scan([math.log(2.0), math.log(3.0)], qmax=1000)
    assert res.independent


@pytest.mark.parametrize("xs", [[], [1.0, -2.0], [1.0, math.inf]])
def test_scan_rejects_bad_input(xs):
    with pytest.raises(InvalidInput):
        rational_relation_scan(xs)


def test_log_certificate_primes_independent():
    assert log_independence_certificate([2, 3, 5, 7], qmax=10_000).independent


def test_log_certificate_finds_composite_relation():
    res = log_independence_certificate([2, 3, 12])
    assert not res.independent
    assert res.coefficients == [2, 1, -1]


def test_common_generator():
    g, ns = common_generator([math.log(4.0), math.log(8.0)], 100, 1e-12)
    assert g == pytest.approx(math.log(2.0))
    assert ns == [2, 3]
    assert common_generator([1.0, math.sqrt(2.0)], 100, 1e-12) is None
