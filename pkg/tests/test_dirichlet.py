from __future__ import annotations

import math

import pytest

from engine.config import override_settings
from engine.dirichlet import (
    DirichletPolynomial,
    DirichletZero,
    lattice_analysis,
    moran_root,
    zero_multiplicity,
    zeros_in_window,
)
from engine.errors import InvalidInput, NoRealRoot, ZeroNotConverged
from engine.types import Window


@pytest.mark.parametrize(
    "b,r,expected",
    [
        (3, 0.5, math.log(3.0) / math.log(2.0)),
        (8, 1.0 / 3.0, math.log(8.0) / math.log(3.0)),
        (2, 1.0 / 3.0, math.log(2.0) / math.log(3.0)),
    ],
)
def test_moran_root_of_single_ratio(b, r, expected):
    f = DirichletPolynomial.of((b, r))
    D = moran_root(f)
    assert D == pytest.approx(expected, rel=1e-14)
    assert abs(b * r**D - 1.0) <= 1e-13


def test_moran_root_mixed_ratios():
    f = DirichletPolynomial.of((1, 0.5), (1, 1.0 / 3.0))
    D = moran_root(f)
    assert 0.5**D + (1.0 / 3.0) ** D == pytest.approx(1.0, abs=1e-13)


def test_moran_root_needs_weight_above_one():
    f = DirichletPolynomial.of((1, 0.5))
    with pytest.raises(NoRealRoot):
        moran_root(f)
    assert moran_root(f, allow_nonpositive=True) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("pairs", [((0, 0.5),), ((1, 1.0),), ((1, 0.0),)])
def test_invalid_terms(pairs):
    with pytest.raises(InvalidInput):
        DirichletPolynomial.of(*pairs)


def test_merged_combines_equal_ratios():
    f = DirichletPolynomial.of((1, 0.25), (2, 0.25), (1, 0.5)).merged()
    assert f.terms == ((1.0, 0.5), (3.0, 0.25))


@pytest.mark.parametrize("b,r,base", [(3, 0.5, 2.0), (8, 1.0 / 3.0, 3.0)])
def test_lattice_period(b, r, base):
    info = lattice_analysis(DirichletPolynomial.of((b, r)))
    assert info.lattice
    assert info.period == pytest.approx(2.0 * math.pi / math.log(base), rel=1e-12)


def test_commensurate_ratios_share_generator():
    info = lattice_analysis(DirichletPolynomial.of((1, 0.5), (2, 0.25)))
    assert info.lattice
    assert info.generator == pytest.approx(0.5)
    assert sorted(info.exponents) == [1, 2]


def test_two_and_three_are_nonlattice():
    assert not lattice_analysis(DirichletPolynomial.of((1, 0.5), (1, 1.0 / 3.0))).lattice


def test_gasket_zeros_lie_on_one_vertical_line():
    f = DirichletPolynomial.of((3, 0.5))
    zeros = zeros_in_window(f, Window.parse("-1:3:30"))
    D = math.log(3.0) / math.log(2.0)
    p = 2.0 * math.pi / math.log(2.0)
    assert len(zeros) == 7
    for z in zeros:
        assert z.s.real == pytest.approx(D, abs=1e-12)
        assert z.s.imag / p == pytest.approx(round(z.s.imag / p), abs=1e-10)
        assert z.multiplicity == 1


def test_lattice_polynomial_with_two_lines():
    # 1 - 2^-s - 4^-s = 1 - z - z^2 with z = 2^-s
    f = DirichletPolynomial.of((1, 0.5), (1, 0.25))
    zeros = zeros_in_window(f, Window.parse("-2:2:5"))
    reals = sorted({round(z.s.real, 9) for z in zeros})
    phi = (1 + math.sqrt(5)) / 2
    assert reals[-1] == pytest.approx(math.log(phi) / math.log(2.0), abs=1e-9)
    assert reals[0] == pytest.approx(-math.log(phi) / math.log(2.0), abs=1e-9)
    assert all(abs(f(z.s)) < 1e-10 for z in zeros)


def test_nonlattice_zeros_found_and_audited():
    f = DirichletPolynomial.of((1, 0.5), (1, 1.0 / 3.0))
    zeros = zeros_in_window(f, Window.parse("-1:1:6"))
    D = moran_root(f)
    assert any(abs(z.s - D) < 1e-10 for z in zeros)
    assert all(z.s.real <= D + 1e-9 for z in zeros)
    assert all(abs(f(z.s)) < 1e-10 for z in zeros)


def test_simple_zero_multiplicity():
    f = DirichletPolynomial.of((2, 1.0 / 3.0))
    assert zero_multiplicity(f, complex(moran_root(f), 0.0)) == 1


def _off_seed(monkeypatch, offset: float) -> tuple[DirichletPolynomial, float]:
    f = DirichletPolynomial.of((1, 0.5), (1, 1.0 / 3.0))
    D = moran_root(f)
    monkeypatch.setattr("engine.dirichlet._nonlattice_zeros", lambda f, window: [DirichletZero(complex(D + offset), 1)])
    return f, D


def test_inaccurate_seed_is_re_polished(monkeypatch):
    f, D = _off_seed(monkeypatch, 0.05)
    zeros = zeros_in_window(f, Window(re_min=0.0, re_max=2.0, im_max=1.0), audit=False)
    assert len(zeros) == 1
    assert zeros[0].s == pytest.approx(D, abs=1e-12)
    assert abs(f(zeros[0].s)) <= 1e-10


def test_seed_that_never_converges_raises(monkeypatch):
    f, D = _off_seed(monkeypatch, 0.3)
    with override_settings(newton_max_iter=0):
        with pytest.raises(ZeroNotConverged) as exc:
            zeros_in_window(f, Window(re_min=0.0, re_max=2.0, im_max=1.0), audit=False)
    assert exc.value.exit_code == 4
    assert exc.value.details["residual"] > 1e-10
