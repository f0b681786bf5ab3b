"""
Closed-form meromorphic zeta expressions.

A MeroExpr is a finite sum of terms

    coeff * base^s * P(s) * E(s) / ( prod (s - p)^k * prod f(s)^m )

with P a polynomial, E an optional quadrature-backed entire factor and f
Dirichlet polynomials. Poles are the rational poles plus the zeros of the
Dirichlet denominators; orders and principal parts are read off contour
integrals so that zero/pole cancellations are visible.

Inputs:
  - expressions built by engine.cantor, engine.sprays, engine.strings, or by hand
  - rectangular windows (engine.types.Window)

Tests care about:
  - pole sets and orders in a window
  - analytic vs contour residues agreeing
  - scaling and tube/distance transfer
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np
from loguru import logger
from numpy.polynomial import chebyshev, legendre
from numpy.polynomial import polynomial as P

from engine.config import get_settings
from engine.dirichlet import (
    DirichletPolynomial,
    polish_zero,
    zero_multiplicity,
    zeros_in_window,
)
from engine.errors import (
    AllZeroCoefficients,
    ArityMismatch,
    ContourContainsOtherPole,
    DegenerateDimension,
    EntireFactorFailure,
    NonPositiveScale,
    NotAPole,
    PoleHit,
    UnsupportedKind,
)
from engine.serialize import csv_text
from engine.types import (
    CheckResult,
    Classification,
    ComplexDimension,
    FractalityClass,
    Report,
    Window,
    cpair,
)


# --- entire factors -----------------------------------------------------------


def _phi_square_vertex(theta: np.ndarray) -> np.ndarray:
    return -np.log(np.cos(theta) + np.sin(theta))


def _phi_secant(theta: np.ndarray) -> np.ndarray:
    return -np.log(np.cos(theta))


@lru_cache(maxsize=32)
def _gauss_nodes(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class EntireFactor:
    """
    E(s) = integral_lo^hi exp(s * phi(theta)) dtheta with bounded phi.

    `quadrature` uses Gauss-Legendre rules, doubling the node count until two
    successive rules agree to `tol`. A factor with a `box` (re_min, re_max,
    im_max) is served inside that rectangle from a cached tensor Chebyshev
    interpolant and falls back to quadrature outside it.
    """

    name: str
    phi: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    tol: float | None = None
    box: tuple[float, float, float] | None = None

    def __call__(self, s):
        arr = np.atleast_1d(np.asarray(s, dtype=complex))
        if self.box is not None and _in_box(self.box, arr):
            val = chebyshev.chebval2d(*_to_unit(self.box, arr), _interpolant(self))
        else:
            val = self.quadrature(arr)
        return complex(val[0]) if np.ndim(s) == 0 else val

    def quadrature(self, s, tol: float | None = None):
        if tol is None:
            tol = get_settings().entire_tol if self.tol is None else self.tol
        arr = np.atleast_1d(np.asarray(s, dtype=complex))
        prev = None
        n = 32
        while n <= 4096:
            x, w = _gauss_nodes(n, self.lo, self.hi)
            with np.errstate(over="ignore", invalid="ignore"):
                val = np.exp(np.multiply.outer(arr, self.phi(x))) @ w
            if prev is not None:
                gap = float(np.max(np.abs(val - prev)))
                if gap <= tol * max(1.0, float(np.max(np.abs(val)))):
                    return complex(val[0]) if np.ndim(s) == 0 else val
            prev = val
            n *= 2
        raise EntireFactorFailure(
            f"entire factor {self.name} did not converge",
            max_abs_s=float(np.max(np.abs(arr))),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "lo": self.lo, "hi": self.hi}


def _in_box(box: tuple[float, float, float], s: np.ndarray) -> bool:
    re_min, re_max, im_max = box
    return bool(np.all((s.real >= re_min) & (s.real <= re_max) & (np.abs(s.imag) <= im_max)))


def _to_unit(box: tuple[float, float, float], s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    re_min, re_max, im_max = box
    return (2.0 * s.real - (re_min + re_max)) / (re_max - re_min), s.imag / im_max


def _chebyshev_points(n: int) -> np.ndarray:
    return np.cos(np.pi * (np.arange(n) + 0.5) / n)


@lru_cache(maxsize=8)
def _interpolant(factor: EntireFactor) -> np.ndarray:
    """Coefficients c[i, j] of sum c T_i(u) T_j(v) over the factor's box, checked off-grid."""
    settings = get_settings()
    re_min, re_max, im_max = factor.box
    rng = np.random.default_rng(0)
    check = rng.uniform(re_min, re_max, 200) + 1j * rng.uniform(-im_max, im_max, 200)
    exact = factor.quadrature(check, tol=1e-13)
    scale = max(1.0, float(np.max(np.abs(exact))))
    n_re, n_im = 16, 64
    gap = math.inf
    while n_re <= 64:
        u, v = _chebyshev_points(n_re), _chebyshev_points(n_im)
        grid = 0.5 * (re_min + re_max) + 0.5 * (re_max - re_min) * u[:, None] + 1j * im_max * v[None, :]
        values = factor.quadrature(grid.ravel(), tol=1e-13).reshape(grid.shape)
        # values = V_u c V_v^T
        partial = np.linalg.solve(chebyshev.chebvander(u, n_re - 1), values)
        coeffs = np.linalg.solve(chebyshev.chebvander(v, n_im - 1), partial.T).T
        gap = float(np.max(np.abs(chebyshev.chebval2d(*_to_unit(factor.box, check), coeffs) - exact)))
        if gap <= settings.entire_interp_tol * scale:
            logger.bind(factor=factor.name, degrees=(n_re, n_im), gap=gap).debug("entire factor interpolant built")
            return coeffs
        n_re, n_im = 2 * n_re, 2 * n_im
    raise EntireFactorFailure(f"interpolant of {factor.name} missed its tolerance", gap=gap, box=list(factor.box))


ENTIRE_FACTORS: dict[str, EntireFactor] = {
    # vertex pieces of the 1/3-square generator
    "Z": EntireFactor("Z", _phi_square_vertex, 0.0, math.pi / 2, box=(-2.0, 4.0, 40.0)),
    # incomplete-beta factor of the Cantor dust
    "I": EntireFactor("I", _phi_secant, 0.0, math.pi / 4),
}


# --- expressions --------------------------------------------------------------


def _near(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(b))


@dataclass(frozen=True)
class MeroTerm:
    coeff: complex = 1.0
    base: float = 1.0
    numerator: tuple[complex, ...] = (1.0,)  # ascending powers of s
    rational_poles: tuple[tuple[complex, int], ...] = ()
    dirichlet_denoms: tuple[tuple[DirichletPolynomial, int], ...] = ()
    entire_factor: EntireFactor | None = None

    def __post_init__(self) -> None:
        if not (self.base > 0):
            raise NonPositiveScale("term base must be positive", base=self.base)

    def value(self, s, skip_rational: int | None = None, skip_dirichlet: int | None = None):
        s = np.asarray(s, dtype=complex)
        with np.errstate(all="ignore"):
            out = self.coeff * np.exp(s * math.log(self.base)) * P.polyval(s, self.numerator)
            for i, (p, k) in enumerate(self.rational_poles):
                if i != skip_rational:
                    out = out / (s - p) ** k
            for j, (f, k) in enumerate(self.dirichlet_denoms):
                if j != skip_dirichlet:
                    out = out / f(s) ** k
        if self.entire_factor is not None:
            out = out * self.entire_factor(s)
        return out

    def numerator_zero_order(self, w: complex) -> int:
        poly = np.asarray(self.numerator, dtype=complex)
        scale = max(1.0, float(np.max(np.abs(poly))))
        k = 0
        while poly.size and abs(P.polyval(w, poly)) < 1e-9 * scale:
            poly = P.polyder(poly)
            k += 1
        return k

    def pole_order(self, w: complex, dirichlet_mults: dict[DirichletPolynomial, int]) -> int:
        order = sum(k for p, k in self.rational_poles if _near(w, p, 1e-9))
        order += sum(dirichlet_mults.get(f, 0) * k for f, k in self.dirichlet_denoms)
        return order - self.numerator_zero_order(w)

    def scaled(self, lam: float) -> "MeroTerm":
        return replace(self, base=self.base * lam)

    def to_dict(self) -> dict[str, Any]:
        return {
            "coeff": cpair(self.coeff),
            "base": self.base,
            "numerator": [cpair(c) for c in self.numerator],
            "rational_poles": [[cpair(p), k] for p, k in self.rational_poles],
            "dirichlet_denoms": [[f.to_dict(), k] for f, k in self.dirichlet_denoms],
            "entire_factor": None if self.entire_factor is None else self.entire_factor.to_dict(),
        }


@dataclass(frozen=True)
class MeroExpr:
    terms: tuple[MeroTerm, ...]
    label: str = ""

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        total = np.zeros(s.shape, dtype=complex)
        for t in self.terms:
            total = total + t.value(s)
        return complex(total) if total.ndim == 0 else total

    def __add__(self, other: "MeroExpr") -> "MeroExpr":
        return MeroExpr(self.terms + other.terms, label=self.label or other.label)

    def times(self, factor: complex) -> "MeroExpr":
        return MeroExpr(tuple(replace(t, coeff=t.coeff * factor) for t in self.terms), self.label)

    def dirichlet_polynomials(self) -> list[DirichletPolynomial]:
        seen: list[DirichletPolynomial] = []
        for t in self.terms:
            for f, _ in t.dirichlet_denoms:
                if f not in seen:
                    seen.append(f)
        return seen

    def rational_pole_points(self) -> list[complex]:
        pts: list[complex] = []
        for t in self.terms:
            for p, _ in t.rational_poles:
                if not any(_near(complex(p), q, 1e-12) for q in pts):
                    pts.append(complex(p))
        return pts

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "terms": [t.to_dict() for t in self.terms]}


def expr_from_dict(data: dict[str, Any]) -> MeroExpr:
    terms = []
    for t in data["terms"]:
        ef = t.get("entire_factor")
        if ef is not None and ef["name"] not in ENTIRE_FACTORS:
            raise UnsupportedKind(f"unknown entire factor {ef['name']!r}")
        terms.append(
            MeroTerm(
                coeff=complex(*t["coeff"]),
                base=float(t["base"]),
                numerator=tuple(complex(*c) for c in t.get("numerator", [[1.0, 0.0]])),
                rational_poles=tuple((complex(*p), int(k)) for p, k in t.get("rational_poles", [])),
                dirichlet_denoms=tuple(
                    (DirichletPolynomial(tuple((float(b), float(r)) for b, r in f["terms"])), int(k))
                    for f, k in t.get("dirichlet_denoms", [])
                ),
                entire_factor=None if ef is None else ENTIRE_FACTORS[ef["name"]],
            )
        )
    return MeroExpr(tuple(terms), label=data.get("label", ""))


# --- evaluation ---------------------------------------------------------------


def _check_not_pole(e: MeroExpr, s: complex) -> None:
    tol = get_settings().pole_tol
    for p in e.rational_pole_points():
        if abs(s - p) < tol:
            raise PoleHit("s coincides with a rational pole", s=s, pole=p)
    for f in e.dirichlet_polynomials():
        if abs(f(s)) < tol * max(1.0, abs(f.derivative(s))):
            raise PoleHit("s coincides with a zero of a Dirichlet denominator", s=s)


def eval_expr(e: MeroExpr, s: complex) -> complex:
    s = complex(s)
    _check_not_pole(e, s)
    return complex(e(s))


# --- poles --------------------------------------------------------------------


@dataclass
class _Candidate:
    s: complex
    dirichlet_mults: dict[DirichletPolynomial, int] = field(default_factory=dict)

    def declared_order(self, e: MeroExpr) -> int:
        return max((t.pole_order(self.s, self.dirichlet_mults) for t in e.terms), default=0)


def _merge_candidates(cands: list[_Candidate], tol: float) -> list[_Candidate]:
    cands = sorted(cands, key=lambda c: (c.s.real, c.s.imag))
    out: list[_Candidate] = []
    for c in cands:
        for o in out:
            if _near(c.s, o.s, tol):
                for f, m in c.dirichlet_mults.items():
                    o.dirichlet_mults[f] = max(o.dirichlet_mults.get(f, 0), m)
                break
        else:
            out.append(_Candidate(c.s, dict(c.dirichlet_mults)))
    return out


def _window_candidates(e: MeroExpr, w: Window, audit: bool = True) -> list[_Candidate]:
    settings = get_settings()
    cands = [_Candidate(p) for p in e.rational_pole_points() if w.contains(p)]
    for f in e.dirichlet_polynomials():
        for z in zeros_in_window(f, w, audit=audit):
            cands.append(_Candidate(z.s, {f: z.multiplicity}))
    merged = _merge_candidates(cands, settings.dedupe_tol)
    # a rational pole can coincide with a Dirichlet zero
    for c in merged:
        for f in e.dirichlet_polynomials():
            if f not in c.dirichlet_mults and abs(f(c.s)) <= settings.zero_residual_tol:
                c.dirichlet_mults[f] = zero_multiplicity(f, c.s)
    return merged


def _laurent(e: MeroExpr, w: complex, order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    c_{-order} .. c_{-1} by the trapezoid rule on a small circle, plus the
    matching magnitude scales max|F| * rho^k used for cancellation tests.
    """
    settings = get_settings()
    n = settings.contour_nodes
    rho = settings.contour_radius
    z = rho * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.asarray(e(w + z), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ContourContainsOtherPole("non-finite value on residue contour", at=w)
    peak = float(np.max(np.abs(vals)))
    ks = range(order, 0, -1)
    return (
        np.array([np.mean(vals * z**k) for k in ks]),
        np.array([peak * rho**k for k in ks]),
    )


def _analytic_residue(e: MeroExpr, cand: _Candidate) -> complex | None:
    """Residue at a simple pole from the product rule, or None if not applicable."""
    w = cand.s
    total = 0j
    for t in e.terms:
        order = t.pole_order(w, cand.dirichlet_mults)
        if order <= 0:
            continue
        if order > 1 or t.numerator_zero_order(w) > 0:
            return None
        rats = [i for i, (p, _) in enumerate(t.rational_poles) if _near(w, p, 1e-9)]
        dirs = [j for j, (f, _) in enumerate(t.dirichlet_denoms) if cand.dirichlet_mults.get(f, 0) > 0]
        if len(rats) + len(dirs) != 1:
            return None
        if rats:
            total += complex(t.value(w, skip_rational=rats[0]))
        else:
            f, _ = t.dirichlet_denoms[dirs[0]]
            total += complex(t.value(w, skip_dirichlet=dirs[0])) / f.derivative(w)
    return total


def _dimension(e: MeroExpr, cand: _Candidate) -> ComplexDimension:
    settings = get_settings()
    declared = max(1, cand.declared_order(e))
    coeffs, scales = _laurent(e, cand.s, declared)
    order = declared
    # leading coefficients that are roundoff relative to the contour values vanish
    while order > 0 and abs(coeffs[declared - order]) < settings.cancel_tol * scales[declared - order]:
        order -= 1
    cancelled = order == 0
    if cancelled:
        logger.debug("pole candidate {} cancels", cand.s)
        order = declared
        kept = np.zeros(declared, dtype=complex)
    else:
        kept = coeffs[declared - order :]

    if order == 1 and not cancelled:
        analytic = _analytic_residue(e, cand)
        if analytic is not None:
            gap = abs(analytic - kept[-1])
            if gap > settings.residue_agreement_tol * max(1.0, abs(analytic)):
                logger.warning("analytic and contour residues differ by {} at {}", gap, cand.s)
            kept = np.array([analytic])

    return ComplexDimension(
        re=cand.s.real,
        im=cand.s.imag,
        order=order,
        principal_part=[cpair(c) for c in kept],
        cancelled=cancelled,
    )


def _mark_principal(dims: list[ComplexDimension]) -> list[ComplexDimension]:
    live = [d for d in dims if not d.cancelled]
    if not live:
        return dims
    D = max(d.re for d in live)
    for d in dims:
        d.principal = (not d.cancelled) and abs(d.re - D) <= 1e-9 * max(1.0, abs(D))
    return dims


def poles_in_window(e: MeroExpr, w: Window, audit: bool = True) -> list[ComplexDimension]:
    """
    Complex dimensions of `e` with Re in [re_min, re_max] and |Im| <= im_max,
    sorted by (Re, Im). Cancelled candidates are kept with cancelled=True.
    """
    w = w.checked()
    cands = [c for c in _window_candidates(e, w, audit=audit) if w.contains(c.s)]
    rho = get_settings().contour_radius
    for i, a in enumerate(cands):
        for b in cands[i + 1 :]:
            if abs(a.s - b.s) < 2 * rho:
                raise ContourContainsOtherPole("poles closer than the contour radius", a=a.s, b=b.s)
    dims = [_dimension(e, c) for c in cands]
    logger.debug("{} poles of {!r} in window", len(dims), e.label)
    return _mark_principal(dims)


def _locate(e: MeroExpr, w: complex) -> _Candidate:
    settings = get_settings()
    snapped = None
    for p in e.rational_pole_points():
        if _near(w, p, 1e-7):
            snapped = p
            break
    mults: dict[DirichletPolynomial, int] = {}
    for f in e.dirichlet_polynomials():
        guess = snapped if snapped is not None else w
        if abs(f(guess)) > 1e-4 * max(1.0, abs(f.derivative(guess))):
            continue
        m = zero_multiplicity(f, guess)
        z = polish_zero(f, guess, m)
        if _near(z, guess, 1e-6) and abs(f(z)) <= settings.zero_residual_tol:
            if snapped is None:
                snapped = z
            mults[f] = zero_multiplicity(f, z)
    if snapped is None:
        raise NotAPole("no declared pole at this point", s=w)
    return _Candidate(snapped, mults)


def _check_isolated(e: MeroExpr, cand: _Candidate) -> None:
    rho = get_settings().contour_radius
    for p in e.rational_pole_points():
        if 1e-9 < abs(p - cand.s) < 2 * rho:
            raise ContourContainsOtherPole("rational pole inside residue contour", at=cand.s, other=p)
    seeds = cand.s + 2 * rho * np.exp(2j * np.pi * np.arange(8) / 8)
    for f in e.dirichlet_polynomials():
        for z0 in seeds:
            z = polish_zero(f, complex(z0))
            if abs(f(z)) < 1e-10 and 1e-9 < abs(z - cand.s) < 2 * rho:
                raise ContourContainsOtherPole("Dirichlet zero inside residue contour", at=cand.s, other=z)


def principal_part(e: MeroExpr, w: complex) -> ComplexDimension:
    """Principal part at a declared pole (snapped to the exact pole location)."""
    cand = _locate(e, complex(w))
    _check_isolated(e, cand)
    return _dimension(e, cand)


def residue_at(e: MeroExpr, w: complex) -> list[complex]:
    """Principal-part coefficients c_{-order} .. c_{-1} at the pole w."""
    dim = principal_part(e, w)
    return [complex(*c) for c in dim.principal_part]


def residue(e: MeroExpr, w: complex) -> complex:
    return principal_part(e, w).residue


def contour_residue(e: MeroExpr, w: complex) -> complex:
    """c_{-1} from the contour alone, without the analytic shortcut."""
    cand = _locate(e, complex(w))
    _check_isolated(e, cand)
    coeffs, _ = _laurent(e, cand.s, max(1, cand.declared_order(e)))
    return complex(coeffs[-1])


# --- transforms ---------------------------------------------------------------


def scale_expr(e: MeroExpr, lam: float) -> MeroExpr:
    """eval(scale_expr(e, lam), s) == lam^s * eval(e, s)."""
    if not (lam > 0):
        raise NonPositiveScale("scale must be positive", lam=lam)
    return MeroExpr(tuple(t.scaled(lam) for t in e.terms), label=e.label)


class TransferDirection(str, Enum):
    TUBE_TO_DISTANCE = "tube->distance"
    DISTANCE_TO_TUBE = "distance->tube"


def _has_pole_at(e: MeroExpr, x: float) -> bool:
    if any(_near(complex(x), p, 1e-9) for p in e.rational_pole_points()):
        return True
    return any(abs(f(x)) <= 1e-12 for f in e.dirichlet_polynomials())


def tube_distance_transfer(
    e: MeroExpr,
    direction: TransferDirection | str,
    N: int,
    delta: float,
    sat_volume: float,
) -> MeroExpr:
    """
    distance(s) = delta^(s-N) * sat_volume + (N - s) * tube(s)

    applied in either direction as an expression transform.
    """
    direction = TransferDirection(direction)
    if not (delta > 0):
        raise NonPositiveScale("delta must be positive", delta=delta)
    if _has_pole_at(e, float(N)):
        raise DegenerateDimension("expression has a pole at s = N", N=N)

    sat = MeroTerm(coeff=sat_volume * delta ** (-N), base=delta)
    if direction is TransferDirection.TUBE_TO_DISTANCE:
        factor = (float(N), -1.0)
        terms = tuple(replace(t, numerator=tuple(P.polymul(t.numerator, factor))) for t in e.terms)
        return MeroExpr(terms + (sat,), label=f"{e.label}:distance")

    # tube = (distance - sat term) / (N - s) = (sat term - distance) / (s - N)
    pole = ((complex(N), 1),)
    terms = tuple(
        replace(t, coeff=-t.coeff, rational_poles=t.rational_poles + pole) for t in e.terms
    )
    return MeroExpr(terms + (replace(sat, rational_poles=pole),), label=f"{e.label}:tube")


def positive_reach_zeta(c: Sequence[float], N: int, delta: float) -> MeroExpr:
    """Tube zeta sum_k c_k delta^(s-k)/(s-k) of a tube polynomial with coefficients c_0..c_{N-1}."""
    if len(c) != N:
        raise ArityMismatch("need exactly N coefficients", N=N, got=len(c))
    if all(ck == 0 for ck in c):
        raise AllZeroCoefficients("all tube coefficients vanish")
    if not (delta > 0):
        raise NonPositiveScale("delta must be positive", delta=delta)
    terms = tuple(
        MeroTerm(coeff=ck * delta ** (-k), base=delta, rational_poles=((complex(k), 1),))
        for k, ck in enumerate(c)
        if ck != 0
    )
    return MeroExpr(terms, label="positive-reach")


# --- classification -----------------------------------------------------------


def classify_fractality(e: MeroExpr, w: Window) -> Classification:
    dims = [d for d in poles_in_window(e, w) if not d.cancelled]
    if not dims:
        return Classification(kind=FractalityClass.NOT_FRACTAL, D=float("nan"))
    D = max(d.re for d in dims)
    nonreal = [d for d in dims if abs(d.im) > 1e-9]
    if not nonreal:
        return Classification(kind=FractalityClass.NOT_FRACTAL, D=D)
    if any(abs(d.re - D) <= 1e-9 for d in nonreal):
        return Classification(kind=FractalityClass.CRITICALLY_FRACTAL, D=D)
    reals: list[float] = []
    for d in sorted(nonreal, key=lambda d: -d.re):
        if not any(abs(d.re - r) <= 1e-9 for r in reals):
            reals.append(d.re)
    return Classification(kind=FractalityClass.STRICTLY_SUBCRITICAL, D=D, dims=reals)


# --- exports and checks -------------------------------------------------------


POLE_CSV_HEADER = ("re", "im", "order", "residue_re", "residue_im", "principal", "cancelled")


def poles_csv(dims: Sequence[ComplexDimension]) -> str:
    rows = (
        (d.re, d.im, d.order, d.residue.real, d.residue.imag, int(d.principal), int(d.cancelled))
        for d in dims
    )
    return csv_text(POLE_CSV_HEADER, rows)


def mellin_transform(
    tube_fn: Callable[[float], float],
    s: complex,
    N: int,
    t_sat: float,
    measure: float,
    ratio: float = 0.5,
    max_pieces: int = 400,
) -> complex:
    """
    integral_0^inf t^(s-N-1) V(t) dt for a tube function V saturating at
    `measure` for t >= t_sat, valid for D < Re s < N.

    Integrated in u = log t over geometric pieces [t_sat r^(k+1), t_sat r^k]
    (kinks of self-similar tube functions sit on such grids); the saturated
    part is added in closed form.
    """
    from engine.quadrature import quad

    total = -measure * t_sat ** (s - N) / (s - N)
    hi = math.log(t_sat)
    step = -math.log(ratio)
    for _ in range(max_pieces):
        lo = hi - step
        piece, _ = quad(lambda u: np.exp(u * (s - N)) * tube_fn(math.exp(u)), lo, hi)
        total += piece
        if abs(piece) <= 1e-15 * max(1.0, abs(total)):
            break
        hi = lo
    return complex(total)


def mellin_check(
    tube_fn: Callable[[float], float],
    distance: MeroExpr,
    N: int,
    s_list: Sequence[complex],
    t_sat: float,
    measure: float,
    ratio: float = 0.5,
    tol: float = 1e-6,
) -> Report:
    """(N - s) * Mellin transform of the tube function against the distance expression."""
    checks = []
    for s in s_list:
        lhs = (N - s) * mellin_transform(tube_fn, complex(s), N, t_sat, measure, ratio)
        rhs = eval_expr(distance, complex(s))
        res = abs(lhs - rhs) / max(1.0, abs(rhs))
        checks.append(
            CheckResult(
                name=f"mellin s={complex(s)}",
                passed=res <= tol,
                residual=res,
                tolerance=tol,
                details={"mellin": cpair(lhs), "closed": cpair(rhs)},
            )
        )
    return Report.of(f"mellin:{distance.label}", checks)


__all__ = [
    "EntireFactor",
    "ENTIRE_FACTORS",
    "MeroTerm",
    "MeroExpr",
    "expr_from_dict",
    "eval_expr",
    "poles_in_window",
    "principal_part",
    "residue_at",
    "residue",
    "contour_residue",
    "scale_expr",
    "TransferDirection",
    "tube_distance_transfer",
    "positive_reach_zeta",
    "classify_fractality",
    "POLE_CSV_HEADER",
    "poles_csv",
    "mellin_transform",
    "mellin_check",
]
