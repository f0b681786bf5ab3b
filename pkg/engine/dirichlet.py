"""
Dirichlet polynomials f(s) = 1 - sum_j b_j r_j^s: Moran roots, the
lattice/nonlattice dichotomy, and zeros inside a rectangular window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from engine.config import get_settings
from engine.errors import InvalidInput, NoRealRoot, SeedGridTooCoarse, ZeroNotConverged
from engine.relations import common_generator
from engine.types import LatticeInfo, Window


@dataclass(frozen=True)
class DirichletPolynomial:
    terms: tuple[tuple[float, float], ...]  # (b_j, r_j)

    def __post_init__(self) -> None:
        if not self.terms:
            raise InvalidInput("Dirichlet polynomial needs at least one term")
        for b, r in self.terms:
            if not (b > 0) or not (0.0 < r < 1.0):
                raise InvalidInput("need b > 0 and 0 < r < 1", b=b, r=r)

    @classmethod
    def of(cls, *pairs: tuple[float, float]) -> "DirichletPolynomial":
        return cls(tuple((float(b), float(r)) for b, r in pairs))

    @property
    def b(self) -> np.ndarray:
        return np.array([t[0] for t in self.terms])

    @property
    def logr(self) -> np.ndarray:
        return np.log(np.array([t[1] for t in self.terms]))

    def merged(self, rtol: float = 1e-12) -> "DirichletPolynomial":
        """Combine terms with equal ratios."""
        out: list[list[float]] = []
        for b, r in sorted(self.terms, key=lambda t: -t[1]):
            if out and abs(out[-1][1] - r) <= rtol * r:
                out[-1][0] += b
            else:
                out.append([b, r])
        return DirichletPolynomial(tuple((b, r) for b, r in out))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            powers = np.exp(np.multiply.outer(s, self.logr))
        out = 1.0 - powers @ self.b
        return complex(out) if out.ndim == 0 else out

    def derivative(self, s, k: int = 1):
        """k-th derivative: -sum b_j (log r_j)^k r_j^s."""
        s = np.asarray(s, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            powers = np.exp(np.multiply.outer(s, self.logr))
        out = -(powers @ (self.b * self.logr**k))
        return complex(out) if out.ndim == 0 else out

    def real_value(self, x: float) -> float:
        return 1.0 - float(np.sum(self.b * np.exp(x * self.logr)))

    def total_weight(self) -> float:
        return float(np.sum(self.b))

    def to_dict(self) -> dict:
        return {"terms": [[b, r] for b, r in self.terms]}


# --- real roots ---------------------------------------------------------------


def moran_root(f: DirichletPolynomial, allow_nonpositive: bool = False) -> float:
    """
    Unique real D with sum b_j r_j^D = 1.

    sum b_j r_j^s is strictly decreasing in real s, so a sign change pins the
    root. Bracketed with brentq, then polished with Newton steps.
    """
    if f.total_weight() <= 1.0 and not allow_nonpositive:
        raise NoRealRoot(
            "sum of weights <= 1: no positive root of the Moran equation",
            weight=f.total_weight(),
        )

    g = lambda x: -f.real_value(x)  # sum b r^x - 1, decreasing
    lo, hi = 0.0, 1.0
    if g(0.0) > 0:
        while g(hi) > 0:
            lo, hi = hi, 2.0 * hi
            if hi > 1e6:
                raise NoRealRoot("Moran root bracket failed", weight=f.total_weight())
    else:
        lo, hi = -1.0, 0.0
        while g(lo) < 0:
            lo, hi = 2.0 * lo, lo
            if lo < -1e6:
                raise NoRealRoot("Moran root bracket failed", weight=f.total_weight())

    D = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    for _ in range(4):
        step = f.real_value(D) / float(np.real(f.derivative(D)))
        D -= step
        if abs(step) < 1e-16 * max(1.0, abs(D)):
            break
    return D


# --- lattice / nonlattice -----------------------------------------------------


def lattice_analysis(
    f: DirichletPolynomial, qmax: int | None = None, tol: float | None = None
) -> LatticeInfo:
    """
    Lattice iff every log r_j / log r_1 is rational with denominator <= qmax.

    In the lattice case f(s) = 1 - sum b_j g^(n_j s) for the generator g and
    positive integers n_j.
    """
    settings = get_settings()
    qmax = settings.qmax if qmax is None else qmax
    tol = settings.relation_tol if tol is None else tol
    fm = f.merged()
    xs = [-math.log(r) for _, r in fm.terms]
    found = common_generator(xs, qmax, tol)
    if found is None:
        return LatticeInfo(lattice=False)
    step, exps = found
    return LatticeInfo(
        lattice=True,
        generator=math.exp(-step),
        period=2.0 * math.pi / step,
        exponents=exps,
    )


# --- complex zeros ------------------------------------------------------------


@dataclass(frozen=True)
class DirichletZero:
    s: complex
    multiplicity: int


def zero_multiplicity(f: DirichletPolynomial, s: complex) -> int:
    scale = float(np.sum(f.b * np.abs(np.exp(s * f.logr))))
    scale = max(scale, 1.0)
    for k in range(1, 6):
        deriv = abs(f.derivative(s, k))
        ref = scale * float(np.max(np.abs(f.logr))) ** k
        if deriv > 1e-6 * ref:
            return k
    return 6


def polish_zero(f: DirichletPolynomial, s: complex, mult: int = 1) -> complex:
    settings = get_settings()
    for _ in range(settings.newton_max_iter):
        d = f.derivative(s, mult) if mult > 1 else f.derivative(s)
        if d == 0:
            break
        if mult > 1:
            step = f.derivative(s, mult - 1) / d
        else:
            step = f(s) / d
        s = s - step
        if abs(step) <= settings.newton_tol * max(1.0, abs(s)):
            break
    return complex(s)


def _dedupe(points: list[DirichletZero], tol: float) -> list[DirichletZero]:
    points = sorted(points, key=lambda z: (round(z.s.real, 6), z.s.imag))
    out: list[DirichletZero] = []
    for z in points:
        if any(abs(z.s - o.s) <= tol * max(1.0, abs(z.s)) for o in out):
            continue
        out.append(z)
    return sorted(out, key=lambda z: (z.s.real, z.s.imag))


def _lattice_zeros(f: DirichletPolynomial, info: LatticeInfo, window: Window) -> list[DirichletZero]:
    fm = f.merged()
    step = -math.log(info.generator)
    degree = max(info.exponents)
    coeffs = np.zeros(degree + 1, dtype=float)  # ascending in z
    coeffs[0] = 1.0
    for (b, _), n in zip(fm.terms, info.exponents):
        coeffs[n] -= b
    roots = np.roots(coeffs[::-1])
    roots = roots[np.abs(roots) > 0]

    # cluster numerically split multiple roots
    clusters: list[list[complex]] = []
    for z in roots:
        for cl in clusters:
            if abs(cl[0] - z) <= 1e-5 * max(1.0, abs(z)):
                cl.append(z)
                break
        else:
            clusters.append([z])

    period = info.period
    out: list[DirichletZero] = []
    for cl in clusters:
        z = complex(np.mean(cl))
        base = complex(-math.log(abs(z)), -np.angle(z)) / step
        if not (window.re_min - 1.0 <= base.real <= window.re_max + 1.0):
            continue
        k_lo = math.floor((-window.im_max - 1.0 - base.imag) / period)
        k_hi = math.ceil((window.im_max + 1.0 - base.imag) / period)
        for k in range(k_lo, k_hi + 1):
            s0 = base + 1j * period * k
            s = polish_zero(f, s0, len(cl))
            out.append(DirichletZero(s, len(cl)))
    return out


def _nonlattice_zeros(f: DirichletPolynomial, window: Window) -> list[DirichletZero]:
    settings = get_settings()
    h = settings.seed_spacing
    pad = 1.0
    re = np.arange(window.re_min - pad, window.re_max + pad + h / 2, h)
    im = np.arange(-window.im_max - pad, window.im_max + pad + h / 2, h)
    s = (re[:, None] + 1j * im[None, :]).ravel()
    with np.errstate(all="ignore"):
        for _ in range(settings.newton_max_iter):
            step = f(s) / f.derivative(s)
            step = np.where(np.isfinite(step), step, 0.0)
            s = s - step
        ok = np.isfinite(s) & (np.abs(f(s)) <= 1e-8)
    cands = [complex(z) for z in s[ok]]
    found: list[DirichletZero] = []
    for z in cands:
        mult = zero_multiplicity(f, z)
        found.append(DirichletZero(polish_zero(f, z, mult), mult))
    return found


def _winding_count(f: DirichletPolynomial, window: Window, nodes: int) -> tuple[int, float]:
    """Zeros inside the rectangle by the argument principle; returns (count, min |f| on boundary)."""
    a, b, H = window.re_min, window.re_max, window.im_max
    corners = [complex(a, -H), complex(b, -H), complex(b, H), complex(a, H), complex(a, -H)]
    lengths = [abs(corners[i + 1] - corners[i]) for i in range(4)]
    total = sum(lengths)
    pts: list[np.ndarray] = []
    for i in range(4):
        n = max(8, int(round(nodes * lengths[i] / total)))
        t = np.arange(n) / n
        pts.append(corners[i] + (corners[i + 1] - corners[i]) * t)
    z = np.concatenate(pts + [np.array([corners[0]])])
    vals = f(z)
    dphi = np.angle(vals[1:] / vals[:-1])
    if np.max(np.abs(dphi)) > 1.0:
        raise ValueError("boundary sampling too coarse")
    return int(round(float(np.sum(dphi)) / (2.0 * math.pi))), float(np.min(np.abs(vals)))


def audit_zero_count(
    f: DirichletPolynomial, window: Window, zeros: Sequence[DirichletZero], nodes: int | None = None
) -> int:
    """
    Compare the enumerated zeros (with multiplicity) against the boundary
    winding number. The rectangle is nudged outward when a zero sits close to
    the boundary; the node count doubles while the phase steps are too large.
    """
    nodes = get_settings().audit_nodes if nodes is None else nodes
    win = window
    for attempt in range(6):
        near = min(
            (
                min(abs(z.s.real - win.re_min), abs(z.s.real - win.re_max), abs(abs(z.s.imag) - win.im_max))
                for z in zeros
            ),
            default=math.inf,
        )
        if near > 1e-3:
            n = nodes
            while True:
                try:
                    count, fmin = _winding_count(f, win, n)
                    break
                except ValueError:
                    n *= 2
                    if n > 64 * nodes:
                        raise SeedGridTooCoarse("argument-principle boundary sampling diverged", nodes=n)
            if fmin > 1e-8:
                inside = sum(z.multiplicity for z in zeros if win.contains(z.s))
                if inside != count:
                    raise SeedGridTooCoarse(
                        "argument-principle count differs from enumeration",
                        winding=count,
                        enumerated=inside,
                        window=[win.re_min, win.re_max, win.im_max],
                    )
                return count
        shift = 0.0137 * (attempt + 1)
        logger.debug("nudging audit window by {}", shift)
        win = Window(re_min=win.re_min - shift, re_max=win.re_max + shift, im_max=win.im_max + shift)
    raise SeedGridTooCoarse("could not place audit contour away from zeros")


def _checked(f: DirichletPolynomial, z: DirichletZero, tol: float) -> DirichletZero:
    """Re-polish a zero whose residual is above tol; raise if it stays there."""
    tol *= max(1.0, float(np.sum(f.b * np.abs(np.exp(z.s * f.logr)))))
    if abs(f(z.s)) <= tol:
        return z
    mult = zero_multiplicity(f, z.s)
    s = polish_zero(f, z.s, mult)
    res = abs(f(s))
    if not res <= tol:
        raise ZeroNotConverged("Newton did not reach the zero residual tolerance", s=str(z.s), residual=res, tol=tol)
    logger.debug("re-polished Dirichlet zero {} -> {}", z.s, s)
    return DirichletZero(s, mult)


def zeros_in_window(
    f: DirichletPolynomial,
    window: Window,
    audit: bool = True,
) -> list[DirichletZero]:
    """
    Zeros of f with Re in [re_min, re_max] and |Im| <= im_max.

    Lattice polynomials reduce to a polynomial in the generator power and are
    enumerated exactly along each vertical line; nonlattice ones use Newton
    iteration from a seed grid. Both are cross-checked by the argument
    principle on a slightly larger rectangle.
    """
    settings = get_settings()
    info = lattice_analysis(f)
    if info.lattice:
        raw = _lattice_zeros(f, info, window)
    else:
        raw = _nonlattice_zeros(f, window)
    pad = 0.5
    padded = Window(re_min=window.re_min - pad, re_max=window.re_max + pad, im_max=window.im_max + pad)
    zeros = _dedupe([z for z in raw if padded.contains(z.s)], settings.dedupe_tol)
    zeros = _dedupe([_checked(f, z, settings.zero_residual_tol) for z in zeros], settings.dedupe_tol)
    if audit:
        audit_zero_count(f, padded, zeros)
    return [z for z in zeros if window.contains(z.s)]


__all__ = [
    "DirichletPolynomial",
    "DirichletZero",
    "moran_root",
    "lattice_analysis",
    "zeros_in_window",
    "audit_zero_count",
    "zero_multiplicity",
    "polish_zero",
]
