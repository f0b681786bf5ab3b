"""
Embedding into higher dimensions and the Cantor dust.

Placing A in R^N as A x {0} in R^(N+M) changes tube zeta functions by a
slice integral over the extra directions,

    tube_{A x 0}(s; delta) = sigma_{M-1} int_0^(pi/2) sin^(M-1) th cos^(N+1-s) th
                             * tube_A(s; delta cos th) d th,

which splits into a Gamma-ratio multiple of tube_A plus an error term that
is holomorphic left of N + 2. The ratio at s = D carries residues (and
Minkowski contents) across dimensions.

The dust C x C in (0,1)^2 splits into central squares and strips; its
distance zeta is

    zeta(s) = 8 * 3^s / (3^s - 4) * ( I(s) / (s 6^s) + zeta_strip(s) ),

with the strip (C/3 x 0, (0,1/3) x (0,1/6)) computed directly right of
log_3 2 and through the Gamma term plus a one-sided error term elsewhere.

Tests care about:
  - embedding identity vs planar tube quadrature
  - residue transfer and the Kneser-normalised content
  - Gamma-ratio residues at N + 2 + 2k (parity in M)
  - dust value at s = 2 equals 1 and agrees with Monte Carlo
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Literal

import mpmath
import numpy as np
from loguru import logger
from pydantic import BaseModel

from engine.cantor import GeneralizedCantorSet, tube_volume_closed
from engine.config import get_settings
from engine.errors import InvalidInput, NotAPole, PoleHit, UnsupportedKind
from engine.geometry import Rfd, build_rfd
from engine.merozeta import ENTIRE_FACTORS
from engine.quadrature import quad
from engine.rfd import tube_zeta_numeric
from engine.types import (
    CheckResult,
    Classification,
    ComplexDimension,
    FractalityClass,
    Report,
    Window,
    cpair,
)

TubeZeta = Callable[[complex, float], complex]


# --- Gamma ratio ----------------------------------------------------------------


def _nonpositive_int(z: complex, tol: float = 1e-12) -> bool:
    return abs(z.imag) <= tol and z.real <= tol and abs(z.real - round(z.real)) <= tol


def gamma_ratio_factor(N: int, M: int, s: complex) -> complex:
    """pi^(M/2) Gamma((N-s)/2 + 1) / Gamma((N+M-s)/2 + 1)"""
    if M < 0 or N < 1:
        raise InvalidInput("need N >= 1 and M >= 0", N=N, M=M)
    if M == 0:
        return 1.0 + 0j
    s = complex(s)
    z1 = (N - s) / 2.0 + 1.0
    z2 = z1 + M / 2.0
    scale = mpmath.power(mpmath.pi, M / 2.0)
    if M % 2 == 0:
        # Gamma(z) / Gamma(z + j) = 1 / rising factorial
        rf = mpmath.rf(mpmath.mpc(z1), M // 2)
        if abs(complex(rf)) == 0.0:
            raise PoleHit("Gamma ratio has a pole here", s=s, N=N, M=M)
        return complex(scale / rf)
    if _nonpositive_int(z1):
        raise PoleHit("Gamma ratio has a pole here", s=s, N=N, M=M)
    if _nonpositive_int(z2):
        return 0j
    return complex(scale * mpmath.exp(mpmath.loggamma(z1) - mpmath.loggamma(z2)))


def gamma_ratio_residue(N: int, M: int, k: int, radius: float = 0.1, nodes: int = 128) -> complex:
    """Residue of the Gamma ratio at N + 2 + 2k by a trapezoid contour."""
    centre = N + 2.0 + 2.0 * k
    theta = np.linspace(0.0, 2.0 * math.pi, nodes, endpoint=False)
    pts = centre + radius * np.exp(1j * theta)
    vals = np.array([gamma_ratio_factor(N, M, p) for p in pts])
    return complex(np.mean(vals * (pts - centre)))


def residue_transfer(res: complex, N: int, M: int, D: float) -> complex:
    """Residue of the tube zeta function of A x {0} in R^(N+M) at s = D."""
    return gamma_ratio_factor(N, M, D) * complex(res)


def kneser_invariant(content: float, D: float, N: int) -> float:
    """
    Minkowski content divided by omega_(N-D) = pi^((N-D)/2) / Gamma((N-D)/2 + 1);
    unchanged when A is embedded into higher dimensions.
    """
    x = (N - D) / 2.0
    return float(content) * math.gamma(x + 1.0) / math.pi**x


# --- tube zeta functions of simple sets ------------------------------------------


def _powdiff(x: float, y: float, e: complex) -> complex:
    """(x^e - y^e) / e, continuous at e = 0."""
    if abs(e) < 1e-12:
        return complex(math.log(x / y))
    return (x**e - y**e) / e


def cantor_tube_zeta(C: GeneralizedCantorSet, s: complex, delta: float) -> complex:
    """
    integral_0^delta t^(s-2) |C_t| dt for the full neighbourhoods of C,
    summed level by level; needs Re s > D.
    """
    s = complex(s)
    if s.real <= C.D:
        raise UnsupportedKind("the level sum converges for Re s > D only", s=s, D=C.D)
    if delta <= 0:
        return 0j
    m, a, c = C.m, C.a, C.c
    if delta >= c:
        n0 = 0
    else:
        n0 = math.ceil(math.log(c / delta) / C.T)
        while c * a**n0 > delta:
            n0 += 1
        while n0 > 0 and c * a ** (n0 - 1) <= delta:
            n0 -= 1
    lo = c * a**n0
    partial = (m * a) ** n0 * _powdiff(delta, lo, s - 1.0) + 2.0 * m**n0 * _powdiff(delta, lo, s)
    q = m * a**s
    rest = (m * a) ** (n0 + 1) * lo ** (s - 1.0) * _powdiff(1.0, a, s - 1.0)
    rest += 2.0 * m ** (n0 + 1) * lo**s * _powdiff(1.0, a, s)
    return partial + rest / (1.0 - q)


def segment_tube_zeta(s: complex, delta: float, N: int = 1) -> complex:
    """Unit segment in R^N, N in {1, 2}: full neighbourhoods."""
    s = complex(s)
    if N == 1:
        return delta ** (s - 1.0) / (s - 1.0) + 2.0 * delta**s / s
    if N == 2:
        return 2.0 * delta ** (s - 1.0) / (s - 1.0) + math.pi * delta**s / s
    raise UnsupportedKind("unit segment tube zeta for N = 1, 2", N=N)


def _sphere_area(M: int) -> float:
    """area of the unit sphere S^(M-1)"""
    return 2.0 * math.pi ** (M / 2.0) / math.gamma(M / 2.0)


def embed_tube_zeta(tube_zeta: TubeZeta, s: complex, delta: float, N: int, M: int = 1) -> complex:
    """Tube zeta of A x {0} in R^(N+M) from that of A in R^N."""
    s = complex(s)
    if s.real >= N + 2.0:
        raise UnsupportedKind("slice integral needs Re s < N + 2", s=s, N=N)

    def integrand(th: float) -> complex:
        cth = math.cos(th)
        if cth <= 0.0:
            return 0j
        return math.sin(th) ** (M - 1) * cth ** (N + 1.0 - s) * tube_zeta(s, delta * cth)

    val, _ = quad(integrand, 0.0, math.pi / 2.0)
    return _sphere_area(M) * val


def embedding_error_term(tube_zeta: TubeZeta, s: complex, delta: float, N: int, M: int = 1) -> complex:
    """embedded tube zeta minus gamma_ratio_factor * tube_A(s; delta)"""
    s = complex(s)
    full = tube_zeta(s, delta)

    def integrand(th: float) -> complex:
        cth = math.cos(th)
        inner = tube_zeta(s, delta * cth) if cth > 0.0 else 0j
        return math.sin(th) ** (M - 1) * cth ** (N + 1.0 - s) * (inner - full)

    val, _ = quad(integrand, 0.0, math.pi / 2.0)
    return _sphere_area(M) * val


def error_term_bound(s: complex, delta: float, tube_delta: float, N: int) -> float:
    """2 delta^(Re s - N) |A_delta| (pi/2 - 1), valid for D < Re s < N + 1 and M = 1."""
    return 2.0 * delta ** (complex(s).real - N) * tube_delta * (math.pi / 2.0 - 1.0)


def error_term_residue(tube_zeta: TubeZeta, N: int, M: int, k: int, delta: float) -> complex:
    """
    Residue of the error term at N + 2 + 2k. The embedded zeta is holomorphic
    there, so this is minus the Gamma-ratio residue times tube_A.
    """
    s_k = N + 2.0 + 2.0 * k
    return -gamma_ratio_residue(N, M, k) * tube_zeta(complex(s_k), delta)


def embedding_check(
    tube_zeta: TubeZeta,
    planar: Rfd,
    s_list: list[complex],
    delta: float,
    N: int = 1,
    tol: float = 1e-3,
) -> Report:
    """Slice-integral formula vs direct quadrature of the planar tube function."""
    checks = []
    for s in s_list:
        lhs = embed_tube_zeta(tube_zeta, s, delta, N)
        rhs = tube_zeta_numeric(planar, s, delta)
        res = abs(lhs - rhs) / max(abs(rhs), 1e-300)
        checks.append(
            CheckResult(
                name=f"embedding s={complex(s)}",
                passed=res <= tol,
                residual=res,
                tolerance=tol,
                details={"formula": cpair(lhs), "planar": cpair(rhs)},
            )
        )
    return Report.of(f"embedding:{planar.label}", checks)


# --- Cantor dust ------------------------------------------------------------------


TERNARY = GeneralizedCantorSet(2, 1.0 / 3.0)
STRIP_LENGTH = 1.0 / 3.0
STRIP_HEIGHT = 1.0 / 6.0
LOG3 = math.log(3.0)


class DustConfig(BaseModel):
    """How to evaluate the strip part of the dust zeta function."""

    route: Literal["auto", "strip", "error_term"] = "auto"
    # auto switches to the strip integral right of this abscissa
    switch_re: float = 0.8


@lru_cache(maxsize=1)
def _strip() -> Rfd:
    return build_rfd("cantor_strip", m=2, a=1.0 / 3.0, length=STRIP_LENGTH, height=STRIP_HEIGHT)


def strip_zeta_direct(s: complex) -> complex:
    """
    zeta of (C/3 x 0, (0,1/3) x (0,1/6)) for Re s > log_3 2 through
    delta^(s-2) |Omega| + (2 - s) tube(s; delta) with delta its reach.
    """
    s = complex(s)
    r = _strip()
    if s.real <= TERNARY.D:
        raise UnsupportedKind("strip integral converges for Re s > log_3 2", s=s)
    return r.dmax ** (s - 2.0) * r.measure + (2.0 - s) * tube_zeta_numeric(r, s, r.dmax)


def _line_tube(r: float) -> float:
    """relative tube of C/3 inside (0, 1/3)"""
    if r <= 0:
        return 0.0
    x = r / STRIP_LENGTH
    return STRIP_LENGTH * min(tube_volume_closed(TERNARY, x) - 2.0 * x, 1.0)


def strip_gamma_term(s: complex) -> complex:
    """Gamma((1-s)/2) / Gamma((2-s)/2) * sqrt(pi) / (6^s s (3^s - 2))"""
    s = complex(s)
    z1, z2 = (1.0 - s) / 2.0, (2.0 - s) / 2.0
    if _nonpositive_int(z1) or abs(s) < 1e-14 or abs(3.0**s - 2.0) < 1e-14:
        raise PoleHit("Gamma term has a pole here", s=s)
    ratio = mpmath.gamma(z1) * mpmath.rgamma(z2)
    return complex(ratio) * math.sqrt(math.pi) / (6.0**s * s * (3.0**s - 2.0))


def one_sided_error_term(s: complex, a: float = STRIP_HEIGHT) -> complex:
    """
    E(s; a) = (s - 2) int_a^inf t^(s-3) |(A x 0)_t cap (0,1/3) x [a, inf)| dt,
    continued to Re s < 3 by subtracting the saturated part L (t - a)
    analytically; simple pole at s = 1.
    """
    s = complex(s)
    if s.real >= 3.0:
        raise UnsupportedKind("error term continuation holds for Re s < 3", s=s)
    if abs(s - 1.0) < 1e-12:
        raise PoleHit("error term has a pole at s = 1", s=s)
    L = STRIP_LENGTH
    r_sat = L * TERNARY.c

    def deficit(t: float) -> float:
        # L (t - a) minus the tube volume above height a
        top = min(r_sat, math.sqrt(max(t * t - a * a, 0.0)))
        if top <= 0:
            return 0.0
        val, _ = quad(
            lambda r: (L - _line_tube(r)) * r / math.sqrt(t * t - r * r), 0.0, top, complex_valued=False
        )
        return val.real

    t1 = math.hypot(a, r_sat)
    head, _ = quad(lambda t: t ** (s - 3.0) * deficit(t), a, t1)
    tail, _ = quad(lambda t: t ** (s - 3.0) * deficit(t), t1, math.inf)
    return L * a ** (s - 1.0) / (s - 1.0) - (s - 2.0) * (head + tail)


def strip_zeta(s: complex, cfg: DustConfig | None = None) -> complex:
    cfg = cfg or DustConfig()
    s = complex(s)
    route = cfg.route
    if route == "auto":
        route = "strip" if s.real > cfg.switch_re else "error_term"
    if route == "strip":
        return strip_zeta_direct(s)
    return strip_gamma_term(s) + one_sided_error_term(s)


def _dust_bracket(s: complex, cfg: DustConfig | None = None) -> complex:
    s = complex(s)
    return complex(ENTIRE_FACTORS["I"](s)) / (s * 6.0**s) + strip_zeta(s, cfg)


def cantor_dust_zeta(s: complex, cfg: DustConfig | None = None) -> complex:
    """Relative distance zeta of (C x C, (0,1)^2)."""
    s = complex(s)
    if abs(3.0**s - 4.0) < 1e-14 or abs(s) < 1e-14 or abs(3.0**s - 2.0) < 1e-14:
        raise PoleHit("candidate pole of the dust zeta function", s=s)
    return 8.0 * 3.0**s / (3.0**s - 4.0) * _dust_bracket(s, cfg)


class CantorDust:
    """
    The dust as an evaluator with a candidate pole set.

    Candidates: 0, log_3 2 + i p Z and log_3 4 + i p Z with p = 2 pi / log 3.
    Residues on the critical line need the strip integral at each point; a
    candidate whose residue vanishes numerically is flagged cancelled.
    """

    N = 2
    label = "cantor-dust"

    def __init__(self, cfg: DustConfig | None = None) -> None:
        self.cfg = cfg or DustConfig()

    @property
    def D(self) -> float:
        return math.log(4.0) / LOG3

    @property
    def period(self) -> float:
        return 2.0 * math.pi / LOG3

    def __call__(self, s):
        return cantor_dust_zeta(s, self.cfg)

    def candidate_points(self, w: Window) -> list[complex]:
        pts = [0j]
        kmax = int(w.im_max / self.period) + 1
        for re in (TERNARY.D, self.D):
            pts += [complex(re, k * self.period) for k in range(-kmax, kmax + 1)]
        return [p for p in pts if w.contains(p)]

    def residue(self, w: complex) -> complex:
        w = complex(w)
        if abs(w) < 1e-9:
            # E is holomorphic at 0; only the two 1/s terms contribute
            i0 = complex(ENTIRE_FACTORS["I"](0.0))
            g0 = math.sqrt(math.pi) * math.sqrt(math.pi) / (1.0 - 2.0)
            return 8.0 / (1.0 - 4.0) * (i0 + g0)
        k = (w.imag / self.period)
        if abs(k - round(k)) > 1e-9:
            raise NotAPole("not a candidate pole of the dust", s=w)
        if abs(w.real - self.D) < 1e-9:
            return 8.0 * _dust_bracket(w, self.cfg) / LOG3
        if abs(w.real - TERNARY.D) < 1e-9:
            z1, z2 = (1.0 - w) / 2.0, (2.0 - w) / 2.0
            ratio = complex(mpmath.gamma(z1) * mpmath.rgamma(z2))
            # 3^w = 2 on this line
            return 8.0 * 2.0 / (2.0 - 4.0) * ratio * math.sqrt(math.pi) / (6.0**w * w * 2.0 * LOG3)
        raise NotAPole("not a candidate pole of the dust", s=w)

    def poles_in_window(self, w: Window) -> list[ComplexDimension]:
        tol = get_settings().cancel_tol
        out = []
        for p in self.candidate_points(w):
            res = self.residue(p)
            cancelled = abs(res) <= tol
            if cancelled:
                logger.info("dust candidate {} cancels numerically (|res| = {:.3g})", p, abs(res))
            out.append(
                ComplexDimension(
                    re=p.real,
                    im=p.imag,
                    order=1,
                    principal_part=[cpair(res)],
                    principal=abs(p.real - self.D) < 1e-9 and not cancelled,
                    cancelled=cancelled,
                )
            )
        return sorted(out, key=lambda d: (d.re, d.im))

    def classify(self, w: Window) -> Classification:
        dims = [d for d in self.poles_in_window(w) if not d.cancelled]
        if not dims:
            return Classification(kind=FractalityClass.NOT_FRACTAL, D=float("nan"))
        D = max(d.re for d in dims)
        nonreal = [d for d in dims if abs(d.im) > 1e-9]
        if any(abs(d.re - D) <= 1e-9 for d in nonreal):
            return Classification(kind=FractalityClass.CRITICALLY_FRACTAL, D=D)
        if not nonreal:
            return Classification(kind=FractalityClass.NOT_FRACTAL, D=D)
        return Classification(
            kind=FractalityClass.STRICTLY_SUBCRITICAL, D=D, dims=sorted({d.re for d in nonreal}, reverse=True)
        )


__all__ = [
    "CantorDust",
    "DustConfig",
    "cantor_dust_zeta",
    "cantor_tube_zeta",
    "embed_tube_zeta",
    "embedding_check",
    "embedding_error_term",
    "error_term_bound",
    "error_term_residue",
    "gamma_ratio_factor",
    "gamma_ratio_residue",
    "kneser_invariant",
    "one_sided_error_term",
    "residue_transfer",
    "segment_tube_zeta",
    "strip_gamma_term",
    "strip_zeta",
    "strip_zeta_direct",
]
