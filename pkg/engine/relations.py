"""
Integer relations among reals: continued-fraction ratio tests and PSLQ.

Both are bounded searches. "independent" means no relation with coefficients
up to qmax exists at the working tolerance; it is not a proof.
"""

from __future__ import annotations

import math
from typing import Sequence

import mpmath
import numpy as np
from sympy import Rational, ilcm, igcd

from engine.config import get_settings
from engine.errors import InvalidInput
from engine.types import RelationResult


def continued_fraction(x: float | mpmath.mpf, n: int) -> list[int]:
    """First n partial quotients of x (fewer if the expansion terminates)."""
    seq: list[int] = []
    number = mpmath.mpf(x)
    for _ in range(n):
        a = mpmath.floor(number)
        seq.append(int(a))
        frac = number - a
        if mpmath.almosteq(frac, 0, rel_eps=mpmath.mpf(10) ** (-(mpmath.mp.dps - 3))):
            break
        number = mpmath.fdiv(1, frac)
    return seq


def convergents(seq: Sequence[int]) -> list[Rational]:
    out: list[Rational] = []
    p_prev, p = 1, seq[0]
    q_prev, q = 0, 1
    out.append(Rational(p, q))
    for a in seq[1:]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append(Rational(p, q))
    return out


def best_rational(x: float, qmax: int, tol: float) -> Rational | None:
    """
    Convergent p/q of x with q <= qmax and |x - p/q| <= tol * |x|, if any.
    """
    if x == 0:
        return Rational(0)
    sign = -1 if x < 0 else 1
    ax = abs(x)
    for r in convergents(continued_fraction(ax, 64)):
        if r.q > qmax:
            break
        if abs(ax - float(r)) <= tol * ax:
            return sign * r
    return None


def _normalized(coeffs: Sequence[int]) -> list[int]:
    coeffs = [int(c) for c in coeffs]
    g = 0
    for c in coeffs:
        g = igcd(g, abs(c))
    if g > 1:
        coeffs = [c // g for c in coeffs]
    for c in coeffs:
        if c != 0:
            if c < 0:
                coeffs = [-v for v in coeffs]
            break
    return coeffs


def _residual(xs: Sequence[float], coeffs: Sequence[int]) -> float:
    return float(abs(math.fsum(c * x for c, x in zip(coeffs, xs))))


def rational_relation_scan(
    xs: Sequence[float],
    qmax: int | None = None,
    tol: float | None = None,
) -> RelationResult:
    """
    Look for integers q_i, |q_i| <= qmax, not all zero, with sum q_i x_i = 0.

    Pairwise ratios are tested with continued fractions first; for three or
    more inputs PSLQ then searches the full vector. Coefficients are reduced
    and signed so that the first nonzero one is positive.
    """
    settings = get_settings()
    qmax = settings.qmax if qmax is None else qmax
    tol = settings.relation_tol if tol is None else tol
    if not xs:
        raise InvalidInput("relation scan needs at least one value")
    if qmax < 2:
        raise InvalidInput("qmax must be >= 2", qmax=qmax)
    if any(not (x > 0 and math.isfinite(x)) for x in xs):
        raise InvalidInput("relation scan expects positive finite values", xs=list(xs))

    n = len(xs)
    for i in range(n):
        for j in range(i + 1, n):
            r = best_rational(xs[j] / xs[i], qmax, tol)
            if r is None or r.p > qmax:
                continue
            coeffs = [0] * n
            coeffs[i] = -int(r.p)
            coeffs[j] = int(r.q)
            coeffs = _normalized(coeffs)
            return RelationResult(
                independent=False,
                coefficients=coeffs,
                residual=_residual(xs, coeffs),
                qmax=qmax,
            )

    if n >= 3:
        scale = max(xs)
        found = mpmath.pslq([mpmath.mpf(x) / scale for x in xs], tol=tol, maxcoeff=qmax, maxsteps=10**5)
        if found is not None and max(abs(c) for c in found) <= qmax:
            coeffs = _normalized(found)
            return RelationResult(
                independent=False,
                coefficients=coeffs,
                residual=_residual(xs, coeffs),
                qmax=qmax,
            )
    return RelationResult(independent=True, qmax=qmax)


def log_independence_certificate(
    ms: Sequence[int], qmax: int | None = None, dps: int | None = None
) -> RelationResult:
    """
    Bounded independence certificate for log m_1, ..., log m_n with integer m_i.

    The logs are exact inputs, so PSLQ runs at `dps` digits with tolerance
    10^-(dps-10); a near-relation that only holds to double precision cannot
    pass.
    """
    settings = get_settings()
    qmax = settings.qmax if qmax is None else qmax
    dps = settings.relation_dps if dps is None else dps
    if len(ms) < 2:
        return RelationResult(independent=True, qmax=qmax)
    with mpmath.workdps(dps):
        logs = [mpmath.log(m) for m in ms]
        found = mpmath.pslq(
            logs, tol=mpmath.mpf(10) ** (-(dps - 10)), maxcoeff=qmax, maxsteps=10**6
        )
        if found is None:
            return RelationResult(independent=True, qmax=qmax)
        coeffs = _normalized(found)
        res = float(abs(mpmath.fsum(c * x for c, x in zip(coeffs, logs))))
    return RelationResult(independent=False, coefficients=coeffs, residual=res, qmax=qmax)


def common_generator(xs: Sequence[float], qmax: int, tol: float) -> tuple[float, list[int]] | None:
    """
    If every x_j / x_0 is rational (denominators <= qmax), return g > 0 and
    integers n_j with x_j = n_j * g, gcd(n_j) = 1. Otherwise None.
    """
    x0 = xs[0]
    fracs: list[Rational] = []
    for x in xs:
        r = best_rational(x / x0, qmax, tol)
        if r is None:
            return None
        fracs.append(r)
    L = 1
    for r in fracs:
        L = ilcm(L, int(r.q))
    Ns = [int(r.p) * (L // int(r.q)) for r in fracs]
    G = 0
    for N in Ns:
        G = igcd(G, abs(N))
    g = x0 * G / L
    return g, [N // G for N in Ns]


__all__ = [
    "continued_fraction",
    "convergents",
    "best_rational",
    "rational_relation_scan",
    "log_independence_certificate",
    "common_generator",
]
