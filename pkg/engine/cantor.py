"""
Generalized Cantor sets C(m, a): m copies scaled by a per generation,
equally spaced in [0, 1].

Closed-form tube volume and zeta functions sit next to an interval oracle
built from the construction itself; the closed form is checked against the
oracle whenever a set is created.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar
from sympy import prime

from engine.config import get_settings
from engine.dirichlet import DirichletPolynomial
from engine.errors import (
    ArityMismatch,
    DepthOverflow,
    InsufficientDepth,
    InvalidCantorParameters,
    NonPositiveT,
)
from engine.merozeta import MeroExpr, MeroTerm, eval_expr, scale_expr
from engine.relations import log_independence_certificate, rational_relation_scan
from engine.serialize import csv_text
from engine.types import CantorInvariants, QuasiperiodicDrum, RelationResult, TubeSamples


@dataclass(frozen=True)
class GeneralizedCantorSet:
    m: int
    a: float

    @property
    def D(self) -> float:
        return math.log(self.m) / math.log(1.0 / self.a)

    @property
    def T(self) -> float:
        return math.log(1.0 / self.a)

    @property
    def p(self) -> float:
        return 2.0 * math.pi / self.T

    @property
    def c(self) -> float:
        """Half-length of the first-level gaps."""
        return (1.0 - self.m * self.a) / (2.0 * (self.m - 1))

    @property
    def gap(self) -> float:
        return 2.0 * self.c

    def to_dict(self) -> dict:
        return {"m": self.m, "a": self.a, "D": self.D, "c": self.c}


def _validate(m: int, a: float) -> None:
    if int(m) != m or m < 2:
        raise InvalidCantorParameters("m must be an integer >= 2", m=m)
    if not (0.0 < a < 1.0 / m):
        raise InvalidCantorParameters("need 0 < a < 1/m", m=m, a=a)


# --- closed forms -------------------------------------------------------------


def tube_gauge(C: GeneralizedCantorSet, tau: float) -> float:
    """
    G(tau) with |C_t| = t^(1-D) G(log 1/t) for 0 < t < c; G is T-periodic.

    Writing t = c a^n x with x in [1, 1/a) and y = c x, G = y^(D-1) + 2 y^D.
    """
    t = math.exp(-tau)
    n = _level(C, t)
    y = t * C.a ** (-n)
    return y ** (C.D - 1.0) + 2.0 * y**C.D


def _level(C: GeneralizedCantorSet, t: float) -> int:
    # n with c a^n <= t < c a^(n-1)
    n = math.ceil(math.log(C.c / t) / C.T)
    while C.c * C.a**n > t:
        n += 1
    while n > 0 and C.c * C.a ** (n - 1) <= t:
        n -= 1
    return n


def tube_volume_closed(C: GeneralizedCantorSet, t: float) -> float:
    """|C_t| = (ma)^n + 2 m^n t on c a^n <= t < c a^(n-1); 1 + 2t once t >= c."""
    if not (t > 0):
        raise NonPositiveT("t must be positive", t=t)
    if t >= C.c:
        return 1.0 + 2.0 * t
    n = _level(C, t)
    return (C.m * C.a) ** n + 2.0 * C.m**n * t


def relative_distance_expr(C: GeneralizedCantorSet) -> MeroExpr:
    """zeta_{C,(0,1)}(s) = c^(s-1)(1 - ma) / (s (1 - m a^s))"""
    f = DirichletPolynomial(((float(C.m), C.a),))
    return MeroExpr(
        (
            MeroTerm(
                coeff=(1.0 - C.m * C.a) / C.c,
                base=C.c,
                rational_poles=((0j, 1),),
                dirichlet_denoms=((f, 1),),
            ),
        ),
        label=f"cantor({C.m},{C.a:.6g}):relative",
    )


def distance_expr(C: GeneralizedCantorSet, delta: float) -> MeroExpr:
    """Relative part plus the two outer pieces 2 delta^s / s."""
    if delta < C.c:
        raise InvalidCantorParameters("delta must be >= c", delta=delta, c=C.c)
    outer = MeroTerm(coeff=2.0, base=delta, rational_poles=((0j, 1),))
    rel = relative_distance_expr(C)
    return MeroExpr(rel.terms + (outer,), label=f"cantor({C.m},{C.a:.6g}):distance")


def relative_tube_expr(C: GeneralizedCantorSet) -> MeroExpr:
    """
    Tube zeta of (C, (0,1)) with delta = c: the relative distance zeta
    minus the saturated term, divided by (1 - s).
    """
    from engine.merozeta import TransferDirection, tube_distance_transfer

    return tube_distance_transfer(
        relative_distance_expr(C), TransferDirection.DISTANCE_TO_TUBE, 1, C.c, 1.0
    )


def gcs_distance_zeta_closed(C: GeneralizedCantorSet, delta: float, s: complex) -> complex:
    return eval_expr(distance_expr(C, delta), s)


def _invariants(C: GeneralizedCantorSet) -> CantorInvariants:
    D, c = C.D, C.c
    kappa = (1.0 - D) / (2.0 * D)
    res_dist = c ** (D - 1.0) * (1.0 - C.m * C.a) / (D * C.T)
    return CantorInvariants(
        D=D,
        T=C.T,
        p=C.p,
        c=c,
        M_lower=kappa ** (D - 1.0) / D,
        M_upper=c ** (D - 1.0) * C.m * (1.0 - C.a) / (C.m - 1),
        res_distance_at_D=res_dist,
        res_tube_at_D=res_dist / (1.0 - D),
    )


# --- interval oracle ----------------------------------------------------------


def _gaps(C: GeneralizedCantorSet, depth: int) -> np.ndarray:
    """Gaps between consecutive depth-level intervals, left to right."""
    gaps = np.zeros(0)
    for k in range(depth):
        new = C.gap * C.a**k
        n_parents = C.m**k
        block = np.full((n_parents, C.m), new)
        block[:-1, -1] = gaps
        gaps = block.ravel()[:-1]
    return gaps


def _check_depth(C: GeneralizedCantorSet, depth: int) -> None:
    if depth < 0:
        raise DepthOverflow("depth must be >= 0", depth=depth)
    if C.m**depth > get_settings().depth_cap:
        raise DepthOverflow("too many intervals", depth=depth, count=C.m**depth)


def gcs_intervals(C: GeneralizedCantorSet, depth: int) -> np.ndarray:
    """(m^depth, 2) array of closed intervals [left, right], ascending."""
    _check_depth(C, depth)
    length = C.a**depth
    gaps = _gaps(C, depth)
    left = np.concatenate([[0.0], np.cumsum(length + gaps)])
    return np.column_stack([left, left + length])


def auto_depth(C: GeneralizedCantorSet, t: float) -> int:
    """Smallest k with a^k < t/10."""
    k = max(0, math.ceil(math.log(t / 10.0) / math.log(C.a)))
    while C.a**k >= t / 10.0:
        k += 1
    return k


def tube_volume_oracle(C: GeneralizedCantorSet, t: float, depth: int | None = None) -> float:
    """
    Measure of the union of depth-level intervals fattened by t.

    Adjacent fattened intervals overlap iff their gap is < 2t, so the union is
    the sum of the interval lengths, the unfilled outer margins 2t per
    component, and the filled gaps.
    """
    if not (t > 0):
        raise NonPositiveT("t must be positive", t=t)
    if depth is None:
        depth = auto_depth(C, t)
    elif C.a**depth >= t / 10.0:
        raise InsufficientDepth("depth too shallow for this t", depth=depth, t=t)
    _check_depth(C, depth)
    gaps = _gaps(C, depth)
    filled = gaps[gaps <= 2.0 * t]
    components = C.m**depth - filled.size
    return math.fsum(
        [(C.m * C.a) ** depth, 2.0 * t * components, math.fsum(filled.tolist())]
    )


def union_measure(intervals: np.ndarray) -> float:
    """Lebesgue measure of a union of closed intervals (sweep over sorted starts)."""
    if len(intervals) == 0:
        return 0.0
    iv = intervals[np.argsort(intervals[:, 0], kind="stable")]
    starts, ends = iv[:, 0], iv[:, 1]
    reach = np.maximum.accumulate(ends)
    prev = np.concatenate([[-np.inf], reach[:-1]])
    return math.fsum(np.maximum(0.0, ends - np.maximum(starts, prev)).tolist())


# --- construction -------------------------------------------------------------


def gcs_create(m: int, a: float) -> tuple[GeneralizedCantorSet, CantorInvariants]:
    _validate(m, a)
    C = GeneralizedCantorSet(int(m), float(a))
    inv = _invariants(C)

    tol = get_settings().closed_form_check_tol
    worst = 0.0
    for t in C.c * np.geomspace(1.0, C.a**3, 9)[1:]:
        closed = tube_volume_closed(C, float(t))
        oracle = tube_volume_oracle(C, float(t))
        worst = max(worst, abs(closed - oracle) / max(1.0, oracle))
    if worst > tol:
        logger.warning("closed tube formula disagrees with oracle for m={} a={}: {}", m, a, worst)
        lower, upper = content_bounds_from_oracle(C)
        inv = inv.model_copy(
            update={
                "M_lower": lower,
                "M_upper": upper,
                "closed_form_trusted": False,
                "diagnostics": [f"closed tube formula off by {worst:.3e}; oracle values used"],
            }
        )
    return C, inv


def content_bounds_from_oracle(C: GeneralizedCantorSet) -> tuple[float, float]:
    """
    min and max of t -> |C_t| / t^(1-D) over one multiplicative period
    [c a, c], computed from the interval oracle.
    """
    lo, hi = C.c * C.a, C.c
    ratio = lambda t: tube_volume_oracle(C, t) / t ** (1.0 - C.D)
    best = minimize_scalar(ratio, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    lower = float(best.fun)
    upper = max(ratio(lo), ratio(hi * (1 - 1e-15)))
    grid = np.geomspace(lo, hi, 65)[1:-1]
    vals = [ratio(float(t)) for t in grid]
    lower = min(lower, min(vals))
    upper = max(upper, max(vals))
    return lower, upper


def tube_samples(
    C: GeneralizedCantorSet, t_grid: Sequence[float], method: str = "exact"
) -> TubeSamples:
    fn = tube_volume_closed if method == "exact" else tube_volume_oracle
    t = [float(x) for x in t_grid]
    return TubeSamples(t=t, volume=[fn(C, x) for x in t], method="exact", label=f"cantor({C.m},{C.a:.6g})")


def tube_csv(C: GeneralizedCantorSet, samples: TubeSamples) -> str:
    rows = (
        (t, v, v / t ** (1.0 - C.D)) for t, v in zip(samples.t, samples.volume)
    )
    return csv_text(("t", "volume", "normalized"), rows)


# --- quasiperiodic drum -------------------------------------------------------


def quasiperiodic_drum_build(
    D: float,
    n: int,
    C1: float = 1.0,
    c_rule: str | Sequence[float] = "two_pow_neg_i",
    m_list: Sequence[int] | None = None,
) -> QuasiperiodicDrum:
    """
    Union of relative drums |Omega_i| C(m_i, a_i) with a_i = m_i^(-1/D), so
    every component has dimension D while the quasiperiods T_i = log(m_i)/D
    differ.
    """
    if not (0.0 < D < 1.0):
        raise InvalidCantorParameters("D must lie in (0, 1)", D=D)
    if n < 1:
        raise InvalidCantorParameters("n must be >= 1", n=n)
    if not (C1 > 0):
        raise InvalidCantorParameters("C1 must be positive", C1=C1)

    ms = [int(prime(i)) for i in range(1, n + 1)] if m_list is None else [int(x) for x in m_list]
    if len(ms) != n:
        raise ArityMismatch("m_list must have n entries", n=n, got=len(ms))
    if c_rule == "two_pow_neg_i":
        cs = [2.0 ** (-i) for i in range(1, n + 1)]
    elif isinstance(c_rule, str):
        raise InvalidCantorParameters(f"unknown c_rule {c_rule!r}")
    else:
        cs = [float(x) for x in c_rule]
        if len(cs) != n:
            raise ArityMismatch("c list must have n entries", n=n, got=len(cs))
        if any(x <= 0 for x in cs):
            raise InvalidCantorParameters("c values must be positive")

    a_list = [m ** (-1.0 / D) for m in ms]
    for m, a in zip(ms, a_list):
        _validate(m, a)
    lengths = [C1 * m ** (1.0 - 1.0 / D) * c ** (1.0 / D) for m, c in zip(ms, cs)]
    Ts = [math.log(m) / D for m in ms]
    return QuasiperiodicDrum(
        n=n,
        D=D,
        C1=C1,
        m_list=ms,
        a_list=a_list,
        c_list=cs,
        omega_lengths=lengths,
        quasiperiods=Ts,
        periods=[2.0 * math.pi / T for T in Ts],
        nonremovable=True,
        note=(
            "lattice points D + (2 pi / T_i) i k are constructed nonremovable singularities; "
            "the full critical line is not tested"
        ),
    )


def drum_zeta_expr(drum: QuasiperiodicDrum) -> MeroExpr:
    """sum_i |Omega_i|^s zeta_{C(m_i, a_i), (0,1)}(s) over the truncated union."""
    terms: tuple[MeroTerm, ...] = ()
    for m, a, length in zip(drum.m_list, drum.a_list, drum.omega_lengths):
        terms += scale_expr(relative_distance_expr(GeneralizedCantorSet(m, a)), length).terms
    return MeroExpr(terms, label=f"quasiperiodic-drum(n={drum.n})")


def drum_independence(drum: QuasiperiodicDrum, qmax: int | None = None) -> dict[str, RelationResult]:
    """
    Bounded certificates that the quasiperiods admit no small integer relation:
    a float scan of the T_i and a high-precision PSLQ run on log m_i.
    """
    return {
        "quasiperiods": rational_relation_scan(drum.quasiperiods, qmax=qmax),
        "log_m": log_independence_certificate(drum.m_list, qmax=qmax),
    }


__all__ = [
    "GeneralizedCantorSet",
    "gcs_create",
    "gcs_intervals",
    "tube_gauge",
    "tube_volume_closed",
    "tube_volume_oracle",
    "auto_depth",
    "union_measure",
    "relative_distance_expr",
    "relative_tube_expr",
    "distance_expr",
    "gcs_distance_zeta_closed",
    "content_bounds_from_oracle",
    "tube_samples",
    "tube_csv",
    "quasiperiodic_drum_build",
    "drum_zeta_expr",
    "drum_independence",
]
