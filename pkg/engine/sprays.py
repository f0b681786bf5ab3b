"""
Self-similar sprays and the worked-example catalog.

A spray is a generator G (an open set with known distance zeta function)
together with a ratio list {(b_j, r_j)}: b_j copies of G scaled by r_j,
repeated self-similarly. Its relative distance zeta function is

    zeta_spray(s) = zeta_G(s) / (1 - sum_j b_j r_j^s),

so every generator contributes its own poles and the Dirichlet denominator
contributes the lattice (or quasiperiodic) ones.

Every catalog generator is cross-checked against an independent quadrature
of the piece integral before it is handed out. When the two disagree by a
uniform factor (a constant, or a change of base c^s) the quadrature wins,
the substitution is flagged and logged; any other disagreement is fatal.

Inputs:
  - catalog.json (engine.config.CATALOG_PATH)
  - hand-built SpraySpec values

Tests care about:
  - spray measure anchor zeta(N) = |Omega|
  - declared dimension max(D_G, Moran root)
  - generator closed forms vs quadrature
  - N-gasket dichotomy and the pole orders at N - 1
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np
import sympy
from loguru import logger
from scipy.interpolate import BSpline
from scipy.stats import linregress

from engine.cantor import GeneralizedCantorSet, relative_distance_expr
from engine.config import CATALOG_PATH, get_settings
from engine.dirichlet import DirichletPolynomial, moran_root
from engine.errors import (
    FractalZetaError,
    GeneratorValidationFailed,
    InvalidInput,
    MeasureDivergence,
    UnknownExample,
    UnsupportedKind,
)
from engine.geometry import Region, Rfd, ZetaFn, build_rfd
from engine.merozeta import ENTIRE_FACTORS, MeroExpr, MeroTerm, eval_expr, scale_expr
from engine.quadrature import dblquad, quad, tplquad
from engine.rfd import distance_zeta_numeric
from engine.types import CatalogInfo, CheckResult, Report, Window

# offsets above N at which generators are cross-checked
VALIDATION_OFFSETS = (0.25, 0.5, 1.0, 1.5, 2.5)


def exact(text: str | float | int) -> float:
    """Float value of an exact constant written in sympy syntax."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(sympy.N(sympy.sympify(text), 20))
    except (sympy.SympifyError, TypeError) as exc:
        raise InvalidInput(f"not an exact constant: {text!r}") from exc


# --- generator closed forms ---------------------------------------------------


def layer_expr(measure: float, rho: float, power: int, N: int, count: float = 1.0) -> MeroExpr:
    """
    Distance zeta of `count` pieces whose inner parallel sets shrink
    homothetically: measure * power! * rho^(s-N) / prod_{j<power} (s - N + 1 + j).
    """
    if not (measure > 0 and rho > 0 and power >= 1):
        raise InvalidInput("layer needs positive measure, inradius and power", measure=measure, rho=rho, power=power)
    term = MeroTerm(
        coeff=count * measure * math.factorial(power) * rho ** (-N),
        base=rho,
        rational_poles=tuple((float(N - 1 - j), 1) for j in range(power)),
    )
    return MeroExpr(terms=(term,))


def simplex_height(N: int) -> float:
    """Distance from the centroid of the middle N-plex to a vertex of the unit N-simplex, in barycentric units."""
    return math.sqrt((N + 1) / (2.0 * N))


def simplex_volume(N: int) -> float:
    """Volume of the regular N-simplex with unit edge."""
    return math.sqrt(N + 1) / (math.factorial(N) * 2.0 ** (N / 2.0))


def nplex_inradius(N: int) -> float:
    h = simplex_height(N)
    return h * min(1.0 / (N + 1), 0.25, (N - 1) / (2.0 * (N + 1)))


def _nplex_faces(N: int) -> list[tuple[int, float, float]]:
    """(k, alpha_k, beta_k) for the inclusion-exclusion sum over k of the removed corners."""
    h = simplex_height(N)
    return [(k, 1.0 - k / 2.0, (N + 1 - 2 * k) / h) for k in range(N + 2)]


def _active_interval(alpha: float, beta: float, rho: float) -> tuple[float, float] | None:
    if beta == 0.0:
        return None
    if beta > 0:
        if alpha <= 0:
            return None
        return 0.0, min(rho, alpha / beta)
    if alpha > 0:
        return 0.0, rho
    p = alpha / beta
    return (p, rho) if p < rho else None


def nplex_generator_expr(N: int) -> MeroExpr:
    """
    Distance zeta of the middle N-plex left when the N+1 corner simplices
    of half size are removed from the unit N-simplex.

    The inner parallel volume is an inclusion-exclusion sum of truncated
    powers; on each active interval [p, q] the piece integral of
    u^(s-N) L_k(u)^(N-1) expands binomially into closed-form terms.
    """
    if N < 2:
        raise InvalidInput("N-gasket needs N >= 2", N=N)
    rho = nplex_inradius(N)
    v = simplex_volume(N)
    acc: dict[tuple[float, float], float] = {}
    for k, alpha, beta in _nplex_faces(N):
        span = _active_interval(alpha, beta, rho)
        if span is None:
            continue
        p, q = span
        weight = v * (-1) ** k * math.comb(N + 1, k) * N * beta
        for j in range(N):
            c = weight * math.comb(N - 1, j) * alpha ** (N - 1 - j) * (-beta) ** j
            if c == 0.0:
                continue
            pole = float(N - 1 - j)
            e_shift = j + 1 - N  # (x^(s-N+j+1)) = x^(j+1-N) * x^s
            for end, sign in ((q, 1.0), (p, -1.0)):
                if end <= 0.0:
                    continue
                key = (round(end, 15), pole)
                acc[key] = acc.get(key, 0.0) + sign * c * end**e_shift
    terms = tuple(
        MeroTerm(coeff=c, base=base, rational_poles=((pole, 1),))
        for (base, pole), c in sorted(acc.items())
        if abs(c) > 1e-300
    )
    return MeroExpr(terms=terms, label=f"{N}-plex")


def _nplex_inner_volume(N: int, u: float) -> float:
    """|{x in middle N-plex : d(x, boundary) > u}| from the Irwin-Hall density."""
    h = simplex_height(N)
    w = 0.5 - 2.0 * u / h
    S = 1.0 - (N + 1) * u / h
    if w <= 0 or S <= 0:
        return 0.0
    density = BSpline.basis_element(np.arange(N + 2, dtype=float), extrapolate=False)
    f = float(np.nan_to_num(density(S / w)))
    return simplex_volume(N) * math.factorial(N) * w**N * f


# --- independent piece quadratures --------------------------------------------


def _real_only(s: complex, what: str) -> float:
    if abs(complex(s).imag) > 0:
        raise UnsupportedKind(f"{what} quadrature runs on real s only", s=s)
    return complex(s).real


def _fan(count: float, leg: float, slope: float) -> ZetaFn:
    """count copies of the right triangle 0 < x < leg, 0 < y < slope x with A on y = 0."""

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "triangle")
        val, err = dblquad(lambda y, _x: y ** (x - 2.0), 0.0, leg, lambda _x: 0.0, lambda t: slope * t)
        return complex(count * val), count * err

    return fn


def _vertex_piece(count: float, leg: float) -> ZetaFn:
    """count copies of the triangle x, y > 0, x + y < leg with A the corner at the origin."""

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "corner")
        val, err = dblquad(
            lambda y, t: (t * t + y * y) ** ((x - 2.0) / 2.0), 0.0, leg, lambda _t: 0.0, lambda t: leg - t
        )
        return complex(count * val), count * err

    return fn


def _cube_pieces(N: int, half: float) -> ZetaFn:
    """The cube of half-side `half`, cut into 2^N N! ordered simplices."""
    count = 2.0**N * math.factorial(N)

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "cube")
        e = x - N
        if N == 1:
            val, err = quad(lambda w: w**e, 0.0, half, complex_valued=False)
            val = val.real
        elif N == 2:
            val, err = dblquad(lambda y, _w: y**e, 0.0, half, lambda _w: 0.0, lambda w: w)
        elif N == 3:
            val, err = tplquad(
                lambda z, _y, _w: z**e, 0.0, half, lambda _w: 0.0, lambda w: w, lambda _w, _y: 0.0, lambda _w, y: y
            )
        elif N == 4:
            val, err = tplquad(
                lambda w3, _w2, _w1: w3 ** (e + 1.0) / (e + 1.0),
                0.0, half, lambda _w: 0.0, lambda w: w, lambda _w, _y: 0.0, lambda _w, y: y,
            )
        else:
            raise UnsupportedKind("cube quadrature is available for N <= 4", N=N)
        return complex(count * val), count * err

    return fn


def _octahedron() -> ZetaFn:
    """Middle octahedron of the unit tetrahedron, cut into 48 pieces over the faces."""
    r_face = 1.0 / (4.0 * math.sqrt(3.0))
    rho = nplex_inradius(3)

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "octahedron")
        val, err = tplquad(
            lambda z, _y, _x: z ** (x - 3.0),
            0.0, 0.25, lambda _x: 0.0, lambda t: t / math.sqrt(3.0),
            lambda _x, _y: 0.0, lambda _x, y: rho * y / r_face,
        )
        return complex(48.0 * val), 48.0 * err

    return fn


def _nplex_spline(N: int) -> ZetaFn:
    """(s - N) * integral_0^rho u^(s-N-1) V_in(u) du with V_in from the Irwin-Hall density."""
    rho = nplex_inradius(N)
    kinks = sorted(
        {q for _, al, be in _nplex_faces(N) if be != 0 for q in (al / be,) if 0.0 < q < rho}
    )
    first = kinks[0] if kinks else rho

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "N-plex")
        g = lambda u: _nplex_inner_volume(N, u)
        head, e1 = quad(g, 0.0, first, weight="alg", wvar=(x - N - 1.0, 0.0), complex_valued=False)
        tail, e2 = (0j, 0.0)
        if first < rho:
            tail, e2 = quad(
                lambda u: u ** (x - N - 1.0) * g(u), first, rho, points=kinks[1:] or None, complex_valued=False
            )
        return complex((x - N) * (head.real + tail.real)), abs(x - N) * (e1 + e2)

    return fn


def _annulus(a: float) -> ZetaFn:
    """Annulus a < r < 1, A its two boundary circles."""
    mid = (1.0 + a) / 2.0

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "annulus")
        val, err = quad(
            lambda r: min(r - a, 1.0 - r) ** (x - 2.0) * r, a, 1.0, points=[mid], complex_valued=False
        )
        return complex(2.0 * math.pi * val.real), 2.0 * math.pi * err

    return fn


def _ball(N: int, R: float) -> ZetaFn:
    sphere = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)

    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "ball")
        val, err = quad(lambda r: (R - r) ** (x - N) * r ** (N - 1), 0.0, R, complex_valued=False)
        return complex(sphere * val.real), sphere * err

    return fn


def _torus(R: float, r: float) -> ZetaFn:
    def fn(s: complex) -> tuple[complex, float]:
        x = _real_only(s, "torus")
        # outer variable rho (distance from the core circle), then theta; phi integrates to 2 pi
        val, err = dblquad(
            lambda th, p: (r - p) ** (x - 3.0) * (R + p * math.cos(th)) * p,
            0.0, r, lambda _p: 0.0, lambda _p: 2.0 * math.pi,
        )
        return complex(2.0 * math.pi * val), 2.0 * math.pi * err

    return fn


def _sum(*fns: ZetaFn) -> ZetaFn:
    def fn(s: complex) -> tuple[complex, float]:
        vals = [f(s) for f in fns]
        return sum(v for v, _ in vals), sum(e for _, e in vals)

    return fn


def _generator_rfd(N: int, zeta: ZetaFn, measure: float, rho: float, label: str) -> Rfd:
    return Rfd(
        N=N,
        kind="generator",
        region=Region(indicator=None, bbox=np.array([[0.0, 1.0]] * N), measure=measure),
        distance_zeta_exact=zeta,
        dmax=rho,
        label=label,
    )


# --- specs ----------------------------------------------------------------------


@dataclass(frozen=True)
class SpraySpec:
    generator_zeta: MeroExpr
    ratios: DirichletPolynomial
    label: str = ""
    N: int = 2
    generator_rfd: Rfd | None = None
    printed_generator: MeroExpr | None = None
    flags: tuple[str, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def scaling_sum(self) -> float:
        """sum b_j r_j^N"""
        return float(np.sum(self.ratios.b * np.exp(self.N * self.ratios.logr)))

    @property
    def generator_measure(self) -> float:
        return eval_expr(self.generator_zeta, complex(self.N)).real

    @property
    def measure(self) -> float:
        return self.generator_measure / (1.0 - self.scaling_sum)


def _generator_dimension(e: MeroExpr) -> float:
    reals = [p.real for p in e.rational_pole_points()]
    return max(reals) if reals else -math.inf


def declared_dimension(spec: SpraySpec) -> float:
    """max(D of the generator, real root of sum b r^s = 1)."""
    return max(_generator_dimension(spec.generator_zeta), moran_root(spec.ratios, allow_nonpositive=True))


def spray_zeta(spec: SpraySpec) -> MeroExpr:
    if spec.scaling_sum >= 1.0:
        raise MeasureDivergence(
            "sum b r^N >= 1: the spray has infinite measure", label=spec.label, sum=spec.scaling_sum
        )
    f = spec.ratios.merged()
    terms = tuple(
        replace(t, dirichlet_denoms=t.dirichlet_denoms + ((f, 1),)) for t in spec.generator_zeta.terms
    )
    return MeroExpr(terms=terms, label=spec.label or spec.generator_zeta.label)


def self_similar_check(spec: SpraySpec, s_list: Sequence[complex]) -> Report:
    """zeta_spray(s) * (1 - sum b r^s) == zeta_G(s)"""
    e = spray_zeta(spec)
    checks = []
    for s in s_list:
        s = complex(s)
        g = eval_expr(spec.generator_zeta, s)
        lhs = eval_expr(e, s) * complex(spec.ratios(s))
        res = abs(lhs - g)
        tol = 1e-12 * (1.0 + abs(g))
        checks.append(CheckResult(name=f"self-similar s={s}", passed=res <= tol, residual=res, tolerance=tol))
    return Report.of(f"self-similar:{spec.label}", checks)


# --- generator cross-check --------------------------------------------------------


def validation_points(N: int) -> list[float]:
    return [N + d for d in VALIDATION_OFFSETS]


def _implied_correction(s_list: Sequence[float], ratio: Sequence[complex]) -> dict[str, Any]:
    """Fit numeric/closed = C * b^s; `uniform` when the fit is exact to quadrature accuracy."""
    q = np.asarray(ratio, dtype=complex)
    if np.any(np.abs(q.imag) > 1e-9 * np.abs(q)) or np.any(q.real <= 0):
        return {"uniform": False}
    y = np.log(q.real)
    fit = linregress(np.asarray(s_list, dtype=float), y)
    spread = float(np.max(np.abs(y - (fit.intercept + fit.slope * np.asarray(s_list)))))
    return {
        "uniform": spread <= 10.0 * get_settings().generator_rtol,
        "constant": math.exp(fit.intercept),
        "base": math.exp(fit.slope),
        "spread": spread,
    }


def _crosscheck(zeta: MeroExpr, rfd: Rfd, s_list: Sequence[float], label: str, printed: MeroExpr | None) -> Report:
    tol = get_settings().generator_rtol
    checks: list[CheckResult] = []
    numeric: list[complex] = []
    ratios: list[complex] = []
    for s in s_list:
        closed = eval_expr(zeta, complex(s))
        try:
            value, err = distance_zeta_numeric(rfd, complex(s))
        except FractalZetaError as exc:
            checks.append(
                CheckResult(name=f"generator s={s:g}", passed=False, residual=math.inf, tolerance=tol, details=exc.to_dict())
            )
            continue
        numeric.append(value)
        ratios.append(value / closed)
        res = abs(closed - value) / max(abs(value), 1e-300)
        checks.append(
            CheckResult(
                name=f"generator s={s:g}",
                passed=res <= tol,
                residual=res,
                tolerance=tol,
                details={"closed": [closed.real, closed.imag], "quadrature": [value.real, value.imag], "err": err},
            )
        )
    if len(ratios) == len(s_list) and not all(c.passed for c in checks):
        checks.append(
            CheckResult(
                name="implied correction",
                passed=False,
                residual=max(c.residual for c in checks),
                tolerance=tol,
                details=_implied_correction(s_list, ratios),
            )
        )
    if printed is not None and len(numeric) == len(s_list):
        shown = [eval_expr(printed, complex(s)) for s in s_list]
        res = max(abs(p - v) / max(abs(v), 1e-300) for p, v in zip(shown, numeric))
        details = _implied_correction(s_list, [v / p for v, p in zip(numeric, shown)])
        # informational: the printed form is kept for reference only
        checks.append(
            CheckResult(name="printed form", passed=True, residual=res, tolerance=tol, details=details)
        )
    return Report.of(f"generator:{label}", checks)


def generator_crosscheck(spec: SpraySpec, s_list: Sequence[float] | None = None) -> Report:
    """
    Closed-form generator zeta vs quadrature of the piece integral.

    Report only. Failed points carry the implied correction (constant and
    base) fitted from log(quadrature / closed form).
    """
    if spec.generator_rfd is None:
        raise UnsupportedKind("spray has no generator geometry to integrate", label=spec.label)
    s_list = list(s_list) if s_list is not None else validation_points(spec.N)
    return _crosscheck(spec.generator_zeta, spec.generator_rfd, s_list, spec.label, spec.printed_generator)


def _validated(zeta: MeroExpr, rfd: Rfd, N: int, label: str, printed: MeroExpr | None) -> tuple[MeroExpr, tuple[str, ...]]:
    s_list = validation_points(N)
    report = _crosscheck(zeta, rfd, s_list, label, printed)
    failed = [c for c in report.checks if not c.passed]
    if not failed:
        return zeta, ()
    correction = next((c.details for c in failed if c.name == "implied correction"), {})
    if not correction.get("uniform"):
        raise GeneratorValidationFailed(
            "generator closed form disagrees with quadrature",
            label=label,
            residual=max(c.residual for c in failed),
        )
    C, b = correction["constant"], correction["base"]
    fixed = scale_expr(zeta, b).times(C) if abs(b - 1.0) > 1e-9 else zeta.times(C)
    flag = f"generator replaced by quadrature-selected form: constant={C:.12g}, base factor={b:.12g}"
    logger.warning("{}: {}", label, flag)
    return replace(fixed, label=zeta.label), (flag,)


# --- catalog builders ---------------------------------------------------------------


class Built(NamedTuple):
    zeta: MeroExpr
    rfd: Rfd | None
    printed: MeroExpr | None = None


def _gasket() -> Built:
    rho = 1.0 / (4.0 * math.sqrt(3.0))
    area = math.sqrt(3.0) / 16.0
    printed = MeroExpr(
        terms=(MeroTerm(coeff=6.0 * math.sqrt(3.0), base=1.0 / (2.0 * math.sqrt(3.0)), rational_poles=((0.0, 1), (1.0, 1))),),
    )
    return Built(
        layer_expr(area, rho, 2, 2),
        _generator_rfd(2, _fan(6.0, 0.25, 1.0 / math.sqrt(3.0)), area, rho, "gasket-generator"),
        printed,
    )


def _nplex(N: int) -> Built:
    N = int(N)
    if N == 2:
        check = _fan(6.0, 0.25, 1.0 / math.sqrt(3.0))
    elif N == 3:
        check = _octahedron()
    else:
        check = _nplex_spline(N)
    rho = nplex_inradius(N)
    measure = simplex_volume(N) * (1.0 - (N + 1) * 2.0 ** (-N))
    return Built(nplex_generator_expr(N), _generator_rfd(N, check, measure, rho, f"{N}-plex"))


def _cube(N: int) -> Built:
    N = int(N)
    return Built(
        layer_expr(3.0 ** (-N), 1.0 / 6.0, N, N),
        _generator_rfd(N, _cube_pieces(N, 1.0 / 6.0), 3.0 ** (-N), 1.0 / 6.0, f"{N}-cube"),
    )


def _half_square() -> Built:
    printed = MeroExpr(terms=(MeroTerm(coeff=1.0, base=0.25, rational_poles=((0.0, 1), (1.0, 1))),))
    return Built(
        layer_expr(0.25, 0.25, 2, 2, count=2.0),
        _generator_rfd(2, _fan(16.0, 0.25, 1.0), 0.5, 0.25, "half-square-generator"),
        printed,
    )


def _third_square() -> Built:
    third = 1.0 / 3.0
    zeta = MeroExpr(
        terms=(
            MeroTerm(coeff=12.0, base=third, rational_poles=((0.0, 1), (1.0, 1))),
            MeroTerm(coeff=2.0, base=third, rational_poles=((0.0, 1),), entire_factor=ENTIRE_FACTORS["Z"]),
        )
    )
    check = _sum(_fan(12.0, third, 1.0), _vertex_piece(2.0, third))
    return Built(zeta, _generator_rfd(2, check, 7.0 / 9.0, third, "third-square-generator"))


def _nest(a: float = 0.5) -> Built:
    a = exact(a)
    if not (0.0 < a < 1.0):
        raise InvalidInput("nest ratio must lie in (0, 1)", a=a)
    h = (1.0 - a) / 2.0
    zeta = MeroExpr(terms=(MeroTerm(coeff=2.0 * math.pi * (1.0 + a) / h, base=h, rational_poles=((1.0, 1),)),))
    return Built(zeta, _generator_rfd(2, _annulus(a), math.pi * (1.0 - a * a), h, "annulus"))


def _cantor_graph() -> Built:
    third = 1.0 / 3.0
    return Built(
        layer_expr(1.0 / 18.0, third, 2, 2, count=2.0),
        _generator_rfd(2, _fan(2.0, third, 1.0), 1.0 / 9.0, third, "cantor-graph-generator"),
    )


def _ball_expr(N: int, R: float = 1.0) -> Built:
    N, R = int(N), exact(R)
    volume = math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0) * R**N
    return Built(layer_expr(volume, R, N, N), _generator_rfd(N, _ball(N, R), volume, R, f"ball-{N}"))


def _torus_expr(R: float = 2.0, r: float = 1.0) -> Built:
    R, r = exact(R), exact(r)
    if not (R > r > 0):
        raise InvalidInput("torus needs R > r > 0", R=R, r=r)
    volume = 2.0 * math.pi**2 * R * r * r
    return Built(layer_expr(volume, r, 2, 3), _generator_rfd(3, _torus(R, r), volume, r, "torus"))


def _cantor_set(m: int = 2, a: float = 1.0 / 3.0) -> Built:
    C = GeneralizedCantorSet(int(m), exact(a))
    return Built(relative_distance_expr(C), build_rfd("cantor", m=C.m, a=C.a, delta=None))


_BUILDERS: dict[str, Callable[..., Built]] = {
    "gasket": _gasket,
    "nplex": _nplex,
    "cube": _cube,
    "half_square": _half_square,
    "third_square": _third_square,
    "nest": _nest,
    "cantor_graph": _cantor_graph,
    "ball": _ball_expr,
    "torus": _torus_expr,
    "cantor_set": _cantor_set,
}


# --- catalog --------------------------------------------------------------------------


@lru_cache(maxsize=4)
def _load(path: Path) -> dict[str, CatalogInfo]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read catalog {path}: {exc}") from exc
    entries = [CatalogInfo.model_validate(e) for e in raw.get("entries", [])]
    return {e.name: e for e in entries}


def load_catalog(path: Path | None = None) -> dict[str, CatalogInfo]:
    return _load(Path(path or CATALOG_PATH))


def catalog_names() -> list[str]:
    return list(load_catalog())


def catalog_info(name: str) -> CatalogInfo:
    try:
        return load_catalog()[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}", known=catalog_names()) from None


def catalog_window(name: str) -> Window:
    return Window.parse(catalog_info(name).window)


def catalog_ratios(info: CatalogInfo) -> DirichletPolynomial:
    return DirichletPolynomial.of(*((exact(b), exact(r)) for b, r in info.ratios))


@lru_cache(maxsize=None)
def catalog_example(name: str):
    """
    SpraySpec for spray entries, MeroExpr for closed-form entries, CantorDust
    for the embedded dust. Generators are validated before being returned.
    """
    info = catalog_info(name)
    if info.kind == "embedded":
        from engine.embed import CantorDust

        return CantorDust()
    built = _BUILDERS[info.builder](**info.params)
    zeta, flags = built.zeta, ()
    if built.rfd is not None:
        zeta, flags = _validated(built.zeta, built.rfd, info.N, name, built.printed)
    zeta = replace(zeta, label=name)
    if info.kind == "expr":
        if flags:
            logger.info("{}: {}", name, "; ".join(flags))
        return zeta
    return SpraySpec(
        generator_zeta=zeta,
        ratios=catalog_ratios(info),
        label=name,
        N=info.N,
        generator_rfd=built.rfd,
        printed_generator=built.printed,
        flags=flags,
        meta={"info": info},
    )


def catalog_expression(name: str):
    """Distance zeta of the whole example: MeroExpr, or the CantorDust evaluator."""
    ex = catalog_example(name)
    if isinstance(ex, SpraySpec):
        return spray_zeta(ex)
    return ex


def clear_catalog_cache() -> None:
    catalog_example.cache_clear()
    _load.cache_clear()


def measure_anchor_check(name: str) -> CheckResult:
    """zeta(N) equals the measure of Omega."""
    info = catalog_info(name)
    expected = exact(info.measure)
    value = complex(catalog_expression(name)(complex(info.N)))
    res = abs(value - expected) / abs(expected)
    tol = get_settings().generator_rtol
    return CheckResult(name=f"measure {name}", passed=res <= tol, residual=res, tolerance=tol)


__all__ = [
    "VALIDATION_OFFSETS",
    "Built",
    "SpraySpec",
    "catalog_example",
    "catalog_expression",
    "catalog_info",
    "catalog_names",
    "catalog_ratios",
    "catalog_window",
    "clear_catalog_cache",
    "declared_dimension",
    "exact",
    "generator_crosscheck",
    "layer_expr",
    "load_catalog",
    "measure_anchor_check",
    "nplex_generator_expr",
    "nplex_inradius",
    "self_similar_check",
    "simplex_height",
    "simplex_volume",
    "spray_zeta",
    "validation_points",
]
