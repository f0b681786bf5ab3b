"""
Numeric ground truth for relative fractal drums.

Zeta functions and tube functions are computed straight from the geometry:
layered drums use 1D adaptive quadrature per piece family, drums with a
closed-form tube function integrate it in u = log t, and everything else
is sampled by stratified Monte Carlo with a counter-based generator keyed
by (seed, stratum). Strata run in parallel and are reduced in stratum
order, so results are bit-reproducible for a given seed.

Tests care about:
  - s = N anchor (distance zeta equals the region measure)
  - the tube/distance functional equation
  - box-dimension fits and Minkowski content estimates on exact drums
  - scaling and union identities
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from loguru import logger
from scipy import stats
from scipy.integrate import trapezoid

from engine.config import get_settings
from engine.errors import (
    DegenerateD,
    InsufficientRange,
    NonIntegrable,
    NonPositiveT,
    ToleranceUnreachable,
    UnsupportedKind,
)
from engine.geometry import Rfd, build_rfd, scaled, translated, union
from engine.quadrature import quad
from engine.serialize import csv_text, read_csv_columns
from engine.types import CheckResult, ContentEstimate, DimensionFit, Report, TubeSamples, cpair


# --- Monte Carlo --------------------------------------------------------------


@dataclass(frozen=True)
class _Stratum:
    volume: float  # slab volume
    n: int  # points drawn
    d: np.ndarray  # distances of the points that fell inside the region


def _rng(seed: int, stratum: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, stratum], dtype=np.uint64)))


def _default_samples(N: int) -> int:
    s = get_settings()
    return s.mc_samples_2d if N <= 2 else s.mc_samples_3d


def _sample_strata(r: Rfd, samples: int | None, seed: int | None) -> list[_Stratum]:
    """Slabs of the bounding box along the first axis, one generator stream per slab."""
    if r.distance is None or r.region.indicator is None:
        raise UnsupportedKind("Monte Carlo needs a distance oracle and an indicator", kind=r.kind)
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    total = _default_samples(r.N) if samples is None else samples
    count = settings.mc_strata
    box = r.region.bbox
    edges = np.linspace(box[0, 0], box[0, 1], count + 1)
    sizes = [total // count + (1 if i < total % count else 0) for i in range(count)]

    def run(i: int) -> _Stratum:
        lo = box[:, 0].copy()
        hi = box[:, 1].copy()
        lo[0], hi[0] = edges[i], edges[i + 1]
        pts = lo + (hi - lo) * _rng(seed, i).random((sizes[i], r.N))
        inside = r.region.indicator(pts)
        return _Stratum(float(np.prod(hi - lo)), sizes[i], r.distance(pts[inside]))

    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            strata = list(pool.map(run, range(count)))
    else:
        strata = [run(i) for i in range(count)]
    logger.debug("sampled {} points over {} strata for {}", total, count, r.label)
    return strata


def _mc_mean(strata: Sequence[_Stratum], values: Callable[[np.ndarray], np.ndarray]) -> tuple[complex, float, float]:
    """
    integral over the region of values(d), its standard error, and the
    largest share of a single sample in the total.
    """
    total = 0j
    var = 0.0
    largest = 0.0
    for st in strata:
        if st.n == 0:
            continue
        v = np.asarray(values(st.d), dtype=complex)
        w = st.volume / st.n
        s1 = complex(v.sum())
        s2 = float(np.sum(np.abs(v) ** 2))
        total += w * s1
        var += w * w * max(s2 - abs(s1) ** 2 / st.n, 0.0)
        if v.size:
            largest = max(largest, w * float(np.max(np.abs(v))))
    share = largest / abs(total) if total != 0 else 0.0
    return total, math.sqrt(var), share


# --- distance zeta ------------------------------------------------------------


def _warn_below_abscissa(r: Rfd, s: complex) -> None:
    if r.dim_hint is not None and s.real <= r.dim_hint:
        logger.warning("Re s = {} is not above the dimension {} of {}", s.real, r.dim_hint, r.label)


def _layered_distance_zeta(r: Rfd, s: complex, cut: float | None) -> tuple[complex, float]:
    parts = [f.zeta(s, r.N, cut) for f in r.families]
    return complex(sum(p[0] for p in parts)), float(sum(p[1] for p in parts))


def distance_zeta_numeric(
    r: Rfd,
    s: complex,
    delta: float | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> tuple[complex, float]:
    """
    integral over A_delta cap Omega of d(x, A)^(s - N); the whole region
    when delta is None. Returns (value, error estimate).
    """
    s = complex(s)
    _warn_below_abscissa(r, s)
    cut = None if delta is None or delta >= r.dmax else delta
    if r.layered:
        return _layered_distance_zeta(r, s, cut)
    if r.distance_zeta_exact is not None and cut is None:
        return r.distance_zeta_exact(s)

    strata = _sample_strata(r, samples, seed)
    limit = math.inf if cut is None else cut

    def integrand(d: np.ndarray) -> np.ndarray:
        keep = (d > 0) & (d < limit)
        out = np.zeros(d.shape, dtype=complex)
        with np.errstate(over="ignore"):
            out[keep] = np.exp((s - r.N) * np.log(d[keep]))
        return out

    value, err, share = _mc_mean(strata, integrand)
    if not math.isfinite(err):
        raise ToleranceUnreachable("Monte Carlo error estimate is not finite", s=s)
    if share > 0.1:
        raise NonIntegrable("a single sample dominates the integral", s=s, share=share)
    return value, err


# --- tube function ------------------------------------------------------------


def log_grid(t_min: float, t_max: float, points: int) -> list[float]:
    if not (0 < t_min < t_max):
        raise NonPositiveT("need 0 < t_min < t_max", t_min=t_min, t_max=t_max)
    return np.geomspace(t_min, t_max, points).tolist()


def tube_function_numeric(
    r: Rfd,
    t_grid: Sequence[float],
    samples: int | None = None,
    seed: int | None = None,
) -> TubeSamples:
    """|A_t cap Omega| on the grid: exact where the geometry allows, else Monte Carlo."""
    t = [float(x) for x in t_grid]
    if any(x <= 0 for x in t):
        raise NonPositiveT("t must be positive")
    if r.has_exact_tube:
        return TubeSamples(t=t, volume=[r.tube(x) for x in t], method="exact", label=r.label)

    settings = get_settings()
    seed = settings.seed if seed is None else seed
    strata = _sample_strata(r, samples, seed)
    volume: list[float] = []
    stderr: list[float] = []
    for x in t:
        v, e, _ = _mc_mean(strata, lambda d: (d < x).astype(float))
        volume.append(v.real)
        stderr.append(e)
    return TubeSamples(
        t=t,
        volume=volume,
        method="montecarlo",
        stderr=stderr,
        seed=seed,
        samples=sum(st.n for st in strata),
        label=r.label,
    )


def tube_samples_csv(samples: TubeSamples) -> str:
    stderr = samples.stderr or [0.0] * len(samples.t)
    return csv_text(("t", "volume", "stderr"), zip(samples.t, samples.volume, stderr))


def tube_samples_from_csv(path: Path) -> TubeSamples:
    cols = read_csv_columns(path)
    t = [float(x) for x in cols["t"]]
    volume = [float(x) for x in cols["volume"]]
    stderr = [float(x) for x in cols.get("stderr", [])] or None
    sampled = stderr is not None and any(e > 0 for e in stderr)
    return TubeSamples(
        t=t,
        volume=volume,
        method="montecarlo" if sampled else "exact",
        stderr=stderr if sampled else None,
        label=Path(path).stem,
    )


def check_tube_samples(samples: TubeSamples, measure: float | None = None) -> CheckResult:
    """Nondecreasing in t and bounded by the region measure, up to 3 standard errors."""
    v = np.asarray(samples.volume)
    se = np.asarray(samples.stderr) if samples.stderr else np.zeros_like(v)
    slack = 3.0 * np.hypot(se[1:], se[:-1])
    drops = np.maximum(v[:-1] - v[1:] - slack, 0.0)
    worst = float(drops.max()) if drops.size else 0.0
    if measure is not None:
        worst = max(worst, float(np.max(v - measure - 3.0 * se - 1e-12 * measure)))
    return CheckResult(
        name=f"tube-monotone:{samples.label}",
        passed=worst <= 0.0,
        residual=max(worst, 0.0),
        tolerance=0.0,
    )


# --- tube zeta ----------------------------------------------------------------


def _exact_tube_zeta(r: Rfd, s: complex, delta: float) -> tuple[complex, float]:
    """
    integral_0^delta t^(s-N-1) V(t) dt in u = log t over geometric pieces.
    Once successive pieces shrink by a fixed complex ratio the rest is
    summed as a geometric series.
    """
    ratios = [f.ratio for f in r.families if f.repeating]
    step = r.params.get("log_period") or (-math.log(min(ratios)) if ratios else math.log(2.0))
    hi = math.log(delta)
    total, err_total = 0j, 0.0
    pieces: list[complex] = []
    for k in range(2000):
        lo = hi - step
        piece, err = quad(lambda u: np.exp(u * (s - r.N)) * r.tube(math.exp(u)), lo, hi)
        total += piece
        err_total += err
        pieces.append(piece)
        hi = lo
        if abs(piece) <= 1e-16 * abs(total):
            return total, err_total
        if k >= 3 and pieces[-2] != 0 and pieces[-3] != 0:
            q = pieces[-1] / pieces[-2]
            q_prev = pieces[-2] / pieces[-3]
            if abs(q - q_prev) <= 1e-9 * abs(q):
                if abs(q) >= 1.0:
                    raise NonIntegrable("tube zeta integrand does not decay", s=s, ratio=abs(q))
                tail = piece * q / (1.0 - q)
                return total + tail, err_total + abs(q - q_prev) * abs(tail)
        if k >= 40 and abs(pieces[-1]) >= abs(pieces[-11]):
            raise NonIntegrable("tube zeta integrand does not decay", s=s)
    raise ToleranceUnreachable("tube zeta pieces did not settle", s=s)


def _sampled_tube_zeta(r: Rfd, s: complex, delta: float, samples, seed) -> tuple[complex, float]:
    """
    Against the empirical tube function sum_i w_i 1[d_i < t] the integral is
    exact: sum_i w_i (delta^(s-N) - d_i^(s-N)) / (s - N).
    """
    if abs(s - r.N) < 1e-12:
        raise UnsupportedKind("s = N needs the logarithmic kernel", s=s)
    strata = _sample_strata(r, samples, seed)
    a = s - r.N

    def kernel(d: np.ndarray) -> np.ndarray:
        keep = (d > 0) & (d < delta)
        out = np.zeros(d.shape, dtype=complex)
        with np.errstate(over="ignore"):
            out[keep] = (delta**a - np.exp(a * np.log(d[keep]))) / a
        return out

    value, err, share = _mc_mean(strata, kernel)
    if share > 0.1:
        raise NonIntegrable("a single sample dominates the tube zeta", s=s, share=share)
    return value, err


def _tube_zeta(r: Rfd, s: complex, delta: float, samples=None, seed=None) -> tuple[complex, float]:
    if not (delta > 0):
        raise NonPositiveT("delta must be positive", delta=delta)
    _warn_below_abscissa(r, s)
    if r.has_exact_tube:
        return _exact_tube_zeta(r, s, delta)
    return _sampled_tube_zeta(r, s, delta, samples, seed)


def tube_zeta_numeric(
    r: Rfd,
    s: complex,
    delta: float,
    samples: int | None = None,
    seed: int | None = None,
) -> complex:
    """integral_0^delta t^(s-N-1) |A_t cap Omega| dt"""
    return _tube_zeta(r, complex(s), delta, samples, seed)[0]


def functional_equation_check(
    r: Rfd,
    s_list: Sequence[complex],
    delta: float | None = None,
    factor: float = 5.0,
) -> Report:
    """
    distance(s; delta) = delta^(s-N) |A_delta cap Omega| + (N - s) tube(s; delta),
    both sides computed independently; passes when the residual is within
    `factor` times the combined error estimates.
    """
    delta = r.dmax if delta is None else delta
    if not math.isfinite(delta):
        raise UnsupportedKind("delta required for drums without a finite reach", kind=r.kind)
    checks = []
    volume = r.tube(delta) if r.has_exact_tube else tube_function_numeric(r, [delta]).volume[0]
    for s in s_list:
        s = complex(s)
        lhs, e1 = distance_zeta_numeric(r, s, delta)
        tube, e2 = _tube_zeta(r, s, delta)
        rhs = delta ** (s - r.N) * volume + (r.N - s) * tube
        res = abs(lhs - rhs)
        tol = factor * (e1 + abs(r.N - s) * e2) + 1e-11 * max(1.0, abs(lhs))
        checks.append(
            CheckResult(
                name=f"functional-equation s={s}",
                passed=res <= tol,
                residual=res,
                tolerance=tol,
                details={"distance": cpair(lhs), "via_tube": cpair(rhs)},
            )
        )
    return Report.of(f"functional-equation:{r.label}", checks)


# --- dimension and content ----------------------------------------------------


def default_fit_range(samples: TubeSamples) -> tuple[float, float]:
    return (1e-6, 1e-1) if samples.method == "exact" else (1e-3, 1e-1)


def _select(samples: TubeSamples, t_range: tuple[float, float] | None) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = default_fit_range(samples) if t_range is None else t_range
    t = np.asarray(samples.t, dtype=float)
    v = np.asarray(samples.volume, dtype=float)
    keep = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12)) & (v > 0)
    return t[keep], v[keep]


def box_dimension_fit(
    samples: TubeSamples,
    N: int,
    t_range: tuple[float, float] | None = None,
    window_decades: float = 0.5,
) -> DimensionFit:
    """Least-squares slope of log volume against log t; D = N - slope."""
    t, v = _select(samples, t_range)
    if t.size < 8 or math.log10(t.max() / t.min()) < 3.0 - 1e-9:
        raise InsufficientRange(
            "need >= 8 samples spanning >= 3 decades",
            samples=int(t.size),
            decades=float(math.log10(t.max() / t.min())) if t.size > 1 else 0.0,
        )
    x, y = np.log(t), np.log(v)
    fit = stats.linregress(x, y)
    resid = y - (fit.intercept + fit.slope * x)

    window_slopes: list[float] = []
    lx = np.log10(t)
    for i in range(t.size):
        mask = (lx >= lx[i]) & (lx <= lx[i] + window_decades + 1e-12)
        if mask.sum() < 3 or lx[mask].max() - lx[i] < window_decades - 1e-9:
            continue
        window_slopes.append(float(stats.linregress(x[mask], y[mask]).slope))
    dims = [N - sl for sl in window_slopes] or [N - fit.slope]
    upper = min(float(N), max(dims))
    lower = min(min(dims), upper)
    return DimensionFit(
        D=N - fit.slope,
        D_upper=upper,
        D_lower=lower,
        slope=fit.slope,
        slope_stderr=fit.stderr,
        t_min=float(t.min()),
        t_max=float(t.max()),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        window_slopes=window_slopes,
    )


def minkowski_content_estimate(
    samples: TubeSamples,
    N: int,
    D: float,
    gauge_m: int = 0,
    t_range: tuple[float, float] | None = None,
) -> ContentEstimate:
    """
    lower/upper: extremes of volume / (t^(N-D) h(t)) over the smallest sampled
    decade, h(t) = (log 1/t)^gauge_m; average: the multiplicative Cesaro mean
    (1/log(t_max/t_min)) integral of the same ratio against dt/t.
    """
    t, v = _select(samples, t_range)
    if t.size < 2:
        raise InsufficientRange("need at least two samples", samples=int(t.size))
    degenerate = abs(D - N) <= 1e-12
    if degenerate:
        if np.ptp(v) > 1e-6 * float(np.max(v)):
            raise DegenerateD("D = N but the tube volume is not constant", D=D, N=N)
        gauge_m = 0
    if gauge_m and np.any(t >= 1.0):
        raise InsufficientRange("gauge (log 1/t)^m needs t < 1")
    h = np.log(1.0 / t) ** gauge_m if gauge_m else np.ones_like(t)
    ratio = v / (t ** (N - D) * h)
    small = t <= 10.0 * t.min() * (1 + 1e-12)
    lx = np.log(t)
    average = float(trapezoid(ratio, lx) / (lx[-1] - lx[0]))
    return ContentEstimate(
        lower=float(ratio[small].min()),
        upper=float(ratio[small].max()),
        average=average,
        D=D,
        gauge_m=gauge_m,
        degenerate=degenerate,
    )


# --- identities ---------------------------------------------------------------


@dataclass(frozen=True)
class ScalingCheck:
    lam: float
    s_list: Sequence[complex]


@dataclass(frozen=True)
class UnionCheck:
    parts: Sequence[Rfd]
    s_list: Sequence[complex]


@dataclass(frozen=True)
class TubeScalingCheck:
    lam: float
    t_list: Sequence[float]


IdentityCheck = Union[ScalingCheck, UnionCheck, TubeScalingCheck]


def _pass(res: float, err: float, scale: float) -> tuple[bool, float]:
    tol = err + 1e-12 * max(1.0, scale)
    return res <= tol, tol


def _scaling(r: Rfd, check: ScalingCheck) -> list[CheckResult]:
    big = scaled(r, check.lam)
    out = []
    for s in check.s_list:
        s = complex(s)
        a, ea = distance_zeta_numeric(big, s)
        b, eb = distance_zeta_numeric(r, s)
        expected = check.lam**s * b
        res = abs(a - expected)
        ok, tol = _pass(res, 5.0 * (ea + abs(check.lam**s) * eb), abs(a))
        out.append(CheckResult(name=f"scaling lam={check.lam:g} s={s}", passed=ok, residual=res, tolerance=tol))
    return out


def _union(r: Rfd, check: UnionCheck) -> list[CheckResult]:
    union(check.parts)
    out = []
    for s in check.s_list:
        s = complex(s)
        whole, ew = distance_zeta_numeric(r, s)
        pieces = [distance_zeta_numeric(p, s) for p in check.parts]
        total = complex(sum(p[0] for p in pieces))
        res = abs(whole - total)
        ok, tol = _pass(res, 5.0 * (ew + sum(p[1] for p in pieces)), abs(whole))
        out.append(CheckResult(name=f"union s={s}", passed=ok, residual=res, tolerance=tol))
    return out


def _tube_scaling(r: Rfd, check: TubeScalingCheck) -> list[CheckResult]:
    if not r.has_exact_tube:
        raise UnsupportedKind("tube scaling needs an exact tube function", kind=r.kind)
    big = scaled(r, check.lam)
    out = []
    for t in check.t_list:
        a = big.tube(t)
        b = check.lam**r.N * r.tube(t / check.lam)
        res = abs(a - b)
        ok, tol = _pass(res, 0.0, abs(a))
        out.append(CheckResult(name=f"tube-scaling lam={check.lam:g} t={t:g}", passed=ok, residual=res, tolerance=tol))
    return out


def verify_identities(r: Rfd, checks: Sequence[IdentityCheck]) -> Report:
    results: list[CheckResult] = []
    for check in checks:
        if isinstance(check, ScalingCheck):
            results += _scaling(r, check)
        elif isinstance(check, UnionCheck):
            results += _union(r, check)
        elif isinstance(check, TubeScalingCheck):
            results += _tube_scaling(r, check)
        else:
            raise UnsupportedKind(f"unknown identity check {type(check).__name__}")
    report = Report.of(f"identities:{r.label}", results)
    logger.bind(label=r.label, passed=report.passed).debug("identity checks done")
    return report


def cantor_level_pieces(m: int = 2, a: float = 1.0 / 3.0) -> list[Rfd]:
    """The m first-level copies of (C, (0,1)) and the m-1 gaps between them."""
    base = build_rfd("cantor", m=m, a=a, delta=None)
    gap = (1.0 - m * a) / (m - 1)
    parts: list[Rfd] = []
    for j in range(m):
        start = j * (a + gap)
        parts.append(translated(scaled(base, a), [start]))
        if j < m - 1:
            parts.append(build_rfd("interval", start=start + a, end=start + a + gap))
    return parts


# --- spot checks --------------------------------------------------------------


def _points_in_region(r: Rfd, n: int, rng: np.random.Generator) -> np.ndarray:
    box = r.region.bbox
    out: list[np.ndarray] = []
    have = 0
    for _ in range(200):
        pts = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((4 * n, r.N))
        pts = pts[r.region.indicator(pts)]
        out.append(pts)
        have += len(pts)
        if have >= n:
            break
    return np.concatenate(out)[:n]


def lipschitz_check(r: Rfd, pairs: int = 10_000, seed: int | None = None) -> CheckResult:
    """|d(x) - d(y)| <= |x - y| on random pairs of region points, half of them close."""
    name = f"lipschitz:{r.label}"
    if r.distance is None or r.region.indicator is None:
        return CheckResult(name=name, passed=True, residual=0.0, tolerance=0.0, details={"skipped": "no oracle"})
    seed = get_settings().seed if seed is None else seed
    rng = _rng(seed, 104729)
    x = _points_in_region(r, 2 * pairs, rng)
    y = np.concatenate([x[pairs:], x[:pairs] + 1e-3 * rng.standard_normal((len(x[:pairs]), r.N))])
    x = x[: len(y)]
    gap = np.abs(r.distance(x) - r.distance(y)) - np.linalg.norm(x - y, axis=1)
    worst = float(gap.max()) if gap.size else 0.0
    tol = 1e-9
    return CheckResult(name=name, passed=worst <= tol, residual=max(worst, 0.0), tolerance=tol, details={"pairs": int(gap.size)})


def flatness_probe(
    r: Rfd,
    t_mins: Sequence[float] = (0.3, 0.15, 0.08, 0.04, 0.02),
    span: float = 3.0,
    points: int = 16,
) -> CheckResult:
    """
    Local log-log slopes of the tube function on [t_min, span * t_min] for
    shrinking t_min. Slopes that keep growing mean the box dimension runs
    off to minus infinity (flatness candidate +inf).
    """
    slopes = []
    for t_min in t_mins:
        t = np.geomspace(t_min, span * t_min, points)
        v = np.array([r.tube(float(x)) for x in t])
        if np.any(v <= 0):
            raise InsufficientRange("tube volume underflows on this range", t_min=t_min)
        slopes.append(float(stats.linregress(np.log(t), np.log(v)).slope))
    growing = all(b > a for a, b in zip(slopes, slopes[1:]))
    return CheckResult(
        name=f"flatness:{r.label}",
        passed=growing,
        residual=0.0,
        tolerance=0.0,
        details={"t_min": list(t_mins), "slopes": slopes, "flatness": "inf" if growing else "finite"},
    )


__all__ = [
    "distance_zeta_numeric",
    "log_grid",
    "tube_function_numeric",
    "tube_samples_csv",
    "tube_samples_from_csv",
    "check_tube_samples",
    "tube_zeta_numeric",
    "functional_equation_check",
    "default_fit_range",
    "box_dimension_fit",
    "minkowski_content_estimate",
    "ScalingCheck",
    "UnionCheck",
    "TubeScalingCheck",
    "verify_identities",
    "cantor_level_pieces",
    "lipschitz_check",
    "flatness_probe",
]
