"""
Relative fractal drums (A, Omega) with exact distance oracles.

An Rfd carries the ambient dimension, a distance oracle x -> d(x, A) for
points of the region, the region itself (indicator, bounding box, measure)
and, when the geometry allows it, a decomposition into layered piece
families. A layer is a piece whose inner parallel sets shrink
homothetically,

    |{x in piece : d(x, A) > u}| = measure * (1 - u / rho)^power,  0 <= u <= rho,

which covers balls, tori, tangential polygons, simplices, cubes and gaps of
strings. Families repeat a layer `count * growth^k` times at scale ratio^k.
Layered geometries get exact tube functions and 1D quadratures for their
zeta functions; the others fall back to Monte Carlo over the region.

Inputs:
  - build_rfd(kind, **params)

Tests care about:
  - region measures and exact tube values per kind
  - distance oracles being 1-Lipschitz
  - scaling, translation and disjoint unions keeping the decomposition
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import exp1, gamma

from engine.config import get_settings
from engine.errors import (
    IncompatibleUnion,
    InvalidCantorParameters,
    NonIntegrable,
    NonPositiveLength,
    NonPositiveScale,
    UnsupportedKind,
)
from engine.quadrature import quad
from engine.strings import FractalString, GeometricFactor

Distance = Callable[[np.ndarray], np.ndarray]
Indicator = Callable[[np.ndarray], np.ndarray]
TubeFn = Callable[[float], float]
ZetaFn = Callable[[complex], tuple[complex, float]]


# --- layered pieces -----------------------------------------------------------


@dataclass(frozen=True)
class Layer:
    measure: float
    rho: float
    power: int

    def volume(self, t: float) -> float:
        """|{x in piece : d(x, A) < t}|"""
        x = min(max(t / self.rho, 0.0), 1.0)
        return self.measure * (1.0 - (1.0 - x) ** self.power)

    def zeta(self, s: complex, N: int, cut: float | None = None) -> tuple[complex, float]:
        """
        integral over {d < cut} of d^(s-N): the density of d is
        measure * power * (rho - u)^(power-1) / rho^power on (0, rho).
        """
        alpha = s.real - N
        if alpha <= -1.0:
            raise NonIntegrable("piece integral diverges at the boundary", s=s, N=N)
        k = self.measure * self.power * self.rho ** (-self.power)
        tau = s.imag
        oscillation = (lambda u: np.exp(1j * tau * math.log(u)) if u > 0 else 0j) if tau else (lambda u: 1.0)
        if cut is None or cut >= self.rho:
            upper, beta = self.rho, float(self.power - 1)
            g = lambda u: k * oscillation(u)
        else:
            upper, beta = cut, 0.0
            g = lambda u: k * (self.rho - u) ** (self.power - 1) * oscillation(u)
        return quad(g, 0.0, upper, weight="alg", wvar=(alpha, beta), complex_valued=bool(tau))

    def scaled(self, lam: float, N: int) -> "Layer":
        return Layer(self.measure * lam**N, self.rho * lam, self.power)


@dataclass(frozen=True)
class PieceFamily:
    """count * growth^k copies of `layer` scaled by ratio^k, k >= 0."""

    layer: Layer
    count: float = 1.0
    growth: float = 0.0
    ratio: float = 0.0

    @property
    def repeating(self) -> bool:
        return self.growth > 0.0

    def abscissa(self, N: int) -> float:
        piece = N - 1.0
        if not self.repeating:
            return piece
        return max(piece, math.log(self.growth) / math.log(1.0 / self.ratio))

    def measure(self, N: int) -> float:
        if not self.repeating:
            return self.count * self.layer.measure
        q = self.growth * self.ratio**N
        return self.count * self.layer.measure / (1.0 - q)

    def volume(self, t: float, N: int) -> float:
        if t <= 0:
            return 0.0
        if not self.repeating:
            return self.count * self.layer.volume(t)
        q = self.growth * self.ratio**N
        total = 0.0
        k = 0
        # pieces with rho * ratio^k <= t are saturated; their sum is geometric
        while self.layer.rho * self.ratio**k > t:
            lam = self.ratio**k
            total += self.growth**k * lam**N * self.layer.volume(t / lam)
            k += 1
        total += self.layer.measure * q**k / (1.0 - q)
        return self.count * total

    def zeta(self, s: complex, N: int, cut: float | None = None) -> tuple[complex, float]:
        if not self.repeating:
            piece, err = self.layer.zeta(s, N, cut)
            return self.count * piece, self.count * err
        q = self.growth * np.exp(s * math.log(self.ratio))
        if abs(q) >= 1.0:
            raise NonIntegrable("family sum diverges", s=s, abscissa=self.abscissa(N))
        total, err_total = 0j, 0.0
        k = 0
        # levels whose pieces reach beyond the cut, by scaling the level-0 piece
        while cut is not None and self.layer.rho * self.ratio**k > cut:
            lam = self.ratio**k
            piece, err = self.layer.zeta(s, N, cut / lam)
            total += self.growth**k * lam**s * piece
            err_total += self.growth**k * lam**s.real * err
            k += 1
        piece, err = self.layer.zeta(s, N)
        # sum_j q^j truncated once the tail |q|^J / (1 - |q|) is below roundoff
        level = 0j
        term = q**k
        for _ in range(100_000):
            level += term
            term *= q
            if abs(term) / (1.0 - abs(q)) <= 1e-17 * abs(level):
                break
        total += piece * level
        err_total += err * abs(level)
        return self.count * total, self.count * err_total

    def scaled(self, lam: float, N: int) -> "PieceFamily":
        return replace(self, layer=self.layer.scaled(lam, N))


# --- region and drum ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Region:
    indicator: Indicator | None
    bbox: np.ndarray  # (N, 2) rows [lo, hi]
    measure: float

    @property
    def box_volume(self) -> float:
        return float(np.prod(self.bbox[:, 1] - self.bbox[:, 0]))


@dataclass(frozen=True, eq=False)
class Rfd:
    N: int
    kind: str
    region: Region
    distance: Distance | None = None
    families: tuple[PieceFamily, ...] = ()
    tube_exact: TubeFn | None = None
    distance_zeta_exact: ZetaFn | None = None
    dmax: float = math.inf
    dim_hint: float | None = None
    params: dict[str, Any] = field(default_factory=dict)
    label: str = ""

    @property
    def layered(self) -> bool:
        return bool(self.families)

    @property
    def measure(self) -> float:
        return self.region.measure

    @property
    def has_exact_tube(self) -> bool:
        return self.layered or self.tube_exact is not None

    def tube(self, t: float) -> float:
        """Exact |A_t cap Omega|; only for layered or closed-form geometries."""
        if self.layered:
            return math.fsum(f.volume(t, self.N) for f in self.families)
        if self.tube_exact is not None:
            return self.tube_exact(t)
        raise UnsupportedKind("no exact tube function for this geometry", kind=self.kind)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "N": self.N,
            "label": self.label,
            "params": {k: v for k, v in self.params.items() if isinstance(v, (int, float, str, list))},
            "measure": self.measure,
            "bbox": self.region.bbox.tolist(),
            "layered": self.layered,
        }


def _box(*ranges: tuple[float, float]) -> np.ndarray:
    return np.array(ranges, dtype=float)


def _layered_zeta_abscissa(families: Sequence[PieceFamily], N: int) -> float:
    return max(f.abscissa(N) for f in families)


# --- transforms ---------------------------------------------------------------


def _scaled_zeta(fn: ZetaFn, lam: float) -> ZetaFn:
    def inner(s: complex) -> tuple[complex, float]:
        s = complex(s)
        val, err = fn(s)
        return val * lam**s, err * lam**s.real

    return inner


def scaled(r: Rfd, lam: float) -> Rfd:
    """(lam A, lam Omega)."""
    if not (lam > 0):
        raise NonPositiveScale("scale must be positive", lam=lam)
    N = r.N
    ind = r.region.indicator
    dist = r.distance
    tube_exact = r.tube_exact
    zeta_exact = r.distance_zeta_exact
    return replace(
        r,
        region=Region(
            indicator=None if ind is None else (lambda x: ind(x / lam)),
            bbox=r.region.bbox * lam,
            measure=r.measure * lam**N,
        ),
        distance=None if dist is None else (lambda x: lam * dist(x / lam)),
        families=tuple(f.scaled(lam, N) for f in r.families),
        tube_exact=None if tube_exact is None else (lambda t: lam**N * tube_exact(t / lam)),
        distance_zeta_exact=(
            None
            if zeta_exact is None
            else _scaled_zeta(zeta_exact, lam)
        ),
        dmax=r.dmax * lam,
        label=f"{lam:g}*{r.label}",
    )


def translated(r: Rfd, offset: Sequence[float]) -> Rfd:
    v = np.asarray(offset, dtype=float).reshape(1, -1)
    if v.shape[1] != r.N:
        raise UnsupportedKind("offset dimension mismatch", N=r.N, got=v.shape[1])
    ind = r.region.indicator
    dist = r.distance
    return replace(
        r,
        region=Region(
            indicator=None if ind is None else (lambda x: ind(x - v)),
            bbox=r.region.bbox + v.T,
            measure=r.measure,
        ),
        distance=None if dist is None else (lambda x: dist(x - v)),
    )


def _regions_overlap(a: Rfd, b: Rfd, n: int = 4096) -> bool:
    lo = np.maximum(a.region.bbox[:, 0], b.region.bbox[:, 0])
    hi = np.minimum(a.region.bbox[:, 1], b.region.bbox[:, 1])
    if np.any(hi <= lo):
        return False
    if a.region.indicator is None or b.region.indicator is None:
        # layered-only parts are disjoint by construction
        return False
    rng = np.random.Generator(np.random.Philox(key=np.array([get_settings().seed, 7919], dtype=np.uint64)))
    pts = lo + (hi - lo) * rng.random((n, a.N))
    return bool(np.any(a.region.indicator(pts) & b.region.indicator(pts)))


def union(parts: Sequence[Rfd], label: str = "union") -> Rfd:
    """Disjoint union of drums; distances are taken from the part owning each point."""
    if not parts:
        raise IncompatibleUnion("empty union")
    N = parts[0].N
    if any(p.N != N for p in parts):
        raise IncompatibleUnion("parts live in different dimensions", dims=[p.N for p in parts])
    for i, a in enumerate(parts):
        for b in parts[i + 1 :]:
            if _regions_overlap(a, b):
                raise IncompatibleUnion("part regions overlap", first=a.label, second=b.label)

    layered = all(p.layered for p in parts)
    with_oracle = all(p.distance is not None and p.region.indicator is not None for p in parts)

    def indicator(x: np.ndarray) -> np.ndarray:
        out = np.zeros(len(x), dtype=bool)
        for p in parts:
            out |= p.region.indicator(x)
        return out

    def distance(x: np.ndarray) -> np.ndarray:
        out = np.full(len(x), np.inf)
        for p in parts:
            inside = p.region.indicator(x)
            if np.any(inside):
                out[inside] = p.distance(x[inside])
        return out

    bbox = np.column_stack(
        [
            np.min([p.region.bbox[:, 0] for p in parts], axis=0),
            np.max([p.region.bbox[:, 1] for p in parts], axis=0),
        ]
    )
    return Rfd(
        N=N,
        kind="union",
        region=Region(
            indicator=indicator if with_oracle else None,
            bbox=bbox,
            measure=math.fsum(p.measure for p in parts),
        ),
        distance=distance if with_oracle else None,
        families=tuple(f for p in parts for f in p.families) if layered else (),
        dmax=max(p.dmax for p in parts),
        params={"parts": [p.label for p in parts]},
        label=label,
    )


# --- 1D Cantor sets -----------------------------------------------------------


def _cantor_distance(x: np.ndarray, m: int, a: float, depth: int = 64) -> np.ndarray:
    """d(x, C(m, a)) by descending into the level interval containing x."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(np.maximum(-x, x - 1.0), 0.0)
    inside = (x >= 0.0) & (x <= 1.0)
    u = np.where(inside, x, 0.0)
    scale = np.ones_like(u)
    open_ = inside.copy()
    gap = (1.0 - m * a) / (m - 1)
    step = a + gap
    for _ in range(depth):
        if not np.any(open_):
            break
        j = np.minimum(np.floor(u / step), m - 1)
        o = u - j * step
        in_gap = open_ & (o > a)
        out = np.where(in_gap, np.minimum(o - a, step - o) * scale, out)
        open_ &= ~in_gap
        u = np.where(open_, o / a, u)
        scale = scale * a
    return out


def _cantor_rfd(m: int = 2, a: float = 1.0 / 3.0, delta: float | None = 0.5) -> Rfd:
    if int(m) != m or m < 2 or not (0.0 < a < 1.0 / m):
        raise InvalidCantorParameters("need integer m >= 2 and 0 < a < 1/m", m=m, a=a)
    m = int(m)
    c = (1.0 - m * a) / (2.0 * (m - 1))
    gaps = PieceFamily(Layer(2.0 * c, c, 1), count=m - 1, growth=float(m), ratio=a)
    lo, hi = 0.0, 1.0
    families: tuple[PieceFamily, ...] = (gaps,)
    if delta is not None:
        if not (delta >= c):
            raise InvalidCantorParameters("delta must be >= c", delta=delta, c=c)
        families += (PieceFamily(Layer(delta, delta, 1), count=2),)
        lo, hi = -delta, 1.0 + delta
    return Rfd(
        N=1,
        kind="cantor",
        region=Region(
            indicator=lambda x: (x[:, 0] > lo) & (x[:, 0] < hi),
            bbox=_box((lo, hi)),
            measure=hi - lo,
        ),
        distance=lambda x: _cantor_distance(x[:, 0], m, a),
        families=families,
        dmax=c if delta is None else max(c, delta),
        dim_hint=math.log(m) / math.log(1.0 / a),
        params={"m": m, "a": a, "delta": delta},
        label=f"cantor({m},{a:.6g})" + ("" if delta is None else f",delta={delta:g}"),
    )


def _interval_rfd(start: float = 0.0, end: float = 1.0) -> Rfd:
    """A = the two endpoints, Omega = the open interval between them."""
    if not (end > start):
        raise NonPositiveLength("interval must have positive length", start=start, end=end)
    length = end - start
    return Rfd(
        N=1,
        kind="interval",
        region=Region(
            indicator=lambda x: (x[:, 0] > start) & (x[:, 0] < end),
            bbox=_box((start, end)),
            measure=length,
        ),
        distance=lambda x: np.minimum(x[:, 0] - start, end - x[:, 0]),
        families=(PieceFamily(Layer(length, length / 2.0, 1)),),
        dmax=length / 2.0,
        dim_hint=0.0,
        params={"start": start, "end": end},
        label=f"interval({start:g},{end:g})",
    )


def _full_tube_2d(tube_1d: TubeFn, t: float) -> float:
    """|(A x {0})_t| in the plane from the 1D tube function (Cavalieri)."""
    val, _ = quad(lambda th: math.cos(th) * tube_1d(t * math.cos(th)), 0.0, math.pi / 2, complex_valued=False)
    return 2.0 * t * val.real


def _cantor_embedded_rfd(m: int = 2, a: float = 1.0 / 3.0, delta: float = 1.0 / 3.0) -> Rfd:
    """A = C x {0} in the plane, Omega = its delta-neighbourhood."""
    from engine.cantor import GeneralizedCantorSet, tube_volume_closed

    if int(m) != m or m < 2 or not (0.0 < a < 1.0 / m):
        raise InvalidCantorParameters("need integer m >= 2 and 0 < a < 1/m", m=m, a=a)
    C = GeneralizedCantorSet(int(m), a)
    tube_1d = lambda t: tube_volume_closed(C, t) if t > 0 else 0.0
    dist = lambda x: np.hypot(_cantor_distance(x[:, 0], C.m, a), x[:, 1])
    return Rfd(
        N=2,
        kind="cantor_embedded",
        region=Region(
            indicator=lambda x: dist(x) < delta,
            bbox=_box((-delta, 1.0 + delta), (-delta, delta)),
            measure=_full_tube_2d(tube_1d, delta),
        ),
        distance=dist,
        tube_exact=lambda t: _full_tube_2d(tube_1d, min(t, delta)),
        dmax=delta,
        dim_hint=C.D,
        params={"m": C.m, "a": a, "delta": delta, "log_period": math.log(1.0 / a)},
        label=f"cantor({C.m},{a:.6g})x{{0}}",
    )


def _cantor_product_rfd(m: int = 2, a: float = 1.0 / 3.0) -> Rfd:
    """Cantor dust C x C inside the open unit square."""
    if int(m) != m or m < 2 or not (0.0 < a < 1.0 / m):
        raise InvalidCantorParameters("need integer m >= 2 and 0 < a < 1/m", m=m, a=a)
    m = int(m)
    return Rfd(
        N=2,
        kind="cantor_product",
        region=Region(
            indicator=lambda x: np.all((x > 0.0) & (x < 1.0), axis=1),
            bbox=_box((0.0, 1.0), (0.0, 1.0)),
            measure=1.0,
        ),
        distance=lambda x: np.hypot(_cantor_distance(x[:, 0], m, a), _cantor_distance(x[:, 1], m, a)),
        dmax=(1.0 - m * a) / (2.0 * (m - 1)) * math.sqrt(2.0),
        dim_hint=2.0 * math.log(m) / math.log(1.0 / a),
        params={"m": m, "a": a},
        label=f"cantor-dust({m},{a:.6g})",
    )


def _cantor_strip_rfd(
    m: int = 2, a: float = 1.0 / 3.0, length: float = 1.0 / 3.0, height: float = 1.0 / 6.0
) -> Rfd:
    """A = (length * C) x {0}, Omega = (0, length) x (0, height)."""
    from engine.cantor import GeneralizedCantorSet, tube_volume_closed

    if int(m) != m or m < 2 or not (0.0 < a < 1.0 / m):
        raise InvalidCantorParameters("need integer m >= 2 and 0 < a < 1/m", m=m, a=a)
    if not (length > 0 and height > 0):
        raise NonPositiveLength("strip sides must be positive", length=length, height=height)
    C = GeneralizedCantorSet(int(m), a)

    def line_tube(r: float) -> float:
        # relative tube of the scaled set inside (0, length)
        if r <= 0:
            return 0.0
        x = r / length
        return length * min(tube_volume_closed(C, x) - 2.0 * x, 1.0)

    def strip_tube(t: float) -> float:
        if t <= 0:
            return 0.0
        top = math.asin(min(1.0, height / t))
        val, _ = quad(lambda ph: t * math.cos(ph) * line_tube(t * math.cos(ph)), 0.0, top, complex_valued=False)
        return val.real

    def dist(x: np.ndarray) -> np.ndarray:
        return np.hypot(length * _cantor_distance(x[:, 0] / length, C.m, a), x[:, 1])

    return Rfd(
        N=2,
        kind="cantor_strip",
        region=Region(
            indicator=lambda x: (x[:, 0] > 0) & (x[:, 0] < length) & (x[:, 1] > 0) & (x[:, 1] < height),
            bbox=_box((0.0, length), (0.0, height)),
            measure=length * height,
        ),
        distance=dist,
        tube_exact=strip_tube,
        dmax=math.hypot(height, length * C.c),
        dim_hint=C.D,
        params={"m": C.m, "a": a, "length": length, "height": height, "log_period": math.log(1.0 / a)},
        label=f"cantor-strip({C.m},{a:.6g})",
    )


def _unit_segment_rfd(N: int = 1, delta: float = 0.5) -> Rfd:
    """A = [0,1] (times {0} for N = 2), Omega = its delta-neighbourhood minus A."""
    if N == 1:
        return Rfd(
            N=1,
            kind="unit_segment",
            region=Region(
                indicator=lambda x: ((x[:, 0] > -delta) & (x[:, 0] < 0.0)) | ((x[:, 0] > 1.0) & (x[:, 0] < 1.0 + delta)),
                bbox=_box((-delta, 1.0 + delta)),
                measure=2.0 * delta,
            ),
            distance=lambda x: np.maximum(np.maximum(-x[:, 0], x[:, 0] - 1.0), 0.0),
            families=(PieceFamily(Layer(delta, delta, 1), count=2),),
            dmax=delta,
            dim_hint=1.0,
            params={"N": 1, "delta": delta},
            label="unit-segment",
        )
    if N != 2:
        raise UnsupportedKind("unit segment is available for N = 1, 2", N=N)

    def dist(x: np.ndarray) -> np.ndarray:
        dx = np.maximum(np.maximum(-x[:, 0], x[:, 0] - 1.0), 0.0)
        return np.hypot(dx, x[:, 1])

    return Rfd(
        N=2,
        kind="unit_segment",
        region=Region(
            indicator=lambda x: dist(x) < delta,
            bbox=_box((-delta, 1.0 + delta), (-delta, delta)),
            measure=2.0 * delta + math.pi * delta**2,
        ),
        distance=dist,
        tube_exact=lambda t: 2.0 * min(t, delta) + math.pi * min(t, delta) ** 2,
        dmax=delta,
        dim_hint=1.0,
        params={"N": 2, "delta": delta},
        label="unit-segment x {0}",
    )


# --- smooth bodies ------------------------------------------------------------


def _ball_rfd(N: int = 2, R: float = 1.0) -> Rfd:
    """A = the sphere of radius R, Omega = the open ball."""
    if N < 1:
        raise UnsupportedKind("ball needs N >= 1", N=N)
    if not (R > 0):
        raise NonPositiveLength("radius must be positive", R=R)
    volume = math.pi ** (N / 2) / gamma(N / 2 + 1) * R**N
    return Rfd(
        N=N,
        kind="ball",
        region=Region(
            indicator=lambda x: np.linalg.norm(x, axis=1) < R,
            bbox=_box(*[(-R, R)] * N),
            measure=volume,
        ),
        distance=lambda x: np.abs(R - np.linalg.norm(x, axis=1)),
        families=(PieceFamily(Layer(volume, R, N)),),
        dmax=R,
        dim_hint=N - 1.0,
        params={"N": N, "R": R},
        label=f"ball(N={N},R={R:g})",
    )


def _torus_rfd(R: float = 2.0, r: float = 1.0) -> Rfd:
    """A = the torus surface, Omega = the solid torus; |A_t cap Omega| = 2 pi^2 R (2 r t - t^2)."""
    if not (0 < r < R):
        raise NonPositiveLength("torus needs 0 < r < R", R=R, r=r)
    volume = 2.0 * math.pi**2 * R * r**2

    def tube_dist(x: np.ndarray) -> np.ndarray:
        rho = np.hypot(x[:, 0], x[:, 1])
        return np.hypot(rho - R, x[:, 2])

    return Rfd(
        N=3,
        kind="torus",
        region=Region(
            indicator=lambda x: tube_dist(x) < r,
            bbox=_box((-R - r, R + r), (-R - r, R + r), (-r, r)),
            measure=volume,
        ),
        distance=lambda x: np.abs(r - tube_dist(x)),
        families=(PieceFamily(Layer(volume, r, 2)),),
        dmax=r,
        dim_hint=2.0,
        params={"R": R, "r": r},
        label=f"torus(R={R:g},r={r:g})",
    )


# --- polygons -----------------------------------------------------------------


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((p - a) @ ab) / float(ab @ ab), 0.0, 1.0)
    return np.linalg.norm(p - a - t[:, None] * ab, axis=1)


def _inside_polygon(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Even-odd ray casting."""
    x, y = p[:, 0], p[:, 1]
    inside = np.zeros(len(p), dtype=bool)
    for (x1, y1), (x2, y2) in zip(v, np.roll(v, -1, axis=0)):
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xc)
    return inside


def _tangential_layer(v: np.ndarray, area: float) -> Layer | None:
    """Triangles and regular polygons shrink homothetically towards the incentre."""
    sides = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
    perimeter = float(sides.sum())
    inradius = 2.0 * area / perimeter
    if len(v) == 3:
        return Layer(area, inradius, 2)
    radii = np.linalg.norm(v - v.mean(axis=0), axis=1)
    if np.ptp(sides) <= 1e-12 * perimeter and np.ptp(radii) <= 1e-12 * float(radii.max()):
        return Layer(area, inradius, 2)
    return None


def _polygon_rfd(vertices: Sequence[Sequence[float]]) -> Rfd:
    """A = the polygon boundary, Omega = its interior."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise UnsupportedKind("polygon needs at least three 2D vertices")
    area = _shoelace(v)
    if not (area > 0):
        raise NonPositiveLength("degenerate polygon", area=area)
    edges = list(zip(v, np.roll(v, -1, axis=0)))

    def dist(x: np.ndarray) -> np.ndarray:
        return np.min([_segment_distance(x, a, b) for a, b in edges], axis=0)

    layer = _tangential_layer(v, area)
    return Rfd(
        N=2,
        kind="polygon",
        region=Region(
            indicator=lambda x: _inside_polygon(x, v),
            bbox=_box((v[:, 0].min(), v[:, 0].max()), (v[:, 1].min(), v[:, 1].max())),
            measure=area,
        ),
        distance=dist,
        families=() if layer is None else (PieceFamily(layer),),
        dmax=math.inf if layer is None else layer.rho,
        dim_hint=1.0,
        params={"vertices": v.tolist()},
        label=f"polygon({len(v)})",
    )


# --- Sierpinski gasket --------------------------------------------------------

_H = math.sqrt(3.0) / 2.0
_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, _H]])


def _barycentric(x: np.ndarray) -> np.ndarray:
    l3 = x[:, 1] / _H
    l2 = x[:, 0] - 0.5 * l3
    return np.column_stack([1.0 - l2 - l3, l2, l3])


def _gasket_distance(x: np.ndarray, depth: int = 48) -> np.ndarray:
    """Distance to the gasket for points of the unit triangle."""
    lam = _barycentric(x)
    out = np.zeros(len(x))
    open_ = np.all(lam >= 0.0, axis=1)
    scale = np.ones(len(x))
    for _ in range(depth):
        if not np.any(open_):
            break
        middle = open_ & np.all(lam < 0.5, axis=1)
        # inside a removed triangle the nearest point lies on its boundary
        out = np.where(middle, (0.5 - lam.max(axis=1)) * _H * scale, out)
        open_ &= ~middle
        corner = np.argmax(lam, axis=1)
        lam = 2.0 * lam
        lam[np.arange(len(lam)), corner] -= 1.0
        scale = scale * 0.5
    return out


def _gasket_rfd() -> Rfd:
    """A = the gasket, Omega = the open unit triangle."""
    side = 0.5
    middle = Layer(math.sqrt(3.0) / 4.0 * side**2, side / (2.0 * math.sqrt(3.0)), 2)
    return Rfd(
        N=2,
        kind="gasket",
        region=Region(
            indicator=lambda x: _inside_polygon(x, _TRIANGLE),
            bbox=_box((0.0, 1.0), (0.0, _H)),
            measure=math.sqrt(3.0) / 4.0,
        ),
        distance=_gasket_distance,
        families=(PieceFamily(middle, count=1.0, growth=3.0, ratio=0.5),),
        dmax=middle.rho,
        dim_hint=math.log(3.0) / math.log(2.0),
        params={},
        label="sierpinski-gasket",
    )


# --- cusps --------------------------------------------------------------------


def _cusp_tube(profile: Callable[[float], float], primitive: Callable[[float], float], t: float) -> float:
    """
    |B_t(0) cap {0 < x < 1, 0 < y < profile(x)}| for increasing profiles:
    below the crossing x* the profile is the lower curve, beyond it the disk.
    """
    if t <= 0:
        return 0.0
    top = min(t, 1.0)
    g = lambda x: profile(x) ** 2 + x**2 - t**2
    x_star = top if g(top) <= 0 else brentq(g, 0.0, top, xtol=1e-15 * t, rtol=1e-15)
    if x_star >= top:
        return primitive(top)
    # arc part by quadrature: differencing the closed form cancels below t^2 roundoff
    cap, _ = quad(lambda x: math.sqrt(max(t * t - x * x, 0.0)), x_star, top, epsabs=0.0, complex_valued=False)
    return primitive(x_star) + cap.real


def _cusp_distance_zeta(profile: Callable[[float], float], s: complex) -> tuple[complex, float]:
    """integral_0^1 integral_0^profile(x) (x^2 + y^2)^((s-2)/2) dy dx"""
    half = (s - 2.0) / 2.0
    oscillating = s.imag != 0.0
    if not oscillating:
        half = half.real
    errs: list[float] = []

    def inner(x: float) -> complex:
        if x <= 0:
            return 0j
        h = profile(x)
        if h <= 0:
            return 0j
        # y = h v keeps the inner range fixed
        val, err = quad(lambda v: h * (x * x + (h * v) ** 2) ** half, 0.0, 1.0, complex_valued=oscillating)
        errs.append(err)
        return val

    val, err = quad(inner, 0.0, 1.0, complex_valued=oscillating)
    return val, err + (max(errs) if errs else 0.0)


def _cusp_rfd(alpha: float = 2.0) -> Rfd:
    """A = {0}, Omega = {0 < x < 1, 0 < y < x^alpha}; D = 1 - alpha."""
    if not (alpha > 0):
        raise UnsupportedKind("cusp needs alpha > 0", alpha=alpha)
    profile = lambda x: x**alpha
    primitive = lambda x: x ** (1.0 + alpha) / (1.0 + alpha)
    return Rfd(
        N=2,
        kind="cusp",
        region=Region(
            indicator=lambda x: (x[:, 0] > 0.0) & (x[:, 0] < 1.0) & (x[:, 1] > 0.0) & (x[:, 1] < x[:, 0] ** alpha),
            bbox=_box((0.0, 1.0), (0.0, 1.0)),
            measure=1.0 / (1.0 + alpha),
        ),
        distance=lambda x: np.linalg.norm(x, axis=1),
        tube_exact=lambda t: _cusp_tube(profile, primitive, t),
        distance_zeta_exact=lambda s: _cusp_distance_zeta(profile, complex(s)),
        dmax=math.sqrt(2.0),
        dim_hint=1.0 - alpha,
        params={"alpha": alpha},
        label=f"cusp(alpha={alpha:g})",
    )


def _flat_profile(x: float) -> float:
    return math.exp(-1.0 / x) if x > 0 else 0.0


def _flat_primitive(x: float) -> float:
    # integral_0^x exp(-1/u) du = x exp(-1/x) - E1(1/x)
    if x <= 0:
        return 0.0
    return x * math.exp(-1.0 / x) - float(exp1(1.0 / x))


def _exp_cusp_rfd() -> Rfd:
    """A = {0}, Omega = {0 < x < 1, 0 < y < exp(-1/x)}: a maximally flat drum."""

    def indicator(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore"):
            top = np.where(x[:, 0] > 0, np.exp(-1.0 / np.where(x[:, 0] > 0, x[:, 0], 1.0)), 0.0)
        return (x[:, 0] > 0.0) & (x[:, 0] < 1.0) & (x[:, 1] > 0.0) & (x[:, 1] < top)

    return Rfd(
        N=2,
        kind="exp_cusp",
        region=Region(
            indicator=indicator,
            bbox=_box((0.0, 1.0), (0.0, math.exp(-1.0))),
            measure=_flat_primitive(1.0),
        ),
        distance=lambda x: np.linalg.norm(x, axis=1),
        tube_exact=lambda t: _cusp_tube(_flat_profile, _flat_primitive, t),
        distance_zeta_exact=lambda s: _cusp_distance_zeta(_flat_profile, complex(s)),
        dmax=math.sqrt(1.0 + math.exp(-2.0)),
        dim_hint=None,
        params={},
        label="exp-cusp",
    )


# --- layered-only drums -------------------------------------------------------


def _cantor_graph_rfd() -> Rfd:
    """
    Graph of the Cantor function with Omega the union of right isosceles
    triangles resting on its horizontal steps: 2^k triangles of leg 3^-k.
    """
    leg = 1.0 / 3.0
    piece = Layer(leg * leg / 2.0, leg, 2)
    family = PieceFamily(piece, count=2.0, growth=2.0, ratio=1.0 / 3.0)
    return Rfd(
        N=2,
        kind="cantor_graph",
        region=Region(indicator=None, bbox=_box((0.0, 1.0), (-1.0 / 3.0, 4.0 / 3.0)), measure=family.measure(2)),
        families=(family,),
        dmax=leg,
        dim_hint=1.0,
        params={},
        label="cantor-graph",
    )


def _string_rfd(string: FractalString) -> Rfd:
    """
    Canonical geometric realisation: every length becomes an open interval
    whose endpoints belong to A.
    """
    families: list[PieceFamily] = [
        PieceFamily(Layer(length, length / 2.0, 1), count=float(mult)) for length, mult in string.entries
    ]
    for comp in string.tail:
        if not comp.factors:
            families.append(PieceFamily(Layer(comp.length, comp.length / 2.0, 1), count=comp.count))
            continue
        if len(comp.factors) != 1 or not isinstance(comp.factors[0], GeometricFactor):
            raise UnsupportedKind("only single geometric tail factors have a layered realisation")
        f = comp.factors[0]
        families.append(
            PieceFamily(Layer(comp.length, comp.length / 2.0, 1), count=comp.count, growth=f.growth, ratio=f.ratio)
        )
    if not families:
        raise NonPositiveLength("empty string")
    total = math.fsum(f.measure(1) for f in families)
    rho = max(f.layer.rho for f in families)
    return Rfd(
        N=1,
        kind="string",
        region=Region(indicator=None, bbox=_box((0.0, total)), measure=total),
        families=tuple(families),
        dmax=rho,
        dim_hint=_layered_zeta_abscissa(families, 1),
        params={},
        label=f"string:{string.label}",
    )


# --- registry -----------------------------------------------------------------


_BUILDERS: dict[str, Callable[..., Rfd]] = {
    "cantor": _cantor_rfd,
    "cantor_embedded": _cantor_embedded_rfd,
    "cantor_product": _cantor_product_rfd,
    "cantor_strip": _cantor_strip_rfd,
    "interval": _interval_rfd,
    "unit_segment": _unit_segment_rfd,
    "ball": _ball_rfd,
    "torus": _torus_rfd,
    "polygon": _polygon_rfd,
    "polygon_boundary": _polygon_rfd,
    "gasket": _gasket_rfd,
    "sierpinski_gasket": _gasket_rfd,
    "cusp": _cusp_rfd,
    "exp_cusp": _exp_cusp_rfd,
    "cantor_graph": _cantor_graph_rfd,
    "string": _string_rfd,
    "string_rfd": _string_rfd,
}

RFD_KINDS = tuple(sorted(_BUILDERS))


def build_rfd(kind: str, **params: Any) -> Rfd:
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise UnsupportedKind(f"unknown geometry kind {kind!r}", known=list(RFD_KINDS)) from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise UnsupportedKind(f"bad parameters for {kind!r}: {exc}", kind=kind) from exc


def parse_geometry(spec: str) -> Rfd:
    """
    CLI geometry syntax: kind[:key=value,key=value]. Values are floats, or
    ';'-separated 'x y' vertex lists for polygons.
    """
    kind, _, rest = spec.partition(":")
    params: dict[str, Any] = {}
    for item in filter(None, rest.split(",")):
        key, _, raw = item.partition("=")
        if key == "vertices":
            params[key] = [[float(c) for c in p.split()] for p in raw.split(";")]
        elif key in ("m", "N"):
            params[key] = int(raw)
        elif raw in ("none", "None"):
            params[key] = None
        else:
            params[key] = float(raw)
    return build_rfd(kind.strip(), **params)


__all__ = [
    "Layer",
    "PieceFamily",
    "Region",
    "Rfd",
    "RFD_KINDS",
    "build_rfd",
    "parse_geometry",
    "scaled",
    "translated",
    "union",
]
