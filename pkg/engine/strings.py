"""
Bounded fractal strings and their geometric zeta functions.

A string is a finite descending list of (length, multiplicity) entries plus an
analytic tail. The tail is a list of components; a component contributes

    count * length^s * prod(factor sums)

where a factor is either geometric (sum_j (b r^s)^j = 1/(1 - b r^s)) or a
power-law family (sum_{k>=start} (k^-a - (k+1)^-a)^s). This representation is
closed under scaling, disjoint union and tensor product, so those operations
never lose terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Sequence, Union

import numpy as np
from loguru import logger

from engine.config import get_settings
from engine.errors import (
    AbscissaViolation,
    ArityMismatch,
    DivergentTail,
    InvalidCantorParameters,
    NonPositiveLength,
    NonPositiveScale,
    ToleranceUnreachable,
    TruncationTooSmall,
    UnsupportedKind,
)

_CHUNK = 1_000_000


# --- tail algebra -------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GeometricFactor:
    """sum_{j>=0} (b r^s)^j"""

    growth: float  # b
    ratio: float  # r

    kind = "geometric"

    @property
    def abscissa(self) -> float:
        return math.log(self.growth) / math.log(1.0 / self.ratio)

    def value(self, s: complex) -> complex:
        return 1.0 / (1.0 - self.growth * np.exp(s * math.log(self.ratio)))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "growth": self.growth, "ratio": self.ratio}


@dataclass(frozen=True, order=True)
class PowerLawFactor:
    """sum_{k>=start} (k^-a - (k+1)^-a)^s"""

    a: float
    start: int

    kind = "power_law"

    @property
    def abscissa(self) -> float:
        return 1.0 / (1.0 + self.a)

    def lengths(self, lo: int, hi: int) -> np.ndarray:
        k = np.arange(lo, hi, dtype=float)
        # k^-a * (1 - (1 + 1/k)^-a) without cancellation
        return k ** (-self.a) * -np.expm1(-self.a * np.log1p(1.0 / k))

    def remainder_bound(self, sigma: float, n: int) -> float:
        """Bound on sum_{k>=n} l_k^sigma using l_k <= a k^-(1+a)."""
        q = (1.0 + self.a) * sigma - 1.0
        return self.a**sigma * (n - 1) ** (-q) / q

    def terms_for(self, sigma: float, target: float) -> int:
        q = (1.0 + self.a) * sigma - 1.0
        if target <= 0.0:
            return math.inf  # type: ignore[return-value]
        need = (self.a**sigma / (q * target)) ** (1.0 / q)
        return max(self.start + 1, int(math.ceil(need)) + 1)

    def partial_sum(self, s: complex, n: int) -> complex:
        total = 0j
        for lo in range(self.start, n, _CHUNK):
            hi = min(n, lo + _CHUNK)
            total += complex(np.sum(np.exp(s * np.log(self.lengths(lo, hi)))))
        return total

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "start": self.start}


Factor = Union[GeometricFactor, PowerLawFactor]


def _factor_key(f: Factor) -> tuple:
    if isinstance(f, GeometricFactor):
        return (0, f.growth, f.ratio)
    return (1, f.a, float(f.start))


@dataclass(frozen=True)
class TailComponent:
    count: float
    length: float
    factors: tuple[Factor, ...] = ()

    def scaled(self, lam: float) -> "TailComponent":
        return replace(self, length=self.length * lam)

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "length": self.length,
            "factors": [f.to_dict() for f in self.factors],
        }


@dataclass(frozen=True)
class GeometricTail:
    """Tail descriptor: next level has first_count copies of first_length, each
    further level multiplies the count by `growth` and the length by `ratio`."""

    ratio: float
    growth: float
    first_length: float | None = None
    first_count: float | None = None


@dataclass(frozen=True)
class PowerLawTail:
    a: float
    start: int


TailSpec = Union[GeometricTail, PowerLawTail, Sequence[TailComponent], None]


@dataclass(frozen=True)
class TailBound:
    sigma: float
    bound: float


@dataclass(frozen=True)
class FractalString:
    entries: tuple[tuple[float, int], ...]
    tail: tuple[TailComponent, ...] = ()
    label: str = ""

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e[0] for e in self.entries], dtype=float)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([e[1] for e in self.entries], dtype=float)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "entries": [[length, mult] for length, mult in self.entries],
            "tail": (
                {"kind": "components", "components": [c.to_dict() for c in self.tail]}
                if self.tail
                else {"kind": "none"}
            ),
        }


# --- construction -------------------------------------------------------------


def _coalesce(entries: Iterable[tuple[float, float]], rtol: float) -> tuple[tuple[float, int], ...]:
    items = sorted(((float(l), m) for l, m in entries), key=lambda e: -e[0])
    out: list[list[Any]] = []
    for length, mult in items:
        if out and abs(out[-1][0] - length) <= rtol * out[-1][0]:
            out[-1][1] += mult
        else:
            out.append([length, mult])
    return tuple((l, int(m) if float(m).is_integer() else m) for l, m in out)


def _merge_components(comps: Iterable[TailComponent], rtol: float) -> tuple[TailComponent, ...]:
    merged: list[TailComponent] = []
    for c in comps:
        c = replace(c, factors=tuple(sorted(c.factors, key=_factor_key)))
        for i, m in enumerate(merged):
            if m.factors == c.factors and abs(m.length - c.length) <= rtol * m.length:
                merged[i] = replace(m, count=m.count + c.count)
                break
        else:
            merged.append(c)
    merged.sort(key=lambda c: (-c.length, len(c.factors), [_factor_key(f) for f in c.factors]))
    return tuple(merged)


def _check_components(comps: Sequence[TailComponent]) -> None:
    for c in comps:
        if not (c.length > 0 and math.isfinite(c.length)) or not c.count > 0:
            raise NonPositiveLength("tail component must have positive length and count", length=c.length, count=c.count)
        for f in c.factors:
            if isinstance(f, GeometricFactor):
                if not (0.0 < f.ratio < 1.0) or f.growth <= 0:
                    raise DivergentTail("geometric tail needs 0 < r < 1 and b > 0", ratio=f.ratio, growth=f.growth)
                if f.growth * f.ratio >= 1.0:
                    raise DivergentTail("total length diverges: b*r >= 1", ratio=f.ratio, growth=f.growth)
            elif f.a <= 0 or f.start < 1:
                raise DivergentTail("power-law tail needs a > 0 and start >= 1", a=f.a, start=f.start)


def _build(entries, comps, label: str) -> FractalString:
    rtol = get_settings().coalesce_rtol
    return FractalString(
        entries=_coalesce(entries, rtol),
        tail=_merge_components(comps, rtol),
        label=label,
    )


def make_string(
    entries: Sequence[tuple[float, int]],
    tail: TailSpec = None,
    label: str = "",
) -> FractalString:
    """
    Build a string from (length, multiplicity) pairs and a tail descriptor.

    Entries are sorted descending and near-equal lengths are coalesced by
    summing multiplicities.
    """
    if not entries:
        raise NonPositiveLength("a string needs at least one entry")
    for length, mult in entries:
        if not (length > 0 and math.isfinite(length)):
            raise NonPositiveLength("lengths must be positive", length=length)
        if mult < 1:
            raise NonPositiveLength("multiplicities must be >= 1", multiplicity=mult)

    if tail is None:
        comps: list[TailComponent] = []
    elif isinstance(tail, GeometricTail):
        last_length, last_mult = min(entries, key=lambda e: e[0])
        first_length = tail.first_length if tail.first_length is not None else last_length * tail.ratio
        first_count = tail.first_count if tail.first_count is not None else last_mult * tail.growth
        comps = [TailComponent(first_count, first_length, (GeometricFactor(tail.growth, tail.ratio),))]
    elif isinstance(tail, PowerLawTail):
        comps = [TailComponent(1, 1.0, (PowerLawFactor(tail.a, tail.start),))]
    else:
        comps = list(tail)

    _check_components(comps)
    return _build(entries, comps, label)


def abscissa(L: FractalString) -> float:
    """Abscissa of convergence of the stored representation (-inf if finite)."""
    best = -math.inf
    for c in L.tail:
        for f in c.factors:
            best = max(best, f.abscissa)
    return best


# --- evaluation ---------------------------------------------------------------


def _explicit_sum(L: FractalString, s: complex) -> complex:
    if not L.entries:
        return 0j
    return complex(np.sum(L.multiplicities * np.exp(s * np.log(L.lengths))))


def _component_prefix(c: TailComponent, s: complex) -> complex:
    pref = c.count * complex(np.exp(s * math.log(c.length)))
    for f in c.factors:
        if isinstance(f, GeometricFactor):
            pref *= f.value(s)
    return pref


def _power_factors(c: TailComponent) -> list[PowerLawFactor]:
    return [f for f in c.factors if isinstance(f, PowerLawFactor)]


def geometric_zeta(
    L: FractalString,
    s: complex,
    rel_tol: float | None = None,
    max_terms: int | None = None,
) -> tuple[complex, TailBound]:
    """
    zeta_L(s) = sum of l^s over all lengths with multiplicity.

    Geometric factors are summed in closed form. Power-law factors are summed
    explicitly until the remainder bound drops below rel_tol * |value|; the
    returned TailBound carries that remainder.
    """
    settings = get_settings()
    rel_tol = settings.string_rel_tol if rel_tol is None else rel_tol
    max_terms = settings.power_law_max_terms if max_terms is None else max_terms
    s = complex(s)
    sigma = s.real

    ab = abscissa(L)
    if sigma <= ab:
        raise AbscissaViolation("Re s must exceed the abscissa of convergence", s=s, abscissa=ab)

    with np.errstate(over="ignore"):
        value = _explicit_sum(L, s)
        pending: list[tuple[complex, list[PowerLawFactor]]] = []
        for c in L.tail:
            pref = _component_prefix(c, s)
            pls = _power_factors(c)
            if pls:
                pending.append((pref, pls))
            else:
                value += pref

    if not pending:
        return value, TailBound(sigma=sigma, bound=0.0)

    exact_at_one = s == 1
    probe = {}
    estimate = value
    for pref, pls in pending:
        prod = pref
        for f in pls:
            if f not in probe:
                probe[f] = (
                    complex(f.start ** (-f.a))
                    if exact_at_one
                    else f.partial_sum(s, f.start + 1000)
                )
            prod *= probe[f]
        estimate += prod

    share = 0.5 * rel_tol * abs(estimate) / len(pending)
    bound = 0.0
    for pref, pls in pending:
        k = len(pls)
        vals: list[complex] = []
        bnds: list[float] = []
        for i, f in enumerate(pls):
            if exact_at_one:
                vals.append(complex(f.start ** (-f.a)))
                bnds.append(0.0)
                continue
            others = 1.0
            for j, g in enumerate(pls):
                if j != i:
                    others *= 2.0 * abs(probe[g])
            target = share / (k * max(abs(pref), 1e-300) * max(others, 1e-300))
            n = f.terms_for(sigma, target)
            if n - f.start > max_terms:
                raise ToleranceUnreachable(
                    "power-law tail needs too many explicit terms",
                    s=s,
                    a=f.a,
                    terms=n - f.start,
                    max_terms=max_terms,
                )
            vals.append(f.partial_sum(s, n))
            bnds.append(f.remainder_bound(sigma, n))
        prod_vals = complex(pref)
        prod_abs_hi = abs(pref)
        prod_abs = abs(pref)
        for v, b in zip(vals, bnds):
            prod_vals *= v
            prod_abs_hi *= abs(v) + b
            prod_abs *= abs(v)
        value += prod_vals
        bound += prod_abs_hi - prod_abs

    if bound > rel_tol * abs(value):
        raise ToleranceUnreachable("tail bound above requested tolerance", s=s, bound=bound, value=abs(value))
    return value, TailBound(sigma=sigma, bound=bound)


def total_length(L: FractalString) -> float:
    value, _ = geometric_zeta(L, 1.0)
    return value.real


# --- combinators --------------------------------------------------------------


def scale_string(L: FractalString, lam: float) -> FractalString:
    if not (lam > 0 and math.isfinite(lam)):
        raise NonPositiveScale("scale factor must be positive", lam=lam)
    if lam == 1.0:
        return L
    return _build(
        [(l * lam, m) for l, m in L.entries],
        [c.scaled(lam) for c in L.tail],
        L.label,
    )


def disjoint_union(
    Ls: Sequence[FractalString],
    scales: Sequence[float] | None = None,
    label: str = "",
) -> FractalString:
    if not Ls:
        raise ArityMismatch("disjoint union needs at least one string")
    if scales is None:
        scales = [1.0] * len(Ls)
    if len(scales) != len(Ls):
        raise ArityMismatch("one scale per string", strings=len(Ls), scales=len(scales))
    if len(Ls) == 1 and scales[0] == 1.0:
        return Ls[0]
    entries: list[tuple[float, int]] = []
    comps: list[TailComponent] = []
    for L, lam in zip(Ls, scales):
        part = scale_string(L, lam)
        entries.extend(part.entries)
        comps.extend(part.tail)
    return _build(entries, comps, label or "+".join(L.label for L in Ls if L.label))


def tensor_product(
    L1: FractalString,
    L2: FractalString,
    truncation: int = 10_000,
    tol: float | None = None,
    label: str = "",
) -> FractalString:
    """
    Multiset of pairwise products l1 * l2; zeta of the result is the product
    of the two zetas.

    At most `truncation` products stay explicit; the rest become single-term
    tail components. Power-law tails must reach `tol` within `truncation`
    explicit terms at the probe abscissa (abscissa + 0.1), otherwise
    TruncationTooSmall.
    """
    tol = get_settings().string_rel_tol if tol is None else tol
    if truncation < 1:
        raise TruncationTooSmall("truncation must be >= 1", truncation=truncation)

    l1, m1 = L1.lengths, L1.multiplicities
    l2, m2 = L2.lengths, L2.multiplicities
    prods = np.outer(l1, l2).ravel()
    mults = np.outer(m1, m2).ravel()
    order = np.argsort(-prods, kind="stable")
    prods, mults = prods[order], mults[order]
    keep = [(float(p), int(m)) for p, m in zip(prods[:truncation], mults[:truncation])]
    spill = [TailComponent(float(m), float(p)) for p, m in zip(prods[truncation:], mults[truncation:])]

    comps: list[TailComponent] = spill
    for length, mult in L1.entries:
        comps.extend(TailComponent(mult * c.count, length * c.length, c.factors) for c in L2.tail)
    for length, mult in L2.entries:
        comps.extend(TailComponent(mult * c.count, length * c.length, c.factors) for c in L1.tail)
    for a in L1.tail:
        for b in L2.tail:
            comps.append(TailComponent(a.count * b.count, a.length * b.length, a.factors + b.factors))

    out = _build(keep, comps, label or f"{L1.label or 'L'}*{L2.label or 'L'}")

    pls = {f for c in out.tail for f in _power_factors(c)}
    if pls:
        sigma = abscissa(out) + 0.1
        probe, _ = geometric_zeta(out, sigma, rel_tol=max(tol, 1e-6))
        for f in pls:
            bound = f.remainder_bound(sigma, f.start + truncation)
            if bound > tol * abs(probe):
                raise TruncationTooSmall(
                    "power-law remainder above tolerance at the probe abscissa",
                    sigma=sigma,
                    bound=bound,
                    truncation=truncation,
                )
    logger.debug("tensor product {} entries, {} tail components", len(out.entries), len(out.tail))
    return out


# --- named strings ------------------------------------------------------------


def a_string(a: float, count: int) -> FractalString:
    """l_k = k^-a - (k+1)^-a for k = 1..count, power-law tail beyond."""
    if a <= 0:
        raise NonPositiveLength("a-string needs a > 0", a=a)
    if count < 1:
        raise NonPositiveLength("a-string needs count >= 1", count=count)
    lengths = PowerLawFactor(a, 1).lengths(1, count + 1)
    return make_string(
        [(float(l), 1) for l in lengths],
        PowerLawTail(a, count + 1),
        label=f"a-string(a={a})",
    )


def cantor_string(m: int = 2, a: float = 1.0 / 3.0) -> FractalString:
    """Gap lengths of C^(m,a): m-1 gaps of 2c, then m(m-1) of 2ca, ..."""
    if m < 2 or not (0 < a) or m * a >= 1:
        raise InvalidCantorParameters("need m >= 2 and 0 < a < 1/m", m=m, a=a)
    gap = (1.0 - m * a) / (m - 1)
    return make_string(
        [(gap, m - 1)],
        GeometricTail(ratio=a, growth=m, first_length=gap * a, first_count=(m - 1) * m),
        label=f"cantor(m={m},a={a})",
    )


def singleton(length: float = 1.0) -> FractalString:
    return make_string([(length, 1)], label=f"singleton({length})")


def mth_order(base: FractalString, m: int, truncation: int = 10_000) -> FractalString:
    if m < 1:
        raise NonPositiveLength("order must be >= 1", m=m)
    out = base
    for _ in range(m - 1):
        out = tensor_product(out, base, truncation)
    return replace(out, label=f"{base.label or 'L'}^{m}")


def infinite_order(base: FractalString, M: int = 6, truncation: int = 10_000) -> FractalString:
    """Union of (3^-m / m!) L_m for m = 1..M."""
    parts = [mth_order(base, m, truncation) for m in range(1, M + 1)]
    scales = [3.0 ** (-m) / math.factorial(m) for m in range(1, M + 1)]
    return disjoint_union(parts, scales, label=f"{base.label or 'L'}^inf(M={M})")


def build_named(kind: str, **params: Any) -> FractalString:
    if kind == "a_string":
        return a_string(params["a"], params.get("count", 1000))
    if kind == "cantor":
        return cantor_string(params.get("m", 2), params.get("a", 1.0 / 3.0))
    base = params.get("base") or cantor_string()
    truncation = params.get("truncation", 10_000)
    if kind == "mth_order":
        return mth_order(base, params["m"], truncation)
    if kind == "infinite_order":
        return infinite_order(base, params.get("M", 6), truncation)
    raise UnsupportedKind(f"unknown string kind {kind!r}")


# --- interop ------------------------------------------------------------------


def string_zeta_expr(L: FractalString):
    """MeroExpr for strings whose tail is purely geometric."""
    from engine.dirichlet import DirichletPolynomial
    from engine.merozeta import MeroExpr, MeroTerm

    terms = [MeroTerm(coeff=float(m), base=l) for l, m in L.entries]
    for c in L.tail:
        if _power_factors(c):
            raise UnsupportedKind("power-law tails have no closed-form expression")
        denoms: dict[GeometricFactor, int] = {}
        for f in c.factors:
            denoms[f] = denoms.get(f, 0) + 1
        terms.append(
            MeroTerm(
                coeff=float(c.count),
                base=c.length,
                dirichlet_denoms=tuple(
                    (DirichletPolynomial(((f.growth, f.ratio),)), k) for f, k in denoms.items()
                ),
            )
        )
    return MeroExpr(terms=tuple(terms), label=L.label)


def from_dict(data: dict[str, Any]) -> FractalString:
    comps: list[TailComponent] = []
    tail = data.get("tail") or {"kind": "none"}
    for c in tail.get("components", []):
        factors: list[Factor] = []
        for f in c["factors"]:
            if f["kind"] == "geometric":
                factors.append(GeometricFactor(f["growth"], f["ratio"]))
            elif f["kind"] == "power_law":
                factors.append(PowerLawFactor(f["a"], int(f["start"])))
            else:
                raise UnsupportedKind(f"unknown tail factor {f['kind']!r}")
        comps.append(TailComponent(c["count"], c["length"], tuple(factors)))
    entries = [(float(l), int(m)) for l, m in data["entries"]]
    return make_string(entries, comps, label=data.get("label", ""))


__all__ = [
    "GeometricFactor",
    "PowerLawFactor",
    "TailComponent",
    "GeometricTail",
    "PowerLawTail",
    "TailBound",
    "FractalString",
    "make_string",
    "abscissa",
    "geometric_zeta",
    "total_length",
    "scale_string",
    "disjoint_union",
    "tensor_product",
    "a_string",
    "cantor_string",
    "singleton",
    "mth_order",
    "infinite_order",
    "build_named",
    "string_zeta_expr",
    "from_dict",
]
