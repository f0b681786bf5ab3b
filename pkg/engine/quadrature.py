"""
Thin wrappers over scipy.integrate.

scipy reports doubtful convergence through IntegrationWarning; the wrappers
capture those warnings and fold them into the returned error estimate, so
callers compare the returned error estimate against their own tolerance.
Captured messages are logged at debug level.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np
from loguru import logger
from scipy import integrate

from engine.config import get_settings
from engine.errors import QuadratureFailure


def _run(fn: Callable[[], tuple], what: str) -> tuple[tuple, list[str]]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with np.errstate(all="ignore"):
            out = fn()
    notes = [str(w.message).strip().splitlines()[0] for w in caught if str(w.message).strip()]
    if notes:
        logger.debug("{} reported: {}", what, "; ".join(notes))
    return out, notes


def quad(
    f: Callable[[float], complex],
    a: float,
    b: float,
    *,
    epsabs: float | None = None,
    epsrel: float | None = None,
    limit: int | None = None,
    points: list[float] | None = None,
    weight: str | None = None,
    wvar: object = None,
    complex_valued: bool = True,
) -> tuple[complex, float]:
    """
    Adaptive Gauss-Kronrod integral of a (possibly complex) scalar function.

    Returns (value, error_estimate).
    """
    settings = get_settings()
    kw = dict(
        epsabs=settings.quad_epsabs if epsabs is None else epsabs,
        epsrel=settings.quad_epsrel if epsrel is None else epsrel,
        limit=settings.quad_limit if limit is None else limit,
    )
    if points is not None and weight is None and math.isfinite(a) and math.isfinite(b):
        kw["points"] = points
    if weight is not None:
        kw["weight"] = weight
        kw["wvar"] = wvar

    parts = [lambda x: float(np.real(f(x)))]
    if complex_valued:
        parts.append(lambda x: float(np.imag(f(x))))

    values: list[float] = []
    err = 0.0
    notes: list[str] = []
    for part in parts:
        (val, e, *_), n = _run(lambda: integrate.quad(part, a, b, **kw), "quad")
        values.append(val)
        err += abs(e)
        notes.extend(n)

    value = complex(values[0], values[1] if complex_valued else 0.0)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise QuadratureFailure("non-finite quadrature result", a=a, b=b, notes=notes)
    return value, err


def dblquad(
    f: Callable[[float, float], float],
    a: float,
    b: float,
    gfun: Callable[[float], float],
    hfun: Callable[[float], float],
    *,
    epsabs: float = 1e-13,
    epsrel: float = 1e-11,
) -> tuple[float, float]:
    """Real double integral, inner variable y in [gfun(x), hfun(x)], f(y, x)."""
    (val, err), notes = _run(
        lambda: integrate.dblquad(f, a, b, gfun, hfun, epsabs=epsabs, epsrel=epsrel),
        "dblquad",
    )
    if not math.isfinite(val):
        raise QuadratureFailure("non-finite dblquad result", notes=notes)
    return val, err


def tplquad(
    f: Callable[[float, float, float], float],
    a: float,
    b: float,
    gfun: Callable[[float], float],
    hfun: Callable[[float], float],
    qfun: Callable[[float, float], float],
    rfun: Callable[[float, float], float],
    *,
    epsabs: float = 1e-12,
    epsrel: float = 1e-10,
) -> tuple[float, float]:
    """Real triple integral, f(z, y, x)."""
    (val, err), notes = _run(
        lambda: integrate.tplquad(
            f, a, b, gfun, hfun, qfun, rfun, epsabs=epsabs, epsrel=epsrel
        ),
        "tplquad",
    )
    if not math.isfinite(val):
        raise QuadratureFailure("non-finite tplquad result", notes=notes)
    return val, err
