# tools/fzeta/suites.py

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from loguru import logger

from engine.cantor import GeneralizedCantorSet, relative_distance_expr, tube_volume_closed, tube_volume_oracle
from engine.embed import (
    cantor_dust_zeta,
    cantor_tube_zeta,
    embedding_check,
    gamma_ratio_factor,
    gamma_ratio_residue,
)
from engine.errors import FractalZetaError
from engine.geometry import build_rfd
from engine.merozeta import contour_residue, eval_expr, poles_in_window, residue
from engine.rfd import ScalingCheck, functional_equation_check, verify_identities
from engine.sprays import (
    catalog_example,
    catalog_info,
    catalog_names,
    declared_dimension,
    exact,
    measure_anchor_check,
    self_similar_check,
    spray_zeta,
)
from engine.strings import cantor_string, geometric_zeta, scale_string, string_zeta_expr
from engine.types import CheckResult, Report, Window


def _check(name: str, residual: float, tolerance: float, **details) -> CheckResult:
    return CheckResult(name=name, passed=residual <= tolerance, residual=residual, tolerance=tolerance, details=details)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def strings_suite() -> list[Report]:
    L = cantor_string()
    e = string_zeta_expr(L)
    checks = []
    for s in (1.0, 0.8 + 3.0j, 2.5 - 1.0j):
        value, _ = geometric_zeta(L, s)
        checks.append(_check(f"closed form s={s}", _rel(eval_expr(e, s), value), 1e-12))
        scaled, _ = geometric_zeta(scale_string(L, 0.5), s)
        checks.append(_check(f"scaling s={s}", _rel(scaled, 0.5**s * value), 1e-12))
    return [Report.of("strings", checks)]


def cantor_suite() -> list[Report]:
    checks = []
    for m, a in ((2, 1.0 / 3.0), (3, 0.2), (2, 0.25)):
        C = GeneralizedCantorSet(m, a)
        rng = np.random.default_rng(0)
        ts = np.exp(rng.uniform(math.log(1e-8), math.log(C.c), 50))
        worst = max(
            abs(tube_volume_closed(C, float(t)) - tube_volume_oracle(C, float(t))) / tube_volume_oracle(C, float(t))
            for t in ts
        )
        checks.append(_check(f"tube closed vs oracle ({m},{a:g})", worst, 1e-12))
        e = relative_distance_expr(C)
        checks.append(_check(f"residue at D ({m},{a:g})", _rel(contour_residue(e, C.D), residue(e, C.D)), 1e-8))
    return [Report.of("cantor", checks)]


def merozeta_suite() -> list[Report]:
    gasket = spray_zeta(catalog_example("sierpinski-gasket"))
    dims = poles_in_window(gasket, Window.parse("-1:3:30"))
    on_line = [d for d in dims if abs(d.re - math.log2(3.0)) < 1e-9]
    checks = [
        _check("gasket pole count", abs(len(dims) - 9), 0, found=len(dims)),
        _check("gasket lattice points", abs(len(on_line) - 7), 0, found=len(on_line)),
    ]
    torus = catalog_example("torus")
    expected = 4.0 * math.pi**2 * 2.0
    checks.append(_check("torus residue analytic", _rel(residue(torus, 2.0), expected), 1e-12))
    checks.append(_check("torus residue contour", _rel(contour_residue(torus, 2.0), expected), 1e-8))
    return [Report.of("merozeta", checks)]


FE_GEOMETRIES = (
    ("ball", {"N": 2}, 1.3, 3.5),
    ("torus", {}, 2.3, 3.5),
    ("cantor", {}, 0.8, 2.0),
    ("gasket", {}, 1.8, 3.5),
)


def rfd_suite() -> list[Report]:
    rng = np.random.default_rng(0)
    reports = []
    for kind, params, lo, hi in FE_GEOMETRIES:
        s_list = list(rng.uniform(lo, hi, 10) + 1j * rng.uniform(-4.0, 4.0, 10))
        reports.append(functional_equation_check(build_rfd(kind, **params), s_list))
    reports.append(verify_identities(build_rfd("cantor"), [ScalingCheck(2.0, [0.9, 1.2 + 2.0j])]))
    return reports


def sprays_suite() -> list[Report]:
    anchors = [
        measure_anchor_check(name) for name in catalog_names() if catalog_info(name).kind != "embedded"
    ]
    reports = [Report.of("measure anchors", anchors)]
    rng = np.random.default_rng(0)
    s_list = list(rng.uniform(2.0, 4.0, 20) + 1j * rng.uniform(-10.0, 10.0, 20))
    reports.append(self_similar_check(catalog_example("sierpinski-gasket"), s_list))
    dims = []
    for N in range(2, 7):
        spec = catalog_example(f"ngasket-{N}")
        want = exact(catalog_info(f"ngasket-{N}").expected_D)
        dims.append(_check(f"ngasket-{N} dimension", abs(declared_dimension(spec) - want), 1e-12))
    reports.append(Report.of("ngasket dimensions", dims))
    return reports


def embed_suite() -> list[Report]:
    C = GeneralizedCantorSet(2, 1.0 / 3.0)
    planar = build_rfd("cantor_embedded", delta=1.0 / 3.0)
    reports = [embedding_check(lambda s, d: cantor_tube_zeta(C, s, d), planar, [0.9], 1.0 / 3.0)]
    checks = []
    for s in (0.3, 1.7 + 2.0j, -2.5):
        whole = gamma_ratio_factor(1, 3, s)
        parts = gamma_ratio_factor(1, 1, s) * gamma_ratio_factor(2, 2, s)
        checks.append(_check(f"gamma composition s={s}", _rel(parts, whole), 1e-12))
    for k in range(5):
        res = abs(gamma_ratio_residue(1, 2, k))
        want_pole = k < 1
        checks.append(
            CheckResult(
                name=f"parity M=2 k={k}", passed=(res > 1e-3) == want_pole, residual=res, tolerance=1e-3
            )
        )
        odd = abs(gamma_ratio_residue(1, 1, k))
        checks.append(CheckResult(name=f"parity M=1 k={k}", passed=odd > 1e-3, residual=odd, tolerance=1e-3))
    checks.append(_check("dust measure", abs(cantor_dust_zeta(2.0) - 1.0), 1e-8))
    reports.append(Report.of("embedding identities", checks))
    return reports


SUITES: dict[str, Callable[[], list[Report]]] = {
    "strings": strings_suite,
    "cantor": cantor_suite,
    "merozeta": merozeta_suite,
    "rfd": rfd_suite,
    "sprays": sprays_suite,
    "embed": embed_suite,
}


def run_suite(name: str) -> list[Report]:
    names = list(SUITES) if name == "all" else [name]
    out: list[Report] = []
    for n in names:
        try:
            reports = SUITES[n]()
        except FractalZetaError as exc:
            reports = [
                Report.of(n, [CheckResult(name=n, passed=False, residual=math.inf, tolerance=0.0, details=exc.to_dict())])
            ]
        passed = all(r.passed for r in reports)
        logger.bind(suite=n, passed=passed).info("suite finished")
        out.extend(reports)
    return out
