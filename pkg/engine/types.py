from __future__ import annotations

from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from engine.errors import EmptyWindow


def cpair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def ccomplex(pair: List[float] | tuple[float, float]) -> complex:
    return complex(pair[0], pair[1])


class FractalityClass(str, Enum):
    NOT_FRACTAL = "not_fractal"
    CRITICALLY_FRACTAL = "critically_fractal"
    STRICTLY_SUBCRITICAL = "strictly_subcritically_fractal"


class Window(BaseModel):
    """Rectangle Re in [re_min, re_max], |Im| <= im_max."""

    re_min: float
    re_max: float
    im_max: float

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = text.split(":")
        if len(parts) != 3:
            raise EmptyWindow(f"window must look like a:b:H, got {text!r}")
        try:
            a, b, h = (float(p) for p in parts)
        except ValueError as exc:
            raise EmptyWindow(f"window must look like a:b:H, got {text!r}") from exc
        return cls(re_min=a, re_max=b, im_max=h).checked()

    def checked(self) -> "Window":
        if not (self.re_min < self.re_max) or not (self.im_max > 0):
            raise EmptyWindow(
                "window is empty",
                re_min=self.re_min,
                re_max=self.re_max,
                im_max=self.im_max,
            )
        return self

    def contains(self, s: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= s.real <= self.re_max + pad
            and abs(s.imag) <= self.im_max + pad
        )


class ComplexDimension(BaseModel):
    re: float
    im: float
    order: int
    # c_{-order} ... c_{-1}, each as [re, im]
    principal_part: List[List[float]] = Field(default_factory=list)
    principal: bool = False
    cancelled: bool = False

    @property
    def s(self) -> complex:
        return complex(self.re, self.im)

    @property
    def residue(self) -> complex:
        if not self.principal_part:
            return 0j
        return ccomplex(self.principal_part[-1])


class CantorInvariants(BaseModel):
    D: float
    T: float
    p: float
    c: float
    M_lower: float
    M_upper: float
    res_distance_at_D: float
    res_tube_at_D: float
    closed_form_trusted: bool = True
    diagnostics: List[str] = Field(default_factory=list)


class RelationResult(BaseModel):
    independent: bool
    coefficients: Optional[List[int]] = None
    residual: Optional[float] = None
    qmax: int


class LatticeInfo(BaseModel):
    lattice: bool
    generator: Optional[float] = None
    period: Optional[float] = None
    # f(s) = 1 - sum b_j generator^(n_j s) in the lattice case
    exponents: Optional[List[int]] = None


class QuasiperiodicDrum(BaseModel):
    n: int
    D: float
    C1: float
    m_list: List[int]
    a_list: List[float]
    c_list: List[float]
    omega_lengths: List[float]
    quasiperiods: List[float]
    periods: List[float]
    nonremovable: bool = True
    note: str = ""

    def lattice_points(self, im_max: float) -> List[complex]:
        pts: set[complex] = set()
        for p in self.periods:
            k_max = int(im_max // p)
            for k in range(-k_max, k_max + 1):
                pts.add(complex(self.D, p * k))
        return sorted(pts, key=lambda z: (z.imag, z.real))


class TubeSamples(BaseModel):
    t: List[float]
    volume: List[float]
    method: Literal["exact", "grid", "montecarlo"]
    stderr: Optional[List[float]] = None
    seed: Optional[int] = None
    samples: Optional[int] = None
    label: str = ""


class DimensionFit(BaseModel):
    D: float
    D_upper: float
    D_lower: float
    slope: float
    slope_stderr: float
    t_min: float
    t_max: float
    residual_rms: float
    window_slopes: List[float] = Field(default_factory=list)


class ContentEstimate(BaseModel):
    lower: float
    upper: float
    average: float
    D: float
    gauge_m: int = 0
    degenerate: bool = False


class CheckResult(BaseModel):
    name: str
    passed: bool
    residual: float
    tolerance: float
    details: Dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    label: str
    passed: bool
    checks: List[CheckResult] = Field(default_factory=list)

    @classmethod
    def of(cls, label: str, checks: List[CheckResult]) -> "Report":
        return cls(label=label, passed=all(c.passed for c in checks), checks=checks)


class Classification(BaseModel):
    kind: FractalityClass
    D: float
    dims: List[float] = Field(default_factory=list)

    def render(self) -> str:
        if self.kind is FractalityClass.STRICTLY_SUBCRITICAL:
            return f"{self.kind.value} d=[{', '.join(f'{d:.5f}' for d in self.dims)}]"
        return self.kind.value


class OutputRecord(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    command: str
    parameters: Dict[str, Any]
    seed: int
    tool_version: str
    elapsed: float
    outputs: List[OutputRecord] = Field(default_factory=list)


class CatalogInfo(BaseModel):
    """
    One worked example as stored in catalog.json. Constants are exact
    expressions in sympy syntax ("sqrt(3)/4", "log(3)/log(2)").
    """

    name: str
    N: int
    kind: Literal["spray", "expr", "embedded"]
    builder: str
    params: Dict[str, Any] = Field(default_factory=dict)
    ratios: List[List[str]] = Field(default_factory=list)
    generator: str = ""
    measure: str
    expected_D: str
    lattice_period: Optional[str] = None
    window: str
    fractality: FractalityClass
    subcritical_dims: List[str] = Field(default_factory=list)
    printed_form: Optional[str] = None
    notes: List[str] = Field(default_factory=list)


__all__ = [
    "cpair",
    "ccomplex",
    "FractalityClass",
    "Window",
    "ComplexDimension",
    "CantorInvariants",
    "RelationResult",
    "LatticeInfo",
    "QuasiperiodicDrum",
    "TubeSamples",
    "DimensionFit",
    "ContentEstimate",
    "CheckResult",
    "Report",
    "Classification",
    "OutputRecord",
    "RunManifest",
    "CatalogInfo",
]
