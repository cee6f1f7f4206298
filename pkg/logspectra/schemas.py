from typing import Literal

from pydantic import BaseModel, Field, field_validator

from .models import DomainKind, Method


class ConstantSet(BaseModel):
    N: int
    s: float | None = None
    c_frac: float | None = None
    c_log: float
    rho: float
    omega: float
    kappa_riesz: float | None = None
    kappa_form: float
    d_bound: float | None = None


class OperatorEval(BaseModel):
    value: float
    est_error: float = Field(ge=0.0)
    method: Method
    s: float | Literal["log"]


class FormValue(BaseModel):
    value: float
    parts: dict[str, float] = Field(default_factory=dict)
    est_error: float = 0.0


class DeltaSplit(BaseModel):
    delta: float
    e_near: float
    kappa_mass: float
    conv_term: float
    mass: float
    est_error: float = 0.0

    def reconstruct(self) -> float:
        return self.e_near + self.kappa_mass * self.mass - self.conv_term


class DomainConfig(BaseModel):
    kind: DomainKind = DomainKind.interval
    a: float | None = None
    b: float | None = None
    x: list[float] | None = None
    y: list[float] | None = None

    def bounds(self) -> list[tuple[float, float]]:
        if self.kind == DomainKind.interval:
            if self.a is None or self.b is None:
                raise ValueError("interval domains need 'a' and 'b'")
            return [(self.a, self.b)]
        if not self.x or not self.y or len(self.x) != 2 or len(self.y) != 2:
            raise ValueError("rectangle domains need 'x' and 'y' as [min, max]")
        return [(self.x[0], self.x[1]), (self.y[0], self.y[1])]

    def label(self) -> str:
        return "x".join(f"({lo:g},{hi:g})" for lo, hi in self.bounds())


class SweepConfig(BaseModel):
    domain: DomainConfig = Field(default_factory=lambda: DomainConfig(a=-1.0, b=1.0))
    n: int = 128
    s_grid: list[float] | None = None
    k: int = 4
    quad_tol: float | None = None
    seed: int = 0
    x0: list[float] | None = None
    radii: list[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05])
    t0: float = 0.25
    r_margin: float = 0.5
    tau: float = 0.5
    delta: float = 0.3
    workers: int | None = None

    @field_validator("s_grid")
    @classmethod
    def _descending(cls, value: list[float] | None) -> list[float] | None:
        if value is None:
            return value
        if not value:
            raise ValueError("s_grid must not be empty")
        if any(s <= 0.0 or s > 0.25 for s in value):
            raise ValueError("s_grid entries must lie in (0, 1/4]")
        return sorted(value, reverse=True)


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    value: float | None = None


class SlopeRecord(BaseModel):
    k: int
    slope: float
    residual: float
    lambda_L: float
    relerr: float


class BoundRow(BaseModel):
    s: float
    bk_bound: float
    lambda_1: float | None = None
    scaled_gap: float | None = None


class BoundReport(BaseModel):
    N: int
    r0: float
    r1: float | None = None
    rows: list[BoundRow] = Field(default_factory=list)
    log_shift_gap: float | None = None
    checks: list[CheckResult] = Field(default_factory=list)


class OpEvalRequest(BaseModel):
    op: Literal["frac", "log"] = "frac"
    method: Method = Method.spatial
    bump: str = "smooth-bump"
    center: list[float] = Field(default_factory=lambda: [0.0])
    radius: float = 1.0
    amplitude: float = 1.0
    s: float = 0.25
    at: list[float] = Field(default_factory=lambda: [0.0])
    tol: float | None = None
