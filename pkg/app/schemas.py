from pydantic import BaseModel, Field, field_validator
from typing import Dict, List, Literal, Optional


# Fixture schemas
class BallSpec(BaseModel):
    center: str
    radius: str = Field(default="1")

    @field_validator("center", "radius", mode="before")
    @classmethod
    def stringify(cls, value):
        return str(value)


class FixtureSpec(BaseModel):
    space: str
    kind: Literal["closed", "open"] = "closed"
    balls: List[BallSpec] = Field(default_factory=list)


# Scheme schemas
class SchemeSpec(BaseModel):
    space: str
    root: BallSpec
    depth: int = Field(default=0, ge=0)
    pieces: Dict[str, List[BallSpec]] = Field(default_factory=dict)
    tail: Literal["balanced", "natural"] = "balanced"


# Report schemas
class AuditCheck(BaseModel):
    name: str
    depth: int
    passed: bool
    counterexample: Optional[str] = None
    detail: Optional[str] = None


class AuditReport(BaseModel):
    command: str
    seed: int
    space: Optional[str] = None
    checks: List[AuditCheck] = Field(default_factory=list)
    passed: bool = True

    def add(self, checks: List[AuditCheck]) -> "AuditReport":
        self.checks.extend(checks)
        self.passed = all(check.passed for check in self.checks)
        return self


class PieceDump(BaseModel):
    index: int
    balls: List[BallSpec]
    anchor: str


class SystemDump(BaseModel):
    space: str
    eps: str
    coefficient: str
    depth: int
    pieces: List[PieceDump] = Field(default_factory=list)
    report: AuditReport


class RetractResult(BaseModel):
    space: str
    point: str
    precision: int
    value: str
    report: AuditReport


class PadicEvalResult(BaseModel):
    expression: str
    p: int
    precision: int
    value: str
    exact: Optional[str] = None
    valuation: Optional[int] = None
    approximants: List[str] = Field(default_factory=list)


class ReductionReport(BaseModel):
    which: str
    strong: bool
    fixtures: List[str] = Field(default_factory=list)
    report: AuditReport
