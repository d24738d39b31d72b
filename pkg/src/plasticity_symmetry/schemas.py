"""
Pydantic models for reports and the HTTP API.
"""
from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1

ForceName = Literal["none", "monogenic", "friction", "spiral", "rotational"]

# ---- Reports ----

class CheckRecord(BaseModel):
    name: str
    passed: bool
    max_residual: float | None = None
    witness: dict[str, float] | None = None        # first failing sample point
    witness_value: float | None = None
    detail: dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    schema_version: Literal[1] = SCHEMA_VERSION
    command: str
    argv: list[str] = Field(default_factory=list)
    settings: dict[str, Any]
    seed: int
    checks: list[CheckRecord] = Field(default_factory=list)
    passed: bool
    wall_time: float | None = None                 # only set when timing is recorded

    def to_json(self) -> str:
        exclude = {"wall_time"} if self.wall_time is None else None
        return self.model_dump_json(indent=2, exclude=exclude)


# ---- Requests ----

class RunOptions(BaseModel):
    seed: int | None = None                        # None => settings.seed
    trials: int | None = None
    rho: float | None = None


class CheckTableRequest(RunOptions):
    degree: int | None = None
    extended: bool = False


class ForceSpec(BaseModel):
    name: ForceName = "none"
    potential: str = "0"                           # V(t, x, y) for monogenic/rotational
    h1: str = "s"                                  # friction profiles, expressions in s
    h2: str = "1"
    h3: str = "0"
    h4: str = "0"
    k0: float = 0.0
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 0.0
    k4: float = 0.0
    a2: float = 1.0
    time_power: int = 2


class CheckSymmetryRequest(RunOptions):
    force: ForceSpec = Field(default_factory=ForceSpec)
    generators: list[str] | None = None            # None => the force's full list


class AdjointRequest(RunOptions):
    gen: str                                       # e.g. "L", "X[t^2]"
    on: str
    param: str = "0.3"
    terms: int | None = None
    tol: float | None = None


class NormalFormRequest(BaseModel):
    f: str
    g: str = "0"


class NormalFormResponse(BaseModel):
    f: str
    g: str
    m1: int
    m2: int
    mu: int
    m3: int = 0
    m4: int = 0
    branch: str
    root_fallback: bool
    rescale: str
    conjugator: list[str]
    roundtrip: bool


class ResidualRequest(BaseModel):
    variant: str | None = None
    params: dict[str, float] = Field(default_factory=dict)
    points: int | None = None
    seed: int | None = None
