"""
FastAPI routes.

We expose:
- GET  /v1/health                           (liveness)
- POST /v1/check-table                      (commutation table)
- POST /v1/check-symmetry                   (symmetry criterion for a force)
- POST /v1/adjoint                          (series versus closed form)
- POST /v1/classify/normal-form             (one-dimensional normal form)
- GET  /v1/classify/catalog                 (representative catalogue)
- POST /v1/solutions/{family}/residual      (residual oracle)
- GET  /v1/solutions/{family}/flowfield     (CSV velocity samples)

Every verification route returns the same Report document the command line
writes with --json. Bad input (unparseable expressions, unknown generators or
families) is a 400.
"""
from __future__ import annotations

from fastapi import APIRouter, HTTPException, Query
from fastapi.responses import PlainTextResponse

from . import config
from .config import Settings
from .output.flowfield import to_csv
from .schemas import (
    AdjointRequest,
    CheckSymmetryRequest,
    CheckTableRequest,
    NormalFormRequest,
    NormalFormResponse,
    Report,
    ResidualRequest,
    RunOptions,
)
from .service import core

router = APIRouter(tags=["symmetry"])


def _settings(opts: RunOptions | None = None) -> Settings:
    """Process settings with the request's seed, trials and rho applied."""
    if opts is None:
        return config.settings
    update = {k: v for k, v in opts.model_dump(include={"seed", "trials", "rho"}).items()
              if v is not None}
    return config.settings.model_copy(update=update)


@router.get("/health")
def health() -> dict:
    """
    Liveness check endpoint.

    Returns {"status": "ok"} and the package version.
    """
    return {"status": "ok", "version": config.settings.version}


@router.post("/check-table", response_model=Report)
def check_table(payload: CheckTableRequest) -> Report:
    try:
        return core.cmd_check_table(_settings(payload), degree=payload.degree,
                                    extended=payload.extended)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


@router.post("/check-symmetry", response_model=Report)
def check_symmetry(payload: CheckSymmetryRequest) -> Report:
    """
    Apply the symmetry criterion.

    Without `generators` the force's default list is checked; a default
    generator the force is known to break counts as passed when it fails.
    """
    try:
        return core.cmd_check_symmetry(_settings(payload), payload.force, payload.generators)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


@router.post("/adjoint", response_model=Report)
def adjoint(payload: AdjointRequest) -> Report:
    try:
        return core.cmd_adjoint(_settings(payload), payload.gen, payload.on, payload.param,
                                terms=payload.terms, tol=payload.tol)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


@router.post("/classify/normal-form", response_model=NormalFormResponse)
def normal_form(payload: NormalFormRequest) -> NormalFormResponse:
    """
    Reduce X[f] + Y[g] to its normal form.

    Raises:
        HTTPException(400): f and g are both zero, or a slot does not parse.
    """
    try:
        summary, ok = core.normal_form_summary(config.settings, payload.f, payload.g)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    summary.pop("roundtrip_residual", None)
    return NormalFormResponse(**summary, roundtrip=ok)


@router.get("/classify/catalog", response_model=Report)
def catalog(seed: int | None = None, trials: int | None = None) -> Report:
    try:
        return core.cmd_catalog(_settings(RunOptions(seed=seed, trials=trials)))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


@router.post("/solutions/{family}/residual", response_model=Report)
def solution_residual(family: str, payload: ResidualRequest) -> Report:
    """
    Residual oracle for R10, R16, R17 or RF9.

    With no variant the printed form is checked first and the derived
    variant follows when the printed one misses the gate.
    """
    s = config.settings
    if payload.seed is not None:
        s = s.model_copy(update={"seed": payload.seed})
    try:
        return core.cmd_solution_residual(s, family, payload.variant, payload.params,
                                          points=payload.points)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


@router.get("/solutions/{family}/flowfield", response_class=PlainTextResponse)
def solution_flowfield(
    family: str,
    t: float = Query(1.0, description="Time of the snapshot; must be positive"),
    variant: str | None = None,
    lo: float = -2.0,
    hi: float = 2.0,
    n: int = Query(21, ge=2, le=201),
) -> PlainTextResponse:
    try:
        _, grid = core.flow_field(config.settings, family, t, (lo, hi, n), variant)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    return PlainTextResponse(to_csv(grid), media_type="text/csv")
