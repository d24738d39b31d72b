"""
App entrypoint.

LIFECYCLE:
- Configure logging from settings on startup via lifespan.
- Include v1 routes under /v1
"""
from __future__ import annotations

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from . import config, routers

LOG = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    settings = config.settings
    logging.basicConfig(level=settings.log_level,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    LOG.info("serving with seed %d, rho %g", settings.seed, settings.rho)
    yield


app = FastAPI(
    title="Plasticity Symmetry Toolkit",
    version=config.settings.version,
    description="Lie symmetries, subalgebras and invariant solutions of the planar "
                "ideal-plasticity system",
    lifespan=lifespan,
)

app.include_router(routers.router, prefix="/v1")
