"""HTTP service wrapping the laboratory.

Endpoints:

* ``GET  /health``   liveness probe,
* ``GET  /registry`` builtin rule and prime-set catalog,
* ``POST /run``      execute one :class:`~multlab.experiments.ExperimentConfig`.

Errors carry a structured detail ``{"category": config|numeric|resource,
"message": ...}`` so thin clients can map them to exit codes.  Sieve tables
persist across requests, which is the point of running the laboratory as a
resident process.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .errors import DegenerateInputError, NumericDomainError, ResourceLimitError
from .experiments import ExperimentConfig, registry_catalog, run_experiment


class RunResponse(BaseModel):
    report: dict
    csv: Optional[str]
    manifest: dict


def create_app() -> FastAPI:
    app = FastAPI(title="multlab", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/registry")
    def registry() -> dict:
        return registry_catalog()

    @app.post("/run", response_model=RunResponse)
    def run(cfg: ExperimentConfig) -> RunResponse:
        try:
            result = run_experiment(cfg)
        except (NumericDomainError, DegenerateInputError) as exc:
            raise HTTPException(status_code=422, detail={
                "category": "numeric", "message": str(exc)})
        except (ResourceLimitError, MemoryError) as exc:
            raise HTTPException(status_code=507, detail={
                "category": "resource", "message": str(exc)})
        except ValueError as exc:
            raise HTTPException(status_code=400, detail={
                "category": "config", "message": str(exc)})
        return RunResponse(report=result.report, csv=result.csv_text,
                           manifest=result.manifest)

    return app


app = create_app()
