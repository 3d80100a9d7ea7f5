"""HTTP service wrapping the simulation and optimization package.

Endpoints mirror the CLI verbs: run an experiment spec, trace one scheme's
convergence, and dump a channel realization.  Requests carry config/spec
text in the same flat format the CLI reads from disk, so the CLI stays a
thin client.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError, config_from_text
from ..harness import (convergence_trace, dump_channels, experiment_from_text,
                       run_experiment)
from .schemas import (AggregateModel, CellRowModel, ChannelsRequest,
                      ChannelsResponse, HealthResponse, RunExperimentRequest,
                      RunExperimentResponse, TraceRequest, TraceResponse)


def create_app() -> FastAPI:
    app = FastAPI(title="fdwpcn", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/experiments/run", response_model=RunExperimentResponse)
    def experiments_run(request: RunExperimentRequest):
        try:
            spec = experiment_from_text(request.spec_text)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        table = run_experiment(spec)
        rows = [
            CellRowModel(
                scheme=r.scheme, value=r.value, seed=r.seed,
                objective=None if r.error else r.objective,
                iterations=r.iterations, xi_final=r.xi_final,
                wallclock_ms=r.wallclock_ms, channel_checksum=r.checksum,
                error=r.error or None)
            for r in sorted(table.rows, key=lambda r: (r.scheme, r.value, r.seed))
        ]
        aggregates = [
            AggregateModel(scheme=s, axis=a, value=v, mean=m, stderr=e, n=n)
            for s, a, v, m, e, n in table.aggregates()
        ]
        return RunExperimentResponse(
            axis=table.axis, n_errors=table.n_errors, rows=rows,
            aggregates=aggregates, csv=table.to_csv(), agg_csv=table.agg_csv(),
            summary_json=table.to_json())

    @app.post("/trace", response_model=TraceResponse)
    def trace(request: TraceRequest):
        try:
            config = config_from_text(request.config_text, allow_extra=True)
            csv = convergence_trace(config, request.scheme, request.seed,
                                    request.order)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return TraceResponse(scheme=request.scheme, seed=request.seed, csv=csv)

    @app.post("/channels/dump", response_model=ChannelsResponse)
    def channels_dump(request: ChannelsRequest):
        try:
            config = config_from_text(request.config_text, allow_extra=True)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return ChannelsResponse(csv=dump_channels(config))

    return app


app = create_app()
