"""Request/response models for the HTTP service."""
from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class RunExperimentRequest(BaseModel):
    """A full experiment spec in the flat key = value text format."""

    spec_text: str = Field(min_length=1)


class CellRowModel(BaseModel):
    scheme: str
    value: float
    seed: int
    objective: float | None
    iterations: int
    xi_final: float
    wallclock_ms: int
    channel_checksum: str
    error: str | None = None


class AggregateModel(BaseModel):
    scheme: str
    axis: str
    value: float
    mean: float
    stderr: float
    n: int


class RunExperimentResponse(BaseModel):
    axis: str
    n_errors: int
    rows: list[CellRowModel]
    aggregates: list[AggregateModel]
    csv: str
    agg_csv: str
    summary_json: str


class TraceRequest(BaseModel):
    """System config text plus the scheme and seed to trace."""

    config_text: str = Field(min_length=1)
    scheme: str
    seed: int = 0
    order: str = "increasing_snr"


class TraceResponse(BaseModel):
    scheme: str
    seed: int
    csv: str


class ChannelsRequest(BaseModel):
    config_text: str = Field(min_length=1)


class ChannelsResponse(BaseModel):
    csv: str
