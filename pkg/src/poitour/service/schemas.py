"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class ModelInfoResponse(BaseModel):
    model_kind: str
    dim: int
    vocab_size: int
    subword: bool


class PoiResponse(BaseModel):
    poi_id: str
    name: str
    category: str
    latitude: float
    longitude: float
    photo_count: int


class RecommendRequest(BaseModel):
    start_poi_id: str
    budget_seconds: float = Field(gt=0)
    past_penalty: float = Field(default=0.5, ge=0, alias="lambda")
    walking_speed: float = Field(default=1.25, gt=0)
    baseline: bool = False

    model_config = {"populate_by_name": True}


class StopResponse(BaseModel):
    order: int
    poi_id: str
    name: str
    arrival: float
    departure: float


class ItineraryResponse(BaseModel):
    scorer: str
    start_poi_id: str
    budget_seconds: float
    total_elapsed: float
    stops: list[StopResponse]


class MetricsRequest(BaseModel):
    actual: list[str] = Field(min_length=1)
    predicted: list[str]
    conventional: bool = False


class MetricsResponse(BaseModel):
    t_r: float
    t_p: float
    f1: float
