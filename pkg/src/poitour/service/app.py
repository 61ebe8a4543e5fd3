"""FastAPI service wrapping the core package.

The service loads one model plus its city data at startup and serves any
number of concurrent itinerary requests over it; the underlying model and
tables are immutable after loading.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import ingest as ingest_mod
from ..embedding.model import EmbeddingModel, load_model
from ..errors import ConfigError, InsufficientDataError, PoitourError, UnknownEntityError
from ..evaluate import metrics
from ..ingest import Poi, PoiStats
from ..recommend import (
    RecommendationRequest,
    ScoringWeights,
    baseline_popularity,
    recommend_itinerary,
    to_geojson,
)
from .schemas import (
    HealthResponse,
    ItineraryResponse,
    MetricsRequest,
    MetricsResponse,
    ModelInfoResponse,
    PoiResponse,
    RecommendRequest,
    StopResponse,
)


@dataclass(frozen=True)
class ServingContext:
    """Immutable artifacts the service answers from."""

    model: EmbeddingModel
    pois: Mapping[str, Poi]
    stats: Mapping[str, PoiStats]


def load_context(model_path: str, pois_path: str, archive_path: str) -> ServingContext:
    model = load_model(model_path)
    pois = ingest_mod.read_poi_table_file(pois_path)
    trajectories = ingest_mod.read_archive(archive_path)
    stats_path = ingest_mod.stats_path_for(archive_path)
    if stats_path.exists():
        stats = ingest_mod.read_poi_stats(stats_path)
    else:
        stats = ingest_mod.stats_from_trajectories(trajectories, pois.keys())
    return ServingContext(model=model, pois=pois, stats=stats)


def _request_from_schema(payload: RecommendRequest) -> RecommendationRequest:
    return RecommendationRequest(
        start_poi_id=payload.start_poi_id,
        time_budget=payload.budget_seconds,
        weights=ScoringWeights(
            past_penalty=payload.past_penalty, walking_speed=payload.walking_speed
        ),
    )


def create_app(context: ServingContext) -> FastAPI:
    app = FastAPI(title="poitour", description="POI-embedding tour recommendation service")

    @app.exception_handler(PoitourError)
    async def poitour_error_handler(_: Request, exc: PoitourError) -> JSONResponse:
        if isinstance(exc, UnknownEntityError):
            status = 404
        elif isinstance(exc, (ConfigError, InsufficientDataError)):
            status = 422
        else:
            status = 500
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def run_recommendation(payload: RecommendRequest):
        request = _request_from_schema(payload)
        if payload.baseline:
            return baseline_popularity(request, context.pois, context.stats)
        return recommend_itinerary(request, context.model, context.pois, context.stats)

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse()

    @app.get("/model", response_model=ModelInfoResponse)
    async def model_info() -> ModelInfoResponse:
        model = context.model
        return ModelInfoResponse(
            model_kind=model.hyperparams.model_kind,
            dim=model.dim,
            vocab_size=len(model.vocabulary),
            subword=model.is_subword,
        )

    @app.get("/pois", response_model=list[PoiResponse])
    async def list_pois() -> list[PoiResponse]:
        out = []
        for poi_id in sorted(context.pois):
            poi = context.pois[poi_id]
            stats = context.stats.get(poi_id)
            out.append(
                PoiResponse(
                    poi_id=poi.poi_id,
                    name=poi.name,
                    category=poi.category,
                    latitude=poi.location.latitude,
                    longitude=poi.location.longitude,
                    photo_count=stats.photo_count if stats else 0,
                )
            )
        return out

    @app.post("/recommend", response_model=ItineraryResponse)
    async def recommend(payload: RecommendRequest) -> ItineraryResponse:
        itinerary = run_recommendation(payload)
        stops = [
            StopResponse(
                order=order,
                poi_id=stop.poi_id,
                name=context.pois[stop.poi_id].name,
                arrival=stop.arrival,
                departure=stop.departure,
            )
            for order, stop in enumerate(itinerary.stops)
        ]
        return ItineraryResponse(
            scorer=itinerary.scorer,
            start_poi_id=itinerary.start_poi_id,
            budget_seconds=itinerary.time_budget,
            total_elapsed=itinerary.total_elapsed,
            stops=stops,
        )

    @app.post("/recommend/geojson")
    async def recommend_geojson(payload: RecommendRequest) -> dict:
        itinerary = run_recommendation(payload)
        return to_geojson(itinerary, context.pois)

    @app.post("/metrics", response_model=MetricsResponse)
    async def score_metrics(payload: MetricsRequest) -> MetricsResponse:
        report = metrics(payload.actual, payload.predicted, payload.conventional)
        return MetricsResponse(t_r=report.t_r, t_p=report.t_p, f1=report.f1)

    return app


def create_app_from_paths(model_path: str, pois_path: str, archive_path: str) -> FastAPI:
    return create_app(load_context(model_path, pois_path, archive_path))
