"""Greedy itinerary construction under a time budget.

Starting from a given POI, the engine repeatedly ranks the unvisited POIs
and appends the best one while it still fits the remaining budget. Ranking
is by scoring function (embedding similarity or photo popularity), with
ties broken by photo count and then poi_id, so runs are reproducible.

The choice of the next stop never depends on the remaining budget; the
budget only decides where the tour is cut off. Itineraries for the same
inputs are therefore nested: enlarging the budget extends the stop list
without changing its prefix.

The mandatory start visit is charged against the budget like any other
stop; a budget too small even for the start still yields the start-only
itinerary.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .embedding.model import EmbeddingModel, cosine
from .errors import ConfigError, InputFormatError, UnknownEntityError
from .geo import DEFAULT_WALKING_SPEED_MPS, haversine_distance, travel_time
from .ingest import Poi, PoiStats, visit_duration

log = logging.getLogger(__name__)

DEFAULT_PAST_PENALTY = 0.5

SCORER_EMBEDDING = "embedding"
SCORER_BASELINE = "baseline"


@dataclass(frozen=True, slots=True)
class ScoringWeights:
    """Trade-off knobs for candidate scoring and travel estimation."""

    past_penalty: float = DEFAULT_PAST_PENALTY
    walking_speed: float = DEFAULT_WALKING_SPEED_MPS

    def __post_init__(self):
        if self.past_penalty < 0:
            raise ConfigError(f"past_penalty must be non-negative, got {self.past_penalty}")
        if self.walking_speed <= 0:
            raise ConfigError(f"walking_speed must be positive, got {self.walking_speed}")


@dataclass(frozen=True, slots=True)
class RecommendationRequest:
    start_poi_id: str
    time_budget: float
    weights: ScoringWeights = field(default_factory=ScoringWeights)

    def __post_init__(self):
        if self.time_budget <= 0:
            raise ConfigError(f"time_budget must be positive, got {self.time_budget}")


@dataclass(frozen=True, slots=True)
class ItineraryStop:
    poi_id: str
    arrival: float
    departure: float


@dataclass(frozen=True, slots=True)
class Itinerary:
    start_poi_id: str
    time_budget: float
    scorer: str
    stops: tuple[ItineraryStop, ...]

    @property
    def total_elapsed(self) -> float:
        return self.stops[-1].departure

    @property
    def poi_ids(self) -> list[str]:
        return [stop.poi_id for stop in self.stops]


def score_candidate(
    candidate: str,
    current: str,
    visited: Sequence[str],
    model: EmbeddingModel,
    weights: ScoringWeights,
) -> float:
    """Similarity to the present location minus the penalized mean
    similarity to already-visited tokens."""
    if not visited:
        raise ValueError("visited must be non-empty (it contains at least the start)")
    candidate_vec = model.vector(candidate)
    attraction = cosine(candidate_vec, model.vector(current))
    repulsion = sum(cosine(candidate_vec, model.vector(p)) for p in visited) / len(visited)
    return attraction - weights.past_penalty * repulsion


def _greedy_itinerary(
    request: RecommendationRequest,
    pois: Mapping[str, Poi],
    stats: Mapping[str, PoiStats],
    scorer_name: str,
    score: Callable[[str, str, list[str]], float | None],
) -> Itinerary:
    """Shared feasibility engine; only the scoring function differs between
    the embedding recommender and the popularity baseline.

    ``score`` returns None to exclude a candidate (e.g. no vector for it).
    """
    start = request.start_poi_id
    if start not in pois:
        raise UnknownEntityError(f"start POI '{start}' not in the POI table")
    speed = request.weights.walking_speed

    def photo_count(poi_id: str) -> int:
        poi_stats = stats.get(poi_id)
        return poi_stats.photo_count if poi_stats is not None else 0

    stops = [ItineraryStop(start, 0.0, visit_duration(stats, start))]
    visited = [start]
    current = start
    clock = stops[0].departure
    skipped = 0

    while True:
        ranked = []
        for poi_id in pois:
            if poi_id in visited:
                continue
            value = score(poi_id, current, visited)
            if value is None:
                skipped += 1
                continue
            ranked.append((-value, -photo_count(poi_id), poi_id))
        if not ranked:
            break
        best = min(ranked)[2]
        travel = travel_time(
            haversine_distance(pois[current].location, pois[best].location), speed
        )
        duration = visit_duration(stats, best)
        if clock + travel + duration > request.time_budget:
            break
        arrival = clock + travel
        clock = arrival + duration
        stops.append(ItineraryStop(best, arrival, clock))
        visited.append(best)
        current = best

    if skipped:
        log.info("excluded %d candidates without vectors", skipped)
    return Itinerary(start, request.time_budget, scorer_name, tuple(stops))


def recommend_itinerary(
    request: RecommendationRequest,
    model: EmbeddingModel,
    pois: Mapping[str, Poi],
    stats: Mapping[str, PoiStats],
) -> Itinerary:
    """Embedding-scored greedy itinerary."""
    start = request.start_poi_id
    if start not in pois:
        raise UnknownEntityError(f"start POI '{start}' not in the POI table")
    if not model.is_subword:
        if not any(poi.token in model.vocabulary for poi in pois.values()):
            raise UnknownEntityError("model vocabulary and POI table are disjoint")
        if pois[start].token not in model.vocabulary:
            raise UnknownEntityError(
                f"start POI '{start}' has no vector under this model"
            )

    token_of = {poi_id: poi.token for poi_id, poi in pois.items()}

    def score(candidate: str, current: str, visited: list[str]) -> float | None:
        try:
            return score_candidate(
                token_of[candidate],
                token_of[current],
                [token_of[p] for p in visited],
                model,
                request.weights,
            )
        except UnknownEntityError:
            return None

    return _greedy_itinerary(request, pois, stats, SCORER_EMBEDDING, score)


def baseline_popularity(
    request: RecommendationRequest,
    pois: Mapping[str, Poi],
    stats: Mapping[str, PoiStats],
) -> Itinerary:
    """Greedy itinerary by photo count alone; shares the feasibility engine
    with the embedding recommender."""

    def score(candidate: str, current: str, visited: list[str]) -> float:
        poi_stats = stats.get(candidate)
        return float(poi_stats.photo_count) if poi_stats is not None else 0.0

    return _greedy_itinerary(request, pois, stats, SCORER_BASELINE, score)


# --- serialization -----------------------------------------------------------


def format_itinerary_record(itinerary: Itinerary) -> str:
    """Line-delimited record: one header line, then one line per stop."""
    lines = [
        "itinerary"
        f";start={itinerary.start_poi_id}"
        f";budget={itinerary.time_budget:.1f}"
        f";scorer={itinerary.scorer}"
        f";total_elapsed={itinerary.total_elapsed:.1f}"
    ]
    for order, stop in enumerate(itinerary.stops):
        lines.append(f"stop;{order};{stop.poi_id};{stop.arrival:.1f};{stop.departure:.1f}")
    return "\n".join(lines) + "\n"


def parse_itinerary_record(text: str) -> Itinerary:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("itinerary;"):
        raise InputFormatError("itinerary record must start with an 'itinerary;' header", 1)
    header: dict[str, str] = {}
    for part in lines[0].split(";")[1:]:
        key, _, value = part.partition("=")
        header[key] = value
    try:
        start = header["start"]
        budget = float(header["budget"])
        scorer = header["scorer"]
    except (KeyError, ValueError) as exc:
        raise InputFormatError(f"bad itinerary header: {exc}", 1) from None
    stops = []
    for line_number, line in enumerate(lines[1:], start=2):
        parts = line.split(";")
        if len(parts) != 5 or parts[0] != "stop":
            raise InputFormatError("stop line must be 'stop;<n>;<poi>;<arr>;<dep>'", line_number)
        try:
            stops.append(ItineraryStop(parts[2], float(parts[3]), float(parts[4])))
        except ValueError as exc:
            raise InputFormatError(str(exc), line_number) from None
    if not stops:
        raise InputFormatError("itinerary record has no stops")
    return Itinerary(start, budget, scorer, tuple(stops))


def to_geojson(itinerary: Itinerary, pois: Mapping[str, Poi]) -> dict:
    """FeatureCollection with one Point per stop and a LineString through
    the stops in visit order (coordinates are [lon, lat])."""
    points = []
    path = []
    for order, stop in enumerate(itinerary.stops):
        poi = pois.get(stop.poi_id)
        if poi is None:
            raise UnknownEntityError(f"itinerary references unknown POI '{stop.poi_id}'")
        coordinates = [poi.location.longitude, poi.location.latitude]
        path.append(coordinates)
        points.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": coordinates},
                "properties": {
                    "order": order,
                    "poi_id": stop.poi_id,
                    "name": poi.name,
                    "arrival": stop.arrival,
                    "departure": stop.departure,
                },
            }
        )
    line = {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": path},
        "properties": {"scorer": itinerary.scorer, "total_elapsed": itinerary.total_elapsed},
    }
    return {"type": "FeatureCollection", "features": points + [line]}


def write_geojson(itinerary: Itinerary, pois: Mapping[str, Poi], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_geojson(itinerary, pois), fh, indent=2)
        fh.write("\n")
