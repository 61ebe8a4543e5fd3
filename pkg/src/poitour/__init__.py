"""poitour: tour-itinerary recommendation from POI embeddings.

Pipeline: ingest geotagged photo visits into day-tour trajectories, train
POI vectors on them (skip-gram / CBOW / subword variants with negative
sampling), then build time-budgeted itineraries by greedily picking the
unvisited POI most similar to the current location and least similar to
the POIs already seen. A photo-popularity baseline and a leave-one-out
evaluation harness round out the package.
"""

from .embedding import (
    Corpus,
    EmbeddingModel,
    HyperParams,
    Vocabulary,
    build_corpus,
    build_vocab,
    cosine,
    load_model,
    save_model,
    train,
)
from .errors import (
    ConfigError,
    InputFormatError,
    InsufficientDataError,
    PoitourError,
    TrainingDivergedError,
    UnknownEntityError,
)
from .evaluate import (
    CityDataset,
    ExperimentConfig,
    MetricsReport,
    metrics,
    run_leave_one_out,
    run_sweep,
)
from .geo import GeoPoint, haversine_distance, travel_time
from .ingest import (
    Poi,
    PoiStats,
    Trajectory,
    Visit,
    VisitRecord,
    build_trajectories,
    collapse_visits,
    compute_poi_stats,
    parse_poi_table,
    parse_visits,
    split_trajectories,
)
from .recommend import (
    Itinerary,
    RecommendationRequest,
    ScoringWeights,
    baseline_popularity,
    recommend_itinerary,
    score_candidate,
    to_geojson,
)

__version__ = "0.1.0"
