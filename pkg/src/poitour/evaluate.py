"""Evaluation: overlap metrics, leave-one-out experiment runner, and the
hyperparameter sweep.

The overlap ratios follow the convention of dividing the intersection by
the *predicted* set for t_r and by the *actual* set for t_p. That is the
reverse of the usual recall/precision naming; ``conventional=True`` swaps
the denominators. F1 is the harmonic mean either way, so it is unaffected
by the swap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .embedding.corpus import build_corpus
from .embedding.model import DEFAULT_SEED, HyperParams
from .embedding.training import train
from .errors import InsufficientDataError, UnknownEntityError
from .ingest import Poi, PoiStats, Trajectory
from .recommend import (
    SCORER_BASELINE,
    SCORER_EMBEDDING,
    RecommendationRequest,
    ScoringWeights,
    baseline_popularity,
    recommend_itinerary,
)

log = logging.getLogger(__name__)

# A 1- or 2-POI ground truth cannot meaningfully score a multi-POI
# prediction; evaluation folds need at least 3 visits.
MIN_EVAL_VISITS = 3

RESULTS_HEADER = "city;scorer;model;dim;window;epochs;avg_t_r;avg_t_p;avg_f1;n_folds"


@dataclass(frozen=True, slots=True)
class MetricsReport:
    t_r: float
    t_p: float
    f1: float


def metrics(s_u: Iterable[str], s_p: Iterable[str], conventional: bool = False) -> MetricsReport:
    """Overlap ratios between an actual and a predicted POI set.

    Duplicates are removed before the set arithmetic. 0/0 cases (disjoint
    or empty predicted set) score 0.
    """
    actual = set(s_u)
    predicted = set(s_p)
    if not actual:
        raise ValueError("actual POI set must be non-empty")
    intersection = len(actual & predicted)

    by_predicted = intersection / len(predicted) if predicted else 0.0
    by_actual = intersection / len(actual)
    if conventional:
        t_r, t_p = by_actual, by_predicted
    else:
        t_r, t_p = by_predicted, by_actual
    # the harmonic mean of equal values is that value; taking the shortcut
    # keeps f1 exactly inside [min, max] instead of a rounding ulp above
    if t_r == t_p:
        f1 = t_r
    else:
        f1 = 2 * t_r * t_p / (t_r + t_p)
    return MetricsReport(t_r, t_p, f1)


@dataclass(frozen=True)
class CityDataset:
    """Everything the runner needs about one city."""

    city: str
    trajectories: tuple[Trajectory, ...]
    pois: Mapping[str, Poi]
    stats: Mapping[str, PoiStats]


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and protocol options for leave-one-out runs."""

    model_kinds: tuple[str, ...] = ("skipgram",)
    dims: tuple[int, ...] = (32,)
    windows: tuple[int, ...] = (3,)
    epochs: tuple[int, ...] = (50,)
    learning_rate: float = 0.025
    negative_samples: int = 5
    min_count: int = 1
    ngram_min: int = 3
    ngram_max: int = 6
    bucket_count: int = 2_000_000
    budget_seconds: float | None = None  # None: each fold uses its ground-truth elapsed time
    include_start: bool = True
    leaky: bool = False
    conventional_metrics: bool = False
    weights: ScoringWeights = field(default_factory=ScoringWeights)
    seed: int = DEFAULT_SEED
    threads: int = 1

    def __post_init__(self):
        if not (self.model_kinds and self.dims and self.windows and self.epochs):
            raise ValueError("hyperparameter grid must be non-empty")

    def grid(self) -> list[HyperParams]:
        """Grid cells in declaration order; validates every cell."""
        return [
            HyperParams(
                model_kind=kind,
                dim=dim,
                window=window,
                epochs=epochs,
                learning_rate_initial=self.learning_rate,
                negative_samples=self.negative_samples,
                min_count=self.min_count,
                ngram_min=self.ngram_min,
                ngram_max=self.ngram_max,
                bucket_count=self.bucket_count,
                seed=self.seed,
            )
            for kind, dim, window, epochs in product(
                self.model_kinds, self.dims, self.windows, self.epochs
            )
        ]


@dataclass(frozen=True, slots=True)
class FoldResult:
    user_id: str
    scorer: str
    report: MetricsReport


@dataclass(frozen=True)
class LeaveOneOutResult:
    city: str
    hyperparams: HyperParams
    folds: tuple[FoldResult, ...]

    def n_folds(self, scorer: str) -> int:
        return sum(1 for fold in self.folds if fold.scorer == scorer)

    def mean_report(self, scorer: str) -> MetricsReport:
        reports = [fold.report for fold in self.folds if fold.scorer == scorer]
        if not reports:
            raise InsufficientDataError(f"no folds for scorer '{scorer}'")
        n = len(reports)
        return MetricsReport(
            t_r=sum(r.t_r for r in reports) / n,
            t_p=sum(r.t_p for r in reports) / n,
            f1=sum(r.f1 for r in reports) / n,
        )


def evaluable_trajectories(trajectories: Sequence[Trajectory]) -> list[int]:
    return [i for i, t in enumerate(trajectories) if len(t) >= MIN_EVAL_VISITS]


def run_leave_one_out(
    dataset: CityDataset,
    hyperparams: HyperParams,
    config: ExperimentConfig,
) -> LeaveOneOutResult:
    """Score the embedding recommender and the popularity baseline on every
    evaluable trajectory of one city.

    Each fold starts at the trajectory's first POI with the trajectory's own
    elapsed time as budget (unless a fixed budget is configured) and is
    predicted by a model trained without that trajectory's sentence. In
    leaky mode a single model trained on everything is reused across folds.
    """
    trajectories = dataset.trajectories
    eval_indices = evaluable_trajectories(trajectories)
    if len(eval_indices) < 2:
        raise InsufficientDataError(
            f"need at least 2 evaluable trajectories (>= {MIN_EVAL_VISITS} visits), "
            f"got {len(eval_indices)}"
        )

    leaky_model = None
    if config.leaky:
        leaky_model = train(
            build_corpus(trajectories, dataset.pois), hyperparams, threads=config.threads
        )

    folds: list[FoldResult] = []
    for index in eval_indices:
        held_out = trajectories[index]
        if config.leaky:
            model = leaky_model
        else:
            training_set = [t for i, t in enumerate(trajectories) if i != index]
            model = train(
                build_corpus(training_set, dataset.pois), hyperparams, threads=config.threads
            )

        budget = config.budget_seconds if config.budget_seconds is not None else held_out.elapsed
        request = RecommendationRequest(
            start_poi_id=held_out.poi_ids[0],
            time_budget=float(budget),
            weights=config.weights,
        )

        actual = set(held_out.poi_ids)
        try:
            predicted_itinerary = recommend_itinerary(request, model, dataset.pois, dataset.stats)
            predicted = set(predicted_itinerary.poi_ids)
        except UnknownEntityError:
            # Start token unseen by the fold's model: the recommender cannot
            # rank anything, so the prediction degenerates to the start.
            log.info("fold %s: start token not in fold vocabulary", held_out.user_id)
            predicted = {request.start_poi_id}
        baseline_predicted = set(baseline_popularity(request, dataset.pois, dataset.stats).poi_ids)

        if not config.include_start:
            actual = actual - {request.start_poi_id}
            predicted = predicted - {request.start_poi_id}
            baseline_predicted = baseline_predicted - {request.start_poi_id}

        folds.append(
            FoldResult(
                held_out.user_id,
                SCORER_EMBEDDING,
                metrics(actual, predicted, config.conventional_metrics),
            )
        )
        folds.append(
            FoldResult(
                held_out.user_id,
                SCORER_BASELINE,
                metrics(actual, baseline_predicted, config.conventional_metrics),
            )
        )
    return LeaveOneOutResult(dataset.city, hyperparams, tuple(folds))


@dataclass(frozen=True, slots=True)
class ResultRow:
    city: str
    scorer: str
    model: str
    dim: int
    window: int
    epochs: int
    avg_t_r: float
    avg_t_p: float
    avg_f1: float
    n_folds: int

    def format(self) -> str:
        return (
            f"{self.city};{self.scorer};{self.model};{self.dim};{self.window};{self.epochs};"
            f"{self.avg_t_r:.4f};{self.avg_t_p:.4f};{self.avg_f1:.4f};{self.n_folds}"
        )


def run_sweep(
    datasets: Sequence[CityDataset],
    config: ExperimentConfig,
) -> list[ResultRow]:
    """One leave-one-out run per (city, grid cell); embedding rows per cell
    plus one popularity-baseline row per city."""
    rows: list[ResultRow] = []
    grid = config.grid()
    for dataset in datasets:
        for cell_index, hyperparams in enumerate(grid):
            result = run_leave_one_out(dataset, hyperparams, config)
            model_label = hyperparams.model_kind
            if config.leaky:
                model_label += ",leaky=true"
            embedding_mean = result.mean_report(SCORER_EMBEDDING)
            rows.append(
                ResultRow(
                    city=dataset.city,
                    scorer=SCORER_EMBEDDING,
                    model=model_label,
                    dim=hyperparams.dim,
                    window=hyperparams.window,
                    epochs=hyperparams.epochs,
                    avg_t_r=embedding_mean.t_r,
                    avg_t_p=embedding_mean.t_p,
                    avg_f1=embedding_mean.f1,
                    n_folds=result.n_folds(SCORER_EMBEDDING),
                )
            )
            if cell_index == 0:
                baseline_mean = result.mean_report(SCORER_BASELINE)
                rows.append(
                    ResultRow(
                        city=dataset.city,
                        scorer=SCORER_BASELINE,
                        model="-",
                        dim=0,
                        window=0,
                        epochs=0,
                        avg_t_r=baseline_mean.t_r,
                        avg_t_p=baseline_mean.t_p,
                        avg_f1=baseline_mean.f1,
                        n_folds=result.n_folds(SCORER_BASELINE),
                    )
                )
    return rows


def format_results_table(rows: Sequence[ResultRow]) -> str:
    return "\n".join([RESULTS_HEADER, *(row.format() for row in rows)]) + "\n"


def write_results_table(rows: Sequence[ResultRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_results_table(rows))


def best_embedding_rows(rows: Sequence[ResultRow]) -> list[ResultRow]:
    """Highest avg_f1 embedding row per city (first wins ties), in first-seen
    city order."""
    best: dict[str, ResultRow] = {}
    order: list[str] = []
    for row in rows:
        if row.scorer != SCORER_EMBEDDING:
            continue
        if row.city not in best:
            best[row.city] = row
            order.append(row.city)
        elif row.avg_f1 > best[row.city].avg_f1:
            best[row.city] = row
    return [best[city] for city in order]
