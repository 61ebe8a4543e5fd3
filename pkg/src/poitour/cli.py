"""Command-line front door.

Thin wiring over the library: every subcommand reads declared inputs,
calls into the core modules and writes declared outputs. stdout carries
only machine-readable results; diagnostics go to stderr.

Exit codes: 0 success, 1 usage/configuration, 2 input parse, 3 empty or
insufficient data, 4 unresolvable entity.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import evaluate as evaluate_mod
from . import ingest as ingest_mod
from .embedding import HyperParams, build_corpus, load_model, save_model, train
from .errors import (
    ConfigError,
    InputFormatError,
    InsufficientDataError,
    PoitourError,
    UnknownEntityError,
)
from .recommend import (
    RecommendationRequest,
    ScoringWeights,
    baseline_popularity,
    format_itinerary_record,
    parse_itinerary_record,
    recommend_itinerary,
    to_geojson,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_EMPTY = 3
EXIT_UNRESOLVED = 4

log = logging.getLogger(__name__)


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase stderr log detail.")
def cli(verbose: int) -> None:
    """Tour-itinerary recommendation from POI embeddings."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_city(visits_path: str, pois_path: str):
    records = ingest_mod.read_visits_file(visits_path)
    pois = ingest_mod.read_poi_table_file(pois_path)
    kept, dropped = ingest_mod.resolve_records(records, pois)
    trajectories = ingest_mod.build_trajectories(kept)
    stats = ingest_mod.compute_poi_stats(kept, trajectories, pois.keys())
    return records, kept, dropped, pois, trajectories, stats


@cli.command("ingest")
@click.option("--visits", "visits_paths", multiple=True, required=True,
              help="Visits file (repeat for multiple cities).")
@click.option("--pois", "pois_paths", multiple=True, required=True,
              help="POI table file, one per --visits in the same order.")
@click.option("--out", "out_path", required=True, help="Trajectory archive output path.")
def cmd_ingest(visits_paths, pois_paths, out_path) -> None:
    """Parse photo visits, build day-tour trajectories, write archive + stats."""
    if len(visits_paths) != len(pois_paths):
        raise click.UsageError("--visits and --pois must be given the same number of times")
    totals = {"users": set(), "records": 0, "trajectories": 0, "pois": 0, "dropped": 0}
    multi_city = len(visits_paths) > 1
    for visits_path, pois_path in zip(visits_paths, pois_paths):
        records, kept, dropped, pois, trajectories, stats = _load_city(visits_path, pois_path)
        city = Path(visits_path).stem
        archive_path = f"{out_path}.{city}" if multi_city else out_path
        ingest_mod.write_archive(trajectories, archive_path)
        ingest_mod.write_poi_stats(stats, ingest_mod.stats_path_for(archive_path))
        log.info("city %s: %d trajectories -> %s", city, len(trajectories), archive_path)
        totals["users"].update(r.user_id for r in records)
        totals["records"] += len(records)
        totals["trajectories"] += len(trajectories)
        totals["pois"] += len(pois)
        totals["dropped"] += dropped
    click.echo(
        f"users={len(totals['users'])} records={totals['records']} "
        f"trajectories={totals['trajectories']} pois={totals['pois']} "
        f"cities={len(visits_paths)} dropped={totals['dropped']}"
    )


def _hyperparams_options(fn):
    options = [
        click.option("--model-kind", default="skipgram", show_default=True,
                     help="skipgram, cbow, fasttext_skipgram or fasttext_cbow."),
        click.option("--dim", default=32, show_default=True, type=int),
        click.option("--window", default=3, show_default=True, type=int),
        click.option("--epochs", default=50, show_default=True, type=int),
        click.option("--lr", default=0.025, show_default=True, type=float),
        click.option("--negatives", default=5, show_default=True, type=int),
        click.option("--min-count", default=1, show_default=True, type=int),
        click.option("--ngram-min", default=3, show_default=True, type=int),
        click.option("--ngram-max", default=6, show_default=True, type=int),
        click.option("--buckets", default=2_000_000, show_default=True, type=int),
        click.option("--seed", default=1, show_default=True, type=int),
        click.option("--threads", default=1, show_default=True, type=int),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@cli.command("train")
@click.option("--archive", "archive_path", required=True, help="Trajectory archive from ingest.")
@click.option("--pois", "pois_path", required=True, help="POI table (for embedding tokens).")
@click.option("--out", "out_path", required=True, help="Model file output path.")
@_hyperparams_options
def cmd_train(archive_path, pois_path, out_path, model_kind, dim, window, epochs, lr,
              negatives, min_count, ngram_min, ngram_max, buckets, seed, threads) -> None:
    """Train POI vectors on a trajectory archive."""
    trajectories = ingest_mod.read_archive(archive_path)
    pois = ingest_mod.read_poi_table_file(pois_path)
    hyperparams = HyperParams(
        model_kind=model_kind, dim=dim, window=window, epochs=epochs,
        learning_rate_initial=lr, negative_samples=negatives, min_count=min_count,
        ngram_min=ngram_min, ngram_max=ngram_max, bucket_count=buckets, seed=seed,
    )
    corpus = build_corpus(trajectories, pois)
    model = train(corpus, hyperparams, threads=threads)
    save_model(model, out_path)
    log.info("saved %d x %d model to %s", len(model.vocabulary), model.dim, out_path)
    click.echo(f"final_loss={model.epoch_losses[-1]:.6f}")


def _stats_for_archive(archive_path, trajectories, pois):
    stats_path = ingest_mod.stats_path_for(archive_path)
    if stats_path.exists():
        return ingest_mod.read_poi_stats(stats_path)
    log.info("no stats sidecar at %s; deriving stats from the archive", stats_path)
    return ingest_mod.stats_from_trajectories(trajectories, pois.keys())


@cli.command("recommend")
@click.option("--model", "model_path", required=True, help="Trained model file.")
@click.option("--pois", "pois_path", required=True)
@click.option("--archive", "archive_path", required=True,
              help="Trajectory archive (visit durations and popularity).")
@click.option("--start", "start_poi", required=True, help="Starting POI id.")
@click.option("--budget-seconds", required=True, type=float)
@click.option("--lambda", "past_penalty", default=0.5, show_default=True, type=float,
              help="Penalty weight against already-visited POIs.")
@click.option("--speed", default=1.25, show_default=True, type=float, help="Walking speed, m/s.")
@click.option("--baseline", is_flag=True, help="Use the photo-popularity scorer instead.")
@click.option("--geojson", "geojson_path", default=None, help="Also write the route as GeoJSON.")
@click.option("--out", "out_path", default=None, help="Write the itinerary record here instead of stdout.")
def cmd_recommend(model_path, pois_path, archive_path, start_poi, budget_seconds,
                  past_penalty, speed, baseline, geojson_path, out_path) -> None:
    """Generate one itinerary from a trained model."""
    pois = ingest_mod.read_poi_table_file(pois_path)
    trajectories = ingest_mod.read_archive(archive_path)
    stats = _stats_for_archive(archive_path, trajectories, pois)
    request = RecommendationRequest(
        start_poi_id=start_poi,
        time_budget=budget_seconds,
        weights=ScoringWeights(past_penalty=past_penalty, walking_speed=speed),
    )
    if baseline:
        itinerary = baseline_popularity(request, pois, stats)
    else:
        model = load_model(model_path)
        itinerary = recommend_itinerary(request, model, pois, stats)
    record = format_itinerary_record(itinerary)
    if out_path:
        Path(out_path).write_text(record, encoding="utf-8")
    else:
        click.echo(record, nl=False)
    if geojson_path:
        with open(geojson_path, "w", encoding="utf-8") as fh:
            json.dump(to_geojson(itinerary, pois), fh, indent=2)
            fh.write("\n")


@cli.command("evaluate")
@click.option("--archive", "archive_paths", multiple=True, required=True,
              help="Trajectory archive (repeat for multiple cities).")
@click.option("--pois", "pois_path", required=True)
@click.option("--model-kind", "model_kinds", multiple=True, default=("skipgram",),
              show_default=True)
@click.option("--dim", "dims", multiple=True, type=int, default=(32,), show_default=True)
@click.option("--window", "windows", multiple=True, type=int, default=(3,), show_default=True)
@click.option("--epochs", "epochs_grid", multiple=True, type=int, default=(50,), show_default=True)
@click.option("--lr", default=0.025, show_default=True, type=float)
@click.option("--negatives", default=5, show_default=True, type=int)
@click.option("--min-count", default=1, show_default=True, type=int)
@click.option("--ngram-min", default=3, show_default=True, type=int)
@click.option("--ngram-max", default=6, show_default=True, type=int)
@click.option("--buckets", default=2_000_000, show_default=True, type=int)
@click.option("--seed", default=1, show_default=True, type=int)
@click.option("--budget-seconds", default=None, type=float,
              help="Fixed budget per fold; default is each fold's ground-truth elapsed time.")
@click.option("--lambda", "past_penalty", default=0.5, show_default=True, type=float)
@click.option("--speed", default=1.25, show_default=True, type=float)
@click.option("--conventional-metrics", is_flag=True,
              help="Swap the overlap denominators to conventional recall/precision.")
@click.option("--exclude-start", is_flag=True, help="Drop the start POI from both sets.")
@click.option("--leaky", is_flag=True, help="Train once on everything (fast, optimistic).")
@click.option("--threads", default=1, show_default=True, type=int)
@click.option("--out", "out_path", default=None, help="Results table path (default stdout).")
def cmd_evaluate(archive_paths, pois_path, model_kinds, dims, windows, epochs_grid, lr,
                 negatives, min_count, ngram_min, ngram_max, buckets, seed, budget_seconds,
                 past_penalty, speed, conventional_metrics, exclude_start, leaky, threads,
                 out_path) -> None:
    """Leave-one-out sweep over a hyperparameter grid, embedding vs baseline."""
    pois = ingest_mod.read_poi_table_file(pois_path)
    datasets = []
    for archive_path in archive_paths:
        trajectories = ingest_mod.read_archive(archive_path)
        stats = _stats_for_archive(archive_path, trajectories, pois)
        datasets.append(
            evaluate_mod.CityDataset(
                city=Path(archive_path).stem,
                trajectories=tuple(trajectories),
                pois=pois,
                stats=stats,
            )
        )
    config = evaluate_mod.ExperimentConfig(
        model_kinds=tuple(model_kinds),
        dims=tuple(dims),
        windows=tuple(windows),
        epochs=tuple(epochs_grid),
        learning_rate=lr,
        negative_samples=negatives,
        min_count=min_count,
        ngram_min=ngram_min,
        ngram_max=ngram_max,
        bucket_count=buckets,
        budget_seconds=budget_seconds,
        include_start=not exclude_start,
        leaky=leaky,
        conventional_metrics=conventional_metrics,
        weights=ScoringWeights(past_penalty=past_penalty, walking_speed=speed),
        seed=seed,
        threads=threads,
    )
    rows = evaluate_mod.run_sweep(datasets, config)
    table = evaluate_mod.format_results_table(rows)
    if out_path:
        Path(out_path).write_text(table, encoding="utf-8")
    else:
        click.echo(table, nl=False)
    for row in evaluate_mod.best_embedding_rows(rows):
        click.echo(
            f"best;{row.city};{row.model};{row.dim};{row.window};{row.epochs};{row.avg_f1:.4f}"
        )


@cli.command("export-geojson")
@click.option("--pois", "pois_path", required=True)
@click.option("--out", "out_path", default=None, help="GeoJSON path (default stdout).")
def cmd_export_geojson(pois_path, out_path) -> None:
    """Convert an itinerary record (stdin) to GeoJSON."""
    pois = ingest_mod.read_poi_table_file(pois_path)
    itinerary = parse_itinerary_record(sys.stdin.read())
    payload = json.dumps(to_geojson(itinerary, pois), indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(payload, encoding="utf-8")
    else:
        click.echo(payload, nl=False)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the stable exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except InputFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_PARSE
    except InsufficientDataError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_EMPTY
    except UnknownEntityError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_UNRESOLVED
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except PoitourError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
