"""Photo-visit ingestion: parsing, per-user sequencing, visit collapsing,
trajectory splitting and POI statistics.

File contracts
--------------
Visits file: UTF-8, one record per line, semicolon-separated, header line
exactly ``photo_id;user_id;timestamp;poi_id``; timestamp is integer unix
seconds UTC.

POI table file: UTF-8, semicolon-separated, header
``poi_id;name;category;lat;lon``; lat/lon in decimal degrees. POI name
whitespace is normalized to single underscores to form the embedding token.

Trajectory archive: one line per trajectory,
``user_id;<poi_id>,<arrival>,<departure>|<poi_id>,...``.

Stats file (written next to the archive as ``<archive>.stats``): header
``poi_id;photo_count;median_visit_duration``.
"""

from __future__ import annotations

import logging
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputFormatError
from .geo import GeoPoint

log = logging.getLogger(__name__)

VISITS_HEADER = "photo_id;user_id;timestamp;poi_id"
POIS_HEADER = "poi_id;name;category;lat;lon"
STATS_HEADER = "poi_id;photo_count;median_visit_duration"

# A new day tour starts after at least this much rest.
DEFAULT_GAP_THRESHOLD_S = 8 * 3600

# Single-photo visits have zero measured duration; without a floor every POI
# would be free to visit and the time budget would never bind.
VISIT_DURATION_FLOOR_S = 900.0


def normalize_token(name: str) -> str:
    """Collapse all whitespace runs in a POI name to single underscores."""
    return "_".join(name.split())


@dataclass(frozen=True, slots=True)
class VisitRecord:
    """One geotagged photo event, already mapped to a POI."""

    photo_id: str
    user_id: str
    timestamp: int
    poi_id: str


@dataclass(frozen=True, slots=True)
class Poi:
    """A point of interest; ``token`` is its embedding token."""

    poi_id: str
    name: str
    category: str
    location: GeoPoint

    @property
    def token(self) -> str:
        return normalize_token(self.name)


@dataclass(frozen=True, slots=True)
class Visit:
    """A timed stay at one POI, collapsed from consecutive same-POI photos."""

    poi_id: str
    arrival: int
    departure: int

    def __post_init__(self):
        if self.arrival > self.departure:
            raise ValueError(f"visit arrival {self.arrival} after departure {self.departure}")

    @property
    def duration(self) -> int:
        return self.departure - self.arrival


@dataclass(frozen=True, slots=True)
class Trajectory:
    """One user's time-ordered POI sequence within a single day tour."""

    user_id: str
    visits: tuple[Visit, ...]

    def __post_init__(self):
        for prev, cur in zip(self.visits, self.visits[1:]):
            if prev.departure > cur.arrival:
                raise ValueError(f"visits out of order for user {self.user_id}")
            if prev.poi_id == cur.poi_id:
                raise ValueError(f"consecutive visits share poi {prev.poi_id}")

    def __len__(self) -> int:
        return len(self.visits)

    @property
    def poi_ids(self) -> list[str]:
        return [v.poi_id for v in self.visits]

    @property
    def elapsed(self) -> int:
        """Seconds from first arrival to last departure."""
        return self.visits[-1].departure - self.visits[0].arrival


@dataclass(frozen=True, slots=True)
class PoiStats:
    """Popularity and typical stay length for one POI."""

    poi_id: str
    photo_count: int
    median_visit_duration: float


def _split_line(line: str, n_fields: int, line_number: int) -> list[str]:
    parts = line.rstrip("\n").split(";")
    if len(parts) != n_fields:
        raise InputFormatError(
            f"expected {n_fields} ';'-separated fields, got {len(parts)}", line_number
        )
    return parts


def parse_visits(lines: Iterable[str]) -> list[VisitRecord]:
    """Parse a visits stream into records, preserving line order.

    Raises InputFormatError naming the offending line and field. Unknown
    poi_ids are not checked here; they are resolved later against the POI
    table.
    """
    it = iter(lines)
    header = next(it, None)
    if header is None or header.rstrip("\n") != VISITS_HEADER:
        raise InputFormatError(f"visits header must be exactly '{VISITS_HEADER}'", 1)
    records = []
    for line_number, line in enumerate(it, start=2):
        if not line.strip():
            continue
        photo_id, user_id, ts_raw, poi_id = _split_line(line, 4, line_number)
        if not photo_id or not user_id or not poi_id:
            raise InputFormatError("empty id field", line_number)
        try:
            timestamp = int(ts_raw)
        except ValueError:
            raise InputFormatError(f"timestamp '{ts_raw}' is not an integer", line_number) from None
        if timestamp <= 0:
            raise InputFormatError(f"timestamp must be positive, got {timestamp}", line_number)
        records.append(VisitRecord(photo_id, user_id, timestamp, poi_id))
    return records


def parse_poi_table(lines: Iterable[str]) -> dict[str, Poi]:
    """Parse the POI table into a dict keyed by poi_id."""
    it = iter(lines)
    header = next(it, None)
    if header is None or header.rstrip("\n") != POIS_HEADER:
        raise InputFormatError(f"POI table header must be exactly '{POIS_HEADER}'", 1)
    pois: dict[str, Poi] = {}
    for line_number, line in enumerate(it, start=2):
        if not line.strip():
            continue
        poi_id, name, category, lat_raw, lon_raw = _split_line(line, 5, line_number)
        if not poi_id:
            raise InputFormatError("empty poi_id", line_number)
        if not normalize_token(name):
            raise InputFormatError(f"POI '{poi_id}' has an empty name", line_number)
        if poi_id in pois:
            raise InputFormatError(f"duplicate poi_id '{poi_id}'", line_number)
        try:
            location = GeoPoint(float(lat_raw), float(lon_raw))
        except ValueError as exc:
            raise InputFormatError(str(exc), line_number) from None
        pois[poi_id] = Poi(poi_id, name, category, location)
    return pois


def read_visits_file(path: str | Path) -> list[VisitRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_visits(fh)


def read_poi_table_file(path: str | Path) -> dict[str, Poi]:
    with open(path, encoding="utf-8") as fh:
        return parse_poi_table(fh)


def resolve_records(
    records: Sequence[VisitRecord], pois: dict[str, Poi]
) -> tuple[list[VisitRecord], int]:
    """Drop records whose poi_id is not in the POI table.

    Real photo datasets are dirty; unknown POIs are logged and dropped
    rather than treated as a hard error. Returns (kept, dropped_count).
    """
    kept = [r for r in records if r.poi_id in pois]
    dropped = len(records) - len(kept)
    if dropped:
        log.warning("dropped %d records referencing unknown POIs", dropped)
    return kept, dropped


def build_user_sequences(records: Sequence[VisitRecord]) -> dict[str, list[VisitRecord]]:
    """Group records per user, sorted by timestamp with photo_id tie-break."""
    by_user: dict[str, list[VisitRecord]] = defaultdict(list)
    for record in records:
        by_user[record.user_id].append(record)
    for user_records in by_user.values():
        user_records.sort(key=lambda r: (r.timestamp, r.photo_id))
    return dict(by_user)


def collapse_visits(sorted_records: Sequence[VisitRecord]) -> list[Visit]:
    """Collapse maximal runs of consecutive same-POI records into visits."""
    visits: list[Visit] = []
    run_start = None
    run_end = None
    run_poi = None
    for record in sorted_records:
        if record.poi_id == run_poi:
            run_end = record.timestamp
        else:
            if run_poi is not None:
                visits.append(Visit(run_poi, run_start, run_end))
            run_poi = record.poi_id
            run_start = record.timestamp
            run_end = record.timestamp
    if run_poi is not None:
        visits.append(Visit(run_poi, run_start, run_end))
    return visits


def split_trajectories(
    user_id: str,
    visits: Sequence[Visit],
    gap_threshold: int = DEFAULT_GAP_THRESHOLD_S,
) -> list[Trajectory]:
    """Split a user's visit stream into day tours.

    A new trajectory starts whenever the rest between the previous departure
    and the next arrival reaches ``gap_threshold`` ("at least" semantics, so
    a gap of exactly the threshold splits).
    """
    trajectories: list[Trajectory] = []
    current: list[Visit] = []
    for visit in visits:
        if current and visit.arrival - current[-1].departure >= gap_threshold:
            trajectories.append(Trajectory(user_id, tuple(current)))
            current = []
        current.append(visit)
    if current:
        trajectories.append(Trajectory(user_id, tuple(current)))
    return trajectories


def build_trajectories(
    records: Sequence[VisitRecord],
    gap_threshold: int = DEFAULT_GAP_THRESHOLD_S,
) -> list[Trajectory]:
    """Full per-user pipeline: sort, collapse, split.

    Users are processed in sorted id order so output is deterministic
    regardless of input order.
    """
    sequences = build_user_sequences(records)
    trajectories: list[Trajectory] = []
    for user_id in sorted(sequences):
        visits = collapse_visits(sequences[user_id])
        trajectories.extend(split_trajectories(user_id, visits, gap_threshold))
    return trajectories


def compute_poi_stats(
    records: Sequence[VisitRecord],
    trajectories: Sequence[Trajectory],
    poi_ids: Iterable[str] | None = None,
) -> dict[str, PoiStats]:
    """Per-POI photo counts and median visit durations.

    ``poi_ids`` extends the result to table POIs that never appear in the
    data; those get photo_count 0 and the duration floor. Median durations
    are floored at VISIT_DURATION_FLOOR_S.
    """
    photo_counts = Counter(r.poi_id for r in records)
    durations: dict[str, list[int]] = defaultdict(list)
    for trajectory in trajectories:
        for visit in trajectory.visits:
            durations[visit.poi_id].append(visit.duration)

    all_ids = set(photo_counts) | set(durations)
    if poi_ids is not None:
        all_ids |= set(poi_ids)

    stats = {}
    for poi_id in all_ids:
        if durations[poi_id]:
            median = float(statistics.median(durations[poi_id]))
        else:
            median = 0.0
        stats[poi_id] = PoiStats(
            poi_id=poi_id,
            photo_count=photo_counts.get(poi_id, 0),
            median_visit_duration=max(median, VISIT_DURATION_FLOOR_S),
        )
    return stats


def visit_duration(stats: dict[str, PoiStats], poi_id: str) -> float:
    """Estimated stay length for a POI, floor value when unknown."""
    poi_stats = stats.get(poi_id)
    if poi_stats is None:
        return VISIT_DURATION_FLOOR_S
    return poi_stats.median_visit_duration


# --- archive / stats persistence ------------------------------------------


def write_archive(trajectories: Sequence[Trajectory], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trajectory in trajectories:
            visits = "|".join(
                f"{v.poi_id},{v.arrival},{v.departure}" for v in trajectory.visits
            )
            fh.write(f"{trajectory.user_id};{visits}\n")


def read_archive(path: str | Path) -> list[Trajectory]:
    trajectories = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(";")
            if len(parts) != 2 or not parts[0]:
                raise InputFormatError("archive line must be 'user_id;visits'", line_number)
            user_id, visits_raw = parts
            visits = []
            for chunk in visits_raw.split("|"):
                fields = chunk.split(",")
                if len(fields) != 3:
                    raise InputFormatError(
                        f"visit '{chunk}' must be 'poi_id,arrival,departure'", line_number
                    )
                try:
                    visits.append(Visit(fields[0], int(fields[1]), int(fields[2])))
                except ValueError as exc:
                    raise InputFormatError(str(exc), line_number) from None
            try:
                trajectories.append(Trajectory(user_id, tuple(visits)))
            except ValueError as exc:
                raise InputFormatError(str(exc), line_number) from None
    return trajectories


def stats_path_for(archive_path: str | Path) -> Path:
    return Path(f"{archive_path}.stats")


def write_poi_stats(stats: dict[str, PoiStats], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(STATS_HEADER + "\n")
        for poi_id in sorted(stats):
            s = stats[poi_id]
            fh.write(f"{s.poi_id};{s.photo_count};{s.median_visit_duration:.9g}\n")


def read_poi_stats(path: str | Path) -> dict[str, PoiStats]:
    stats = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != STATS_HEADER:
            raise InputFormatError(f"stats header must be exactly '{STATS_HEADER}'", 1)
        for line_number, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            poi_id, count_raw, duration_raw = _split_line(line, 3, line_number)
            try:
                stats[poi_id] = PoiStats(poi_id, int(count_raw), float(duration_raw))
            except ValueError as exc:
                raise InputFormatError(str(exc), line_number) from None
    return stats


def stats_from_trajectories(
    trajectories: Sequence[Trajectory],
    poi_ids: Iterable[str] | None = None,
) -> dict[str, PoiStats]:
    """Reconstruct approximate stats from an archive alone.

    Used when no stats sidecar is available: visit counts stand in for
    photo counts.
    """
    counts = Counter(v.poi_id for t in trajectories for v in t.visits)
    durations: dict[str, list[int]] = defaultdict(list)
    for trajectory in trajectories:
        for visit in trajectory.visits:
            durations[visit.poi_id].append(visit.duration)
    all_ids = set(counts)
    if poi_ids is not None:
        all_ids |= set(poi_ids)
    stats = {}
    for poi_id in all_ids:
        if durations[poi_id]:
            median = float(statistics.median(durations[poi_id]))
        else:
            median = 0.0
        stats[poi_id] = PoiStats(poi_id, counts.get(poi_id, 0), max(median, VISIT_DURATION_FLOOR_S))
    return stats
