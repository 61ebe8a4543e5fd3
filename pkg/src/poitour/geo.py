"""Geographic primitives: great-circle distance and travel-time estimation.

All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

# Mean Earth radius in meters; fixed so results are reproducible everywhere.
EARTH_RADIUS_M = 6_371_000.0

# Tourists on foot, roughly 4.5 km/h.
DEFAULT_WALKING_SPEED_MPS = 1.25


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A WGS84 coordinate pair in decimal degrees."""

    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, in meters.

    Symmetric, non-negative, and zero exactly when the coordinates are equal.
    """
    if a == b:
        return 0.0
    phi1 = math.radians(a.latitude)
    phi2 = math.radians(b.latitude)
    dphi = phi2 - phi1
    dlam = math.radians(b.longitude - a.longitude)

    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def travel_time(distance_m: float, speed_mps: float = DEFAULT_WALKING_SPEED_MPS) -> float:
    """Seconds needed to cover ``distance_m`` at constant ``speed_mps``."""
    if speed_mps <= 0:
        raise ConfigError(f"speed must be positive, got {speed_mps}")
    if distance_m < 0:
        raise ValueError(f"distance must be non-negative, got {distance_m}")
    return distance_m / speed_mps
