"""Analytic pass geometry for a circular orbit over a fixed ground station.

Earth is a non-rotating sphere and the orbit is circular, so a pass is fully
described by the cross-track offset of the ground station from the ground
track.  The default puts the station on the track (overhead pass, culminating
at 90 deg elevation); ``max_pass_elevation < pi/2`` moves it sideways.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, require


@dataclass(frozen=True)
class OrbitConfig:
    altitude: float = 750e3                      # m
    earth_radius: float = 6_371e3                # m
    gravitational_parameter: float = 3.986004418e14  # m^3/s^2
    min_elevation: float = math.radians(10.0)    # visibility mask, rad
    max_pass_elevation: float = math.pi / 2      # culmination, rad
    time_step: float = 10.0                      # s
    # Recorded in the echo only; the analytic pass ignores them.
    inclination: float = math.radians(98.0)
    raan: float = math.radians(295.0)
    drag_coefficient: float = 2.2
    reflectivity_coefficient: float = 1.3

    def __post_init__(self):
        require(self.altitude > 0, "altitude", f"must be > 0 (got {self.altitude})")
        require(self.earth_radius > 0, "earth_radius", "must be > 0")
        require(self.gravitational_parameter > 0, "gravitational_parameter", "must be > 0")
        require(self.time_step > 0, "time_step", f"must be > 0 (got {self.time_step})")
        require(
            0 < self.min_elevation < self.max_pass_elevation,
            "min_elevation",
            "must satisfy 0 < min_elevation < max_pass_elevation",
        )
        require(
            self.max_pass_elevation <= math.pi / 2,
            "max_pass_elevation",
            "must be <= pi/2",
        )

    @property
    def semi_major_axis(self) -> float:
        return self.earth_radius + self.altitude

    @property
    def mean_motion(self) -> float:
        """Orbital angular rate in rad/s."""
        return math.sqrt(self.gravitational_parameter / self.semi_major_axis**3)


@dataclass(frozen=True)
class PassSample:
    t: float             # s, 0 at culmination
    elevation: float     # rad
    zenith_angle: float  # rad
    slant_range: float   # m


def slant_range(elevation: float, cfg: OrbitConfig) -> float:
    """Station-to-spacecraft distance at a given elevation.

    Evaluates ``sqrt(Re^2 sin^2 e + 2 Re h + h^2) - Re sin e`` in the
    cancellation-free form ``h (2 Re + h) / (sqrt(...) + Re sin e)``.
    """
    if not 0.0 <= elevation <= math.pi / 2:
        raise DomainError(f"elevation must lie in [0, pi/2], got {elevation!r}")
    re, h = cfg.earth_radius, cfg.altitude
    s = math.sin(elevation)
    root = math.sqrt((re * s) ** 2 + 2.0 * re * h + h * h)
    return h * (2.0 * re + h) / (root + re * s)


def _central_angle(elevation: float, cfg: OrbitConfig) -> float:
    # Earth-central angle between station and sub-satellite point.
    return math.acos(cfg.earth_radius * math.cos(elevation) / cfg.semi_major_axis) - elevation


def _elevation_from_central_angle(gamma: float, cfg: OrbitConfig) -> float:
    return math.atan2(math.cos(gamma) - cfg.earth_radius / cfg.semi_major_axis, math.sin(gamma))


def _half_arc(cfg: OrbitConfig, threshold: float) -> float:
    """Along-track angle from culmination to where elevation drops to ``threshold``."""
    if threshold >= cfg.max_pass_elevation:
        return 0.0
    cross = _central_angle(cfg.max_pass_elevation, cfg)
    edge = _central_angle(threshold, cfg)
    return math.acos(min(1.0, math.cos(edge) / math.cos(cross)))


def elevation_at(t: float, cfg: OrbitConfig) -> float:
    """Elevation (rad) at time ``t`` measured from culmination."""
    cross = _central_angle(cfg.max_pass_elevation, cfg)
    along = cfg.mean_motion * abs(t)
    gamma = math.acos(math.cos(cross) * math.cos(along))
    return _elevation_from_central_angle(gamma, cfg)


def generate_pass(cfg: OrbitConfig) -> list[PassSample]:
    """Sample a pass every ``time_step`` seconds, symmetric about culmination.

    Only samples at or above ``min_elevation`` are returned.
    """
    t_edge = _half_arc(cfg, cfg.min_elevation) / cfg.mean_motion
    k_max = int(math.floor(t_edge / cfg.time_step))
    half = []
    for k in range(k_max + 1):
        t = k * cfg.time_step
        el = min(elevation_at(t, cfg), cfg.max_pass_elevation)
        if el < cfg.min_elevation:
            break
        half.append((t, el))
    samples = [_sample(-t, el, cfg) for t, el in reversed(half[1:])]
    samples += [_sample(t, el, cfg) for t, el in half]
    return samples


def _sample(t: float, elevation: float, cfg: OrbitConfig) -> PassSample:
    return PassSample(
        t=t,
        elevation=elevation,
        zenith_angle=math.pi / 2 - elevation,
        slant_range=slant_range(elevation, cfg),
    )


def pass_duration_above(cfg: OrbitConfig, threshold: float) -> float:
    """Length (s) of the continuous window around culmination with elevation >= threshold."""
    if threshold < cfg.min_elevation or threshold > math.pi / 2:
        raise DomainError(
            f"threshold must lie in [min_elevation, pi/2], got {math.degrees(threshold):.3f} deg"
        )
    return 2.0 * _half_arc(cfg, threshold) / cfg.mean_motion


def pass_table(samples: list[PassSample]) -> dict[str, np.ndarray]:
    """Column arrays in the order of the pass CSV (t_s, elevation_deg, zenith_deg, slant_range_m)."""
    return {
        "t_s": np.array([s.t for s in samples]),
        "elevation_deg": np.degrees([s.elevation for s in samples]),
        "zenith_deg": np.degrees([s.zenith_angle for s in samples]),
        "slant_range_m": np.array([s.slant_range for s in samples]),
    }
