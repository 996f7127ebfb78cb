"""Static atmosphere: transmissivity, depolarization and sky background.

All three are parametric profiles pinned to published zenith (and, for the
background, low-elevation) values rather than radiative-transfer runs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .beamoptics import ReceiverConfig, photon_energy
from .errors import DomainError, require

MAX_ZENITH = math.radians(85.0)


def _secant(zenith_angle: float, cap: float = MAX_ZENITH) -> float:
    return 1.0 / math.cos(min(zenith_angle, cap))


def airmass(zenith_angle: float, model: str = "secant", cap: float = MAX_ZENITH) -> float:
    """Relative air mass; the zenith angle is capped at ``cap``."""
    z = min(zenith_angle, cap)
    if model == "secant":
        return 1.0 / math.cos(z)
    if model == "kasten-young":
        zd = math.degrees(z)
        return 1.0 / (math.cos(z) + 0.50572 * (96.07995 - zd) ** -1.6364)
    raise ValueError(f"unknown airmass model {model!r}")


@dataclass(frozen=True)
class AtmosphereModel:
    tau_zenith: float = 0.851
    dop_zenith: float = 0.968
    dop_horizon: float = 0.961
    dop_interpolation: Literal["linear-in-secant", "table"] = "linear-in-secant"
    # (elevation_deg, dop) knots used by the "table" interpolation
    dop_table: tuple[tuple[float, float], ...] = ((0.0, 0.961), (90.0, 0.968))
    depolarization_exponent: float = 2.0
    snr_exponent: float = 2.0

    def __post_init__(self):
        for name in ("tau_zenith", "dop_zenith", "dop_horizon"):
            value = getattr(self, name)
            require(0 < value <= 1, name, f"must lie in (0, 1] (got {value})")
        require(self.dop_interpolation in ("linear-in-secant", "table"), "dop_interpolation",
                "must be 'linear-in-secant' or 'table'")
        require(len(self.dop_table) >= 2, "dop_table", "needs at least two knots")
        require(all(0 < d <= 1 for _, d in self.dop_table), "dop_table",
                "DoP values must lie in (0, 1]")
        require(self.depolarization_exponent > 0, "depolarization_exponent", "must be > 0")
        require(self.snr_exponent > 0, "snr_exponent", "must be > 0")


def transmissivity(zenith_angle: float, m: AtmosphereModel) -> float:
    """tau_zen ** sec(zenith), secant capped at 85 deg."""
    if zenith_angle < 0:
        raise DomainError(f"zenith angle must be >= 0, got {zenith_angle}")
    return m.tau_zenith ** _secant(zenith_angle)


def atmospheric_loss_db(zenith_angle: float, m: AtmosphereModel) -> float:
    return -10.0 * math.log10(transmissivity(zenith_angle, m))


def dop(elevation: float, m: AtmosphereModel) -> float:
    """Degree of polarization of the received photons at ``elevation``.

    The default interpolates the zenith and horizon values linearly in
    sec(zenith), which is proportional to the scattering path length; the
    horizon end is the 85 deg secant cap.
    """
    if not 0.0 <= elevation <= math.pi / 2:
        raise DomainError(f"elevation must lie in [0, pi/2], got {elevation}")
    if m.dop_interpolation == "table":
        knots = sorted(m.dop_table)
        return float(np.interp(math.degrees(elevation), [k[0] for k in knots], [k[1] for k in knots]))
    weight = (_secant(math.pi / 2 - elevation) - 1.0) / (_secant(MAX_ZENITH) - 1.0)
    return m.dop_zenith + (m.dop_horizon - m.dop_zenith) * weight


def fraction_loss_db(fraction: float, exponent: float = 2.0) -> float:
    """``-10 * exponent * log10(fraction)``; exponent 2 is the field-amplitude convention."""
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
    return -10.0 * exponent * math.log10(fraction)


def depolarization_loss_db(dop_value: float, exponent: float = 2.0) -> float:
    return fraction_loss_db(dop_value, exponent)


def snr_loss_db(signal_fraction_value: float, exponent: float = 2.0) -> float:
    return fraction_loss_db(signal_fraction_value, exponent)


def signal_fraction(signal_cps: float, background_cps: float) -> float:
    """S / (S + B)."""
    if signal_cps < 0 or background_cps < 0:
        raise DomainError("count rates must be >= 0")
    total = signal_cps + background_cps
    if total == 0:
        raise DomainError("signal fraction undefined when both rates are zero")
    return signal_cps / total


@dataclass(frozen=True)
class BackgroundModel:
    """Night-sky background seen by the receiver.

    ``radiance_conversion`` (cd/m^2 -> W m^-2 sr^-1 at the operating
    wavelength) and ``airmass_exponent`` are calibration constants.  Left as
    ``None`` they are back-solved by :func:`calibrate_background` so that the
    gated count rate is ``zenith_counts`` at zenith and ``reference_counts``
    at ``reference_zenith``.
    """

    total_brightness: float = 2.22e-4       # cd/m^2, natural + artificial
    artificial_brightness: float = 5.10e-5  # cd/m^2
    radiance_conversion: float | None = None
    gating_factor: float = 0.1
    airmass_model: Literal["secant", "kasten-young"] = "secant"
    airmass_exponent: float | None = None
    wavelength: float = 850e-9
    zenith_counts: float = 1.1e5            # cps after gating
    reference_counts: float = 0.3e5         # cps after gating
    reference_zenith: float = math.radians(80.0)
    min_elevation: float = math.radians(5.0)

    def __post_init__(self):
        require(self.total_brightness > 0, "total_brightness", "must be > 0")
        require(0 <= self.artificial_brightness <= self.total_brightness, "artificial_brightness",
                "must lie in [0, total_brightness]")
        require(0 < self.gating_factor <= 1, "gating_factor", "must lie in (0, 1]")
        require(self.airmass_model in ("secant", "kasten-young"), "airmass_model",
                "must be 'secant' or 'kasten-young'")
        require(self.radiance_conversion is None or self.radiance_conversion > 0,
                "radiance_conversion", "must be > 0")
        require(self.wavelength > 0, "wavelength", "must be > 0")
        require(self.zenith_counts > 0, "zenith_counts", "must be > 0")
        require(self.reference_counts > 0, "reference_counts", "must be > 0")
        require(0 < self.reference_zenith <= MAX_ZENITH, "reference_zenith", "must lie in (0, 85 deg]")

    @property
    def natural_brightness(self) -> float:
        return self.total_brightness - self.artificial_brightness

    @property
    def calibrated(self) -> bool:
        return self.radiance_conversion is not None and self.airmass_exponent is not None


def _raw_counts_per_unit_k(b: BackgroundModel, rx: ReceiverConfig) -> float:
    # N_tot = 1/E * (H_nat + H_art) * pi FoV^2 * q_eff * pi/4 D_R^2, before k and gating
    brightness = b.natural_brightness + b.artificial_brightness
    solid = math.pi * rx.field_of_view**2
    area = math.pi / 4.0 * rx.aperture_diameter**2
    return brightness * solid * rx.quantum_efficiency * area / photon_energy(b.wavelength)


def calibrate_background(b: BackgroundModel, rx: ReceiverConfig) -> BackgroundModel:
    """Fill in missing calibration constants from the count-rate targets."""
    k = b.radiance_conversion
    if k is None:
        k = b.zenith_counts / (_raw_counts_per_unit_k(b, rx) * b.gating_factor)
    p = b.airmass_exponent
    if p is None:
        p = -math.log(b.reference_counts / b.zenith_counts) / math.log(
            airmass(b.reference_zenith, b.airmass_model))
    return replace(b, radiance_conversion=k, airmass_exponent=p)


def background_counts_zenith(b: BackgroundModel, rx: ReceiverConfig) -> float:
    """Gated background count rate (cps) at zenith."""
    if b.radiance_conversion is None:
        b = calibrate_background(b, rx)
    return b.radiance_conversion * _raw_counts_per_unit_k(b, rx) * b.gating_factor


def background_counts(elevation: float, b: BackgroundModel, rx: ReceiverConfig) -> float:
    """Gated background count rate (cps) at ``elevation``: zenith rate times airmass**(-p)."""
    if not b.calibrated:
        b = calibrate_background(b, rx)
    if elevation < b.min_elevation:
        warnings.warn(
            f"elevation {math.degrees(elevation):.2f} deg is below the background model's "
            f"{math.degrees(b.min_elevation):.1f} deg floor; clamped",
            stacklevel=2,
        )
        elevation = b.min_elevation
    x = airmass(math.pi / 2 - elevation, b.airmass_model)
    return background_counts_zenith(b, rx) * x ** (-b.airmass_exponent)
