"""Per-elevation link quantities shared by the BB84 and E91 simulations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import atmosphere as atm
from . import beamoptics as bo
from . import turbulence as tb
from .orbitpass import OrbitConfig, slant_range


@dataclass(frozen=True)
class LinkModels:
    """Every configured model needed to evaluate the downlink at one elevation."""

    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    transmitter: bo.TransmitterConfig = field(default_factory=bo.TransmitterConfig)
    receiver: bo.ReceiverConfig = field(default_factory=bo.ReceiverConfig)
    atmosphere: atm.AtmosphereModel = field(default_factory=atm.AtmosphereModel)
    background: atm.BackgroundModel = field(default_factory=atm.BackgroundModel)
    turbulence: tb.TurbulenceProfile = field(default_factory=tb.TurbulenceProfile)

    def __post_init__(self):
        # Freeze the background calibration once so every sample shares it.
        if not self.background.calibrated:
            object.__setattr__(self, "background",
                               atm.calibrate_background(self.background, self.receiver))

    def with_orbit(self, **changes) -> "LinkModels":
        return replace(self, orbit=replace(self.orbit, **changes))


def zenith_of(elevation: float) -> float:
    return math.pi / 2 - elevation


def turbulent_path_length(zenith_angle: float, m: LinkModels) -> float:
    """Slant distance travelled inside the turbulent layer (m)."""
    p = m.turbulence
    return (p.atmosphere_top - p.ground_height) / math.cos(min(zenith_angle, tb.MAX_ZENITH))


def waist_at_atmosphere(elevation: float, m: LinkModels) -> float:
    """Beam radius where the downlink enters the turbulent layer."""
    if m.turbulence.beam_waist_at_atmosphere is not None:
        return m.turbulence.beam_waist_at_atmosphere
    z = turbulent_path_length(zenith_of(elevation), m)
    return bo.beam_width(slant_range(elevation, m.orbit) - z, m.transmitter, "diffraction_limited")


def beam_wander_sigma(elevation: float, m: LinkModels) -> float:
    z = turbulent_path_length(zenith_of(elevation), m)
    return tb.beam_wander_sigma(z, waist_at_atmosphere(elevation, m), m.turbulence)


def pdtc_at(elevation: float, m: LinkModels) -> tb.PdtcParams:
    """PDTC parameters for the receiver aperture at ``elevation``."""
    L = slant_range(elevation, m.orbit)
    sigma_r = tb.pointing_sigma(L, beam_wander_sigma(elevation, m), m.turbulence)
    if m.turbulence.pdtc_divergence is None:
        width = bo.beam_width(L, m.transmitter)
    else:
        width = m.turbulence.pdtc_divergence * L
    return tb.pdtc_params(m.receiver.aperture_radius, width, sigma_r)


def depolarization_loss_db(elevation: float, m: LinkModels) -> float:
    return atm.depolarization_loss_db(atm.dop(elevation, m.atmosphere),
                                      m.atmosphere.depolarization_exponent)


def signal_rate(elevation: float, m: LinkModels) -> float:
    """Photon rate (cps) reaching the detector plane, for comparison with the background.

    Source rate times diffraction-limited aperture capture, atmospheric
    transmissivity and the depolarization fraction.
    """
    tx = m.transmitter
    L = slant_range(elevation, m.orbit)
    captured = bo.collected_fraction(L, tx, m.receiver, "diffraction_limited")
    tau = atm.transmissivity(zenith_of(elevation), m.atmosphere)
    depol = 10.0 ** (-depolarization_loss_db(elevation, m) / 10.0)
    return tx.pulse_rate * tx.mean_photon_number * captured * tau * depol


def background_rate(elevation: float, m: LinkModels) -> float:
    return atm.background_counts(elevation, m.background, m.receiver)


def signal_fraction(elevation: float, m: LinkModels) -> float:
    """S_F = S / (S + B) at ``elevation``."""
    return atm.signal_fraction(signal_rate(elevation, m), background_rate(elevation, m))
