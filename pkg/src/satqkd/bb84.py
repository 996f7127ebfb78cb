"""Loss budget, QBER and sifted key rate for 4-state BB84 over a pass."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from . import atmosphere as atm
from . import beamoptics as bo
from . import channel as ch
from . import turbulence as tb
from .errors import ChannelError, DomainError, require
from .orbitpass import PassSample, slant_range

CHANNELS = (
    "geometric",
    "atmospheric",
    "depolarization",
    "background_snr",
    "beam_spreading",
    "beam_wandering",
    "scintillation",
    "mean_off_pointing",
    "basis_rotation_shift",
    "wavefront_aberration",
)

# Recorded in every serialized budget so readers know how mu(theta) feeds the
# detection model.
INTERPRETATION = {
    "transmittance": "mu = 10**(-total_db/10), end-to-end per-pulse transmittance",
    "qber_exponent": "t = mu (efficiencies already inside the budget)",
    "photons_per_step": "Q = pulse_rate * mean_photon_number * mu * dt",
}


@dataclass(frozen=True)
class Bb84Config:
    basis_rotation_shift_db: float = 0.265
    wavefront_aberration_db: float = 0.619
    scintillation_percentile: float = 0.0
    # Percentile used as the upper end of the scintillation range.
    scintillation_percentile_max: float = 97.5
    scintillation_samples: int = 100_000
    noise_sigma: float = 0.1
    n_trials: int = 100_000
    kernel: Literal["literal", "normalized"] = "literal"
    qber_threshold: float = 0.11

    def __post_init__(self):
        require(self.basis_rotation_shift_db >= 0, "basis_rotation_shift_db", "must be >= 0")
        require(self.wavefront_aberration_db >= 0, "wavefront_aberration_db", "must be >= 0")
        for name in ("scintillation_percentile", "scintillation_percentile_max"):
            value = getattr(self, name)
            require(0 <= value <= 100, name, f"must lie in [0, 100] (got {value})")
        require(self.scintillation_samples >= 1000, "scintillation_samples", "must be >= 1000")
        require(self.noise_sigma > 0, "noise_sigma", "must be > 0")
        require(self.n_trials >= 10_000, "n_trials", "must be >= 1e4")
        require(self.kernel in ("literal", "normalized"), "kernel", "must be 'literal' or 'normalized'")
        require(0 < self.qber_threshold < 0.5, "qber_threshold", "must lie in (0, 0.5)")


@dataclass
class LossBudget:
    entries: dict[str, float]
    elevation: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if tuple(self.entries) != CHANNELS:
            raise DomainError(f"budget channels must be exactly {CHANNELS}")
        negative = [k for k, v in self.entries.items() if not v >= 0]
        if negative:
            raise DomainError(f"negative or NaN budget entries: {negative}")

    @property
    def total_db(self) -> float:
        return sum(self.entries.values())

    @property
    def transmittance(self) -> float:
        return 10.0 ** (-self.total_db / 10.0)

    def to_dict(self) -> dict:
        return {
            "elevation_deg": math.degrees(self.elevation),
            "channels_db": dict(self.entries),
            "total_db": self.total_db,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LossBudget":
        data = json.loads(text)
        return cls(entries=dict(data["channels_db"]), elevation=math.radians(data["elevation_deg"]),
                   metadata=data.get("metadata", {}))


def _scintillation_db(elevation: float, m: ch.LinkModels, cfg: Bb84Config, percentile: float,
                      rng: np.random.Generator | None) -> float:
    if percentile == 0.0:
        return 0.0  # the fade distribution is clamped at 0 dB
    sigma2 = tb.scintillation_index(ch.zenith_of(elevation), m.turbulence)
    rng = rng if rng is not None else np.random.default_rng(0)
    return tb.scintillation_loss_percentile(sigma2, percentile, rng, cfg.scintillation_samples)


def assemble_budget(elevation: float, m: ch.LinkModels, cfg: Bb84Config | None = None,
                    rng: np.random.Generator | None = None,
                    scintillation_percentile: float | None = None) -> LossBudget:
    """Loss budget (dB per channel) at one elevation.

    ``rng`` drives the scintillation sampling; it is only consumed when the
    percentile is above zero.
    """
    cfg = cfg or Bb84Config()
    pct = cfg.scintillation_percentile if scintillation_percentile is None else scintillation_percentile
    if not 0.0 <= elevation <= math.pi / 2:
        raise DomainError(f"elevation must lie in [0, pi/2], got {elevation}")
    zen = ch.zenith_of(elevation)
    L = slant_range(elevation, m.orbit)
    tx, rx, turb = m.transmitter, m.receiver, m.turbulence

    def snr():
        return atm.snr_loss_db(ch.signal_fraction(elevation, m), m.atmosphere.snr_exponent)

    def wandering():
        return tb.beam_wandering_loss_db(L, ch.beam_wander_sigma(elevation, m), turb)

    sources: dict[str, Callable[[], float]] = {
        "geometric": lambda: bo.geometric_loss_db(L, tx, rx),
        "atmospheric": lambda: atm.atmospheric_loss_db(zen, m.atmosphere),
        "depolarization": lambda: ch.depolarization_loss_db(elevation, m),
        "background_snr": snr,
        "beam_spreading": lambda: bo.beam_spreading_loss_db(
            L, tb.turbulent_scale_factor(zen, turb), tx, rx),
        "beam_wandering": wandering,
        "scintillation": lambda: _scintillation_db(elevation, m, cfg, pct, rng),
        "mean_off_pointing": lambda: tb.offpointing_loss_db(ch.pdtc_at(elevation, m)),
        "basis_rotation_shift": lambda: cfg.basis_rotation_shift_db,
        "wavefront_aberration": lambda: cfg.wavefront_aberration_db,
    }
    entries = {}
    for name in CHANNELS:
        try:
            entries[name] = float(sources[name]())
        except Exception as exc:  # attach the channel name to any model failure
            raise ChannelError(name, exc) from exc
    metadata = dict(INTERPRETATION, scintillation_percentile=pct)
    return LossBudget(entries=entries, elevation=elevation, metadata=metadata)


def qber(transmittance: float, rx: bo.ReceiverConfig) -> float:
    """Quantum bit error rate for per-pulse detection exponent ``t``.

    (Y0/2 + e_det (1 - e^-t)) / (Y0 + 1 - e^-t): dark counts carry a 50% error.
    """
    if transmittance < 0:
        raise DomainError(f"transmittance must be >= 0, got {transmittance}")
    y0 = rx.dark_count_probability
    detect = -math.expm1(-transmittance)
    return (0.5 * y0 + rx.basis_misalignment * detect) / (y0 + detect)


def photons_per_step(transmittance: float, dt: float, tx: bo.TransmitterConfig) -> float:
    return tx.pulse_rate * tx.mean_photon_number * transmittance * dt


def kernel_factor(sigma: float, n_trials: int, rng: np.random.Generator,
                  kernel: str = "literal") -> float:
    """Monte Carlo mean of basis match times the Gaussian noise kernel."""
    if sigma <= 0:
        raise DomainError("noise sigma must be > 0")
    match = rng.integers(0, 2, size=n_trials)
    x = rng.normal(0.0, sigma, size=n_trials)
    k = np.exp(-x * x / (2.0 * sigma * sigma)) / (sigma * math.sqrt(2.0 * math.pi))
    if kernel == "normalized":
        k = k * (2.0 * sigma * math.sqrt(math.pi))
    return float(np.mean(match * k))


def sifted_key_rate(photons: float, dt: float, sigma: float, n_trials: int,
                    rng: np.random.Generator, kernel: str = "literal") -> float:
    """Sifted key rate (bit/s) for ``photons`` detected per interval ``dt``."""
    if photons < 0 or dt <= 0:
        raise DomainError("photons must be >= 0 and dt > 0")
    return photons * kernel_factor(sigma, n_trials, rng, kernel) / dt


@dataclass(frozen=True)
class Bb84Record:
    t: float
    elevation: float
    total_loss_db: float
    qber: float
    sifted_key_rate: float


@dataclass
class Bb84Result:
    records: list[Bb84Record]
    budgets: list[LossBudget]
    qber_threshold: float
    active_time: float = 0.0

    @property
    def pass_span(self) -> float:
        return self.records[-1].t - self.records[0].t


def sample_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    """Independent generator per (seed, sample index, purpose)."""
    return np.random.default_rng([seed, index, stream])


def simulate_pass(samples: Sequence[PassSample], m: ch.LinkModels, cfg: Bb84Config | None = None,
                  seed: int = 0, scintillation_percentile: float | None = None) -> Bb84Result:
    """Budget, QBER and sifted key rate at every pass sample."""
    cfg = cfg or Bb84Config()
    if not samples:
        raise DomainError("pass has no samples")
    dt = m.orbit.time_step
    records, budgets = [], []
    for i, s in enumerate(samples):
        try:
            budget = assemble_budget(s.elevation, m, cfg, sample_rng(seed, i, 0),
                                     scintillation_percentile)
        except ChannelError as exc:
            raise ChannelError(exc.channel, exc.__cause__, index=i) from exc.__cause__
        mu = budget.transmittance
        rate = sifted_key_rate(photons_per_step(mu, dt, m.transmitter), dt, cfg.noise_sigma,
                               cfg.n_trials, sample_rng(seed, i, 1), cfg.kernel)
        records.append(Bb84Record(s.t, s.elevation, budget.total_db, qber(mu, m.receiver), rate))
        budgets.append(budget)
    result = Bb84Result(records, budgets, cfg.qber_threshold)
    result.active_time = active_time(result, cfg.qber_threshold)
    return result


def active_time(result: Bb84Result, qber_threshold: float = 0.11) -> float:
    """Span (s) of the contiguous run of samples around peak elevation with QBER <= threshold."""
    if not 0 < qber_threshold <= 0.5:
        raise DomainError(f"qber_threshold must lie in (0, 0.5], got {qber_threshold}")
    recs = result.records
    peak = max(range(len(recs)), key=lambda i: recs[i].elevation)
    if recs[peak].qber > qber_threshold:
        return 0.0
    lo = hi = peak
    while lo > 0 and recs[lo - 1].qber <= qber_threshold:
        lo -= 1
    while hi < len(recs) - 1 and recs[hi + 1].qber <= qber_threshold:
        hi += 1
    return recs[hi].t - recs[lo].t
