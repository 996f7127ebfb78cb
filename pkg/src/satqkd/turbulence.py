"""Turbulence and pointing statistics for the downlink.

Covers the Hufnagel-Valley 5/7 C_n^2 profile, weak-fluctuation scintillation
with log-normal intensity, beam wander, Rayleigh-distributed pointing jitter
and the probability distribution of the transmission coefficient (PDTC) for a
circular aperture under a randomly deflected Gaussian beam.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError, require

_DB = 10.0 / math.log(10.0)
MAX_ZENITH = math.radians(85.0)


@dataclass(frozen=True)
class TurbulenceProfile:
    hv_A: float = 1.7e-14                 # m^-2/3, ground-layer strength
    hv_wind: float = 21.0                 # m/s, rms high-altitude wind
    ground_height: float = 0.0            # m
    atmosphere_top: float = 20_000.0      # m
    wavelength: float = 850e-9            # m
    pointing_error: float = 1.0e-6        # rad
    # None: diffraction-limited spot radius where the beam enters the atmosphere.
    beam_waist_at_atmosphere: float | None = None
    scintillation_model: Literal["high", "low"] = "high"
    low_model_zenith_cap: float = math.radians(60.0)
    # T_A at zenith and at the 85 deg cap, linear in sec(zenith) in between.
    # Defaults reproduce 0.003 dB / 0.006 dB of extra far-field spreading loss.
    turbulent_scale_zenith: float = 10 ** (0.003 / 20) - 1
    turbulent_scale_horizon: float = 10 ** (0.006 / 20) - 1
    # Divergence of the spot used by the pointing PDTC; None uses the optical
    # spot.  The default is back-solved so the mean off-pointing loss is
    # 1.861 dB at 750 km zenith (see pdtc_divergence_for_loss).
    pdtc_divergence: float | None = 2.2702e-6

    def __post_init__(self):
        for name in ("hv_A", "hv_wind", "atmosphere_top", "wavelength", "pointing_error",
                     "low_model_zenith_cap"):
            value = getattr(self, name)
            require(value > 0, name, f"must be > 0 (got {value})")
        require(0 <= self.ground_height < self.atmosphere_top, "ground_height",
                "must lie in [0, atmosphere_top)")
        require(self.beam_waist_at_atmosphere is None or self.beam_waist_at_atmosphere > 0,
                "beam_waist_at_atmosphere", "must be > 0")
        require(self.scintillation_model in ("high", "low"), "scintillation_model",
                "must be 'high' or 'low'")
        require(0 <= self.turbulent_scale_zenith, "turbulent_scale_zenith", "must be >= 0")
        require(0 <= self.turbulent_scale_horizon, "turbulent_scale_horizon", "must be >= 0")
        require(self.pdtc_divergence is None or self.pdtc_divergence > 0, "pdtc_divergence",
                "must be > 0")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


# --- C_n^2 and scintillation -------------------------------------------------

def cn2(height, p: TurbulenceProfile):
    """Hufnagel-Valley refractive-index structure constant (m^-2/3)."""
    h = np.asarray(height, dtype=float)
    if np.any(h < 0):
        raise DomainError("height must be >= 0")
    out = (0.00594 * (p.hv_wind / 27.0) ** 2 * (1e-5 * h) ** 10 * np.exp(-h / 1000.0)
           + 2.7e-16 * np.exp(-h / 1500.0)
           + p.hv_A * np.exp(-h / 100.0))
    return float(out) if out.ndim == 0 else out


def _quad(f, lo, hi, points=None, what="integral"):
    value, err, *rest = integrate.quad(f, lo, hi, points=points, limit=400,
                                       epsabs=0.0, epsrel=1e-10, full_output=1)
    if len(rest) > 1 and rest[1]:  # quad reports a problem
        if abs(err) > 1e-6 * abs(value):
            raise NumericError(f"{what}: quadrature did not converge "
                               f"(value={value:.6g}, error estimate={err:.3g}): {rest[1]}")
    return value


def _breakpoints(p: TurbulenceProfile) -> list[float]:
    return [h for h in (100.0, 1000.0, 5000.0, 10_000.0) if p.ground_height < h < p.atmosphere_top]


@functools.lru_cache(maxsize=64)
def cn2_moment(p: TurbulenceProfile) -> float:
    """Integral of C_n^2(h) (h - h0)^(5/6) over the turbulent layer."""
    h0 = p.ground_height
    return _quad(lambda h: cn2(h, p) * (h - h0) ** (5.0 / 6.0), h0, p.atmosphere_top,
                 _breakpoints(p), "C_n^2 moment")


@functools.lru_cache(maxsize=64)
def cn2_path_average(p: TurbulenceProfile) -> float:
    """Mean C_n^2 over [ground_height, atmosphere_top]."""
    total = _quad(lambda h: cn2(h, p), p.ground_height, p.atmosphere_top, _breakpoints(p),
                  "C_n^2 path integral")
    return total / (p.atmosphere_top - p.ground_height)


def scintillation_index(zenith_angle: float, p: TurbulenceProfile) -> float:
    """Weak-fluctuation (Rytov) scintillation index of a downlink plane wave.

    ``2.25 k^(7/6) sec^(11/6)(zenith) * int C_n^2(h) (h-h0)^(5/6) dh``.  The
    "low" model caps the zenith angle at ``low_model_zenith_cap``.
    """
    if not 0.0 <= zenith_angle <= MAX_ZENITH + 1e-12:
        raise DomainError(f"zenith angle must lie in [0, 85 deg], got {math.degrees(zenith_angle):.3f}")
    z = zenith_angle
    if p.scintillation_model == "low":
        z = min(z, p.low_model_zenith_cap)
    return 2.25 * p.wavenumber ** (7.0 / 6.0) * math.cos(z) ** (-11.0 / 6.0) * cn2_moment(p)


def lognormal_intensity_pdf(intensity, sigma2: float, mean_intensity: float = 1.0):
    """Log-normal density with location ln(<I>) - sigma2/2 and scale sqrt(sigma2)."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be > 0")
    i = np.asarray(intensity, dtype=float)
    s = math.sqrt(sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (np.log(i / mean_intensity) + 0.5 * sigma2) / s
        out = np.where(i > 0, np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * s * i), 0.0)
    return float(out) if out.ndim == 0 else out


def sample_intensity(sigma2: float, rng: np.random.Generator, size=None, mean_intensity: float = 1.0):
    if sigma2 < 0:
        raise DomainError("sigma2 must be >= 0")
    s = math.sqrt(sigma2)
    return mean_intensity * np.exp(rng.normal(-0.5 * sigma2, s, size=size))


def sample_scintillation_loss_db(sigma2: float, rng: np.random.Generator, size=None):
    """Fade depth -10 log10(I/<I>) of log-normal draws, clamped at 0 dB for gains."""
    fade = -_DB * np.log(sample_intensity(sigma2, rng, size))
    return np.maximum(fade, 0.0)


def scintillation_loss_percentile(sigma2: float, percentile: float, rng: np.random.Generator,
                                  n_samples: int = 100_000) -> float:
    if not 0.0 <= percentile <= 100.0:
        raise DomainError(f"percentile must lie in [0, 100], got {percentile}")
    if sigma2 == 0:
        return 0.0
    return float(np.percentile(sample_scintillation_loss_db(sigma2, rng, n_samples), percentile))


# --- beam wander and pointing -------------------------------------------------

def beam_wander_variance(z: float, w0: float, p: TurbulenceProfile) -> float:
    """Beam-centroid variance ``1.919 C_n^2 z^3 (2 w0)^(-1/3)`` (m^2).

    C_n^2 is the path average over the turbulent layer; ``z`` is the path
    length through that layer.
    """
    if z <= 0 or w0 <= 0:
        raise DomainError("z and w0 must be > 0")
    return 1.919 * cn2_path_average(p) * z**3 * (2.0 * w0) ** (-1.0 / 3.0)


def beam_wander_sigma(z: float, w0: float, p: TurbulenceProfile) -> float:
    return math.sqrt(beam_wander_variance(z, w0, p))


def pointing_sigma(slant_range: float, sigma_w: float, p: TurbulenceProfile) -> float:
    """Total deflection scale ``sqrt((theta_p L)^2 + sigma_w^2)``."""
    if slant_range <= 0:
        raise DomainError("slant range must be > 0")
    return math.hypot(p.pointing_error * slant_range, sigma_w)


def weibull_pointing_pdf(r, sigma_r: float):
    """Density of the radial beam deflection (Weibull with shape 2, i.e. Rayleigh)."""
    if sigma_r <= 0:
        raise DomainError("sigma_r must be > 0")
    r = np.asarray(r, dtype=float)
    out = np.where(r >= 0, r / sigma_r**2 * np.exp(-r * r / (2 * sigma_r**2)), 0.0)
    return float(out) if out.ndim == 0 else out


def beam_wandering_loss_db(slant_range: float, sigma_w: float, p: TurbulenceProfile,
                           exponent: float = 2.0) -> float:
    """Loss from the share of deflection variance added by beam wander.

    ``-10 * exponent * log10((theta_p L)^2 / sigma_r^2)``.
    """
    pointing = (p.pointing_error * slant_range) ** 2
    return -10.0 * exponent * math.log10(pointing / (pointing + sigma_w**2))


def turbulent_scale_factor(zenith_angle: float, p: TurbulenceProfile) -> float:
    """T_A, interpolated linearly in sec(zenith) between its zenith and 85 deg values."""
    sec = 1.0 / math.cos(min(zenith_angle, MAX_ZENITH))
    weight = (sec - 1.0) / (1.0 / math.cos(MAX_ZENITH) - 1.0)
    return p.turbulent_scale_zenith + (p.turbulent_scale_horizon - p.turbulent_scale_zenith) * weight


# --- PDTC -------------------------------------------------------------------

@dataclass(frozen=True)
class PdtcParams:
    T0: float
    shape: float            # lambda_1
    scale: float            # R_1, m
    sigma_r: float          # m
    aperture_radius: float  # a, m
    beam_width: float       # W, m

    def __post_init__(self):
        require(0 < self.T0 <= 1, "T0", f"must lie in (0, 1] (got {self.T0})")
        for name in ("shape", "scale", "sigma_r", "aperture_radius", "beam_width"):
            value = getattr(self, name)
            require(value > 0 and math.isfinite(value), name, f"must be finite and > 0 (got {value})")


def _i0_minus_one(x: float) -> float:
    # power series sum_{k>=1} (x/2)^(2k) / (k!)^2, accurate where I0(x) ~ 1
    q = 0.25 * x * x
    term, total, k = 1.0, 0.0, 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term < 1e-17 * total:
            return total


def _one_minus_e_i0(x: float) -> float:
    """1 - exp(-x) I0(x) without cancellation for small x."""
    if x < 1.0:
        return -math.expm1(-x) - math.exp(-x) * _i0_minus_one(x)
    return 1.0 - special.i0e(x)


def pdtc_params(a: float, W: float, sigma_r: float) -> PdtcParams:
    """Shape/scale of the transmission coefficient for aperture radius ``a`` and spot ``W``.

    T0^2 = 1 - exp(-2 a^2/W^2); with x = 4 a^2 / W^2 and D = 1 - e^-x I0(x),
    lambda = 2 x e^-x I1(x) / D / ln(2 T0^2 / D) and R = a ln(2 T0^2 / D)^(-1/lambda).
    """
    if a <= 0 or W <= 0 or sigma_r <= 0:
        raise DomainError("a, W and sigma_r must be > 0")
    x = 4.0 * a * a / (W * W)
    T0_sq = -math.expm1(-0.5 * x)
    d = _one_minus_e_i0(x)
    log_term = math.log1p((2.0 * T0_sq - d) / d)
    shape = float(2.0 * x * special.i1e(x) / d / log_term)
    scale = a * log_term ** (-1.0 / shape)
    if not all(math.isfinite(v) and v > 0 for v in (T0_sq, shape, scale)):
        raise NumericError(f"PDTC parameters not finite for a={a}, W={W}")
    return PdtcParams(T0=math.sqrt(T0_sq), shape=shape, scale=scale, sigma_r=sigma_r,
                      aperture_radius=a, beam_width=W)


def transmission(r, params: PdtcParams):
    """Transmission coefficient T for beam deflection ``r``: T^2 = T0^2 exp(-(r/R)^lambda)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("deflection must be >= 0")
    out = params.T0 * np.exp(-0.5 * (r / params.scale) ** params.shape)
    return float(out) if out.ndim == 0 else out


def deflection_for_transmission(T, params: PdtcParams):
    """Inverse of :func:`transmission` on (0, T0]."""
    T = np.asarray(T, dtype=float)
    return params.scale * (2.0 * np.log(params.T0 / T)) ** (1.0 / params.shape)


def pdtc_pdf(T, params: PdtcParams):
    """Density of the transmission coefficient; zero outside (0, T0)."""
    T = np.asarray(T, dtype=float)
    lam, R, s2 = params.shape, params.scale, params.sigma_r**2
    inside = (T > 0) & (T < params.T0)
    safe = np.where(inside, T, params.T0 * 0.5)
    u = 2.0 * np.log(params.T0 / safe)
    dens = (2.0 * R * R / (s2 * lam * safe) * u ** (2.0 / lam - 1.0)
            * np.exp(-R * R / (2.0 * s2) * u ** (2.0 / lam)))
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def _pdtc_moment(params: PdtcParams, weight) -> float:
    # Integrate over u = 2 ln(T0/T) in [0, inf): P(T) dT = T P(T) du / 2.
    lam, R, s2 = params.shape, params.scale, params.sigma_r**2

    def integrand(u):
        if u <= 0.0:
            return 0.0  # integrable endpoint; quad never samples it
        return (weight(u) * R * R / (s2 * lam) * u ** (2.0 / lam - 1.0)
                * math.exp(-R * R / (2.0 * s2) * u ** (2.0 / lam)))

    # the density in u is concentrated below a few times (sigma_r/R)^lambda
    u_scale = (params.sigma_r / R) ** lam
    split = 50.0 * u_scale
    return (_quad(integrand, 0.0, split, [u_scale], "PDTC moment")
            + _quad(integrand, split, math.inf, None, "PDTC moment tail"))


def pdtc_normalization(params: PdtcParams) -> float:
    """Integral of the PDTC over (0, T0), evaluated in log-transmission space."""
    return _pdtc_moment(params, lambda u: 1.0)


def mean_deflection(params: PdtcParams) -> float:
    """Expected beam deflection E[r] under the renormalized PDTC."""
    lam, R = params.shape, params.scale
    num = _pdtc_moment(params, lambda u: R * u ** (1.0 / lam))
    return num / pdtc_normalization(params)


def offpointing_loss_db(params: PdtcParams) -> float:
    """-10 log10(T^2(E[r]) / T0^2) = 10/ln10 * (E[r]/R)^lambda."""
    return _DB * (mean_deflection(params) / params.scale) ** params.shape


def pdtc_divergence_for_loss(target_db: float, slant_range: float, aperture_radius: float,
                             sigma_r: float) -> float:
    """PDTC spot divergence (rad) whose mean off-pointing loss equals ``target_db``."""
    from scipy.optimize import brentq

    def excess(width):
        return offpointing_loss_db(pdtc_params(aperture_radius, width, sigma_r)) - target_db

    lo, hi = 0.5 * aperture_radius, 1e3 * aperture_radius
    # loss falls monotonically once the spot is wider than the aperture
    width = brentq(excess, lo, hi, xtol=1e-12, rtol=1e-12)
    return width / slant_range
