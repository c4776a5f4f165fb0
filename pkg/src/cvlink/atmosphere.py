"""Atmospheric extinction, microwave absorption and the Hufnagel-Valley turbulence profile."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .geometry import LinkGeometry, altitude_along_path, slant_distance
from .numerics import QuadratureSpec, integrate


@dataclass(frozen=True)
class OpticalExtinction:
    """Exponential aerosol/molecular extinction.

    ``alpha0`` is the sea-level extinction coefficient (1/m) and ``h_tilde``
    the scale height (m).
    """

    alpha0: float = 5e-6
    h_tilde: float = 6600.0

    def __post_init__(self):
        if self.alpha0 < 0.0:
            raise DomainError("alpha0 must be non-negative")
        if not self.h_tilde > 0.0:
            raise DomainError("h_tilde must be positive")


@dataclass(frozen=True)
class TurbulenceProfile:
    """Hufnagel-Valley parameters: rms wind speed (m/s) and ground turbulence ``A`` (m^-2/3)."""

    A: float
    wind_speed: float = 21.0
    daytime: bool = True

    def __post_init__(self):
        if self.A < 0.0 or self.wind_speed < 0.0:
            raise DomainError("A and wind_speed must be non-negative")


@dataclass(frozen=True)
class MicrowaveAbsorption:
    """Oxygen plus water-vapour absorption for centimetre waves.

    Coefficients are per kilometre; ``p0`` is the ground water-vapour
    density in g/m^3. The oxygen term is constant up to
    ``oxygen_cutoff_km`` and zero above it.
    """

    p0: float = 7.5
    alpha_o: float = 1.44e-3
    water_coeff: float = 4.44e-5
    water_scale_height_km: float = 2.0
    oxygen_cutoff_km: float = 20.0

    def __post_init__(self):
        for name in ("p0", "alpha_o", "water_coeff", "oxygen_cutoff_km"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be non-negative")
        if not self.water_scale_height_km > 0.0:
            raise DomainError("water_scale_height_km must be positive")


A_CLEAR_DAY = 2.75e-14
A_CLEAR_NIGHT = 1.7e-14
A_RAIN_DAY = 3.15e-14
A_RAIN_NIGHT = 2.15e-14
ALPHA0_CLEAR = 5e-6
ALPHA0_RAIN = 3.4e-4
P0_CLEAR = 7.5
P0_RAIN = 12.0


@dataclass(frozen=True)
class Weather:
    name: str
    turbulence: TurbulenceProfile
    extinction: OpticalExtinction
    absorption: MicrowaveAbsorption


WEATHER_PRESETS: dict[str, Weather] = {
    "clear-day": Weather(
        "clear-day",
        TurbulenceProfile(A_CLEAR_DAY, daytime=True),
        OpticalExtinction(ALPHA0_CLEAR),
        MicrowaveAbsorption(P0_CLEAR),
    ),
    "clear-night": Weather(
        "clear-night",
        TurbulenceProfile(A_CLEAR_NIGHT, daytime=False),
        OpticalExtinction(ALPHA0_CLEAR),
        MicrowaveAbsorption(P0_CLEAR),
    ),
    "rain-day": Weather(
        "rain-day",
        TurbulenceProfile(A_RAIN_DAY, daytime=True),
        OpticalExtinction(ALPHA0_RAIN),
        MicrowaveAbsorption(P0_RAIN),
    ),
    "rain-night": Weather(
        "rain-night",
        TurbulenceProfile(A_RAIN_NIGHT, daytime=False),
        OpticalExtinction(ALPHA0_RAIN),
        MicrowaveAbsorption(P0_RAIN),
    ),
}


def weather_preset(name: str) -> Weather:
    try:
        return WEATHER_PRESETS[name]
    except KeyError:
        raise DomainError(
            f"unknown weather preset {name!r}; expected one of {sorted(WEATHER_PRESETS)}"
        ) from None


def cn2(h: float, profile: TurbulenceProfile) -> float:
    """Refractive-index structure constant at altitude ``h`` metres (m^-2/3)."""
    if h < 0.0:
        raise DomainError(f"altitude must be non-negative, got {h}")
    upper = 5.94e-53 * (profile.wind_speed / 27.0) ** 2 * h**10 * math.exp(-h / 1000.0)
    return upper + 2.7e-16 * math.exp(-h / 1500.0) + profile.A * math.exp(-h / 100.0)


def extinction_integral(
    geom: LinkGeometry,
    ext: OpticalExtinction,
    spec: QuadratureSpec = QuadratureSpec(rtol=1e-8),
) -> float:
    """Effective sea-level-equivalent path length ``int_0^z exp(-h(y)/h_tilde) dy`` (m)."""
    z = slant_distance(geom)
    if z == 0.0:
        return 0.0
    scale = ext.h_tilde / math.cos(geom.theta)
    pts = [k * scale for k in (1, 5, 20)]
    value, _ = integrate(
        lambda y: math.exp(-altitude_along_path(y, geom) / ext.h_tilde), 0.0, z, spec, points=pts
    )
    return value


def horizontal_extinction_length(z: float, h: float, ext: OpticalExtinction) -> float:
    """Constant-altitude counterpart of :func:`extinction_integral`."""
    return z * math.exp(-h / ext.h_tilde)


def tau_atm_optical(geom: LinkGeometry, ext: OpticalExtinction) -> float:
    """Optical atmospheric transmissivity along a slant path."""
    if ext.alpha0 == 0.0:
        return 1.0
    return math.exp(-ext.alpha0 * extinction_integral(geom, ext))


def microwave_column(geom: LinkGeometry, absn: MicrowaveAbsorption) -> float:
    """Vertical absorption column ``int_{h0}^{h} alpha(h') dh'`` (dimensionless)."""
    lo_km, hi_km = geom.h0 / 1e3, geom.h / 1e3
    if hi_km == lo_km:
        return 0.0
    cutoff = absn.oxygen_cutoff_km
    oxygen = absn.alpha_o * max(0.0, min(hi_km, cutoff) - min(lo_km, cutoff))
    coeff = absn.water_coeff * absn.p0
    hs = absn.water_scale_height_km
    water, _ = integrate(
        lambda x: coeff * math.exp(-x / hs),
        lo_km,
        hi_km,
        QuadratureSpec(rtol=1e-12, atol=0.0),
        points=[lo_km + k * hs for k in (1, 5, 20)],
    )
    return oxygen + water


def tau_atm_microwave(geom: LinkGeometry, absn: MicrowaveAbsorption) -> float:
    """Absorption transmissivity of a microwave slant path."""
    return math.exp(-microwave_column(geom, absn) / math.cos(geom.theta))
