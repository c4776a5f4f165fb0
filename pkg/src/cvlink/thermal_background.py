"""Thermal background photons collected by a receiver."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SPEED_OF_LIGHT = 2.998e8
PLANCK = 6.626e-34
BOLTZMANN = 1.3807e-23

# Mean background photons per detection window used for the optical links.
THERMAL_PRESETS: dict[str, float] = {
    "down-day": 0.30,
    "down-night": 3.40e-6,
    "up-day": 0.22,
    "up-night": 5.43e-7,
    "horiz-day": 4.75e-3,
    "horiz-night": 4.75e-8,
    "intersat": 8.48e-9,
    "optical-rain": 13.57,
}


@dataclass(frozen=True)
class DetectionWindow:
    """Spectral/temporal filter and collection optics of a detector (SI units)."""

    delta_lambda: float
    delta_t: float
    omega_fov: float
    aperture: float
    temperature: float

    def __post_init__(self):
        for name in ("delta_lambda", "delta_t", "omega_fov", "aperture"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive")
        if self.temperature < 0.0:
            raise DomainError("temperature must be non-negative")

    @property
    def collection(self) -> float:
        return self.delta_lambda * self.delta_t * self.omega_fov * self.aperture**2


def mode_occupancy(wavelength: float, temperature: float) -> float:
    """Bose-Einstein occupancy ``1/(exp(hc/(lambda k T)) - 1)``; 0 at T = 0."""
    if not wavelength > 0.0:
        raise DomainError("wavelength must be positive")
    if temperature < 0.0:
        raise DomainError("temperature must be non-negative")
    if temperature == 0.0:
        return 0.0
    x = PLANCK * SPEED_OF_LIGHT / (wavelength * BOLTZMANN * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def blackbody_photons(wavelength: float, temperature: float) -> float:
    """Black-body photon flux density ``2 c lambda^-4 occupancy``."""
    return 2.0 * SPEED_OF_LIGHT * wavelength**-4 * mode_occupancy(wavelength, temperature)


def mean_thermal_photons_optical(window: DetectionWindow, wavelength: float) -> float:
    return window.collection * blackbody_photons(wavelength, window.temperature)


def mean_thermal_photons_microwave(omega_fov: float, aperture: float, wavelength: float, temperature: float) -> float:
    """Photons per mode collected when the time-bandwidth product is one."""
    if not (omega_fov > 0.0 and aperture > 0.0):
        raise DomainError("omega_fov and aperture must be positive")
    collection = wavelength**2 * omega_fov * aperture**2 / SPEED_OF_LIGHT
    return collection * blackbody_photons(wavelength, temperature)


def thermal_preset(tag: str) -> float:
    try:
        return THERMAL_PRESETS[tag]
    except KeyError:
        raise DomainError(f"unknown thermal preset {tag!r}; expected one of {sorted(THERMAL_PRESETS)}") from None


def environment_variance(n: float, tau_eff: float = 1.0) -> float:
    """Quadrature variance ``1 + 2 tau_eff n`` of the thermal environment mode."""
    if n < 0.0:
        raise DomainError("photon number must be non-negative")
    return 1.0 + 2.0 * tau_eff * n
