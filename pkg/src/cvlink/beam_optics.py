"""Gaussian-beam propagation, diffraction loss and weak-turbulence waists."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .atmosphere import TurbulenceProfile, cn2
from .errors import DomainError, RegimeError
from .geometry import LinkGeometry, altitude_along_path, slant_distance
from .numerics import QuadratureSpec, integrate

# 1.46 * int_0^1 (1 - u)^(5/3) du
HORIZONTAL_COHERENCE_COEFF = 1.46 * 3.0 / 8.0
POINTING_JITTER_PER_M = 1e-6
_CN2_FLOOR = 1e-300


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class Beam:
    """Quasi-monochromatic Gaussian beam.

    ``focus_m`` is the wavefront curvature radius at the transmitter;
    ``None`` means collimated.
    """

    wavelength: float
    waist: float
    focus_m: float | None = None

    def __post_init__(self):
        if not (self.wavelength > 0.0 and self.waist > 0.0):
            raise DomainError("wavelength and waist must be positive")
        if self.focus_m is not None and not self.focus_m > 0.0:
            raise DomainError("focused beams need a positive curvature radius")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def collimated(self) -> bool:
        return self.focus_m is None


@dataclass(frozen=True)
class Receiver:
    aperture: float
    efficiency: float = 1.0
    field_of_view: float = 1e-10

    def __post_init__(self):
        if not self.aperture > 0.0:
            raise DomainError("aperture must be positive")
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError("efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class TurbulentWaists:
    """Beam sizes and wandering variances at the receiver plane (SI units)."""

    w_z: float
    w_st: float
    w_lt: float
    rho0: float
    phi: float
    sigma_tb2: float
    sigma_p2: float
    broadening_clamped: bool = False

    @property
    def sigma2(self) -> float:
        return self.sigma_tb2 + self.sigma_p2

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def rayleigh_range(beam: Beam) -> float:
    return math.pi * beam.waist**2 / beam.wavelength


def waist_at(beam: Beam, z: float) -> float:
    """Diffraction-limited beam radius after ``z`` metres."""
    if z < 0.0:
        raise DomainError(f"propagation distance must be non-negative, got {z}")
    ratio = z / rayleigh_range(beam)
    if beam.collimated:
        return beam.waist * math.sqrt(1.0 + ratio * ratio)
    focus = 1.0 - z / beam.focus_m
    return beam.waist * math.sqrt(focus * focus + ratio * ratio)


def tau_diffraction(w: float, aperture: float) -> float:
    """Fraction of a centred Gaussian beam of radius ``w`` caught by a circular aperture."""
    if not (w > 0.0 and aperture > 0.0):
        raise DomainError("waist and aperture must be positive")
    return -math.expm1(-2.0 * (aperture / w) ** 2)


def _rho0_from_integral(k: float, weighted_cn2: float, coeff: float = 1.46) -> float:
    if weighted_cn2 <= _CN2_FLOOR:
        return math.inf
    return (coeff * k * k * weighted_cn2) ** (-0.6)


def coherence_length(
    path: LinkGeometry | float,
    profile: TurbulenceProfile,
    direction: Direction | str,
    wavelength: float,
    altitude: float | None = None,
    spec: QuadratureSpec = QuadratureSpec(rtol=1e-8, atol=1e-30),
) -> float:
    """Spherical-wave coherence length rho0 (m).

    The default absolute floor of 1e-30 m^(1/3) on the weighted integral
    corresponds to rho0 of order 1e9 m at optical wavelengths, so it only
    matters for paths lying entirely above the turbulent layer.

    Parameters
    ----------
    path : LinkGeometry or float
        Slant path for ``up``/``down``; the path length in metres for
        ``horizontal``.
    profile : TurbulenceProfile
    direction : {"up", "down", "horizontal"}
        For a downlink the transmitter sits at the upper end of ``path``,
        so the turbulence weight is largest near the top.
    wavelength : float
    altitude : float, optional
        Constant altitude of a horizontal path (m).

    Returns
    -------
    float
        ``math.inf`` when the weighted turbulence integral vanishes.
    """
    direction = Direction(direction)
    k = 2.0 * math.pi / wavelength
    if direction is Direction.HORIZONTAL:
        if altitude is None:
            raise DomainError("horizontal paths need an altitude")
        z = float(path)
        if z < 0.0:
            raise DomainError("path length must be non-negative")
        return _rho0_from_integral(k, cn2(altitude, profile) * z, HORIZONTAL_COHERENCE_COEFF)

    z = slant_distance(path)
    if z == 0.0:
        return math.inf
    if direction is Direction.UP:
        def integrand(xi):
            return (1.0 - xi / z) ** (5.0 / 3.0) * cn2(altitude_along_path(xi, path), profile)
        ground_scale = 0.0
    else:
        def integrand(xi):
            return (1.0 - xi / z) ** (5.0 / 3.0) * cn2(altitude_along_path(z - xi, path), profile)
        ground_scale = z
    # turbulence lives within ~20 km of the ground end; help the quadrature find it
    pts = sorted(
        abs(ground_scale - d) for d in (100.0, 1e3, 5e3, 2e4, 5e4) if d < z
    )
    value, _ = integrate(integrand, 0.0, z, spec, points=pts)
    return _rho0_from_integral(k, value)


def horizontal_coherence_length(z: float, cn2_value: float, wavelength: float) -> float:
    """Closed-form rho0 for a constant-altitude path with uniform C_n^2."""
    k = 2.0 * math.pi / wavelength
    return _rho0_from_integral(k, cn2_value * z, HORIZONTAL_COHERENCE_COEFF)


def turbulent_waists(beam: Beam, z: float, rho0: float, pointing_jitter: float = POINTING_JITTER_PER_M) -> TurbulentWaists:
    """Short/long-term waists and centroid-wandering variances after ``z`` metres.

    Uses the linearised broadening factor ``1 - 0.66 (rho0/w0)^(1/3)``. When
    that factor turns negative (``phi > 1/2``) the expansion has no meaning
    and the short-term waist is pinned to the diffraction waist; the result
    carries ``broadening_clamped=True``.
    """
    if z < 0.0:
        raise DomainError("propagation distance must be non-negative")
    w_z = waist_at(beam, z)
    sigma_p2 = (pointing_jitter * z) ** 2
    if not rho0 > 0.0:
        raise DomainError("rho0 must be positive")
    ratio13 = (rho0 / beam.waist) ** (1.0 / 3.0)
    phi = 0.33 * ratio13
    if z == 0.0 or math.isinf(rho0):
        return TurbulentWaists(w_z, w_z, w_z, rho0, phi, 0.0, sigma_p2)

    spread2 = 2.0 * (beam.wavelength * z / (math.pi * rho0)) ** 2
    factor = 1.0 - 0.66 * ratio13
    clamped = factor < 0.0
    if clamped:
        factor = 0.0
    w_st2 = w_z * w_z + spread2 * factor
    w_lt2 = w_z * w_z + spread2
    if not w_st2 > 0.0:
        raise RegimeError("short-term waist is not positive; weak-turbulence expansion failed")
    sigma_tb2 = spread2 * (1.0 - factor)
    return TurbulentWaists(
        w_z=w_z,
        w_st=math.sqrt(w_st2),
        w_lt=math.sqrt(w_lt2),
        rho0=rho0,
        phi=phi,
        sigma_tb2=sigma_tb2,
        sigma_p2=sigma_p2,
        broadening_clamped=clamped,
    )


def sigma_tb2_closed_form(beam: Beam, z: float, rho0: float) -> float:
    """``1.32/pi^2 * lambda^2 z^2 / (w0^(1/3) rho0^(5/3))``; the 0.1337 law."""
    return 1.32 / math.pi**2 * beam.wavelength**2 * z**2 / (beam.waist ** (1 / 3) * rho0 ** (5 / 3))


def weak_turbulence_margin(z: float, wavelength: float, aperture: float, rho0: float) -> float:
    """Ratio ``k * min(2 a_R, rho0)^2 / z``; values >= 1 mean the expansion applies."""
    if z == 0.0:
        return math.inf
    k = 2.0 * math.pi / wavelength
    return k * min(2.0 * aperture, rho0) ** 2 / z
