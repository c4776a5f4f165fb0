"""Slant-path geometry between a ground station and an elevated endpoint."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

EARTH_RADIUS_M = 6.371e6


@dataclass(frozen=True)
class LinkGeometry:
    """Straight path from altitude ``h0`` up to altitude ``h`` at zenith angle ``theta``.

    Parameters
    ----------
    h0 : float
        Lower endpoint altitude above the Earth surface (m).
    h : float
        Upper endpoint altitude above the Earth surface (m).
    theta : float
        Zenith angle seen from the lower endpoint (rad), ``0 <= theta < pi/2``.
    earth_radius : float
        Earth radius (m).
    """

    h0: float
    h: float
    theta: float = 0.0
    earth_radius: float = EARTH_RADIUS_M

    def __post_init__(self):
        if not (self.h0 >= 0.0 and math.isfinite(self.h0)):
            raise DomainError(f"h0 must be finite and non-negative, got {self.h0}")
        if not (self.h >= self.h0 and math.isfinite(self.h)):
            raise DomainError(f"need h >= h0, got h={self.h}, h0={self.h0}")
        if not 0.0 <= self.theta < math.pi / 2:
            raise DomainError(f"zenith angle must lie in [0, pi/2), got {self.theta}")
        if not self.earth_radius > 0.0:
            raise DomainError("earth_radius must be positive")

    @property
    def base_radius(self) -> float:
        return self.earth_radius + self.h0

    @property
    def length(self) -> float:
        return slant_distance(self)


def slant_distance(geom: LinkGeometry) -> float:
    """Straight-line distance between the two endpoints (m)."""
    dh = geom.h - geom.h0
    if geom.theta == 0.0:
        return dh
    r = geom.base_radius
    cos_t = math.cos(geom.theta)
    rc = r * cos_t
    # sqrt(dh^2 + 2 dh R + (R cos)^2) - R cos, rearranged to avoid cancellation
    disc = dh * dh + 2.0 * dh * r
    return disc / (math.sqrt(disc + rc * rc) + rc)


def altitude_along_path(y: float, geom: LinkGeometry) -> float:
    """Altitude above the surface after travelling ``y`` metres from the lower endpoint."""
    if y < 0.0:
        raise DomainError(f"distance along path must be non-negative, got {y}")
    if geom.theta == 0.0:
        return geom.h0 + y
    r = geom.base_radius
    cos_t = math.cos(geom.theta)
    # sqrt(R^2 + y^2 + 2yR cos) - R, rearranged to avoid cancellation
    num = y * y + 2.0 * y * r * cos_t
    return num / (math.sqrt(r * r + num) + r) + geom.h0


def split_at_altitude(geom: LinkGeometry, h_mid: float) -> tuple[LinkGeometry, LinkGeometry]:
    """Split a path at an intermediate altitude.

    The upper piece starts at ``h_mid`` with the local zenith angle of the
    original straight line at that point. Along a straight line the impact
    parameter ``r sin(theta)`` is constant, which fixes that angle.
    """
    if not geom.h0 <= h_mid <= geom.h:
        raise DomainError(f"split altitude {h_mid} outside [{geom.h0}, {geom.h}]")
    lower = LinkGeometry(geom.h0, h_mid, geom.theta, geom.earth_radius)
    r_mid = geom.earth_radius + h_mid
    local = math.asin(geom.base_radius * math.sin(geom.theta) / r_mid)
    upper = LinkGeometry(h_mid, geom.h, local, geom.earth_radius)
    return lower, upper
