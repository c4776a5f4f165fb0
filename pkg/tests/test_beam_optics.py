import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as si

from cvlink.atmosphere import cn2, weather_preset
from cvlink.beam_optics import (
    HORIZONTAL_COHERENCE_COEFF,
    Beam,
    Direction,
    Receiver,
    coherence_length,
    horizontal_coherence_length,
    rayleigh_range,
    sigma_tb2_closed_form,
    tau_diffraction,
    turbulent_waists,
    waist_at,
    weak_turbulence_margin,
)
from cvlink.errors import DomainError
from cvlink.geometry import LinkGeometry

DAY = weather_preset("clear-day").turbulence
NIGHT = weather_preset("clear-night").turbulence
BEAM = Beam(800e-9, 0.20)


def test_rayleigh_range():
    assert rayleigh_range(BEAM) == pytest.approx(math.pi * 0.04 / 800e-9)
    assert waist_at(BEAM, rayleigh_range(BEAM)) == pytest.approx(0.20 * math.sqrt(2))


def test_focused_beam_reaches_diffraction_limit_at_focus():
    f = 50.0
    b = Beam(0.06, 1.0, focus_m=f)
    assert waist_at(b, f) == pytest.approx(1.0 * f / rayleigh_range(b))
    assert waist_at(b, f) < waist_at(Beam(0.06, 1.0), f)


@given(st.floats(1e-3, 1e7))
def test_waist_grows(z):
    assert waist_at(BEAM, z) >= BEAM.waist


def test_far_field_waist():
    z = 1e10
    assert waist_at(BEAM, z) == pytest.approx(BEAM.wavelength * z / (math.pi * BEAM.waist), rel=1e-6)


@given(st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_diffraction_transmissivity_matches_overlap_integral(w, a):
    direct, _ = si.quad(lambda r: 4.0 * r / w**2 * math.exp(-2 * r * r / w**2), 0.0, a, epsabs=0, epsrel=1e-12)
    assert tau_diffraction(w, a) == pytest.approx(direct, rel=1e-9, abs=1e-300)


def _rho0_oracle(h, profile, wavelength, down):
    """Zenith path from the ground, 30-digit quadrature."""
    k = 2 * math.pi / wavelength
    with mp.workdps(30):
        def integrand(xi):
            alt = h - xi if down else xi
            v = profile.wind_speed
            c = 0.00594 * (v / 27) ** 2 * (mp.mpf(1e-5) * alt) ** 10 * mp.exp(-alt / 1000)
            c += 2.7e-16 * mp.exp(-alt / 1500) + profile.A * mp.exp(-alt / 100)
            return (1 - xi / h) ** (mp.mpf(5) / 3) * c

        pts = [0, 100, 1e3, 5e3, 2e4, h] if not down else [0, h - 2e4, h - 5e3, h - 1e3, h - 100, h]
        val = mp.quad(integrand, [p for p in pts if 0 <= p <= h])
        return float((1.46 * k * k * val) ** (-0.6))


@pytest.mark.parametrize("h", [5e4, 5e5])
@pytest.mark.parametrize("down", [False, True])
def test_coherence_length_zenith(h, down):
    geom = LinkGeometry(0.0, h)
    direction = Direction.DOWN if down else Direction.UP
    got = coherence_length(geom, DAY, direction, 800e-9)
    assert got == pytest.approx(_rho0_oracle(h, DAY, 800e-9, down), rel=1e-6)


def test_downlink_coherence_much_larger():
    g = LinkGeometry(0.0, 5e5)
    up = coherence_length(g, NIGHT, "up", 800e-9)
    down = coherence_length(g, NIGHT, "down", 800e-9)
    assert down > 100 * up


def test_night_coherence_larger_than_day():
    g = LinkGeometry(0.0, 5e5)
    assert coherence_length(g, NIGHT, "up", 800e-9) > coherence_length(g, DAY, "up", 800e-9)


def test_horizontal_coherence():
    rho = coherence_length(1000.0, DAY, "horizontal", 800e-9, altitude=30.0)
    k = 2 * math.pi / 800e-9
    assert rho == pytest.approx((0.5475 * k * k * cn2(30.0, DAY) * 1000.0) ** (-0.6), rel=1e-12)
    assert rho == pytest.approx(horizontal_coherence_length(1000.0, cn2(30.0, DAY), 800e-9))
    assert HORIZONTAL_COHERENCE_COEFF == pytest.approx(0.5475)
    with pytest.raises(DomainError):
        coherence_length(1000.0, DAY, "horizontal", 800e-9)


def test_zero_length_and_vacuum():
    assert coherence_length(LinkGeometry(1e5, 1e5), DAY, "up", 800e-9) == math.inf
    assert coherence_length(LinkGeometry(3e6, 4e6), DAY, "up", 800e-9) > 1e6


@settings(deadline=None)
@given(st.floats(1.0, 1e6), st.floats(1e-3, 1.0), st.floats(0.02, 1.0))
def test_broadening_identities(z, rho0, w0):
    b = Beam(800e-9, w0)
    tw = turbulent_waists(b, z, rho0)
    assert tw.w_lt**2 == pytest.approx(tw.w_z**2 + 2 * (b.wavelength * z / (math.pi * rho0)) ** 2, rel=1e-12)
    assert tw.w_z <= tw.w_st <= tw.w_lt
    if not tw.broadening_clamped:
        assert tw.sigma_tb2 == pytest.approx(sigma_tb2_closed_form(b, z, rho0), rel=1e-10)
        assert tw.w_st**2 + tw.sigma_tb2 == pytest.approx(tw.w_lt**2, rel=1e-12)
    assert tw.sigma_p2 == pytest.approx((1e-6 * z) ** 2)


def test_broadening_clamped_flag():
    tw = turbulent_waists(BEAM, 5e5, 50.0)
    assert tw.broadening_clamped
    assert tw.w_st == pytest.approx(tw.w_z)


def test_no_turbulence():
    tw = turbulent_waists(BEAM, 1e6, math.inf)
    assert tw.w_st == tw.w_lt == tw.w_z
    assert tw.sigma == pytest.approx(1.0)


def test_weak_turbulence_margin():
    assert weak_turbulence_margin(1.0, 800e-9, 10.0, math.inf) > 1.0
    k = 2 * math.pi / 800e-9
    assert weak_turbulence_margin(1066.0, 800e-9, 0.05, 0.02) == pytest.approx(k * 0.02**2 / 1066.0)
    assert weak_turbulence_margin(0.0, 800e-9, 0.05, 0.02) == math.inf


@pytest.mark.parametrize(
    "call",
    [
        lambda: Beam(0.0, 1.0),
        lambda: Beam(1e-6, 0.1, focus_m=-1.0),
        lambda: Receiver(0.0),
        lambda: Receiver(0.1, 0.0),
        lambda: waist_at(BEAM, -1.0),
        lambda: tau_diffraction(0.0, 1.0),
        lambda: turbulent_waists(BEAM, 1.0, 0.0),
    ],
)
def test_validation(call):
    with pytest.raises(DomainError):
        call()
