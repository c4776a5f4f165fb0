import math

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvlink.errors import DomainError
from cvlink.thermal_background import (
    BOLTZMANN,
    PLANCK,
    SPEED_OF_LIGHT,
    THERMAL_PRESETS,
    DetectionWindow,
    blackbody_photons,
    environment_variance,
    mean_thermal_photons_microwave,
    mean_thermal_photons_optical,
    mode_occupancy,
    thermal_preset,
)


def test_mode_occupancy_6cm():
    # 30-digit Bose-Einstein occupancy with the same constants
    assert mode_occupancy(0.06, 288.0) == pytest.approx(1200.5470698291169, rel=1e-12)


@given(st.floats(1e-7, 1.0), st.floats(1.0, 5000.0))
def test_mode_occupancy_against_mpmath(lam, temp):
    with mp.workdps(30):
        x = mp.mpf(PLANCK) * SPEED_OF_LIGHT / (mp.mpf(lam) * BOLTZMANN * temp)
        ref = float(1 / mp.expm1(x)) if x < 700 else 0.0
    assert mode_occupancy(lam, temp) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_rayleigh_jeans_limit():
    lam, temp = 1.0, 300.0
    rj = BOLTZMANN * temp * lam / (PLANCK * SPEED_OF_LIGHT)
    assert mode_occupancy(lam, temp) == pytest.approx(rj - 0.5, rel=1e-6)


def test_microwave_photons_266():
    n = mean_thermal_photons_microwave(1e-4, 2.0, 0.06, 288.0)
    # 2 Omega a^2 / lambda^2 times the occupancy
    assert n == pytest.approx(2 * 1e-4 * 4.0 / 0.06**2 * 1200.5470698291169, rel=1e-12)
    assert n == pytest.approx(266.0, abs=3.0)


def test_optical_background_is_tiny_at_room_temperature():
    w = DetectionWindow(delta_lambda=1e-9, delta_t=1e-9, omega_fov=1e-10, aperture=0.4, temperature=288.0)
    n = mean_thermal_photons_optical(w, 800e-9)
    assert n == pytest.approx(w.collection * blackbody_photons(800e-9, 288.0))
    assert 0.0 < n < 1e-15


def test_zero_temperature():
    assert mode_occupancy(0.06, 0.0) == 0.0


def test_presets():
    assert THERMAL_PRESETS["down-night"] == 3.40e-6
    assert THERMAL_PRESETS["optical-rain"] == 13.57
    assert thermal_preset("intersat") == 8.48e-9
    for tod in ("day", "night"):
        assert thermal_preset(f"down-{tod}") > thermal_preset(f"up-{tod}")
    with pytest.raises(DomainError):
        thermal_preset("mars")


def test_environment_variance():
    assert environment_variance(0.0) == 1.0
    assert environment_variance(266.0) == 533.0
    assert environment_variance(1.0, 0.4) == pytest.approx(1.8)
    with pytest.raises(DomainError):
        environment_variance(-1.0)


@pytest.mark.parametrize(
    "call",
    [
        lambda: mode_occupancy(0.0, 300.0),
        lambda: mode_occupancy(1e-6, -1.0),
        lambda: mean_thermal_photons_microwave(0.0, 1.0, 0.06, 288.0),
        lambda: DetectionWindow(0.0, 1.0, 1.0, 1.0, 288.0),
        lambda: DetectionWindow(1.0, 1.0, 1.0, 1.0, -1.0),
    ],
)
def test_validation(call):
    with pytest.raises(DomainError):
        call()


def test_occupancy_decreases_with_frequency():
    vals = [mode_occupancy(lam, 288.0) for lam in (1e-6, 1e-4, 1e-2, 1.0)]
    assert vals == sorted(vals)
    assert math.isfinite(vals[0])
