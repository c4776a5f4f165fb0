"""Named link scenarios assembled from the optics, fading and Gaussian-state pieces.

Every scenario reduces to one or two *segments*: a transmitter launching a
fresh Gaussian beam toward a receiver aperture. A segment yields a
:class:`FadingParams`; scenarios differ in how segments are chained and
which mode of the two-mode state they act on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

from . import gaussian_cv as gcv
from .atmosphere import (
    OpticalExtinction,
    TurbulenceProfile,
    horizontal_extinction_length,
    tau_atm_microwave,
    tau_atm_optical,
    weather_preset,
)
from .beam_optics import (
    POINTING_JITTER_PER_M,
    Beam,
    Direction,
    Receiver,
    TurbulentWaists,
    coherence_length,
    turbulent_waists,
    waist_at,
    weak_turbulence_margin,
)
from .errors import ConfigError, DomainError
from .fading_channel import FadingParams, Regime, fading_moments, fit_fading_params
from .geometry import LinkGeometry, altitude_along_path, slant_distance, split_at_altitude
from .numerics import MaxResult, grid_golden_max
from .thermal_background import environment_variance, mean_thermal_photons_microwave, thermal_preset

HORIZONTAL_VALID_RANGE_M = (200.0, 1066.0)
HORIZONTAL_ALTITUDE_M = 30.0


class ScenarioKind(str, Enum):
    DOWNLINK = "downlink"
    UPLINK = "uplink"
    INTERMEDIATE_GENERATION = "intermediate-generation"
    INTERMEDIATE_LENS = "intermediate-lens"
    HORIZONTAL_GROUND = "horizontal-ground"
    INTERSATELLITE = "intersatellite"
    MICROWAVE_SLANT = "microwave-slant"


class Relay(str, Enum):
    """Intermediate element used on microwave paths."""

    NONE = "none"
    GENERATION = "generation"
    LENS = "lens"


class Flag(str, Enum):
    WEAK_TURBULENCE_VIOLATED = "weak-turbulence-violated"
    BROADENING_CLAMPED = "broadening-clamped"
    OUTSIDE_VALIDITY_WINDOW = "outside-validity-window"
    BOUNDARY_OPTIMUM = "boundary-optimum"
    FLAT_OPTIMUM = "flat-optimum"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to evaluate one link.

    Lengths are metres. ``altitude`` is the satellite (upper endpoint)
    altitude for slant links; ``distance`` is the path length of
    horizontal, inter-satellite and microwave links. ``station_altitude``
    places the intermediate station or lens; for microwave relays it is
    the distance from the transmitter along the path and defaults to the
    midpoint.
    """

    kind: ScenarioKind = ScenarioKind.DOWNLINK
    beam: Beam = Beam(800e-9, 0.20)
    receiver: Receiver = Receiver(0.40, 1.0)
    weather: str = "clear-night"
    regime: Regime = Regime.FAST
    squeezing: float = 1.0
    source_photons: float = 0.0
    ground_altitude: float = 0.0
    altitude: float = 500e3
    zenith_angle: float = 0.0
    distance: float = 1000.0
    station_altitude: float | None = None
    link_direction: Direction = Direction.UP
    relay: Relay = Relay.NONE
    focused: bool = False
    thermal_photons: float | None = None
    temperature: float = 288.0
    pointing_jitter: float = POINTING_JITTER_PER_M
    horizontal_altitude: float = HORIZONTAL_ALTITUDE_M

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "link_direction", Direction(self.link_direction))
        object.__setattr__(self, "relay", Relay(self.relay))
        weather_preset(self.weather)
        if self.squeezing < 0.0 or self.source_photons < 0.0:
            raise ConfigError("squeezing and source_photons must be non-negative")
        if self.kind in (ScenarioKind.INTERMEDIATE_GENERATION, ScenarioKind.INTERMEDIATE_LENS):
            if self.station_altitude is not None and not (
                self.ground_altitude < self.station_altitude < self.altitude
            ):
                raise ConfigError("station_altitude must lie strictly between ground and satellite")
            if self.link_direction is Direction.HORIZONTAL:
                raise ConfigError("lens links must be 'up' or 'down'")

    @property
    def daytime(self) -> bool:
        return weather_preset(self.weather).turbulence.daytime

    @property
    def tod(self) -> str:
        return "day" if self.daytime else "night"

    @property
    def rainy(self) -> bool:
        return self.weather.startswith("rain")

    def slant_geometry(self) -> LinkGeometry:
        return LinkGeometry(self.ground_altitude, self.altitude, self.zenith_angle)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class Segment:
    """One transmitter-to-aperture hop."""

    params: FadingParams
    length: float
    tau_atm: float
    waists: TurbulentWaists | None
    margin: float = math.inf

    @property
    def moments(self) -> tuple[float, float]:
        return _moments(self.params)


@lru_cache(maxsize=4096)
def _moments(params: FadingParams) -> tuple[float, float]:
    return fading_moments(params)


@dataclass(frozen=True)
class LinkResult:
    tau_mean: float
    sqrt_tau_mean: float
    tau_max: float
    negativity: float
    fidelity: float
    regime: Regime
    flags: tuple[str, ...] = ()
    state: gcv.TwoModeCM | None = None
    segments: tuple[Segment, ...] = field(default=(), repr=False)
    weak_turbulence_margin: float = math.inf

    def as_dict(self) -> dict:
        return {
            "tau_mean": self.tau_mean,
            "sqrt_tau_mean": self.sqrt_tau_mean,
            "tau_max": self.tau_max,
            "negativity": self.negativity,
            "fidelity": self.fidelity,
            "regime": self.regime.value,
            "flags": ";".join(self.flags),
        }


def _segment_beam(beam: Beam, length: float, focused: bool) -> Beam:
    if focused and length > 0.0:
        return replace(beam, focus_m=length)
    return beam


@lru_cache(maxsize=4096)
def optical_slant_segment(
    geom: LinkGeometry,
    direction: Direction,
    beam: Beam,
    aperture: float,
    tau_eff: float,
    profile: TurbulenceProfile,
    extinction: OpticalExtinction,
    pointing_jitter: float = POINTING_JITTER_PER_M,
    focused: bool = False,
) -> Segment:
    """Slant hop; ``direction`` says whether the transmitter is at the bottom (up) or top (down)."""
    z = slant_distance(geom)
    rho0 = coherence_length(geom, profile, direction, beam.wavelength)
    waists = turbulent_waists(_segment_beam(beam, z, focused), z, rho0, pointing_jitter)
    tau_atm = tau_atm_optical(geom, extinction)
    params = fit_fading_params(waists.w_st, aperture, tau_atm, tau_eff, waists.sigma)
    margin = weak_turbulence_margin(z, beam.wavelength, aperture, rho0)
    return Segment(params, z, tau_atm, waists, margin)


@lru_cache(maxsize=4096)
def horizontal_segment(
    z: float,
    altitude: float,
    beam: Beam,
    aperture: float,
    tau_eff: float,
    profile: TurbulenceProfile,
    extinction: OpticalExtinction,
    pointing_jitter: float = POINTING_JITTER_PER_M,
) -> Segment:
    rho0 = coherence_length(z, profile, Direction.HORIZONTAL, beam.wavelength, altitude=altitude)
    waists = turbulent_waists(beam, z, rho0, pointing_jitter)
    tau_atm = math.exp(-extinction.alpha0 * horizontal_extinction_length(z, altitude, extinction))
    params = fit_fading_params(waists.w_st, aperture, tau_atm, tau_eff, waists.sigma)
    return Segment(params, z, tau_atm, waists, weak_turbulence_margin(z, beam.wavelength, aperture, rho0))


@lru_cache(maxsize=4096)
def vacuum_segment(z: float, beam: Beam, aperture: float, tau_eff: float, pointing_jitter: float = POINTING_JITTER_PER_M) -> Segment:
    """Hop outside the atmosphere: diffraction and pointing jitter only."""
    waists = turbulent_waists(beam, z, math.inf, pointing_jitter)
    params = fit_fading_params(waists.w_st, aperture, 1.0, tau_eff, waists.sigma)
    return Segment(params, z, 1.0, waists)


@lru_cache(maxsize=4096)
def microwave_segment(geom: LinkGeometry, beam: Beam, aperture: float, tau_eff: float, p0_absorption, focused: bool = False) -> Segment:
    """Deterministic microwave hop: diffraction, gaseous absorption and detection."""
    z = slant_distance(geom)
    w = waist_at(_segment_beam(beam, z, focused), z)
    tau_atm = tau_atm_microwave(geom, p0_absorption)
    params = fit_fading_params(w, aperture, tau_atm, tau_eff, 0.0)
    return Segment(params, z, tau_atm, None)


def _observables_one_sided(cm, seg_params, m, regime, moments):
    if regime is Regime.FAST:
        state = gcv.apply_one_sided(cm, gcv.ChannelMoments(*moments), m)
        return gcv.negativity(state), gcv.fidelity_bk(state), state
    neg = gcv.average_slow(cm, seg_params, m, gcv.Observable.NEGATIVITY)
    fid = gcv.average_slow(cm, seg_params, m, gcv.Observable.FIDELITY)
    return neg, fid, None


def _result_one_sided(cfg: ScenarioConfig, seg: Segment, n_env: float, flags: list[str]) -> LinkResult:
    cm = gcv.tmst(cfg.squeezing, cfg.source_photons)
    m = environment_variance(n_env, cfg.receiver.efficiency)
    t1, t2 = seg.moments
    neg, fid, state = _observables_one_sided(cm, seg.params, m, cfg.regime, (t1, t2))
    _segment_flags(seg, flags)
    return LinkResult(t1, t2, seg.params.tau_max, neg, fid, cfg.regime, tuple(flags), state, (seg,), seg.margin)


def _segment_flags(seg: Segment, flags: list[str]) -> None:
    if seg.margin < 1.0 and Flag.WEAK_TURBULENCE_VIOLATED.value not in flags:
        flags.append(Flag.WEAK_TURBULENCE_VIOLATED.value)
    if seg.waists is not None and seg.waists.broadening_clamped and Flag.BROADENING_CLAMPED.value not in flags:
        flags.append(Flag.BROADENING_CLAMPED.value)


def _thermal(cfg: ScenarioConfig, tag: str) -> float:
    if cfg.thermal_photons is not None:
        return cfg.thermal_photons
    return thermal_preset(tag)


def _slant_thermal(cfg: ScenarioConfig, direction: Direction) -> float:
    if cfg.rainy:
        return _thermal(cfg, "optical-rain")
    return _thermal(cfg, f"{direction.value}-{cfg.tod}")


def _slant(cfg: ScenarioConfig, geom: LinkGeometry, direction: Direction, tau_eff: float) -> Segment:
    w = weather_preset(cfg.weather)
    return optical_slant_segment(
        geom,
        direction,
        cfg.beam,
        cfg.receiver.aperture,
        tau_eff,
        w.turbulence,
        w.extinction,
        cfg.pointing_jitter,
        cfg.focused,
    )


def evaluate(cfg: ScenarioConfig) -> LinkResult:
    """Evaluate any scenario kind."""
    handlers = {
        ScenarioKind.DOWNLINK: _evaluate_direct,
        ScenarioKind.UPLINK: _evaluate_direct,
        ScenarioKind.INTERMEDIATE_GENERATION: evaluate_intermediate_generation,
        ScenarioKind.INTERMEDIATE_LENS: evaluate_intermediate_lens,
        ScenarioKind.HORIZONTAL_GROUND: evaluate_horizontal,
        ScenarioKind.INTERSATELLITE: evaluate_intersatellite,
        ScenarioKind.MICROWAVE_SLANT: evaluate_microwave,
    }
    return handlers[cfg.kind](cfg)


def _evaluate_direct(cfg: ScenarioConfig) -> LinkResult:
    direction = Direction.DOWN if cfg.kind is ScenarioKind.DOWNLINK else Direction.UP
    seg = _slant(cfg, cfg.slant_geometry(), direction, cfg.receiver.efficiency)
    return _result_one_sided(cfg, seg, _slant_thermal(cfg, direction), [])


def _default_station(cfg: ScenarioConfig) -> float:
    return 0.5 * (cfg.ground_altitude + cfg.altitude)


def _two_sided_result(cfg, seg_d: Segment, seg_u: Segment, n_d: float, n_u: float, flags: list[str]) -> LinkResult:
    cm = gcv.tmst(cfg.squeezing, cfg.source_photons)
    eff = cfg.receiver.efficiency
    m_d, m_u = environment_variance(n_d, eff), environment_variance(n_u, eff)
    td1, td2 = seg_d.moments
    tu1, tu2 = seg_u.moments
    state = None
    if cfg.regime is Regime.FAST:
        state = gcv.apply_two_sided(cm, gcv.ChannelMoments(td1, td2), gcv.ChannelMoments(tu1, tu2), m_d, m_u)
        neg, fid = gcv.negativity(state), gcv.fidelity_bk(state)
    else:
        neg = gcv.average_slow(cm, seg_d.params, m_d, gcv.Observable.NEGATIVITY, seg_u.params, m_u)
        fid = gcv.average_slow(cm, seg_d.params, m_d, gcv.Observable.FIDELITY, seg_u.params, m_u)
    for s in (seg_d, seg_u):
        _segment_flags(s, flags)
    return LinkResult(
        td1 * tu1,
        td2 * tu2,
        seg_d.params.tau_max * seg_u.params.tau_max,
        neg,
        fid,
        cfg.regime,
        tuple(flags),
        state,
        (seg_d, seg_u),
        min(seg_d.margin, seg_u.margin),
    )


def evaluate_intermediate_generation(cfg: ScenarioConfig) -> LinkResult:
    """Pair generated at a station between ground and satellite; one mode each way.

    Both modes are detected, so the detector efficiency enters twice.
    """
    h_s = cfg.station_altitude if cfg.station_altitude is not None else _default_station(cfg)
    lower, upper = split_at_altitude(cfg.slant_geometry(), h_s)
    eff = cfg.receiver.efficiency
    seg_d = _slant(cfg, lower, Direction.DOWN, eff)
    seg_u = _slant(cfg, upper, Direction.UP, eff)
    return _two_sided_result(
        cfg, seg_d, seg_u, _slant_thermal(cfg, Direction.DOWN), _slant_thermal(cfg, Direction.UP), []
    )


def _cascade_result(cfg, first: Segment, second: Segment, n_env: float, flags: list[str]) -> LinkResult:
    cm = gcv.tmst(cfg.squeezing, cfg.source_photons)
    m = environment_variance(n_env, cfg.receiver.efficiency)
    a1, a2 = first.moments
    b1, b2 = second.moments
    t1, t2 = a1 * b1, a2 * b2
    state = None
    if cfg.regime is Regime.FAST:
        state = gcv.apply_one_sided(cm, gcv.ChannelMoments(t1, t2), m)
        neg, fid = gcv.negativity(state), gcv.fidelity_bk(state)
    else:
        neg = gcv.average_slow_cascade(cm, first.params, second.params, m, gcv.Observable.NEGATIVITY)
        fid = gcv.average_slow_cascade(cm, first.params, second.params, m, gcv.Observable.FIDELITY)
    for s in (first, second):
        _segment_flags(s, flags)
    return LinkResult(
        t1,
        t2,
        first.params.tau_max * second.params.tau_max,
        neg,
        fid,
        cfg.regime,
        tuple(flags),
        state,
        (first, second),
        min(first.margin, second.margin),
    )


def evaluate_intermediate_lens(cfg: ScenarioConfig) -> LinkResult:
    """Single link refocused half-way.

    The lens collects the beam with an aperture equal to the receiver's
    and relaunches a fresh beam with the original waist. Detection
    happens once, at the final receiver.
    """
    h_l = cfg.station_altitude if cfg.station_altitude is not None else _default_station(cfg)
    lower, upper = split_at_altitude(cfg.slant_geometry(), h_l)
    eff = cfg.receiver.efficiency
    if cfg.link_direction is Direction.UP:
        first = _slant(cfg, lower, Direction.UP, 1.0)
        second = _slant(cfg, upper, Direction.UP, eff)
    else:
        first = _slant(cfg, upper, Direction.DOWN, 1.0)
        second = _slant(cfg, lower, Direction.DOWN, eff)
    return _cascade_result(cfg, first, second, _slant_thermal(cfg, cfg.link_direction), [])


def evaluate_horizontal(cfg: ScenarioConfig) -> LinkResult:
    """Ground-to-ground path at constant altitude."""
    w = weather_preset(cfg.weather)
    z = cfg.distance
    if z < 0.0:
        raise DomainError("distance must be non-negative")
    seg = horizontal_segment(
        z,
        cfg.horizontal_altitude,
        cfg.beam,
        cfg.receiver.aperture,
        cfg.receiver.efficiency,
        w.turbulence,
        w.extinction,
        cfg.pointing_jitter,
    )
    flags = []
    lo, hi = HORIZONTAL_VALID_RANGE_M
    if not lo <= z <= hi:
        flags.append(Flag.OUTSIDE_VALIDITY_WINDOW.value)
    return _result_one_sided(cfg, seg, _thermal(cfg, f"horiz-{cfg.tod}"), flags)


def evaluate_intersatellite(cfg: ScenarioConfig) -> LinkResult:
    seg = vacuum_segment(cfg.distance, cfg.beam, cfg.receiver.aperture, cfg.receiver.efficiency, cfg.pointing_jitter)
    return _result_one_sided(cfg, seg, _thermal(cfg, "intersat"), [])


def microwave_thermal_photons(cfg: ScenarioConfig) -> float:
    if cfg.thermal_photons is not None:
        return cfg.thermal_photons
    r = cfg.receiver
    return mean_thermal_photons_microwave(r.field_of_view, r.aperture, cfg.beam.wavelength, cfg.temperature)


def _microwave_path(cfg: ScenarioConfig, start: float, length: float) -> LinkGeometry:
    """Path piece covering ``[start, start + length]`` metres along the slant line."""
    full = LinkGeometry(cfg.ground_altitude, cfg.ground_altitude, cfg.zenith_angle)
    h_a = altitude_along_path(start, full)
    h_b = altitude_along_path(start + length, full)
    return split_at_altitude(LinkGeometry(cfg.ground_altitude, h_b, cfg.zenith_angle), h_a)[1]


def evaluate_microwave(cfg: ScenarioConfig) -> LinkResult:
    """Microwave slant link: diffraction, gaseous absorption and thermal noise, no turbulence.

    ``relay`` selects direct transmission, generation at an intermediate
    station, or refocusing by an intermediate lens.
    """
    absn = weather_preset(cfg.weather).absorption
    eff = cfg.receiver.efficiency
    a_r = cfg.receiver.aperture
    n_env = microwave_thermal_photons(cfg)
    z = cfg.distance
    if z < 0.0:
        raise DomainError("distance must be non-negative")
    if cfg.relay is Relay.NONE:
        seg = microwave_segment(_microwave_path(cfg, 0.0, z), cfg.beam, a_r, eff, absn, cfg.focused)
        return _result_one_sided(cfg, seg, n_env, [])

    split = cfg.station_altitude if cfg.station_altitude is not None else 0.5 * z
    if not 0.0 <= split <= z:
        raise ConfigError("relay position must lie on the path")
    near = _microwave_path(cfg, 0.0, split)
    far = _microwave_path(cfg, split, z - split)
    if cfg.relay is Relay.GENERATION:
        seg_a = microwave_segment(near, cfg.beam, a_r, eff, absn, cfg.focused)
        seg_b = microwave_segment(far, cfg.beam, a_r, eff, absn, cfg.focused)
        return _two_sided_result(cfg, seg_a, seg_b, n_env, n_env, [])
    first = microwave_segment(near, cfg.beam, a_r, 1.0, absn, cfg.focused)
    second = microwave_segment(far, cfg.beam, a_r, eff, absn, cfg.focused)
    return _cascade_result(cfg, first, second, n_env, [])


def weak_turbulence_check(cfg: ScenarioConfig) -> tuple[bool, float]:
    """Whether every optical hop satisfies ``z <= k min(2 a_R, rho0)^2``, and the tightest margin."""
    if cfg.kind is ScenarioKind.MICROWAVE_SLANT:
        raise DomainError("weak-turbulence check applies to optical scenarios")
    margin = evaluate(cfg).weak_turbulence_margin
    return margin >= 1.0, margin


_OBJECTIVES = {
    "negativity": lambda r: r.negativity,
    "fidelity": lambda r: r.fidelity,
    "tau_mean": lambda r: r.tau_mean,
}


@dataclass(frozen=True)
class StationOptimum:
    position: float
    value: float
    result: LinkResult
    flags: tuple[str, ...] = ()


def optimize_station(cfg: ScenarioConfig, objective: str = "fidelity", n_grid: int = 64, tol: float = 1e-3) -> StationOptimum:
    """Station (or lens) altitude maximising ``objective``.

    A log-spaced scan over the open interval between ground and satellite
    is refined by golden-section search around the best grid point. For
    microwave relays the position is the distance from the transmitter.
    """
    if objective not in _OBJECTIVES:
        raise ConfigError(f"unknown objective {objective!r}; expected one of {sorted(_OBJECTIVES)}")
    get = _OBJECTIVES[objective]
    if cfg.kind is ScenarioKind.MICROWAVE_SLANT:
        if cfg.relay is Relay.NONE:
            raise ConfigError("microwave optimisation needs a relay")
        base, top = 0.0, cfg.distance
    elif cfg.kind in (ScenarioKind.INTERMEDIATE_GENERATION, ScenarioKind.INTERMEDIATE_LENS):
        base, top = cfg.ground_altitude, cfg.altitude
    else:
        raise ConfigError(f"{cfg.kind.value} has no station to place")
    span = top - base
    eps = max(1e-6 * span, min(1.0, 1e-3 * span))

    def f(offset: float) -> float:
        return get(evaluate(cfg.with_(station_altitude=base + offset)))

    best: MaxResult = grid_golden_max(f, eps, span - eps, n_grid=n_grid, log_spaced=True, tol=tol)
    flags = []
    if best.at_boundary:
        flags.append(Flag.BOUNDARY_OPTIMUM.value)
    if best.flat:
        flags.append(Flag.FLAT_OPTIMUM.value)
    position = base + best.x
    result = evaluate(cfg.with_(station_altitude=position))
    return StationOptimum(position, best.value, result, tuple(flags))


def _crossing(g, lo: float, hi: float, rtol: float = 1e-9) -> float:
    """Root of a decreasing-sign function ``g`` (positive at ``lo``) by bisection."""
    g_lo, g_hi = g(lo), g(hi)
    if g_lo <= 0.0:
        return lo
    if g_hi > 0.0:
        return math.inf
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def range_limits(cfg: ScenarioConfig, lo: float = 1e-3, hi: float = 1e4) -> tuple[float, float]:
    """Distances at which entanglement vanishes and fidelity drops to 1/2.

    The swept quantity is ``cfg.distance`` (relays stay at the midpoint)
    for path-length scenarios, otherwise ``cfg.altitude``. Returns
    ``inf`` when the limit is beyond ``hi``.
    """
    by_altitude = cfg.kind not in (
        ScenarioKind.MICROWAVE_SLANT,
        ScenarioKind.HORIZONTAL_GROUND,
        ScenarioKind.INTERSATELLITE,
    )

    def at(x: float) -> LinkResult:
        if by_altitude:
            return evaluate(cfg.with_(altitude=cfg.ground_altitude + x, station_altitude=None))
        return evaluate(cfg.with_(distance=x, station_altitude=None))

    entangled = _crossing(lambda x: at(x).negativity, lo, hi)
    teleport = _crossing(lambda x: at(x).fidelity - 0.5, lo, hi)
    return entangled, teleport
