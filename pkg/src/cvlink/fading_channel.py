"""Beam-wandering fading channel.

A Gaussian beam whose centroid is displaced by ``q`` from the aperture
centre transmits ``tau(q) = tau_max * exp(-(q/q0)**gamma)``. The deflection
follows a Rayleigh law with parameter ``sigma``, which induces a
log-Weibull law on ``tau``. Moments are computed in deflection space,
which is the same measure as the transmissivity integral but avoids the
endpoint behaviour of ``P(tau)`` near ``tau_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import DomainError, NumericalError
from .numerics import QuadratureSpec, bessel_i_scaled, integrate

_U_MAX = 40.0  # exp(-40) ~ 4e-18 of the Rayleigh mass is beyond this point


class Regime(str, Enum):
    FAST = "fast"
    SLOW = "slow"


def lambda_n(n: int, x: float) -> float:
    """``exp(-2x) I_n(2x)``."""
    if x < 0.0:
        raise DomainError("lambda_n requires x >= 0")
    return bessel_i_scaled(n, 2.0 * x)


def _weber_core(x: float, y: float, spec: QuadratureSpec) -> float:
    """``(1/2x) int_0^y t exp(-(t-2x)^2/4x) e^{-t} I0(t) dt``, i.e. ``exp(-2x) Q0(x, y)``."""
    width = math.sqrt(4.0 * x)
    centre = 2.0 * x

    def f(t):
        return t * math.exp(-((t - centre) ** 2) / (4.0 * x)) * bessel_i_scaled(0, t)

    upper = min(y, centre + 40.0 * width)
    lower = max(0.0, centre - 40.0 * width)
    if upper <= lower:
        return 0.0
    pts = [centre + k * width for k in (-8, -2, 0, 2, 8)]
    value, _ = integrate(f, lower, upper, spec, points=pts)
    return value / (2.0 * x)


def weber_q0(x: float, y: float, spec: QuadratureSpec = QuadratureSpec(rtol=1e-10, atol=0.0)) -> float:
    """Incomplete Weber integral ``Q0(x, y) = e^x/(2x) int_0^y t e^{-t^2/4x} I0(t) dt``.

    The Bessel factor is evaluated in scaled form and the exponentials are
    combined before integration, so only the final ``exp(2x)`` can
    overflow. ``y = inf`` is accepted; ``Q0(x, inf) = exp(2x)``.
    """
    if not x > 0.0:
        raise DomainError("weber_q0 requires x > 0")
    if y < 0.0:
        raise DomainError("weber_q0 requires y >= 0")
    if y == 0.0:
        return 0.0
    return math.exp(2.0 * x) * _weber_core(x, y, spec)


def tau_st_of_q(q: float, w_st: float, aperture: float) -> float:
    """Aperture transmissivity of a beam (short-term radius ``w_st``) deflected by ``q``.

    Equal to ``exp(-4 q^2/w^2) Q0(2 q^2/w^2, 4 q a/w^2)``. At ``q = 0`` this is
    the centred diffraction loss ``1 - exp(-2 a^2/w^2)``.
    """
    if q < 0.0:
        raise DomainError("deflection must be non-negative")
    if q == 0.0:
        return -math.expm1(-2.0 * (aperture / w_st) ** 2)
    x = 2.0 * q * q / (w_st * w_st)
    y = 4.0 * q * aperture / (w_st * w_st)
    return _weber_core(x, y, QuadratureSpec(rtol=1e-10, atol=0.0))


@dataclass(frozen=True)
class FadingParams:
    """Parameters of the Weibull-shaped transmissivity law of one link.

    Attributes
    ----------
    tau_max : float
        Transmissivity of a perfectly centred beam (all losses included).
    gamma : float
        Shape exponent.
    q0 : float
        Scale deflection (m): ``tau(q0) = tau_max / e``.
    sigma : float
        Rayleigh parameter of the centroid deflection (m).
    tau_st : float
        Centred short-term diffraction transmissivity.
    tau_st_far : float
        ``2 a_R^2 / w_st^2``.
    """

    tau_max: float
    gamma: float
    q0: float
    sigma: float
    tau_st: float = 1.0
    tau_st_far: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.tau_max <= 1.0:
            raise DomainError(f"tau_max must lie in [0, 1], got {self.tau_max}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be finite and positive, got {self.gamma}")
        if not self.q0 > 0.0:
            raise DomainError(f"q0 must be positive, got {self.q0}")
        if self.sigma < 0.0:
            raise DomainError("sigma must be non-negative")

    @property
    def deterministic(self) -> bool:
        return self.sigma == 0.0

    def tau(self, q):
        """Instantaneous transmissivity at deflection ``q`` (scalar or array)."""
        return self.tau_max * np.exp(-((np.asarray(q, dtype=float) / self.q0) ** self.gamma))

    def deflection(self, tau):
        """Inverse of :meth:`tau` on ``(0, tau_max]``."""
        return self.q0 * np.log(self.tau_max / np.asarray(tau, dtype=float)) ** (1.0 / self.gamma)

    def scaled(self, factor: float) -> "FadingParams":
        """Same fading law with ``tau_max`` multiplied by ``factor``."""
        return replace(self, tau_max=self.tau_max * factor)


@dataclass(frozen=True)
class FadingEnsemble:
    params: FadingParams
    regime: Regime = Regime.FAST


def _one_minus_lambda0(t: float) -> float:
    y = 2.0 * t
    if y < 0.5:
        # 1 - e^{-y} - e^{-y}(I0(y) - 1), no cancellation for small y
        s, term, k = 0.0, 1.0, 0
        while True:
            k += 1
            term *= (y / 2.0) ** 2 / (k * k)
            s += term
            if term < 1e-18 * s:
                break
        return -math.expm1(-y) - math.exp(-y) * s
    return 1.0 - bessel_i_scaled(0, y)


def fit_fading_params(w_st: float, aperture: float, tau_atm: float, tau_eff: float, sigma: float) -> FadingParams:
    """Weibull shape/scale for a beam of short-term radius ``w_st`` on aperture ``aperture``.

    ``tau_max`` folds in atmospheric loss and detector efficiency; the
    shape and scale depend only on the beam-to-aperture ratio.
    """
    if not (w_st > 0.0 and aperture > 0.0):
        raise DomainError("w_st and aperture must be positive")
    if not (0.0 <= tau_atm <= 1.0 and 0.0 < tau_eff <= 1.0):
        raise DomainError("tau_atm must lie in [0,1] and tau_eff in (0,1]")
    if sigma < 0.0:
        raise DomainError("sigma must be non-negative")
    t = 2.0 * aperture**2 / w_st**2
    tau_st = -math.expm1(-t)
    one_m_l0 = _one_minus_lambda0(t)
    if one_m_l0 <= 0.0:
        raise NumericalError("1 - Lambda0 underflowed; aperture is negligible against the beam")
    if t < 1e-3:
        # log(2 tau_st / (1 - Lambda0)) via its series; direct evaluation cancels
        log_term = math.log1p((2.0 * t * t - 3.0 * t**3 + 17.0 / 6.0 * t**4) / one_m_l0)
    else:
        log_term = math.log(2.0 * tau_st / one_m_l0)
    if not log_term > 0.0:
        raise NumericalError("degenerate Weibull fit: log term is not positive")
    gamma = 4.0 * t * lambda_n(1, t) / one_m_l0 / log_term
    q0 = aperture * log_term ** (-1.0 / gamma)
    tau_max = tau_st * tau_atm * tau_eff
    return FadingParams(tau_max=tau_max, gamma=gamma, q0=q0, sigma=sigma, tau_st=tau_st, tau_st_far=t)


def p_of_log_tau(params: FadingParams, s):
    """Density of ``s = log(tau_max / tau)``; ``P(tau) = p_s(s) / tau``.

    Stays finite where ``tau`` itself would underflow.
    """
    s_arr = np.asarray(s, dtype=float)
    out = np.zeros_like(s_arr)
    p = params
    if p.sigma == 0.0:
        return float(out) if out.ndim == 0 else out
    inside = s_arr > 0.0
    lg = s_arr[inside]
    k = p.q0**2 / (2.0 * p.sigma**2)
    out[inside] = 2.0 * k / p.gamma * lg ** (2.0 / p.gamma - 1.0) * np.exp(-k * lg ** (2.0 / p.gamma))
    return float(out) if out.ndim == 0 else out


def p_of_tau(params: FadingParams, tau):
    """Probability density of the transmissivity. Zero outside ``(0, tau_max)``."""
    tau_arr = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau_arr)
    p = params
    if p.sigma == 0.0:
        # point mass at tau_max has no density
        return float(out) if out.ndim == 0 else out
    inside = (tau_arr > 0.0) & (tau_arr < p.tau_max)
    t = tau_arr[inside]
    out[inside] = p_of_log_tau(p, np.log(p.tau_max) - np.log(t)) / t
    return float(out) if out.ndim == 0 else out


def _u_breakpoints(params: FadingParams) -> list[float]:
    u0 = 0.5 * (params.q0 / params.sigma) ** 2
    return [u for u in (0.25 * u0, u0, 2.0 * u0, 4.0 * u0, 1.0, 5.0, 15.0) if 0.0 < u < _U_MAX]


def expect(params: FadingParams, func, spec: QuadratureSpec = QuadratureSpec(rtol=1e-8, atol=1e-300)) -> float:
    """Average of ``func(tau)`` over the fading law.

    Integrates over ``u = q^2 / (2 sigma^2)``, where the Rayleigh weight
    becomes ``exp(-u) du``.
    """
    if params.deterministic:
        return float(func(params.tau_max))
    s = params.sigma

    def integrand(u):
        q = s * math.sqrt(2.0 * u)
        return math.exp(-u) * func(params.tau_max * math.exp(-((q / params.q0) ** params.gamma)))

    value, _ = integrate(integrand, 0.0, _U_MAX, spec, points=_u_breakpoints(params))
    return value


def fading_moments(params: FadingParams) -> tuple[float, float]:
    """``(<tau>, <sqrt(tau)>)`` of the fading law."""
    if params.tau_max == 0.0:
        return 0.0, 0.0
    return expect(params, lambda t: t), expect(params, math.sqrt)


def sample_tau(params: FadingParams, rng: np.random.Generator | int | None, size: int | None = None):
    """Draw transmissivities by inverse-CDF sampling of the deflection.

    ``rng`` may be a seed or a ``numpy.random.Generator``; callers that
    share a generator own its state.
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    u = gen.random(size)
    # 1 - u lies in (0, 1]; avoids log(0)
    q = params.sigma * np.sqrt(-2.0 * np.log1p(-u))
    return params.tau(q)
