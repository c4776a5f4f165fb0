"""Two-mode Gaussian states in normal form and their evolution through lossy channels.

Covariance matrices are stored as ``(a, b, c)``::

    [[a I, c Z], [c Z, b I]],   Z = diag(1, -1)

with vacuum variance 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError
from .fading_channel import FadingParams, expect, fading_moments
from .numerics import gauss_legendre_unit

log = logging.getLogger(__name__)


class Observable(str, Enum):
    NEGATIVITY = "negativity"
    FIDELITY = "fidelity"


@dataclass(frozen=True)
class TwoModeCM:
    a: float
    b: float
    c: float

    def matrix(self) -> np.ndarray:
        z = np.diag([1.0, -1.0])
        eye = np.eye(2)
        return np.block([[self.a * eye, self.c * z], [self.c * z, self.b * eye]])

    @property
    def asymmetry(self) -> float:
        return abs(self.a - self.b)


@dataclass(frozen=True)
class ChannelMoments:
    """First moment ``t1 = <tau>`` and amplitude moment ``t2 = <sqrt(tau)>``."""

    t1: float
    t2: float

    def __post_init__(self):
        if not (0.0 <= self.t1 <= 1.0 + 1e-12):
            raise DomainError(f"t1 must lie in [0, 1], got {self.t1}")
        if not (0.0 <= self.t2 and self.t2 * self.t2 <= self.t1 * (1.0 + 1e-9) + 1e-15):
            raise DomainError(f"need 0 <= t2^2 <= t1, got t1={self.t1}, t2={self.t2}")

    @classmethod
    def deterministic(cls, tau: float) -> "ChannelMoments":
        return cls(tau, math.sqrt(tau))

    @classmethod
    def of(cls, params: FadingParams) -> "ChannelMoments":
        return cls(*fading_moments(params))


IDENTITY = ChannelMoments(1.0, 1.0)


def tmsv(r: float) -> TwoModeCM:
    if r < 0.0:
        raise DomainError("squeezing must be non-negative")
    return TwoModeCM(math.cosh(2 * r), math.cosh(2 * r), math.sinh(2 * r))


def tmst(r: float, n: float) -> TwoModeCM:
    """Two-mode squeezed thermal state: ``(1 + 2n)`` times the TMSV matrix."""
    if n < 0.0:
        raise DomainError("thermal photon number must be non-negative")
    base = tmsv(r)
    s = 1.0 + 2.0 * n
    return TwoModeCM(s * base.a, s * base.b, s * base.c)


def apply_one_sided(cm: TwoModeCM, mom: ChannelMoments, m: float) -> TwoModeCM:
    """Send mode B through a (fading) thermal-loss channel with environment variance ``m``."""
    return TwoModeCM(cm.a, mom.t1 * cm.b + (1.0 - mom.t1) * m, mom.t2 * cm.c)


def apply_two_sided(cm: TwoModeCM, mom_d: ChannelMoments, mom_u: ChannelMoments, m_d: float, m_u: float) -> TwoModeCM:
    """Send mode A through channel ``d`` and mode B through channel ``u``."""
    return TwoModeCM(
        mom_d.t1 * cm.a + (1.0 - mom_d.t1) * m_d,
        mom_u.t1 * cm.b + (1.0 - mom_u.t1) * m_u,
        mom_d.t2 * mom_u.t2 * cm.c,
    )


def pt_symplectic_eig(cm: TwoModeCM) -> float:
    """Smallest symplectic eigenvalue of the partially transposed matrix."""
    # nu_- nu_+ = ab - c^2; dividing avoids cancellation in a + b - hypot(...)
    nu_plus = 0.5 * (cm.a + cm.b + math.hypot(cm.a - cm.b, 2.0 * cm.c))
    return (cm.a * cm.b - cm.c * cm.c) / nu_plus


def symplectic_eigs(cm: TwoModeCM) -> tuple[float, float]:
    """Symplectic eigenvalues ``(nu_minus, nu_plus)`` of the matrix itself."""
    det = (cm.a * cm.b - cm.c * cm.c) ** 2
    delta = cm.a**2 + cm.b**2 - 2.0 * cm.c**2
    disc = max(delta * delta - 4.0 * det, 0.0)
    lo = max((delta - math.sqrt(disc)) / 2.0, 0.0)
    return math.sqrt(lo), math.sqrt((delta + math.sqrt(disc)) / 2.0)


def is_physical(cm: TwoModeCM, tol: float = 1e-9) -> bool:
    """Bona fide check: positive definite with both symplectic eigenvalues >= 1."""
    if cm.a <= 0.0 or cm.b <= 0.0 or cm.a * cm.b - cm.c * cm.c <= 0.0:
        return False
    return symplectic_eigs(cm)[0] >= 1.0 - tol


def negativity(cm: TwoModeCM) -> float:
    nu = pt_symplectic_eig(cm)
    return max(0.0, (1.0 - nu) / (2.0 * nu))


def fidelity_bk(cm: TwoModeCM) -> float:
    """Coherent-state teleportation fidelity with this resource (Braunstein-Kimble)."""
    return 1.0 / (1.0 + 0.5 * (cm.a + cm.b - 2.0 * cm.c))


_OBSERVABLES: dict[Observable, Callable[[TwoModeCM], float]] = {
    Observable.NEGATIVITY: negativity,
    Observable.FIDELITY: fidelity_bk,
}


def observable_fn(observable: Observable | str) -> Callable[[TwoModeCM], float]:
    return _OBSERVABLES[Observable(observable)]


def average_fast(
    cm: TwoModeCM,
    fading_d: FadingParams | ChannelMoments,
    m_d: float,
    observable: Observable | str,
    fading_u: FadingParams | ChannelMoments | None = None,
    m_u: float | None = None,
) -> float:
    """Observable of the state whose covariance entries are fading-averaged.

    With a single channel, mode B is transmitted. With two channels, mode
    A goes through ``fading_d`` and mode B through ``fading_u``.
    """
    f = observable_fn(observable)
    mom_d = fading_d if isinstance(fading_d, ChannelMoments) else ChannelMoments.of(fading_d)
    if fading_u is None:
        return f(apply_one_sided(cm, mom_d, m_d))
    mom_u = fading_u if isinstance(fading_u, ChannelMoments) else ChannelMoments.of(fading_u)
    return f(apply_two_sided(cm, mom_d, mom_u, m_d, m_u))


def _deflection_nodes(params: FadingParams, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Transmissivity nodes/weights from Gauss-Legendre on the deflection CDF."""
    if params.deterministic:
        return np.array([params.tau_max]), np.array([1.0])
    v, w = gauss_legendre_unit(n)
    q = params.sigma * np.sqrt(-2.0 * np.log1p(-v))
    return params.tau(q), w


def average_slow(
    cm: TwoModeCM,
    fading_d: FadingParams,
    m_d: float,
    observable: Observable | str,
    fading_u: FadingParams | None = None,
    m_u: float | None = None,
    nodes: int = 64,
    check_nodes: int | None = 128,
) -> float:
    """Average of the observable over channel realisations.

    One channel: adaptive quadrature over the deflection distribution.
    Two channels: tensor-product Gauss-Legendre in the two deflection
    CDFs (``nodes`` per axis); when ``check_nodes`` is given the rule is
    re-run at that order and the finer value is returned.
    """
    f = observable_fn(observable)
    if fading_u is None:
        return expect(
            fading_d,
            lambda t: f(apply_one_sided(cm, ChannelMoments.deterministic(t), m_d)),
        )

    def tensor(n):
        td, wd = _deflection_nodes(fading_d, n)
        tu, wu = _deflection_nodes(fading_u, n)
        td, tu = td[:, None], tu[None, :]
        a = td * cm.a + (1.0 - td) * m_d
        b = tu * cm.b + (1.0 - tu) * m_u
        c = np.sqrt(td * tu) * cm.c
        return float(wd @ _observable_array(observable, a, b, c) @ wu)

    coarse = tensor(nodes)
    if check_nodes is None:
        return coarse
    fine = tensor(check_nodes)
    if abs(fine - coarse) > 1e-6 * abs(fine) + 1e-12:
        log.debug("two-sided slow average moved %.3g between %d and %d nodes", fine - coarse, nodes, check_nodes)
    return fine


def average_slow_cascade(
    cm: TwoModeCM,
    fading_1: FadingParams,
    fading_2: FadingParams,
    m: float,
    observable: Observable | str,
    nodes: int = 128,
) -> float:
    """Slow-fading average when mode B crosses two independent segments in series.

    Each realisation is a single loss channel with ``tau = tau_1 * tau_2``.
    """
    t1, w1 = _deflection_nodes(fading_1, nodes)
    t2, w2 = _deflection_nodes(fading_2, nodes)
    tau = t1[:, None] * t2[None, :]
    a = np.full_like(tau, cm.a)
    b = tau * cm.b + (1.0 - tau) * m
    c = np.sqrt(tau) * cm.c
    return float(w1 @ _observable_array(observable, a, b, c) @ w2)


def _observable_array(observable, a, b, c):
    if Observable(observable) is Observable.FIDELITY:
        return 1.0 / (1.0 + 0.5 * (a + b - 2.0 * c))
    nu = (a * b - c * c) / (0.5 * (a + b + np.hypot(a - b, 2.0 * c)))
    return np.maximum(0.0, (1.0 - nu) / (2.0 * nu))


def entanglement_threshold_asym(c: float, s: float, m: float) -> float:
    """Minimum transmissivity keeping ``(c, c, s)`` entangled when one mode is sent."""
    if not m > c:
        raise DomainError(f"threshold formula assumes m > c, got m={m}, c={c}")
    return (m - 1.0) * (c - 1.0) / ((m - c) * (c - 1.0) + s * s)


def entanglement_threshold_sym(c: float, s: float, m: float) -> float:
    """Same threshold when both modes cross identical channels."""
    if not m > c:
        raise DomainError(f"threshold formula assumes m > c, got m={m}, c={c}")
    return (m - 1.0) / (m - c + s)


@dataclass(frozen=True)
class SymmetryComparison:
    fidelity_1: float
    fidelity_2: float
    higher: int  # 1, 2, or 0 for a tie
    first_order_predicts: int
    first_order_agrees: bool
    higher_order_condition: bool


def symmetry_fidelity_compare(cm1: TwoModeCM, cm2: TwoModeCM, tie_tol: float = 1e-12) -> SymmetryComparison:
    """Compare teleportation fidelities of two equally entangled states.

    The first-order predictor says state 1 wins when
    ``|a1 - b1| < sqrt(c1/c2) |a2 - b2|``. ``higher_order_condition``
    reports ``sqrt((a1-b1)^2 + (a2-b2)^2) < 4 c`` with ``c`` the mean
    correlation.
    """
    f1, f2 = fidelity_bk(cm1), fidelity_bk(cm2)
    if abs(f1 - f2) <= tie_tol * max(f1, f2):
        higher = 0
    else:
        higher = 1 if f1 > f2 else 2
    d1, d2 = cm1.asymmetry, cm2.asymmetry
    lhs, rhs = d1, math.sqrt(cm1.c / cm2.c) * d2 if cm2.c > 0 else math.inf
    if abs(lhs - rhs) <= tie_tol * max(lhs, rhs, 1.0):
        predicted = 0
    else:
        predicted = 1 if lhs < rhs else 2
    c_mean = 0.5 * (cm1.c + cm2.c)
    return SymmetryComparison(
        fidelity_1=f1,
        fidelity_2=f2,
        higher=higher,
        first_order_predicts=predicted,
        first_order_agrees=predicted == higher,
        higher_order_condition=math.hypot(d1, d2) < 4.0 * c_mean,
    )
