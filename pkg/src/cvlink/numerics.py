"""Shared numerical kernels: quadrature, scaled Bessel functions and a 1-D maximizer."""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _special

from .errors import DomainError, NumericalError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate`."""

    rtol: float = 1e-8
    atol: float = 1e-15
    max_subdivisions: int = 2**16

    def __post_init__(self):
        if not self.rtol > 0.0:
            raise DomainError("rtol must be positive")
        if self.atol < 0.0:
            raise DomainError("atol must be non-negative")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if self.atol == 0.0 and self.rtol < 50.0 * sys.float_info.epsilon:
            raise DomainError("with atol = 0, rtol must exceed 50 machine epsilons")


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of a scalar function.

    Parameters
    ----------
    f : callable
        Integrand, finite on ``[a, b]``.
    a, b : float
        Limits. ``b`` may be ``math.inf``.
    spec : QuadratureSpec
        Relative/absolute tolerances and subdivision budget.
    points : sequence of float, optional
        Interior break points where the integrand has localized structure.
        Ignored for infinite ranges.

    Returns
    -------
    value, error : float
        The integral and an estimate of its absolute error.

    Raises
    ------
    NumericalError
        If the error estimate exceeds the requested tolerance. The best
        estimate is attached to the exception.
    """
    if math.isnan(a) or math.isnan(b):
        raise DomainError("integration limits must not be NaN")
    if a == b:
        return 0.0, 0.0
    if b < a:
        value, err = integrate(f, b, a, spec, points)
        return -value, err

    kwargs = dict(epsabs=spec.atol, epsrel=spec.rtol, limit=spec.max_subdivisions, full_output=1)
    if points and math.isfinite(b):
        inner = sorted({p for p in points if a < p < b})
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(f, a, b, **kwargs)
    value, err = float(out[0]), float(out[1])
    if not math.isfinite(value):
        raise NumericalError("integrand produced a non-finite value", estimate=value)
    # quad flags round-off stalls even when the result already meets tolerance
    if err > max(spec.atol, spec.rtol * abs(value)) * 10.0:
        raise NumericalError(
            f"quadrature did not converge on [{a}, {b}]: error {err:.3g} for value {value:.6g}",
            estimate=value,
        )
    return value, err


def bessel_i_scaled(n: int, y):
    """Exponentially scaled modified Bessel function ``exp(-y) * I_n(y)``.

    Only orders 0 and 1 are needed. Accepts scalars or arrays; never
    overflows because the exponential factor is folded in analytically.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0.0):
        raise DomainError("bessel_i_scaled requires y >= 0")
    if n == 0:
        out = _special.i0e(y_arr)
    elif n == 1:
        out = _special.i1e(y_arr)
    else:
        raise DomainError(f"unsupported Bessel order {n}")
    return float(out) if np.ndim(out) == 0 else out


def gauss_legendre_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class MaxResult:
    x: float
    value: float
    at_boundary: bool = False
    flat: bool = False


def golden_section_max(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-3,
) -> MaxResult:
    """Maximize a unimodal function by golden-section search.

    The returned abscissa is within ``tol * (b - a)`` of the true maximizer
    when ``f`` is unimodal on the bracket. A monotone function drives the
    search to an endpoint; that case is flagged with ``at_boundary``. If the
    function values never differ the result is flagged ``flat``.

    Multimodal objectives should be scanned on a grid first and the best
    cell handed to this routine (see :func:`grid_golden_max`).
    """
    a, b = sorted(bracket)
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    width = b - a
    if width == 0.0:
        return MaxResult(a, f(a), at_boundary=True)

    lo, hi = a, b
    c = lo + INV_PHI2 * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    seen = {fc, fd}
    while hi - lo > tol * width:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = lo + INV_PHI2 * (hi - lo)
            fc = f(c)
            seen.add(fc)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
            seen.add(fd)

    x_best, f_best = (c, fc) if fc >= fd else (d, fd)
    fa, fb = f(a), f(b)
    seen.update((fa, fb))
    at_boundary = False
    if fa >= f_best and fa >= fb:
        x_best, f_best, at_boundary = a, fa, True
    elif fb >= f_best:
        x_best, f_best, at_boundary = b, fb, True
    return MaxResult(x_best, f_best, at_boundary=at_boundary, flat=len(seen) == 1)


def grid_golden_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    n_grid: int = 64,
    log_spaced: bool = True,
    tol: float = 1e-3,
) -> MaxResult:
    """Global-ish maximization: coarse grid scan, then golden-section refinement.

    The grid is log-spaced when ``log_spaced`` and ``lo > 0``. Refinement
    runs on the bracket formed by the neighbours of the best grid point, so
    the returned value is never below the best grid value.
    """
    if not hi > lo:
        raise DomainError("require hi > lo")
    if n_grid < 3:
        raise DomainError("n_grid must be at least 3")
    if log_spaced and lo > 0.0:
        grid = np.geomspace(lo, hi, n_grid)
    else:
        grid = np.linspace(lo, hi, n_grid)
    values = np.array([f(float(x)) for x in grid])
    if not np.all(np.isfinite(values)):
        raise NumericalError("objective returned non-finite values on the scan grid")
    i = int(np.argmax(values))
    flat = bool(np.ptp(values) <= 1e-12 * max(1.0, float(np.max(np.abs(values)))))
    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, n_grid - 1)]
    refined = golden_section_max(f, (float(left), float(right)), tol=tol)
    if refined.value >= values[i]:
        best_x, best_v = refined.x, refined.value
    else:
        best_x, best_v = float(grid[i]), float(values[i])
    at_boundary = (i == 0 or i == n_grid - 1) and best_x in (float(grid[0]), float(grid[-1]))
    return MaxResult(best_x, best_v, at_boundary=at_boundary, flat=flat)
