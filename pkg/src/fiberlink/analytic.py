"""Closed-form dynamics of the single-excitation state.

With ``r = v/g``, ``tau = g t`` and ``w = sqrt(2 r^2 + 1)`` the amplitudes are::

    N1 = (2r^2 + cos w tau)/(4r^2 + 2) (c + s) + cos(tau)/2 (c - s)
    N2 = -i sin(w tau)/(2w) (c + s) - i sin(tau)/2 (c - s)
    N3 = -r/(2r^2 + 1) (1 - cos w tau) (c + s)
    N4 = -i sin(w tau)/(2w) (c + s) + i sin(tau)/2 (c - s)
    N5 = (2r^2 + cos w tau)/(4r^2 + 2) (c + s) - cos(tau)/2 (c - s)

where ``c = cos(theta)``, ``s = sin(theta)``. N5 uses ``cos(w tau)``; the
variant with ``cos(w tau^2)`` that sometimes appears in print is not unitary
and disagrees with the matrix-exponential oracle in :mod:`fiberlink.numeric`.

N1 and N5 are real, so the concurrence ``2 |N1 N5|`` reduces to
``2 |A^2 - B^2|`` with ``A, B`` the symmetric/antisymmetric parts above.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import NotFinite, NotNormalized, RangeExceeded
from .model import (
    AngleLike,
    Amplitudes,
    AtomDensityMatrix,
    CouplingParams,
    as_angle,
)

__all__ = [
    "TAU_LIMIT",
    "CaseLabel",
    "amplitude_arrays",
    "amplitudes",
    "reduced_density",
    "concurrence_closed_form",
    "concurrence_case",
]

#: Largest |tau| accepted; beyond this double-precision argument reduction
#: is no longer comfortably below the 1e-9 error budget.
TAU_LIMIT = 1e4


class CaseLabel(enum.Enum):
    MINUS_QUARTER_PI = "minus_quarter_pi"
    PLUS_QUARTER_PI = "plus_quarter_pi"
    TWELFTH_PI = "twelfth_pi"
    GENERAL = "general"

    @property
    def theta(self):
        return _CASE_THETA.get(self)


_CASE_THETA = {
    CaseLabel.MINUS_QUARTER_PI: -math.pi / 4,
    CaseLabel.PLUS_QUARTER_PI: math.pi / 4,
    CaseLabel.TWELFTH_PI: math.pi / 12,
}


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau)):
        raise NotFinite("tau must be finite")
    if tau.size and np.max(np.abs(tau)) > TAU_LIMIT:
        raise RangeExceeded(f"|tau| must not exceed {TAU_LIMIT:g}")
    return tau


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


def amplitude_arrays(r: float, theta: float, tau) -> np.ndarray:
    """Vectorized amplitudes, shape ``(5,) + tau.shape``, dimensionless inputs."""
    tau = _check_tau(tau)
    c, s = math.cos(theta), math.sin(theta)
    sym, anti = c + s, c - s
    r2 = r * r
    w = math.sqrt(2 * r2 + 1)
    cos_w, sin_w = np.cos(w * tau), np.sin(w * tau)
    cos_1, sin_1 = np.cos(tau), np.sin(tau)

    a = (2 * r2 + cos_w) / (4 * r2 + 2) * sym
    b = 0.5 * cos_1 * anti
    p = sin_w / (2 * w) * sym
    q = 0.5 * sin_1 * anti

    out = np.empty((5,) + tau.shape, dtype=complex)
    out[0] = a + b
    out[1] = -1j * (p + q)
    out[2] = -r / (2 * r2 + 1) * (1 - cos_w) * sym
    out[3] = -1j * (p - q)
    out[4] = a - b
    return out


def amplitudes(params: CouplingParams, theta: AngleLike, tau: float) -> Amplitudes:
    """Closed-form state amplitudes at rescaled time ``tau = g t``.

    Examples
    --------
    >>> from fiberlink.model import params_from_ratio
    >>> amplitudes(params_from_ratio(1.0), 0.0, 0.0).as_array().real
    array([1., 0., 0., 0., 0.])
    """
    theta = as_angle(theta).theta
    return Amplitudes.from_array(amplitude_arrays(params.r, theta, float(tau)))


def reduced_density(amps: Amplitudes, atol: float = 1e-9) -> AtomDensityMatrix:
    """Atomic state after tracing out both cavities and the fiber.

    Only the X-shaped entries survive: ``rho[1,1] = |N1|^2``,
    ``rho[1,2] = N1 N5*``, ``rho[2,2] = |N5|^2`` and
    ``rho[3,3] = |N2|^2 + |N3|^2 + |N4|^2``.
    """
    n = amps.as_array()
    norm2 = float(np.sum(np.abs(n) ** 2))
    if abs(norm2 - 1.0) > atol:
        raise NotNormalized(f"amplitudes have squared norm {norm2!r}")
    n1, n2, n3, n4, n5 = n
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = abs(n1) ** 2
    rho[1, 2] = n1 * np.conj(n5)
    rho[2, 1] = n5 * np.conj(n1)
    rho[2, 2] = abs(n5) ** 2
    rho[3, 3] = abs(n2) ** 2 + abs(n3) ** 2 + abs(n4) ** 2
    return AtomDensityMatrix(rho)


def concurrence_closed_form(params: CouplingParams, theta: AngleLike, tau):
    """Concurrence of the atoms, ``2 |A^2 - B^2|``.

    ``tau`` may be a scalar or an array; the result has the same shape.
    No clamping is applied.
    """
    tau_arr = _check_tau(tau)
    theta = as_angle(theta).theta
    r2 = params.r ** 2
    w = math.sqrt(2 * r2 + 1)
    a = (2 * r2 + np.cos(w * tau_arr)) / (4 * r2 + 2) * (math.cos(theta) + math.sin(theta))
    b = np.cos(tau_arr) / 2 * (math.cos(theta) - math.sin(theta))
    return _scalar_or_array(2 * np.abs(a * a - b * b), tau)


def concurrence_case(case: CaseLabel, params: CouplingParams, tau, theta: AngleLike = None):
    """Concurrence from the special-case formula for ``case``.

    ``MINUS_QUARTER_PI`` gives ``cos^2(tau)`` for every ``r``;
    ``PLUS_QUARTER_PI`` gives ``((2r^2 + cos w tau)/(2r^2 + 1))^2``;
    ``TWELFTH_PI`` is the general expression with ``theta = pi/12`` written out.
    ``GENERAL`` needs an explicit ``theta``.
    """
    case = CaseLabel(case)
    tau_arr = _check_tau(tau)
    r2 = params.r ** 2
    w = math.sqrt(2 * r2 + 1)

    if case is CaseLabel.MINUS_QUARTER_PI:
        values = np.cos(tau_arr) ** 2
    elif case is CaseLabel.PLUS_QUARTER_PI:
        values = ((2 * r2 + np.cos(w * tau_arr)) / (2 * r2 + 1)) ** 2
    elif case is CaseLabel.TWELFTH_PI:
        c, s = math.cos(math.pi / 12), math.sin(math.pi / 12)
        first = ((2 * r2 + np.cos(w * tau_arr)) / (4 * r2 + 2) * (c + s)) ** 2
        second = (np.cos(tau_arr) / 2 * (c - s)) ** 2
        values = 2 * np.abs(first - second)
    else:
        if theta is None:
            raise ValueError("CaseLabel.GENERAL requires an explicit theta")
        return concurrence_closed_form(params, theta, tau)
    return _scalar_or_array(values, tau)
