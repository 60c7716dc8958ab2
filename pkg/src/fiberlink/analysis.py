"""Physics-level analyses built on the dynamics.

Concurrence time series, zero-set (sudden death) detection, the
``r <= sqrt(2)/2`` threshold for ``theta = pi/4``, parameter sweeps, the
normal modes of the cavity-fiber field, the short-fiber criterion and the
Raman effective coupling.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import analytic, numeric
from .errors import (
    EmptySeries,
    NegativeCoupling,
    NonPositiveLength,
    NotFinite,
    ZeroDetuning,
)
from .model import (
    AngleLike,
    CouplingParams,
    TimeGrid,
    as_angle,
    initial_amplitudes,
    params_from_ratio,
)

__all__ = [
    "ESD_THRESHOLD",
    "SPEED_OF_LIGHT",
    "DEFAULT_TOL",
    "MIN_INTERVAL_WIDTH",
    "Engine",
    "ConcurrenceSeries",
    "EsdReport",
    "NormalModes",
    "concurrence_series",
    "detect_esd",
    "min_concurrence_pi4",
    "sweep",
    "field_coupling_matrix",
    "normal_modes",
    "check_short_fiber_limit",
    "effective_coupling",
]

#: Coupling ratio at or below which the theta = pi/4 concurrence reaches zero.
ESD_THRESHOLD = math.sqrt(2) / 2
SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
DEFAULT_TOL = 1e-9
MIN_INTERVAL_WIDTH = 1e-8
_ROOT_XTOL = 1e-12


class Engine(enum.Enum):
    ANALYTIC = "analytic"
    NUMERIC = "numeric"


@dataclass(frozen=True, eq=False)
class ConcurrenceSeries:
    """Concurrence sampled on a :class:`TimeGrid`.

    ``evaluator`` is the continuous concurrence ``tau -> C`` when the series
    came from the closed form; :func:`detect_esd` uses it to refine zero-set
    boundaries beyond grid resolution.
    """

    grid: TimeGrid
    values: np.ndarray
    engine: Engine = Engine.ANALYTIC
    evaluator: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise ValueError("values must have one entry per grid point")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def taus(self) -> np.ndarray:
        return self.grid.points()


@dataclass(frozen=True)
class EsdReport:
    """Zero set of a concurrence trajectory.

    ``dead_intervals`` are stretches of positive width where the concurrence
    stays at or below ``tolerance``; ``isolated_zeros`` are instants where it
    only touches zero.
    """

    dead_intervals: Tuple[Tuple[float, float], ...]
    isolated_zeros: Tuple[float, ...]
    tolerance: float

    @property
    def is_empty(self) -> bool:
        return not self.dead_intervals and not self.isolated_zeros


@dataclass(frozen=True, eq=False)
class NormalModes:
    """Detunings of the field normal modes ``(c-, c, c+)`` from the carrier.

    ``transform`` maps ``(a1, a2, b)`` to ``(c+, c-, c)``: ``c = transform @ a``.
    """

    detunings: Tuple[float, float, float]
    transform: np.ndarray


def concurrence_series(
    params: CouplingParams,
    theta: AngleLike,
    grid: TimeGrid,
    engine: Engine = Engine.ANALYTIC,
) -> ConcurrenceSeries:
    """Sample the atomic concurrence on ``grid`` with the chosen engine."""
    engine = Engine(engine)
    theta = as_angle(theta)
    taus = grid.points()
    if engine is Engine.ANALYTIC:
        values = analytic.concurrence_closed_form(params, theta, taus)

        def evaluator(tau):
            return analytic.concurrence_closed_form(params, theta, tau)

        return ConcurrenceSeries(grid, values, engine, evaluator)

    states = numeric.evolve_many(params, initial_amplitudes(theta), taus)
    values = [numeric.wootters_concurrence(numeric.partial_trace(psi)) for psi in states]
    return ConcurrenceSeries(grid, np.asarray(values), engine)


def _runs(mask):
    """Index pairs ``(start, stop)`` (inclusive) of maximal True runs."""
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2], edges[1::2] - 1))


def _boundary(fn, tol, outside, inside):
    """Point between ``outside`` (C > tol) and ``inside`` (C <= tol) where C = tol."""
    return brentq(lambda t: fn(t) - tol, outside, inside, xtol=_ROOT_XTOL)


def _touchdown(fn, lo, hi):
    res = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": _ROOT_XTOL})
    return float(res.x), float(res.fun)


def detect_esd(series: ConcurrenceSeries, tol: float = DEFAULT_TOL) -> EsdReport:
    """Classify the zero set of a concurrence series.

    Maximal runs of grid points with ``C <= tol`` spanning at least two points
    become dead intervals, provided the (refined) width is at least
    ``MIN_INTERVAL_WIDTH``; everything else is an isolated zero. When the
    series carries a closed-form evaluator, interval edges are refined to
    ``C = tol`` by root bracketing, and local grid minima above ``tol`` are
    polished by bounded minimization so touch-down zeros between grid points
    are not missed.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    values = series.values
    if values.size == 0:
        raise EmptySeries("cannot analyse an empty series")
    taus = series.taus
    n = values.size
    fn = series.evaluator
    intervals: List[Tuple[float, float]] = []
    zeros: List[float] = []

    for i, j in _runs(values <= tol):
        if j > i:
            left, right = taus[i], taus[j]
            if fn is not None:
                if i > 0:
                    left = _boundary(fn, tol, taus[i - 1], taus[i])
                if j < n - 1:
                    right = _boundary(fn, tol, taus[j + 1], taus[j])
            if right - left >= MIN_INTERVAL_WIDTH:
                intervals.append((float(left), float(right)))
            else:
                zeros.append(float(0.5 * (left + right)))
        else:
            tau0 = float(taus[i])
            if fn is not None and 0 < i < n - 1:
                tau_min, c_min = _touchdown(fn, taus[i - 1], taus[i + 1])
                if c_min <= values[i]:
                    tau0 = tau_min
            zeros.append(tau0)

    if fn is not None and n >= 3:
        inner = values[1:-1]
        minima = np.flatnonzero((inner < values[:-2]) & (inner <= values[2:]) & (inner > tol)) + 1
        for k in minima:
            tau_min, c_min = _touchdown(fn, taus[k - 1], taus[k + 1])
            if c_min <= tol:
                zeros.append(tau_min)

    zeros = sorted(z for z in zeros if not any(a <= z <= b for a, b in intervals))
    return EsdReport(tuple(intervals), tuple(zeros), float(tol))


def min_concurrence_pi4(r: float) -> float:
    """Minimum over time of the ``theta = pi/4`` concurrence."""
    if not math.isfinite(r):
        raise NotFinite(f"r must be finite, got {r!r}")
    if r < 0:
        raise NegativeCoupling(f"r must be >= 0, got {r!r}")
    if r <= ESD_THRESHOLD:
        return 0.0
    x = 2 * r * r
    return ((x - 1) / (x + 1)) ** 2


def sweep(
    r_values: Sequence[float],
    theta: AngleLike,
    grid,
    max_workers: Optional[int] = None,
) -> np.ndarray:
    """Closed-form concurrence over ``r_values x grid``.

    ``grid`` is a :class:`TimeGrid` or an explicit sequence of tau values.
    Returns an ``(len(r_values) * n_tau, 3)`` array of ``(r, tau, C)``
    rows, ``r`` outer and ``tau`` inner. Rows do not depend on
    ``max_workers``; ``None`` or ``0`` lets the executor choose.
    """
    r_values = [float(r) for r in r_values]
    if not r_values:
        raise ValueError("r_values must not be empty")
    theta = as_angle(theta)
    taus = grid.points() if isinstance(grid, TimeGrid) else np.atleast_1d(np.asarray(grid, dtype=float))
    params = [params_from_ratio(r) for r in r_values]

    def block(p):
        return analytic.concurrence_closed_form(p, theta, taus)

    with ThreadPoolExecutor(max_workers=max_workers or None) as pool:
        blocks = list(pool.map(block, params))

    table = np.empty((len(r_values) * taus.size, 3))
    table[:, 0] = np.repeat(r_values, taus.size)
    table[:, 1] = np.tile(taus, len(r_values))
    table[:, 2] = np.concatenate(blocks)
    return table


def field_coupling_matrix(params: CouplingParams) -> np.ndarray:
    """Cavity-fiber coupling in the ``(a1, a2, b)`` mode basis."""
    v = params.v
    return np.array([[0.0, 0.0, v], [0.0, 0.0, v], [v, v, 0.0]])


def normal_modes(params: CouplingParams) -> NormalModes:
    """Normal modes of the two cavities plus fiber.

    ``a1 = (c+ + c- + sqrt2 c)/2``, ``a2 = (c+ + c- - sqrt2 c)/2`` and
    ``b = (c+ - c-)/sqrt2``; ``c+`` and ``c-`` sit at ``+-sqrt(2) v``.
    """
    h = 0.5
    s = 1 / math.sqrt(2)
    # columns: c+, c-, c expressed in (a1, a2, b)
    modes_in_fields = np.array([[h, h, s], [h, h, -s], [s, -s, 0.0]])
    transform = modes_in_fields.T.copy()
    transform.setflags(write=False)
    shift = math.sqrt(2) * params.v
    return NormalModes((-shift, 0.0, shift), transform)


def check_short_fiber_limit(fiber_length: float, nu_bar: float) -> Tuple[float, bool]:
    """Evaluate ``2 l nu_bar / (2 pi c)`` and whether it is <= 1.

    ``fiber_length`` in meters, ``nu_bar`` (cavity decay rate into the fiber
    continuum) in rad/s.
    """
    if not (math.isfinite(fiber_length) and math.isfinite(nu_bar)):
        raise NotFinite("fiber_length and nu_bar must be finite")
    if fiber_length <= 0:
        raise NonPositiveLength(f"fiber_length must be > 0, got {fiber_length!r}")
    if nu_bar < 0:
        raise ValueError(f"nu_bar must be >= 0, got {nu_bar!r}")
    value = 2 * fiber_length * nu_bar / (2 * math.pi * SPEED_OF_LIGHT)
    return value, value <= 1


def effective_coupling(
    g1: float, omega_rabi: float, delta: float, validity_factor: float = 10.0
) -> Tuple[float, bool]:
    """Raman effective coupling ``g1 * omega_rabi / delta``.

    The flag reports whether ``|delta| >= validity_factor * max(|g1|, |omega_rabi|)``,
    i.e. whether adiabatic elimination of the upper level is reasonable.
    """
    if delta == 0:
        raise ZeroDetuning("delta must be nonzero")
    if not all(math.isfinite(x) for x in (g1, omega_rabi, delta)):
        raise NotFinite("g1, omega_rabi and delta must be finite")
    g_eff = g1 * omega_rabi / delta
    valid = abs(delta) >= validity_factor * max(abs(g1), abs(omega_rabi))
    return g_eff, valid
