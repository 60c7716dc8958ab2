"""Domain types for two atoms in fiber-coupled cavities.

Everything downstream works in dimensionless units: the coupling ratio
``r = v / g``, the rescaled time ``tau = g * t`` and the initial-state
angle ``theta``. Absolute couplings are converted here, at the boundary.

Single-excitation basis ordering (atom1 atom2 | cavity1 fiber cavity2)::

    0: |e g 0 0 0>   1: |g g 1 0 0>   2: |g g 0 1 0>
    3: |g g 0 0 1>   4: |g e 0 0 0>

Two-atom basis ordering: ``|ee>, |eg>, |ge>, |gg>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    InvalidDensityMatrix,
    NegativeCoupling,
    NonPositiveCoupling,
    NotFinite,
)

__all__ = [
    "FIELD_BASIS",
    "ATOM_BASIS",
    "CouplingParams",
    "InitialAngle",
    "Amplitudes",
    "AtomDensityMatrix",
    "TimeGrid",
    "make_params",
    "params_from_ratio",
    "initial_amplitudes",
    "as_angle",
]

FIELD_BASIS = ("eg000", "gg100", "gg010", "gg001", "ge000")
ATOM_BASIS = ("ee", "eg", "ge", "gg")


def _require_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise NotFinite(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CouplingParams:
    """Atom-cavity coupling ``g`` and cavity-fiber coupling ``v``."""

    g: float
    v: float

    def __post_init__(self):
        _require_finite(g=self.g, v=self.v)
        if self.g <= 0:
            raise NonPositiveCoupling(f"g must be > 0, got {self.g!r}")
        if self.v < 0:
            raise NegativeCoupling(f"v must be >= 0, got {self.v!r}")

    @property
    def r(self) -> float:
        return self.v / self.g


@dataclass(frozen=True)
class InitialAngle:
    """Angle of ``cos(theta)|eg> + sin(theta)|ge>``, normalized to [-pi, pi]."""

    theta: float

    def __post_init__(self):
        _require_finite(theta=self.theta)
        object.__setattr__(self, "theta", math.remainder(float(self.theta), 2 * math.pi))

    def __float__(self):
        return self.theta


AngleLike = Union[float, InitialAngle]


def as_angle(theta: AngleLike) -> InitialAngle:
    if isinstance(theta, InitialAngle):
        return theta
    return InitialAngle(float(theta))


@dataclass(frozen=True)
class Amplitudes:
    """The five complex amplitudes of the single-excitation state."""

    n1: complex
    n2: complex
    n3: complex
    n4: complex
    n5: complex

    @classmethod
    def from_array(cls, values) -> "Amplitudes":
        arr = np.asarray(values, dtype=complex).reshape(-1)
        if arr.shape != (5,):
            raise ValueError(f"expected 5 amplitudes, got shape {arr.shape}")
        return cls(*(complex(x) for x in arr))

    def as_array(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3, self.n4, self.n5], dtype=complex)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))


@dataclass(frozen=True, eq=False)
class AtomDensityMatrix:
    """Reduced two-atom density matrix in the ``|ee>, |eg>, |ge>, |gg>`` basis."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidDensityMatrix(f"expected a 4x4 matrix, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise NotFinite("density matrix has non-finite entries")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def __getitem__(self, index):
        return self.rho[index]

    def validate(self, herm_atol=1e-12, trace_atol=1e-12, psd_atol=1e-10):
        """Raise :class:`InvalidDensityMatrix` unless the matrix is a physical state.

        Returns the eigenvalues of the Hermitian part so callers can reuse them.
        """
        rho = self.rho
        herm_err = np.max(np.abs(rho - rho.conj().T))
        if herm_err > herm_atol:
            raise InvalidDensityMatrix(f"not Hermitian (max |rho - rho^H| = {herm_err:.3e})")
        trace_err = abs(np.trace(rho) - 1.0)
        if trace_err > trace_atol:
            raise InvalidDensityMatrix(f"trace deviates from 1 by {trace_err:.3e}")
        evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if evals[0] < -psd_atol:
            raise InvalidDensityMatrix(f"not positive semidefinite (min eigenvalue {evals[0]:.3e})")
        return evals

    def is_valid(self, **tolerances) -> bool:
        try:
            self.validate(**tolerances)
        except InvalidDensityMatrix:
            return False
        return True


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid in ``tau = g t``, both endpoints included."""

    tau_start: float
    tau_end: float
    n_points: int

    def __post_init__(self):
        _require_finite(tau_start=self.tau_start, tau_end=self.tau_end)
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not self.tau_end > self.tau_start:
            raise ValueError("tau_end must be greater than tau_start")

    @property
    def step(self) -> float:
        return (self.tau_end - self.tau_start) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.tau_start, self.tau_end, int(self.n_points))

    def __len__(self):
        return int(self.n_points)


def make_params(g: float, v: float) -> CouplingParams:
    """Build coupling parameters from absolute couplings (same frequency units)."""
    return CouplingParams(float(g), float(v))


def params_from_ratio(r: float) -> CouplingParams:
    """Canonical parameters ``g = 1, v = r`` for a given coupling ratio."""
    return CouplingParams(1.0, float(r))


def initial_amplitudes(theta: AngleLike) -> Amplitudes:
    theta = as_angle(theta).theta
    return Amplitudes(complex(math.cos(theta)), 0j, 0j, 0j, complex(math.sin(theta)))
