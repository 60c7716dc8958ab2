"""Independent numerical route: Hamiltonian, exact evolution, partial trace
and the Wootters concurrence.

Nothing in here uses the closed-form amplitudes; it exists to check them.
"""

from __future__ import annotations

import numpy as np

from .errors import EigensolverFailure, NotFinite, NotNormalized
from .model import Amplitudes, AtomDensityMatrix, CouplingParams

__all__ = [
    "SIGMA_Y",
    "SIGMA_YY",
    "hamiltonian_matrix",
    "evolve",
    "evolve_many",
    "partial_trace",
    "wootters_concurrence",
]

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)

# Occupations (atom1, atom2, cavity1, fiber, cavity2) of each single-excitation
# basis vector; atoms use 0 = e, 1 = g so that the atomic kron order is
# |ee>, |eg>, |ge>, |gg>.
_OCCUPATIONS = (
    (0, 1, 0, 0, 0),
    (1, 1, 1, 0, 0),
    (1, 1, 0, 1, 0),
    (1, 1, 0, 0, 1),
    (1, 0, 0, 0, 0),
)

# Eigenvalues of rho below this are treated as numerical zeros when building
# the Wootters decomposition; keeps rank-deficient states exact.
_RANK_CUTOFF = 1e-14


def hamiltonian_matrix(params: CouplingParams) -> np.ndarray:
    """Interaction Hamiltonian restricted to the single-excitation subspace.

    Real symmetric, tridiagonal, zero diagonal, off-diagonal band ``(g, v, v, g)``.
    """
    g, v = params.g, params.v
    h = np.diag([g, v, v, g], k=1).astype(float)
    return h + h.T


def _as_state(psi) -> np.ndarray:
    if isinstance(psi, Amplitudes):
        return psi.as_array()
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (5,):
        raise ValueError(f"expected a 5-component state, got shape {psi.shape}")
    return psi


def _eigh(h):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - 5x5 symmetric
        raise EigensolverFailure(str(exc)) from exc


def evolve_many(params: CouplingParams, psi0, taus) -> np.ndarray:
    """``exp(-i H tau/g) psi0`` for every tau; returns shape ``(len(taus), 5)``."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if not np.all(np.isfinite(taus)):
        raise NotFinite("tau must be finite")
    psi0 = _as_state(psi0)
    energies, vecs = _eigh(hamiltonian_matrix(params))
    coeffs = vecs.T @ psi0
    phases = np.exp(-1j * np.outer(taus / params.g, energies))
    return (phases * coeffs) @ vecs.T


def evolve(params: CouplingParams, psi0, tau: float) -> np.ndarray:
    """Exact propagation of a single-excitation state by eigendecomposition.

    ``tau`` is the rescaled time ``g t``.
    """
    return evolve_many(params, psi0, [tau])[0]


def partial_trace(psi, atol: float = 1e-9) -> AtomDensityMatrix:
    """Trace the two cavities and the fiber out of ``|psi><psi|``.

    The state is embedded in the full (2x2 atoms) x (2x2x2 fields) space and
    contracted there, so no structure of the single-excitation form is assumed.
    """
    psi = _as_state(psi)
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > atol:
        raise NotNormalized(f"state has squared norm {norm2!r}")
    full = np.zeros((2, 2, 2, 2, 2), dtype=complex)
    for amp, occ in zip(psi, _OCCUPATIONS):
        full[occ] = amp
    mat = full.reshape(4, 8)
    return AtomDensityMatrix(np.einsum("af,bf->ab", mat, mat.conj()))


def wootters_concurrence(rho, herm_atol=1e-10, trace_atol=1e-10, psd_atol=1e-10) -> float:
    """Two-qubit concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are square roots of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)``. They are obtained as the singular values
    of ``W^T (sy x sy) W`` where ``rho = W W^H`` is the eigen-decomposition
    of ``rho`` restricted to its support. This is the same spectrum, but it
    avoids square roots of rounding noise for rank-deficient (e.g. pure)
    states.

    Raises
    ------
    InvalidDensityMatrix
        If ``rho`` is not Hermitian, unit-trace and positive semidefinite
        within the given tolerances.
    """
    if not isinstance(rho, AtomDensityMatrix):
        rho = AtomDensityMatrix(rho)
    rho.validate(herm_atol=herm_atol, trace_atol=trace_atol, psd_atol=psd_atol)
    herm = 0.5 * (rho.rho + rho.rho.conj().T)
    probs, vecs = np.linalg.eigh(herm)
    keep = probs > _RANK_CUTOFF
    if not np.any(keep):
        return 0.0
    w = vecs[:, keep] * np.sqrt(probs[keep])
    tau = w.T @ SIGMA_YY @ w
    lam = np.sort(np.linalg.svd(tau, compute_uv=False))[::-1]
    lam = np.concatenate([lam, np.zeros(4 - lam.size)])
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))
