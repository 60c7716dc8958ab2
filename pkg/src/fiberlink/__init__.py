"""Entanglement dynamics of two atoms in fiber-coupled cavities."""

from .analysis import (
    ESD_THRESHOLD,
    ConcurrenceSeries,
    Engine,
    EsdReport,
    NormalModes,
    check_short_fiber_limit,
    concurrence_series,
    detect_esd,
    effective_coupling,
    min_concurrence_pi4,
    normal_modes,
    sweep,
)
from .analytic import (
    CaseLabel,
    amplitudes,
    concurrence_case,
    concurrence_closed_form,
    reduced_density,
)
from .errors import *  # noqa: F401,F403
from .model import (
    Amplitudes,
    AtomDensityMatrix,
    CouplingParams,
    InitialAngle,
    TimeGrid,
    initial_amplitudes,
    make_params,
    params_from_ratio,
)
from .numeric import evolve, hamiltonian_matrix, partial_trace, wootters_concurrence

__version__ = "0.1.0"
