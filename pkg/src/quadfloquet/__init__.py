"""Floquet spectra, ladder diagnostics and revival dynamics of a driven
tight-binding chain in a quadratic potential."""

from .diagnostics import (
    SweepResult,
    classify_static_states,
    diagnose,
    ipr,
    mipr,
    spacing_variance,
    sweep_frequency,
)
from .disorder import DisorderConfig, DisorderCurve, disorder_scan, sample_profile
from .dynamics import (
    EvolutionTrace,
    InitialStateSpec,
    RevivalReport,
    detect_revivals,
    evolve,
    fidelity,
    prepare_state,
)
from .floquet import (
    FloquetResult,
    Method,
    PropagatorConfig,
    SambeConfig,
    Sampling,
    fold,
    fold_distance,
    quasi_energies,
)
from .lattice import Boundary, DriveParams, HoppingProfile, LatticeParams
from .tolerances import DEFAULT_TOL, Tolerances

__version__ = "0.1.0"
