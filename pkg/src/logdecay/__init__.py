"""Zero-energy p-resonances and logarithmic wave decay for radial 2D models."""

__version__ = "0.1.0"

from .contour import ContourSpec, MomentSpec, build_contour, jm_profile, moment, remainder_window
from .errors import LogDecayError
from .lowfreq import ExpansionFit, count_presonances, fit_expansion, sample_lowfreq
from .models import (
    DeltaRing,
    Free,
    ResonantState,
    RobinDisc,
    RoundWell,
    delta_ring_presonance,
    robin_disc_presonance,
    round_well_presonance,
    vws_construct,
)
from .radial import ModeProblem, apply_resolvent, find_bound_states, solve_mode
from .wave import decompose, evolve_eigen, evolve_fd, evolve_spectral, fit_decay

__all__ = [
    "ContourSpec", "MomentSpec", "build_contour", "jm_profile", "moment", "remainder_window",
    "LogDecayError", "ExpansionFit", "count_presonances", "fit_expansion", "sample_lowfreq",
    "DeltaRing", "Free", "ResonantState", "RobinDisc", "RoundWell", "delta_ring_presonance",
    "robin_disc_presonance", "round_well_presonance", "vws_construct", "ModeProblem",
    "apply_resolvent", "find_bound_states", "solve_mode", "decompose", "evolve_eigen",
    "evolve_fd", "evolve_spectral", "fit_decay",
]
