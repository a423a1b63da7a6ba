"""Symbol-level precoding and degree-of-freedom tools for RIS-aided MIMO links."""

from .channel import PhaseVector, RisChannel, absorb_direct_path, apply, sample_channel
from .dof import DofSpec, dof_joint, dof_phase_only, dof_region
from .numerics import Rng
from .optimizer import AlmParams, SlpSolution, alm_solve
from .precoding import Constellation, SlpProblem, ml_decode, solve

__version__ = "0.1.0"

__all__ = [
    "AlmParams",
    "Constellation",
    "DofSpec",
    "PhaseVector",
    "RisChannel",
    "Rng",
    "SlpProblem",
    "SlpSolution",
    "absorb_direct_path",
    "alm_solve",
    "apply",
    "dof_joint",
    "dof_phase_only",
    "dof_region",
    "ml_decode",
    "sample_channel",
    "solve",
]
