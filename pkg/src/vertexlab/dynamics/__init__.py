"""Seeded Monte Carlo for the lattice chains and their continuous limits.

Sampling is exact where the transition weights are rational: every discrete
choice is made by comparing a lazily extended dyadic expansion of a Philox
stream against exact cumulative cuts, so trajectories depend only on
(master_seed, replica) and never on floating point. The continuous-time
chains (qTASEP, ASEP, qBoson) run double-precision Gillespie loops on the
same streams.

Set VERTEXLAB_PURE_PYTHON=1 to force the pure-Python samplers; otherwise the
compiled extension is used when available. Both backends consume stream
words identically, so records match bit for bit.
"""

from ._backend import BACKEND_NAME, CutTable, PhiloxStream, philox4x64_block
from .configs import (
    ParticleConfig,
    brute_force_expectation,
    height,
    q_correlation_observable,
)
from .continuous import run_asep, run_q_boson, run_q_tasep, step_positions
from .engine import MODELS, RunSpec, TrajectoryRecord, run, validate_runspec
from .quadrant import QuadrantSampler, sample_quadrant_grid, step_six_vertex_quadrant
from .steps import (
    LRowCache,
    PhiCache,
    sample_run_length,
    step_fused,
    step_q_hahn,
    step_x_circ,
    step_x_plus,
)

__all__ = [
    "BACKEND_NAME",
    "CutTable",
    "PhiloxStream",
    "philox4x64_block",
    "ParticleConfig",
    "brute_force_expectation",
    "height",
    "q_correlation_observable",
    "run_asep",
    "run_q_boson",
    "run_q_tasep",
    "step_positions",
    "MODELS",
    "RunSpec",
    "TrajectoryRecord",
    "run",
    "validate_runspec",
    "QuadrantSampler",
    "sample_quadrant_grid",
    "step_six_vertex_quadrant",
    "LRowCache",
    "PhiCache",
    "sample_run_length",
    "step_fused",
    "step_q_hahn",
    "step_x_circ",
    "step_x_plus",
]
