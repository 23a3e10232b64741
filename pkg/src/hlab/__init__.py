"""Numerical laboratory for advected invariants of ideal MHD and gas dynamics."""

import os as _os

# HLAB_THREADS caps BLAS/OpenMP threads; it has to be set before numpy loads.
if "HLAB_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["HLAB_THREADS"])

from .grid import Grid, GridMismatchError, cross, dot, norm_inf, read_dump, write_dump
from .thermo import BAROTROPIC, IDEAL, DomainError, EquationOfState, eval_thermo, first_law_residual
from .solver import CFLWarning, FluidState, NumericalAbort, rhs, step_rk4
from .scenarios import SCENARIOS, make_scenario
from .clebsch import ClebschState, clebsch_rhs, generalized_vorticity
from .simulation import Snapshot, run, simulate

__all__ = [
    "BAROTROPIC",
    "CFLWarning",
    "ClebschState",
    "DomainError",
    "EquationOfState",
    "FluidState",
    "Grid",
    "GridMismatchError",
    "IDEAL",
    "NumericalAbort",
    "SCENARIOS",
    "Snapshot",
    "clebsch_rhs",
    "cross",
    "dot",
    "eval_thermo",
    "first_law_residual",
    "generalized_vorticity",
    "make_scenario",
    "norm_inf",
    "read_dump",
    "rhs",
    "run",
    "simulate",
    "step_rk4",
    "write_dump",
]
