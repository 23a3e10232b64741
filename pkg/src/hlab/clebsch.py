"""Nonlocal Clebsch potentials carried as Eulerian fields.

``phi`` and ``r`` are the Lagrangian time integrals of ``|u|^2/2 - h`` and
``-T`` (plus their initial "integration constants"); ``lambda_t`` and ``mu``
are passive labels.  Each obeys an advection-reaction equation co-stepped
with the fluid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .grid import Grid, cross, dot, norm_inf
from .solver import FluidState
from .thermo import EquationOfState, Thermo, eval_thermo

FIELDS = ("phi", "r", "lambda_t", "mu")


@dataclass
class ClebschState:
    phi: np.ndarray
    r: np.ndarray
    lambda_t: np.ndarray
    mu: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid) -> ClebschState:
        return cls(grid.zeros(), grid.zeros(), grid.zeros(), grid.zeros())

    def as_dict(self, prefix: str = "") -> dict[str, np.ndarray]:
        return {prefix + k: getattr(self, k) for k in FIELDS}

    @classmethod
    def from_dict(cls, y: Mapping[str, np.ndarray], prefix: str = "") -> ClebschState:
        return cls(*(y[prefix + k] for k in FIELDS))


def clebsch_rhs(
    cs: ClebschState, fs: FluidState, eos: EquationOfState, th: Thermo | None = None
) -> ClebschState:
    """Eulerian rates of the potentials: d(phi)/dt = |u|^2/2 - h - Phi, dr/dt = -T, labels advected."""
    g, u = fs.grid, fs.u
    if th is None:
        th = eval_thermo(eos, fs.rho, fs.S)
    source = 0.5 * dot(u, u) - th.h
    if fs.Phi is not None:
        source = source - fs.Phi
    return ClebschState(
        phi=-g.directional(u, cs.phi) + source,
        r=-g.directional(u, cs.r) - th.T,
        lambda_t=-g.directional(u, cs.lambda_t),
        mu=-g.directional(u, cs.mu),
    )


def generalized_vorticity(cs: ClebschState, fs: FluidState) -> tuple[np.ndarray, np.ndarray]:
    """Return ``w = u - grad(phi) + r grad(S)`` and ``Omega = curl(w)``."""
    g = fs.grid
    w = fs.u - g.grad(cs.phi) + cs.r * g.grad(fs.S)
    return w, g.curl(w)


def vorticity_split_residual(cs: ClebschState, fs: FluidState) -> float:
    """Max-norm of ``Omega - (omega + grad r x grad S - curl grad phi)``.

    Zero in the continuum; on the grid it measures the product-rule error of
    ``curl(r grad S)`` and converges at the stencil order.
    """
    g = fs.grid
    _, Omega = generalized_vorticity(cs, fs)
    split = g.curl(fs.u) + cross(g.grad(cs.r), g.grad(fs.S)) - g.curl(g.grad(cs.phi))
    return norm_inf(Omega - split)


def clebsch_velocity(cs: ClebschState, fs: FluidState) -> np.ndarray:
    """Gas-dynamic Clebsch velocity ``grad(phi) - r grad(S) - lambda_t grad(mu)``."""
    g = fs.grid
    return g.grad(cs.phi) - cs.r * g.grad(fs.S) - cs.lambda_t * g.grad(cs.mu)
