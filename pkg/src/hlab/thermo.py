"""Equation of state and derived thermodynamic fields.

Internal energy per unit volume is ``eps = K rho**gamma exp(S/c_v) / (gamma-1)``
(``exp`` factor dropped for the barotropic branch).  With this choice

    p = rho*eps_rho - eps = (gamma-1) eps,  h = eps_rho = gamma eps / rho,
    T = eps_S / rho = eps / (rho c_v),

and ``-grad(p)/rho = T grad(S) - grad(h)`` holds exactly in the continuum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import Grid, norm_inf

IDEAL = "ideal"
BAROTROPIC = "barotropic"


class DomainError(ValueError):
    """Raised when a thermodynamic input lies outside its domain (rho <= 0)."""


@dataclass(frozen=True)
class EquationOfState:
    kind: str = IDEAL
    gamma: float = 5.0 / 3.0
    K: float = 1.0
    c_v: float = 1.0

    def __post_init__(self):
        if self.kind not in (IDEAL, BAROTROPIC):
            raise ValueError(f"unknown EOS kind {self.kind!r}")
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        if not self.K > 0.0:
            raise ValueError("K must be positive")
        if not self.c_v > 0.0:
            raise ValueError("c_v must be positive")

    @property
    def barotropic(self) -> bool:
        return self.kind == BAROTROPIC


class Thermo(NamedTuple):
    eps: np.ndarray
    p: np.ndarray
    T: np.ndarray
    h: np.ndarray


def check_density(rho: np.ndarray) -> None:
    if np.all(rho > 0.0):
        return
    bad = np.unravel_index(np.argmin(np.where(np.isnan(rho), -np.inf, rho)), rho.shape)
    raise DomainError(f"density must be positive; rho[{', '.join(map(str, bad))}] = {rho[bad]!r}")


def eval_thermo(eos: EquationOfState, rho: np.ndarray, S: np.ndarray) -> Thermo:
    check_density(rho)
    g = eos.gamma
    if eos.barotropic:
        eps = eos.K * rho**g / (g - 1.0)
        T = np.zeros_like(eps)
    else:
        eps = eos.K * rho**g * np.exp(S / eos.c_v) / (g - 1.0)
        T = eps / (rho * eos.c_v)
    return Thermo(eps=eps, p=(g - 1.0) * eps, T=T, h=g * eps / rho)


def sound_speed(eos: EquationOfState, rho: np.ndarray, S: np.ndarray) -> np.ndarray:
    th = eval_thermo(eos, rho, S)
    return np.sqrt(eos.gamma * th.p / rho)


def first_law_residual(grid: Grid, eos: EquationOfState, rho: np.ndarray, S: np.ndarray) -> float:
    """Max-norm of ``grad(p)/rho + T grad(S) - grad(h)`` on the grid."""
    th = eval_thermo(eos, rho, S)
    res = grid.grad(th.p) / rho + th.T * grid.grad(S) - grid.grad(th.h)
    return norm_inf(res)
