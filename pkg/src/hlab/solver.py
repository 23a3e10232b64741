"""Ideal MHD / gas dynamics on a periodic grid, advanced with classical RK4.

Mass, entropy density ``sigma = rho*S`` and momentum are advanced from flux
divergences; velocity is stored as a primitive and updated from the momentum
flux divergence divided by rho.  Units have mu_0 = 1.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .grid import Grid, cross, dot
from .thermo import DomainError, EquationOfState, Thermo, check_density, eval_thermo

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.4


class NumericalAbort(RuntimeError):
    """Raised when the evolved state stops being usable (NaN, rho <= 0)."""


class CFLWarning(UserWarning):
    pass


@dataclass
class FluidState:
    """Eulerian MHD state.  ``A`` (advected-gauge potential) and ``Phi`` are optional."""

    grid: Grid
    t: float
    rho: np.ndarray
    u: np.ndarray
    S: np.ndarray
    B: np.ndarray
    A: np.ndarray | None = None
    Phi: np.ndarray | None = None

    def __post_init__(self):
        g = self.grid
        self.rho = g.check_scalar(self.rho, "rho")
        self.S = g.check_scalar(self.S, "S")
        self.u = g.check_vector(self.u, "u")
        self.B = g.check_vector(self.B, "B")
        if self.A is not None:
            self.A = g.check_vector(self.A, "A")
        if self.Phi is not None:
            self.Phi = g.check_scalar(self.Phi, "Phi")

    @property
    def sigma(self) -> np.ndarray:
        return self.rho * self.S

    def copy(self) -> FluidState:
        return replace(
            self,
            rho=self.rho.copy(),
            u=self.u.copy(),
            S=self.S.copy(),
            B=self.B.copy(),
            A=None if self.A is None else self.A.copy(),
        )

    def fields(self) -> dict[str, np.ndarray]:
        out = {"rho": self.rho, "u": self.u, "S": self.S, "B": self.B}
        if self.A is not None:
            out["A"] = self.A
        if self.Phi is not None:
            out["Phi"] = self.Phi
        return out


@dataclass
class FluidTangent:
    """Time derivatives of the evolved fields (``S`` and ``sigma = rho S`` both given)."""

    rho: np.ndarray
    u: np.ndarray
    S: np.ndarray
    sigma: np.ndarray
    B: np.ndarray
    A: np.ndarray | None = None


# -- packing between FluidState and the flat RK4 variable dict ---------------------


def pack(state: FluidState, prefix: str = "") -> dict[str, np.ndarray]:
    y = {
        prefix + "rho": state.rho,
        prefix + "u": state.u,
        prefix + "sigma": state.rho * state.S,
        prefix + "B": state.B,
    }
    if state.A is not None:
        y[prefix + "A"] = state.A
    return y


def unpack(y: Mapping[str, np.ndarray], template: FluidState, t: float, prefix: str = "") -> FluidState:
    rho = y[prefix + "rho"]
    return FluidState(
        grid=template.grid,
        t=t,
        rho=rho,
        u=y[prefix + "u"],
        S=y[prefix + "sigma"] / rho,
        B=y[prefix + "B"],
        A=y.get(prefix + "A"),
        Phi=template.Phi,
    )


def fluid_rates(state: FluidState, eos: EquationOfState, th: Thermo | None = None) -> dict[str, np.ndarray]:
    """Rates of the packed variables (rho, u, sigma, B[, A])."""
    g = state.grid
    rho, u, B = state.rho, state.u, state.B
    if th is None:
        th = eval_thermo(eos, rho, state.S)
    m = rho * u
    drho = -g.div(m)
    ptot = th.p + 0.5 * dot(B, B)
    dm = np.empty_like(u)
    for i in range(3):
        flux = m[i] * u - B[i] * B
        flux[i] += ptot
        dm[i] = -g.div(flux)
    if state.Phi is not None:
        dm -= rho * g.grad(state.Phi)
    rates = {
        "rho": drho,
        "u": (dm - u * drho) / rho,
        "sigma": -g.div(state.sigma * u),
        "B": g.curl(cross(u, B)) - u * g.div(B),
    }
    if state.A is not None:
        A = state.A
        rates["A"] = cross(u, g.curl(A)) - g.grad(dot(u, A))
    return rates


def rhs(state: FluidState, eos: EquationOfState) -> FluidTangent:
    """Time derivative of every evolved field of ``state``."""
    check_density(state.rho)
    r = fluid_rates(state, eos)
    dS = (r["sigma"] - state.S * r["rho"]) / state.rho
    return FluidTangent(rho=r["rho"], u=r["u"], S=dS, sigma=r["sigma"], B=r["B"], A=r.get("A"))


def fast_speed(state: FluidState, eos: EquationOfState) -> float:
    """max(|u| + c_fast) with c_fast = sqrt(c_s^2 + |B|^2/rho)."""
    th = eval_thermo(eos, state.rho, state.S)
    cf2 = eos.gamma * th.p / state.rho + dot(state.B, state.B) / state.rho
    speed = np.sqrt(dot(state.u, state.u)) + np.sqrt(cf2)
    return float(np.max(speed))


def cfl_timestep(state: FluidState, eos: EquationOfState, cfl: float = DEFAULT_CFL) -> float:
    return cfl * min(state.grid.dx) / fast_speed(state, eos)


def rk4(y: dict[str, np.ndarray], rate: Callable[[dict, float], dict], t: float, dt: float) -> dict[str, np.ndarray]:
    """One classical RK4 step on a dict of arrays.  ``rate(y, t)`` returns a dict with the same keys."""

    def shifted(k, c):
        return {name: y[name] + c * k[name] for name in y}

    k1 = rate(y, t)
    k2 = rate(shifted(k1, 0.5 * dt), t + 0.5 * dt)
    k3 = rate(shifted(k2, 0.5 * dt), t + 0.5 * dt)
    k4 = rate(shifted(k3, dt), t + dt)
    out = {}
    for name in y:
        out[name] = y[name] + (dt / 6.0) * (k1[name] + 2.0 * k2[name] + 2.0 * k3[name] + k4[name])
        if not np.all(np.isfinite(out[name])):
            raise NumericalAbort(f"non-finite values in {name!r} at t={t + dt:.6g}")
    return out


def check_cfl(state: FluidState, eos: EquationOfState, dt: float, cfl: float = DEFAULT_CFL) -> None:
    limit = cfl_timestep(state, eos, cfl)
    if dt > limit * (1.0 + 1e-12):
        warnings.warn(
            f"dt={dt:.4g} exceeds CFL limit {limit:.4g} (cfl={cfl}) at t={state.t:.4g}",
            CFLWarning,
            stacklevel=3,
        )


def step_rk4(state: FluidState, eos: EquationOfState, dt: float, cfl: float = DEFAULT_CFL) -> FluidState:
    def rate(y, t):
        stage = unpack(y, state, t)
        check_density(stage.rho)
        return fluid_rates(stage, eos)

    try:
        check_cfl(state, eos, dt, cfl)
        y = rk4(pack(state), rate, state.t, dt)
    except DomainError as exc:
        raise NumericalAbort(str(exc)) from exc
    new = unpack(y, state, state.t + dt)
    if not np.all(new.rho > 0.0):
        raise NumericalAbort(f"density became non-positive at t={new.t:.6g}")
    return new
