"""Catalog of smooth initial conditions.

All scenarios live on a (2 pi)-periodic box.  Analytic formulas are written in
(x, y, z); on a 2D grid z is identically zero so the same formulas give
2.5D fields.  Magnetic fields derived from a vector potential are set to the
*discrete* curl of that potential, so div(B) vanishes to round-off.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import Grid
from .solver import FluidState
from .thermo import EquationOfState, sound_speed

SCENARIOS = {
    "uniform": "rho=1, u=0, S=0, B=z-hat; every tangent vanishes",
    "acoustic1d": "right-going linear sound wave along x (amplitude 1e-6)",
    "vortex2d": "2.5D compressible vortex, B=0, S a function of u_z (omega.grad S = 0)",
    "abc_mhd": "ABC-type force-free B with a shearing flow and entropy gradients along B",
    "random_smooth": "seeded random low-wavenumber fields (|k|<=2, amplitude 0.1)",
    "bperp_entropy2d": "2.5D MHD with B = grad(A_z) x z-hat and S = f(A_z), so B.grad S = 0",
}


class UnknownScenarioError(ValueError):
    pass


def make_scenario(
    name: str,
    grid: Grid,
    seed: int = 0,
    *,
    eos: EquationOfState | None = None,
    magnetic: bool = True,
    entropy: str = "aligned",
) -> FluidState:
    """Build the initial FluidState for a catalog scenario.

    ``magnetic`` only affects ``random_smooth`` (False gives a B=0 gas run);
    ``entropy`` only affects ``vortex2d`` ("aligned" keeps omega.grad S = 0,
    "mixed" adds an independent entropy mode).  ``eos`` sets the sound speed of
    ``acoustic1d`` (default: ideal gas, gamma 5/3).
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}"
        ) from None
    if name == "random_smooth":
        return builder(grid, seed, magnetic)
    if name == "vortex2d":
        return builder(grid, entropy)
    if name == "acoustic1d":
        return builder(grid, eos or EquationOfState())
    return builder(grid)


def _uniform(grid: Grid) -> FluidState:
    B = grid.zeros_vector()
    B[2] = 1.0
    return FluidState(grid, 0.0, grid.full(1.0), grid.zeros_vector(), grid.zeros(), B)


def _acoustic1d(grid: Grid, eos: EquationOfState, amplitude: float = 1e-6) -> FluidState:
    x, _, _ = grid.coords()
    rho0 = 1.0
    S0 = grid.zeros()
    c = float(sound_speed(eos, np.array([rho0]), np.array([0.0]))[0])
    rho = rho0 + amplitude * np.sin(x)
    u = grid.zeros_vector()
    u[0] = c * amplitude * np.sin(x) / rho0
    return FluidState(grid, 0.0, rho, u, S0, grid.zeros_vector())


def _vortex_velocity(grid: Grid) -> np.ndarray:
    x, y, _ = grid.coords()
    u = np.empty((3, *grid.shape))
    u[0] = -0.3 * np.sin(y) + 0.1 * np.cos(x) * np.sin(y)
    u[1] = 0.3 * np.sin(x) + 0.05 * np.cos(2.0 * y)
    u[2] = 0.3 * (np.cos(x) + np.cos(y)) + 0.1 * np.sin(x + y)
    return u


def _vortex2d(grid: Grid, entropy: str) -> FluidState:
    if grid.dims != 2:
        raise ValueError("vortex2d needs a 2D grid")
    x, y, _ = grid.coords()
    u = _vortex_velocity(grid)
    rho = 1.0 + 0.1 * np.cos(x) * np.cos(y)
    # u_z is advected in 2.5D without B, so S = g(u_z) stays orthogonal to omega.
    S = 0.5 * u[2] + 0.5 * u[2] ** 2
    if entropy == "mixed":
        S = S + 0.2 * np.sin(x) + 0.1 * np.cos(2.0 * y)
    elif entropy != "aligned":
        raise ValueError(f"entropy must be 'aligned' or 'mixed', got {entropy!r}")
    return FluidState(grid, 0.0, rho, u, S, grid.zeros_vector())


ABC_COEFFS = (1.0, 0.8, 0.6)
ABC_AMPLITUDE = 0.4


def abc_field(grid: Grid) -> np.ndarray:
    """Beltrami ABC field (curl B = B).  On 2D grids the A-coefficient is dropped."""
    a, b, c = ABC_COEFFS
    if grid.dims == 2:
        a = 0.0
    x, y, z = grid.coords()
    B = np.empty((3, *grid.shape))
    B[0] = a * np.sin(z) + c * np.cos(y)
    B[1] = b * np.sin(x) + a * np.cos(z)
    B[2] = c * np.sin(y) + b * np.cos(x)
    return ABC_AMPLITUDE * B


def _abc_mhd(grid: Grid) -> FluidState:
    x, y, z = grid.coords()
    A = abc_field(grid)
    B = grid.curl(A)
    u = np.empty((3, *grid.shape))
    u[0] = 0.2 * np.sin(y + z) + 0.05 * np.cos(x)
    u[1] = 0.2 * np.cos(x) * np.cos(z) - 0.1 * np.sin(x)
    u[2] = 0.15 * np.sin(x) + 0.1 * np.cos(y)
    rho = 1.0 + 0.1 * np.sin(x) * np.cos(y) + 0.05 * np.cos(z)
    S = 0.1 * np.cos(x) + 0.1 * np.sin(y + z) + 0.05 * np.sin(2.0 * x)
    return FluidState(grid, 0.0, rho, u, S, B, A=A)


def _random_modes(grid: Grid, rng: np.random.Generator, nmodes: int = 3, amplitude: float = 0.1) -> np.ndarray:
    coords = grid.coords()
    out = np.zeros(grid.shape)
    for _ in range(nmodes):
        k = rng.integers(-2, 3, size=3)
        k[grid.dims:] = 0
        if not k.any():
            k[0] = 1
        phase = rng.uniform(0.0, 2.0 * math.pi)
        amp = amplitude * rng.uniform(0.5, 1.0)
        arg = sum(k[i] * coords[i] for i in range(3)) + phase
        out += amp * np.cos(arg)
    return out


def _random_smooth(grid: Grid, seed: int, magnetic: bool) -> FluidState:
    rng = np.random.default_rng(seed)
    rho = 1.0 + _random_modes(grid, rng)
    u = np.stack([_random_modes(grid, rng) for _ in range(3)])
    S = _random_modes(grid, rng)
    if magnetic:
        A = np.stack([_random_modes(grid, rng) for _ in range(3)])
        B = grid.curl(A)
    else:
        A, B = None, grid.zeros_vector()
    return FluidState(grid, 0.0, rho, u, S, B, A=A)


def flux_function(grid: Grid) -> np.ndarray:
    """A_z of the bperp_entropy2d scenario."""
    x, y, _ = grid.coords()
    return 0.4 * np.sin(x) * np.sin(y) + 0.3 * np.cos(x)


def entropy_of_flux(az: np.ndarray) -> np.ndarray:
    return 0.5 * az + 0.25 * az**2


def _bperp_entropy2d(grid: Grid) -> FluidState:
    if grid.dims != 2:
        raise ValueError("bperp_entropy2d needs a 2D grid")
    x, y, _ = grid.coords()
    az = flux_function(grid)
    A = np.stack([grid.zeros(), 0.3 * np.sin(x), az])
    B = grid.curl(A)
    u = np.empty((3, *grid.shape))
    u[0] = 0.2 * np.sin(y) + 0.05 * np.cos(x + y)
    u[1] = 0.2 * np.cos(x)
    u[2] = 0.1 * np.sin(x + y)
    rho = 1.0 + 0.1 * np.cos(x - y)
    return FluidState(grid, 0.0, rho, u, entropy_of_flux(az), B, A=A)


_BUILDERS = {
    "uniform": _uniform,
    "acoustic1d": _acoustic1d,
    "vortex2d": _vortex2d,
    "abc_mhd": _abc_mhd,
    "random_smooth": _random_smooth,
    "bperp_entropy2d": _bperp_entropy2d,
}
