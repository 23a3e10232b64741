"""Tracer integration of the Lagrangian map ``x(x0, t)`` and its deformation matrix."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .grid import Grid, dot
from .solver import FluidState, NumericalAbort, rk4
from .thermo import EquationOfState, eval_thermo

# Per-tracer scalars that are integrated in time; every other carried entry is a frozen label.
INTEGRATED = ("r", "phi")


class SingularMapError(ValueError):
    pass


class Interpolator:
    """Periodic 4-point (cubic Lagrange) interpolation at fixed positions.

    Positions are an ``(N, 3)`` array; only the first ``grid.dims`` columns are
    used.  Accepts scalar fields ``(*n)`` and fields with leading component
    axes such as ``(3, *n)`` or ``(3, 3, *n)``; the tracer axis goes last.
    """

    def __init__(self, grid: Grid, x: np.ndarray):
        self.grid = grid
        self.index = []
        self.weight = []
        for a in range(grid.dims):
            s = x[:, a] / grid.dx[a]
            i0 = np.floor(s).astype(np.int64)
            f = s - i0
            self.index.append(np.stack([(i0 + k) % grid.n[a] for k in (-1, 0, 1, 2)]))
            self.weight.append(
                np.stack(
                    [
                        -f * (f - 1.0) * (f - 2.0) / 6.0,
                        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                        -(f + 1.0) * f * (f - 2.0) / 2.0,
                        (f + 1.0) * f * (f - 1.0) / 6.0,
                    ]
                )
            )

    def __call__(self, values: np.ndarray) -> np.ndarray:
        d = self.grid.dims
        lead = values.shape[: values.ndim - d]
        out = 0.0
        if d == 2:
            for a in range(4):
                for b in range(4):
                    w = self.weight[0][a] * self.weight[1][b]
                    out = out + values[..., self.index[0][a], self.index[1][b]] * w
        else:
            for a in range(4):
                for b in range(4):
                    wab = self.weight[0][a] * self.weight[1][b]
                    for c in range(4):
                        idx = (self.index[0][a], self.index[1][b], self.index[2][c])
                        out = out + values[(Ellipsis, *idx)] * (wab * self.weight[2][c])
        return np.asarray(out).reshape(*lead, -1)


def sample(grid: Grid, x: np.ndarray, values: np.ndarray) -> np.ndarray:
    return Interpolator(grid, x)(values)


@dataclass
class TracerCloud:
    """Sampled Lagrangian map: labels ``x0``, positions ``x`` (N, 3), deformation ``F`` (N, 3, 3)."""

    x0: np.ndarray
    x: np.ndarray
    F: np.ndarray
    carried: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def J(self) -> np.ndarray:
        return np.linalg.det(self.F)

    def __len__(self) -> int:
        return self.x0.shape[0]

    def copy(self) -> TracerCloud:
        return replace(
            self, x=self.x.copy(), F=self.F.copy(), carried={k: v.copy() for k, v in self.carried.items()}
        )

    def as_dict(self, prefix: str = "") -> dict[str, np.ndarray]:
        y = {prefix + "x": self.x, prefix + "F": self.F}
        for k in INTEGRATED:
            if k in self.carried:
                y[prefix + k] = self.carried[k]
        return y

    def updated(self, y: Mapping[str, np.ndarray], prefix: str = "") -> TracerCloud:
        carried = dict(self.carried)
        for k in INTEGRATED:
            if prefix + k in y:
                carried[k] = y[prefix + k]
        return TracerCloud(self.x0, y[prefix + "x"], y[prefix + "F"], carried)


def seed_tracers(grid: Grid, count: int = 512, seed: int = 0, jitter: float = 0.25) -> TracerCloud:
    """Regular sub-lattice of about ``count`` labels plus deterministic jitter."""
    d = grid.dims
    m = max(1, int(round(count ** (1.0 / d))))
    rng = np.random.default_rng(seed)
    axes = [np.arange(m) * (L / m) for L in grid.length]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.zeros((m**d, 3))
    for a in range(d):
        spacing = grid.length[a] / m
        pts[:, a] = mesh[a].ravel() + jitter * spacing * rng.uniform(-1.0, 1.0, m**d)
        pts[:, a] %= grid.length[a]
    F = np.broadcast_to(np.eye(3), (pts.shape[0], 3, 3)).copy()
    return TracerCloud(pts.copy(), pts, F)


def label_tracers(tc: TracerCloud, fs: FluidState, eos: EquationOfState | None = None, **extra: np.ndarray) -> TracerCloud:
    """Attach initial labels (rho0, S0, B0 and any ``extra`` grid fields) sampled at ``x0``."""
    interp = Interpolator(fs.grid, tc.x0)
    carried = dict(tc.carried)
    carried["rho0"] = interp(fs.rho)
    carried["S0"] = interp(fs.S)
    carried["B0"] = interp(fs.B).T
    for name, values in extra.items():
        v = interp(values)
        carried[name] = v.T if v.ndim == 2 else v
    return replace(tc, carried=carried)


def tracer_rates(
    tc: TracerCloud,
    x: np.ndarray,
    F: np.ndarray,
    fs: FluidState,
    eos: EquationOfState | None = None,
    grad_u: np.ndarray | None = None,
    thermo=None,
) -> dict[str, np.ndarray]:
    """Rates for positions, deformation and integrated scalars at a fluid stage."""
    g = fs.grid
    interp = Interpolator(g, x)
    u = interp(fs.u).T
    if grad_u is None:
        grad_u = g.jacobian(fs.u)
    G = np.moveaxis(interp(grad_u), -1, 0)
    rates = {"x": u, "F": G @ F}
    wants = [k for k in INTEGRATED if k in tc.carried]
    if wants:
        if eos is None:
            raise ValueError("eos needed to integrate carried r/phi")
        th = thermo if thermo is not None else eval_thermo(eos, fs.rho, fs.S)
        if "r" in wants:
            rates["r"] = -interp(th.T)
        if "phi" in wants:
            src = 0.5 * dot(u.T, u.T) - interp(th.h)
            if fs.Phi is not None:
                src = src - interp(fs.Phi)
            rates["phi"] = src
    return rates


VelocitySampler = Callable[[np.ndarray, float], tuple[np.ndarray, np.ndarray]]


def advect_tracers(
    tc: TracerCloud,
    flow: FluidState | VelocitySampler,
    dt: float,
    eos: EquationOfState | None = None,
    t: float = 0.0,
) -> TracerCloud:
    """One RK4 step of ``dx/dt = u``, ``dF/dt = grad(u) F`` (and carried r, phi).

    ``flow`` is either a FluidState, frozen during the step, or a callable
    ``flow(x, t) -> (u, grad_u)`` returning ``(N, 3)`` and ``(N, 3, 3)`` arrays.
    """
    if isinstance(flow, FluidState):
        grad_u = flow.grid.jacobian(flow.u)
        th = eval_thermo(eos, flow.rho, flow.S) if eos is not None else None

        def rate(y, s):
            return tracer_rates(tc, y["x"], y["F"], flow, eos, grad_u, th)

        if flow.t is not None:
            t = flow.t
    else:
        if any(k in tc.carried for k in INTEGRATED):
            raise ValueError("carried r/phi need a FluidState flow")

        def rate(y, s):
            u, G = flow(y["x"], s)
            return {"x": u, "F": G @ y["F"]}

    y = rk4(tc.as_dict(), rate, t, dt)
    if not np.all(np.isfinite(y["x"])):
        raise NumericalAbort("tracer positions became non-finite")
    return tc.updated(y)


def _check_jacobian(tc: TracerCloud) -> np.ndarray:
    J = tc.J
    if np.any(J <= 0.0):
        raise SingularMapError(f"Lagrangian map is singular: min J = {J.min():.3g}")
    return J


def map_density(tc: TracerCloud) -> np.ndarray:
    """``rho0 / J`` per tracer."""
    return tc.carried["rho0"] / _check_jacobian(tc)


def map_bfield(tc: TracerCloud) -> np.ndarray:
    """Frozen-in field ``F B0 / J`` per tracer, shape (N, 3)."""
    J = _check_jacobian(tc)
    return np.einsum("nij,nj->ni", tc.F, tc.carried["B0"]) / J[:, None]


def positions_wrapped(tc: TracerCloud, grid: Grid) -> np.ndarray:
    x = tc.x.copy()
    for a in range(grid.dims):
        x[:, a] %= grid.length[a]
    return x
