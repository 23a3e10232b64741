"""Coupled time stepping of fluid, Clebsch potentials, tracers and dragged objects.

Everything that evolves is packed into one dict and advanced by a single RK4
step, so every sub-system sees the same fluid stage values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .clebsch import ClebschState, clebsch_rhs
from .grid import Grid
from .lagrangian import TracerCloud, tracer_rates
from .liedrag import AdvectedObject, drag_rate
from .solver import (
    DEFAULT_CFL,
    CFLWarning,
    FluidState,
    NumericalAbort,
    cfl_timestep,
    check_cfl,
    fluid_rates,
    pack,
    rk4,
    unpack,
)
from .thermo import DomainError, EquationOfState, check_density, eval_thermo


@dataclass
class Snapshot:
    """Everything known at one output time."""

    t: float
    fluid: FluidState
    clebsch: ClebschState | None = None
    tracers: TracerCloud | None = None
    dragged: dict[str, AdvectedObject] = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.fluid.grid


def _pack_all(fs, cs, tc, dragged) -> dict[str, np.ndarray]:
    y = pack(fs, "fluid.")
    if cs is not None:
        y.update(cs.as_dict("cl."))
    if tc is not None:
        y.update(tc.as_dict("tr."))
    for name, obj in dragged.items():
        y["drag." + name] = obj.data
    return y


def _unpack_all(y, fs0, cs0, tc0, dragged0, t):
    fs = unpack(y, fs0, t, "fluid.")
    cs = ClebschState.from_dict(y, "cl.") if cs0 is not None else None
    tc = tc0.updated(y, "tr.") if tc0 is not None else None
    dragged = {k: v.with_data(y["drag." + k]) for k, v in dragged0.items()}
    return fs, cs, tc, dragged


def coupled_rates(
    y: Mapping[str, np.ndarray],
    t: float,
    eos: EquationOfState,
    fs0: FluidState,
    cs0: ClebschState | None,
    tc0: TracerCloud | None,
    dragged0: Mapping[str, AdvectedObject],
) -> dict[str, np.ndarray]:
    fs = unpack(y, fs0, t, "fluid.")
    check_density(fs.rho)
    th = eval_thermo(eos, fs.rho, fs.S)
    rates = {"fluid." + k: v for k, v in fluid_rates(fs, eos, th).items()}
    if cs0 is not None:
        cs = ClebschState.from_dict(y, "cl.")
        rates.update(clebsch_rhs(cs, fs, eos, th).as_dict("cl."))
    if tc0 is not None:
        tr = tracer_rates(tc0, y["tr.x"], y["tr.F"], fs, eos, thermo=th)
        rates.update({"tr." + k: v for k, v in tr.items()})
    for name, obj in dragged0.items():
        rates["drag." + name] = drag_rate(fs.grid, obj.kind, y["drag." + name], fs.u)
    return rates


def resolve_steps(
    fluid: FluidState,
    eos: EquationOfState,
    t_end: float,
    steps: int | None = None,
    dt: float | None = None,
    cfl: float = DEFAULT_CFL,
) -> int:
    """Number of uniform steps covering ``[0, t_end]``.

    Explicit ``steps`` wins, then ``dt`` (rounded up to fit ``t_end``), then the
    CFL limit of the initial state.
    """
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if steps is not None:
        if steps < 1:
            raise ValueError("steps must be >= 1")
        return int(steps)
    if dt is None:
        dt = cfl_timestep(fluid, eos, cfl)
    return max(1, math.ceil(t_end / dt - 1e-9))


def simulate(
    fluid: FluidState,
    eos: EquationOfState,
    t_end: float,
    *,
    steps: int | None = None,
    dt: float | None = None,
    cfl: float = DEFAULT_CFL,
    output_every: int = 1,
    clebsch: ClebschState | None = None,
    tracers: TracerCloud | None = None,
    dragged: Mapping[str, AdvectedObject] | None = None,
) -> Iterator[Snapshot]:
    """Yield snapshots at t=0 and every ``output_every`` steps up to ``t_end``.

    Raises NumericalAbort on non-finite values or non-positive density.  A step
    that exceeds the CFL limit emits a CFLWarning and proceeds.
    """
    dragged = dict(dragged or {})
    n_steps = resolve_steps(fluid, eos, t_end, steps, dt, cfl)
    h = t_end / n_steps
    fs, cs, tc, dr = fluid, clebsch, tracers, dragged
    yield Snapshot(fs.t, fs, cs, tc, dr)
    t0 = fluid.t
    for k in range(1, n_steps + 1):
        def rate(y, s, fs=fs, cs=cs, tc=tc, dr=dr):
            return coupled_rates(y, s, eos, fs, cs, tc, dr)

        try:
            check_cfl(fs, eos, h, cfl)
            y = rk4(_pack_all(fs, cs, tc, dr), rate, fs.t, h)
        except DomainError as exc:
            raise NumericalAbort(str(exc)) from exc
        t = t0 + k * h
        fs, cs, tc, dr = _unpack_all(y, fs, cs, tc, dr, t)
        if not np.all(fs.rho > 0.0):
            raise NumericalAbort(f"density became non-positive at t={t:.6g}")
        if k % output_every == 0 or k == n_steps:
            yield Snapshot(t, fs, cs, tc, dr)


def run(fluid: FluidState, eos: EquationOfState, t_end: float, **kw) -> list[Snapshot]:
    """:func:`simulate` collected into a list (CFL warnings are not suppressed)."""
    return list(simulate(fluid, eos, t_end, **kw))


def quiet_run(fluid: FluidState, eos: EquationOfState, t_end: float, **kw) -> list[Snapshot]:
    """:func:`run` with CFL warnings silenced, for studies that pick dt themselves."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CFLWarning)
        return run(fluid, eos, t_end, **kw)
