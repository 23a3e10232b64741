"""Cached reference runs shared by the test modules.

Every case is a 2.5D run whose step count scales with n, so refining n
refines dx and dt together.
"""

from __future__ import annotations

import functools

from hlab import checks
from hlab.clebsch import ClebschState
from hlab.grid import Grid
from hlab.lagrangian import label_tracers, seed_tracers
from hlab.noether import potential_vorticity
from hlab.scenarios import make_scenario
from hlab.simulation import quiet_run
from hlab.thermo import BAROTROPIC, EquationOfState

IDEAL_EOS = EquationOfState()
BARO_EOS = EquationOfState(BAROTROPIC)
NS = (32, 48, 64)

# name: (scenario, kwargs, eos, t_end, steps per n, tracers, dragged)
CASES = {
    "abc": ("abc_mhd", {}, IDEAL_EOS, 0.25, 0.5, True, True),
    "abc_long": ("abc_mhd", {}, IDEAL_EOS, 0.5, 1.0, False, False),
    "gas": ("random_smooth", {"seed": 3, "magnetic": False}, IDEAL_EOS, 0.25, 0.5, True, False),
    "gas_long": ("random_smooth", {"seed": 3, "magnetic": False}, IDEAL_EOS, 0.5, 1.0, False, False),
    "vortex": ("vortex2d", {}, BARO_EOS, 0.25, 0.5, False, False),
    "vortex_long": ("vortex2d", {}, BARO_EOS, 0.5, 1.0, False, False),
    "vortex_mixed": ("vortex2d", {"entropy": "mixed"}, IDEAL_EOS, 0.25, 0.5, False, False),
    "bperp": ("bperp_entropy2d", {}, IDEAL_EOS, 0.25, 0.5, False, False),
}


def eos_of(case: str) -> EquationOfState:
    return CASES[case][2]


@functools.lru_cache(maxsize=None)
def run_case(case: str, n: int) -> list:
    scenario, kw, eos, t_end, per_n, with_tracers, with_drag = CASES[case]
    g = Grid.cube(2, n)
    kw = dict(kw)
    seed = kw.pop("seed", 0)
    fs = make_scenario(scenario, g, seed, eos=eos, **kw)
    tracers = None
    if with_tracers:
        tracers = label_tracers(seed_tracers(g, 256), fs, q0=potential_vorticity(fs))
    dragged = checks.closure_objects(fs) if with_drag else None
    return quiet_run(
        fs,
        eos,
        t_end,
        steps=max(1, round(per_n * n)),
        clebsch=ClebschState.zeros(g),
        tracers=tracers,
        dragged=dragged,
    )


def errors_over(case: str, fn, ns=NS) -> list[float]:
    """Apply ``fn(snapshots, eos)`` to the case at every resolution."""
    return [fn(run_case(case, n), eos_of(case)) for n in ns]


def state_distance(a, b, stride: int = 1) -> float:
    """Max-norm distance over rho, u, S, B; ``b`` is sampled every ``stride`` points."""
    from hlab.grid import norm_inf

    sl = (Ellipsis,) + (slice(None, None, stride),) * a.grid.dims
    return max(norm_inf(getattr(a, k) - getattr(b, k)[sl]) for k in ("rho", "u", "S", "B"))


@functools.lru_cache(maxsize=None)
def dt_self_convergence(n: int = 32, steps=(4, 8, 16, 32)) -> tuple[tuple, tuple]:
    """Successive differences of abc_mhd at t=0.25 when halving dt on a fixed grid."""
    g = Grid.cube(2, n)
    fs = make_scenario("abc_mhd", g)
    finals = [quiet_run(fs, IDEAL_EOS, 0.25, steps=s, output_every=s)[-1].fluid for s in steps]
    diffs = tuple(state_distance(finals[i], finals[i + 1]) for i in range(len(steps) - 1))
    return tuple(steps[:-1]), diffs


@functools.lru_cache(maxsize=None)
def combined_self_convergence(ns=(16, 32, 64, 128)) -> tuple[tuple, tuple]:
    """Differences between nested abc_mhd runs at t=0.25 with dt proportional to dx."""
    finals = {}
    for n in ns:
        g = Grid.cube(2, n)
        finals[n] = quiet_run(make_scenario("abc_mhd", g), IDEAL_EOS, 0.25, steps=n // 4, output_every=n)[-1].fluid
    diffs = tuple(state_distance(finals[n], finals[m], 2) for n, m in zip(ns, ns[1:]))
    return tuple(ns[:-1]), diffs
