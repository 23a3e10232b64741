"""Registry of named verification checks and their evaluation on a run.

Each check reduces a run to one headline error (used for convergence fits)
plus a small summary dictionary for the JSON report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import casimir, noether
from .clebsch import generalized_vorticity
from .grid import Grid, norm_inf
from .invariants import LAWS, ConservationReport, evolution_residual, law_producer, residual
from .lagrangian import Interpolator, map_bfield, map_density
from .liedrag import AdvectedObject, Kind, contract, drag_rate
from .thermo import EquationOfState

OPERATORS = {
    "grad": "gradient of sin x + cos 2y (+ sin z) against its analytic value",
    "div": "divergence of (sin y, sin x, 0)-type fields against the analytic value",
    "curl": "curl of (-sin y, sin x, 0) against (0, 0, cos x + cos y)",
}

EXTRA = {
    "liedrag:closure": "contractions of dragged b, alpha, nu, rho d^3x against dragged contractions",
    "clebsch:drag": "1-form drag of w = u - grad phi + r grad S",
    "lagrangian:map": "rho0/J and F B0/J against the Eulerian fields at tracer positions",
    "lagrangian:entropy": "S at tracer positions against its label value",
    "lagrangian:ertel": "potential vorticity at tracer positions against its label value",
}


def catalog() -> dict[str, str]:
    """Every runnable check name with a one-line description."""
    out = {name: desc for name, desc in LAWS.items()}
    for name, cf in casimir.CATALOG.items():
        out["casimir:" + name] = cf.description
    out["casimir:" + casimir.CONTROL.name] = casimir.CONTROL.description
    for name, desc in noether.CANDIDATES.items():
        out["symmetry:" + name] = desc
        out["noether:" + name] = "conservation law from candidate " + name
        out["relabel:" + name] = "simple relabeling conditions for candidate " + name
    for name in ("helicity", "cross_helicity"):
        out["gauge:" + name] = "gauge divergence against rho T V.grad S for " + name
    for name, desc in noether.BIANCHI.items():
        out["bianchi:" + name] = desc
    out.update(EXTRA)
    for name, desc in OPERATORS.items():
        out["operator:" + name] = desc
    return out


def validate_check(name: str) -> None:
    if name == "casimir:all" or name in catalog():
        return
    raise ValueError(f"unknown check {name!r} (see 'hlab list')")


def expand_checks(names: list[str]) -> list[str]:
    out: list[str] = []
    for name in names:
        validate_check(name)
        if name == "casimir:all":
            out.extend("casimir:" + c for c in casimir.CATALOG)
        else:
            out.append(name)
    return list(dict.fromkeys(out))


@dataclass
class CheckResult:
    name: str
    error: float
    summary: dict = field(default_factory=dict)
    report: Any = None


# -- what a run has to carry ------------------------------------------------------------


def needs_tracers(names: list[str]) -> bool:
    return any(n.startswith("lagrangian:") for n in names)


def needs_closure(names: list[str]) -> bool:
    return "liedrag:closure" in names


def closure_objects(fs) -> dict[str, AdvectedObject]:
    """Dragged building blocks and their t=0 contractions."""
    g = fs.grid
    b = AdvectedObject(Kind.VECTOR, fs.B / fs.rho)
    nu = AdvectedObject(Kind.ONE_FORM, g.grad(fs.S))
    rho3 = AdvectedObject(Kind.THREE_FORM, fs.rho.copy())
    objs = {
        "b": b,
        "nu": nu,
        "rho3": rho3,
        "b.nu": contract(b, nu),
        "b.rho3": contract(b, rho3),
    }
    if fs.A is not None:
        alpha = AdvectedObject(Kind.ONE_FORM, fs.A.copy())
        objs["alpha"] = alpha
        objs["b.alpha"] = contract(b, alpha)
    return objs


CLOSURE_PAIRS = (("b", "alpha"), ("b", "nu"), ("b", "rho3"))


def closure_errors(snap) -> dict[str, float]:
    """Max-norm mismatch between contracting dragged objects and the dragged contraction."""
    d = snap.dragged
    out = {}
    for a, b in CLOSURE_PAIRS:
        key = f"{a}.{b}"
        if key not in d:
            continue
        out[key] = norm_inf(contract(d[a], d[b]).data - d[key].data)
    return out


# -- operator self-tests --------------------------------------------------------------------


def operator_error(op: str, grid: Grid) -> float:
    x, y, z = grid.coords()
    if op == "grad":
        f = np.sin(x) + np.cos(2.0 * y) + np.sin(z)
        exact = np.stack([np.cos(x), -2.0 * np.sin(2.0 * y), np.cos(z) if grid.dims == 3 else 0.0 * z])
        return norm_inf(grid.grad(f) - exact)
    if op == "div":
        v = np.stack([np.sin(x) * np.cos(y), np.cos(x) + np.sin(2.0 * y), np.sin(z)])
        exact = np.cos(x) * np.cos(y) + 2.0 * np.cos(2.0 * y) + (np.cos(z) if grid.dims == 3 else 0.0)
        return norm_inf(grid.div(v) - exact)
    if op == "curl":
        v = np.stack([-np.sin(y), np.sin(x), 0.0 * x])
        exact = np.stack([0.0 * x, 0.0 * x, np.cos(x) + np.cos(y)])
        return norm_inf(grid.curl(v) - exact)
    raise ValueError(f"unknown operator {op!r}")


# -- evaluation -----------------------------------------------------------------------------


def _report_result(name: str, rep: ConservationReport) -> CheckResult:
    return CheckResult(name, rep.error(), rep.summary(), rep)


def evaluate(name: str, snapshots: list, eos: EquationOfState) -> CheckResult:
    """Evaluate one (already expanded) check on a stored run."""
    kind, _, arg = name.partition(":")
    if name in LAWS:
        return _report_result(name, residual(law_producer(name, eos), snapshots, name))
    if kind == "casimir":
        rep = casimir.casimir_drift(arg, snapshots)
        det = casimir.determining_residuals(arg, snapshots[-1].fluid)
        summary = {"max_drift": rep.max_drift, "final_C": rep.values[-1], "determining": det}
        return CheckResult(name, rep.max_drift, summary, rep)
    if kind == "symmetry":
        return _report_result(name, noether.symmetry_residual(arg, snapshots, eos))
    if kind == "noether":
        return _report_result(name, noether.noether_residual(arg, snapshots, eos))
    if kind == "gauge":
        return _report_result(name, noether.gauge_consistency(arg, snapshots, eos))
    if kind == "relabel":
        d = noether.relabel_determining_residuals(arg, snapshots, eos)
        return CheckResult(name, max(d["r1"], d["r2"], d["r3"], d["r4"]), d)
    if kind == "bianchi":
        rep = noether.bianchi_residuals(snapshots, eos, [arg])[arg]
        return _report_result(name, rep)
    if name == "liedrag:closure":
        if not snapshots[0].dragged:
            raise ValueError("liedrag:closure needs dragged objects in the run")
        worst: dict[str, float] = {}
        for snap in snapshots:
            for k, v in closure_errors(snap).items():
                worst[k] = max(worst.get(k, 0.0), v)
        return CheckResult(name, max(worst.values()), worst)
    if name == "clebsch:drag":
        return _report_result(name, one_form_drag_residual(snapshots))
    if kind == "lagrangian":
        return lagrangian_check(arg, snapshots)
    if kind == "operator":
        g = snapshots[0].grid
        err = operator_error(arg, g)
        return CheckResult(name, err, {"max_error": err})
    raise ValueError(f"unknown check {name!r}")


def one_form_drag_residual(snapshots: list) -> ConservationReport:
    def quantity(snap):
        if snap.clebsch is None:
            raise ValueError("clebsch:drag needs Clebsch potentials in the run")
        return generalized_vorticity(snap.clebsch, snap.fluid)[0]

    def rate(snap, w):
        return drag_rate(snap.grid, Kind.ONE_FORM, w, snap.fluid.u)

    return evolution_residual(snapshots, quantity, rate, "clebsch:drag")


def lagrangian_errors(snap) -> dict[str, float]:
    """Tracer-versus-grid mismatches at one snapshot."""
    tc, fs = snap.tracers, snap.fluid
    if tc is None:
        raise ValueError("lagrangian checks need tracers in the run")
    interp = Interpolator(fs.grid, tc.x)
    rho_e = interp(fs.rho)
    B_e = interp(fs.B).T
    out = {
        "density": norm_inf(map_density(tc) - rho_e) / norm_inf(rho_e),
        "entropy": norm_inf(interp(fs.S) - tc.carried["S0"]),
    }
    bscale = norm_inf(B_e)
    out["bfield"] = norm_inf(map_bfield(tc) - B_e) / bscale if bscale > 0 else norm_inf(map_bfield(tc))
    if "q0" in tc.carried:
        q = interp(noether.potential_vorticity(fs))
        out["ertel"] = norm_inf(q - tc.carried["q0"])
    return out


def lagrangian_check(which: str, snapshots: list) -> CheckResult:
    worst: dict[str, float] = {}
    for snap in snapshots:
        for k, v in lagrangian_errors(snap).items():
            worst[k] = max(worst.get(k, 0.0), v)
    keys = {"map": ("density", "bfield"), "entropy": ("entropy",), "ertel": ("ertel",)}[which]
    return CheckResult("lagrangian:" + which, max(worst[k] for k in keys), {k: worst[k] for k in keys})

