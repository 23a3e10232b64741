"""Conserved density/flux pairs and their Eulerian residuals along a run.

Every law is written ``dF0/dt + div(F) = source`` with ``source = 0`` for
exact conservation laws.  Time derivatives come from 4th-order finite
differences over stored snapshots (one-sided at the ends of the run).
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Mapping

import numpy as np

from .clebsch import ClebschState, generalized_vorticity
from .grid import cross, dot, norm_inf
from .solver import FluidState
from .thermo import EquationOfState, eval_thermo

CSV_FLOAT = "%.16e"

LAWS = {
    "fluid_helicity_local": "u.omega, conserved for barotropic gas (source omega.T grad S + u.(grad T x grad S))",
    "fluid_helicity_nonlocal": "Omega.(u + r grad S) with Clebsch potentials r, phi",
    "magnetic_helicity_gauge": "A.B in the advected gauge, pure advection law",
    "magnetic_helicity_raw": "A.B with explicit electric potential phi_E = u.A",
    "cross_helicity_local": "u.B, conserved when B.grad S = 0 (source T B.grad S)",
    "cross_helicity_nonlocal": "B.(u + r grad S) with the Lagrangian temperature integral r",
    "energy": "kinetic + internal + gravitational + magnetic energy",
    "ertel_density": "rho q = omega.grad S, advected for gas dynamics (B = 0)",
    "label_advection:bgrads": "rho f with f = B.grad S / rho",
    "label_advection:ab": "rho f with f = A.B / rho",
}

# Extra inputs needed per law beyond the fluid state.
REQUIRES = {
    "fluid_helicity_nonlocal": {"clebsch"},
    "cross_helicity_nonlocal": {"clebsch"},
    "magnetic_helicity_gauge": {"A"},
    "magnetic_helicity_raw": {"A"},
    "label_advection:ab": {"A"},
}


class MissingInputError(ValueError):
    pass


class UnknownLawError(ValueError):
    pass


@dataclass
class ConservedPair:
    """Density ``F0``, flux ``flux`` and optional known right-hand side ``source``."""

    name: str
    F0: np.ndarray
    flux: np.ndarray
    source: np.ndarray | None = None
    requires: frozenset = frozenset()


def _bernoulli(fs: FluidState, th) -> np.ndarray:
    """``h + Phi - |u|^2/2``, the coefficient of the vortex-line flux terms."""
    out = th.h - 0.5 * dot(fs.u, fs.u)
    if fs.Phi is not None:
        out = out + fs.Phi
    return out


def density_flux(
    name: str,
    fs: FluidState,
    cs: ClebschState | None = None,
    eos: EquationOfState | None = None,
    th=None,
) -> ConservedPair:
    """Assemble the named conserved pair from instantaneous fields."""
    if name not in LAWS:
        if name == "label_advection":
            raise UnknownLawError("label_advection needs a label: label_advection:bgrads or label_advection:ab")
        raise UnknownLawError(f"unknown law {name!r}; choose from {', '.join(LAWS)}")
    req = REQUIRES.get(name, set())
    if "clebsch" in req and cs is None:
        raise MissingInputError(f"{name} requires Clebsch potentials (phi, r)")
    if "A" in req and fs.A is None:
        raise MissingInputError(f"{name} requires the advected vector potential A")
    if eos is None:
        raise MissingInputError(f"{name} requires an equation of state")
    g, u, B, rho = fs.grid, fs.u, fs.B, fs.rho
    if th is None:
        th = eval_thermo(eos, rho, fs.S)
    source = None

    if name == "fluid_helicity_local":
        omega = g.curl(u)
        F0 = dot(u, omega)
        flux = u * F0 + _bernoulli(fs, th) * omega
        gS = g.grad(fs.S)
        source = th.T * dot(omega, gS) + dot(u, cross(g.grad(th.T), gS))
    elif name == "fluid_helicity_nonlocal":
        _, Omega = generalized_vorticity(cs, fs)
        F0 = dot(Omega, u + cs.r * g.grad(fs.S))
        flux = u * F0 + _bernoulli(fs, th) * Omega
    elif name in ("magnetic_helicity_gauge", "magnetic_helicity_raw"):
        F0 = dot(fs.A, B)
        flux = u * F0
        if name == "magnetic_helicity_raw":
            # In the advected gauge the electric potential is u.A, so the
            # B (phi_E - A.u) term is evaluated and cancels.
            phi_E = dot(u, fs.A)
            flux = flux + B * (phi_E - dot(fs.A, u))
    elif name == "cross_helicity_local":
        F0 = dot(u, B)
        flux = u * F0 + _bernoulli(fs, th) * B
        source = th.T * dot(B, g.grad(fs.S))
    elif name == "cross_helicity_nonlocal":
        F0 = dot(B, u + cs.r * g.grad(fs.S))
        flux = u * F0 + _bernoulli(fs, th) * B
    elif name == "energy":
        u2 = dot(u, u)
        b2 = dot(B, B)
        F0 = 0.5 * rho * u2 + th.eps + 0.5 * b2
        bern = 0.5 * u2 + th.h
        if fs.Phi is not None:
            F0 = F0 + rho * fs.Phi
            bern = bern + fs.Phi
        # E x B with E = -u x B
        flux = rho * u * bern + b2 * u - dot(u, B) * B
    elif name == "ertel_density":
        F0 = dot(g.curl(u), g.grad(fs.S))
        flux = u * F0
    else:
        f = label_value(name.split(":", 1)[1], fs)
        F0 = rho * f
        flux = rho * u * f
    return ConservedPair(name, F0, flux, source, frozenset(req))


def label_value(label: str, fs: FluidState) -> np.ndarray:
    """Advected label functions ``B.grad S / rho`` ("bgrads") and ``A.B / rho`` ("ab")."""
    if label == "bgrads":
        return dot(fs.B, fs.grid.grad(fs.S)) / fs.rho
    if label == "ab":
        if fs.A is None:
            raise MissingInputError("label 'ab' requires the advected vector potential A")
        return dot(fs.A, fs.B) / fs.rho
    raise UnknownLawError(f"unknown label {label!r}; choose 'bgrads' or 'ab'")


# -- time derivatives over snapshots -----------------------------------------------

# 4th-order first-derivative weights (times 1/(12 dt)) on a 5-point window,
# indexed by the position of the evaluation point inside the window.
WINDOW_WEIGHTS = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]),
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]),
    np.array([1.0, -8.0, 0.0, 8.0, -1.0]),
    np.array([-1.0, 6.0, -18.0, 10.0, 3.0]),
    np.array([3.0, -16.0, 36.0, -48.0, 25.0]),
)
MIN_SNAPSHOTS = 5


class TooFewSnapshotsError(ValueError):
    pass


def _combine(window, weights, key, dt):
    out = 0.0
    for w, entry in zip(weights, window):
        if w != 0.0:
            out = out + w * entry[1][key]
    return out / (12.0 * dt)


def time_derivatives(
    items: Iterable[tuple[float, Mapping[str, np.ndarray], Any]],
) -> Iterator[tuple[int, float, dict[str, np.ndarray], Any]]:
    """Stream 4th-order time derivatives of uniformly spaced samples.

    ``items`` yields ``(t, fields, payload)``; every array in ``fields`` is
    differentiated.  Yields ``(index, t, derivatives, payload)`` in index order
    while holding at most five samples in memory.
    """
    window: deque = deque(maxlen=MIN_SNAPSHOTS)
    dt = None
    count = 0

    def emit(pos):
        t, fields, payload = window[pos]
        w = WINDOW_WEIGHTS[pos]
        d = {k: _combine(window, w, k, dt) for k in fields}
        return count - len(window) + pos, t, d, payload

    for t, fields, payload in items:
        if window:
            step = t - window[-1][0]
            if dt is None:
                dt = step
            elif not math.isclose(step, dt, rel_tol=1e-8, abs_tol=1e-14):
                raise ValueError(f"snapshots are not uniformly spaced (dt {step:.6g} vs {dt:.6g})")
            if dt <= 0.0:
                raise ValueError("snapshot times must increase")
        window.append((t, fields, payload))
        count += 1
        if count == MIN_SNAPSHOTS:
            for pos in range(3):
                yield emit(pos)
        elif count > MIN_SNAPSHOTS:
            yield emit(2)
    if count < MIN_SNAPSHOTS:
        raise TooFewSnapshotsError(f"need at least {MIN_SNAPSHOTS} snapshots, got {count}")
    yield emit(3)
    yield emit(4)


# -- reports ---------------------------------------------------------------------------


@dataclass
class ConservationReport:
    """Per-time residual norms of ``dF0/dt + div F`` and the integral of ``F0``.

    ``res_*`` are norms of the raw left-hand side; ``src_*`` are norms of the
    left-hand side minus the law's known source (empty for exact laws).
    """

    name: str
    times: list[float] = field(default_factory=list)
    integral: list[float] = field(default_factory=list)
    res_l2: list[float] = field(default_factory=list)
    res_linf: list[float] = field(default_factory=list)
    src_l2: list[float] = field(default_factory=list)
    src_linf: list[float] = field(default_factory=list)
    source_l2: list[float] = field(default_factory=list)
    scale: float = 0.0

    def record(self, g, t: float, integral: float, res: np.ndarray, abs_integral: float) -> None:
        """Append one time level; ``abs_integral`` (int |F0|) sets the drift scale at the first."""
        if not self.times:
            self.scale = abs_integral
        self.times.append(t)
        self.integral.append(integral)
        self.res_l2.append(g.norm_l2(res) / math.sqrt(g.volume))
        self.res_linf.append(norm_inf(res))

    def drift(self) -> float:
        """max |I(t) - I(0)| / max(|I(0)|, int |F0| at t0); absolute if both vanish.

        The second scale keeps the drift meaningful for densities that
        integrate to zero.
        """
        I = np.asarray(self.integral)
        change = float(np.max(np.abs(I - I[0])))
        denom = max(abs(I[0]), self.scale)
        return change / denom if denom > 0.0 else change

    @property
    def max_l2(self) -> float:
        return max(self.res_l2)

    @property
    def max_linf(self) -> float:
        return max(self.res_linf)

    @property
    def has_source(self) -> bool:
        return bool(self.src_l2)

    def error(self, norm: str = "linf") -> float:
        """Headline error: the residual left after subtracting any known source."""
        if self.has_source:
            return max(self.src_linf if norm == "linf" else self.src_l2)
        return self.max_linf if norm == "linf" else self.max_l2

    def summary(self) -> dict[str, float]:
        out = {
            "final_res_L2": self.res_l2[-1],
            "final_res_Linf": self.res_linf[-1],
            "max_res_L2": self.max_l2,
            "max_res_Linf": self.max_linf,
            "integral_drift": self.drift(),
        }
        if self.has_source:
            out["max_src_res_Linf"] = max(self.src_linf)
        return out

    def rows(self) -> Iterator[list]:
        for i, t in enumerate(self.times):
            yield [self.name, t, self.integral[i], self.res_l2[i], self.res_linf[i]]

    def write_csv(self, path: str | Path, append: bool = False) -> None:
        write_report_csv(path, [self], append=append)


def write_report_csv(path: str | Path, reports: Iterable[ConservationReport], append: bool = False) -> None:
    path = Path(path)
    new = not (append and path.exists())
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(["name", "t", "integral", "res_L2", "res_Linf"])
        for rep in reports:
            for row in rep.rows():
                w.writerow([row[0]] + [CSV_FLOAT % v for v in row[1:]])


PairProducer = Callable[[Any], ConservedPair]


def residual(producer: PairProducer, snapshots: Iterable, name: str | None = None) -> ConservationReport:
    """Evaluate a conservation law along a run.

    ``producer(snapshot)`` returns the ConservedPair at that snapshot;
    ``snapshots`` (list or generator, uniformly spaced, at least five) must
    expose ``t`` and ``grid``.
    """
    report = ConservationReport(name or "")

    def items():
        for snap in snapshots:
            pair = producer(snap)
            g = snap.grid
            if not report.name:
                report.name = pair.name
            rest = g.div(pair.flux)
            extra = None if pair.source is None else pair.source
            sizes = (g.integrate(pair.F0), g.integrate(np.abs(pair.F0)))
            yield snap.t, {"F0": pair.F0}, (g, rest, extra, sizes)

    for _, t, d, (g, div_flux, source, sizes) in time_derivatives(items()):
        res = d["F0"] + div_flux
        report.record(g, t, sizes[0], res, sizes[1])
        if source is not None:
            diff = res - source
            report.src_l2.append(g.norm_l2(diff) / math.sqrt(g.volume))
            report.src_linf.append(norm_inf(diff))
            report.source_l2.append(g.norm_l2(source) / math.sqrt(g.volume))
    return report


def law_producer(name: str, eos: EquationOfState) -> PairProducer:
    """Producer for :func:`residual` that reads fluid and Clebsch state from a Snapshot."""

    def produce(snap):
        return density_flux(name, snap.fluid, snap.clebsch, eos)

    return produce


# -- order fitting ------------------------------------------------------------------

ROUNDOFF_FLOOR = 1e-11


@dataclass
class OrderFit:
    ns: list[int]
    errors: list[float]
    order: float
    threshold: float
    floor: float

    @property
    def at_floor(self) -> bool:
        return max(self.errors) <= self.floor

    @property
    def passed(self) -> bool:
        """Order met, or every error already sits at the round-off floor."""
        return self.at_floor or (math.isfinite(self.order) and self.order >= self.threshold)

    def as_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "errors": list(self.errors),
            "order": self.order,
            "threshold": self.threshold,
            "at_roundoff_floor": self.at_floor,
            "passed": self.passed,
        }


def fit_order(ns: Iterable[float], errors: Iterable[float]) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(n)``."""
    n = np.asarray(list(ns), dtype=float)
    e = np.asarray(list(errors), dtype=float)
    if n.size < 2:
        raise ValueError("need at least two resolutions")
    if np.any(e <= 0.0):
        return math.inf
    slope = np.polyfit(np.log(n), np.log(e), 1)[0]
    return float(-slope)


def order_check(ns, errors, threshold: float, floor: float = ROUNDOFF_FLOOR) -> OrderFit:
    ns, errors = list(ns), [float(e) for e in errors]
    return OrderFit(ns, errors, fit_order(ns, errors), threshold, floor)


def evolution_residual(
    snapshots: Iterable,
    quantity: Callable[[Any], np.ndarray],
    expected_rate: Callable[[Any, np.ndarray], np.ndarray],
    name: str,
) -> ConservationReport:
    """Residual of ``dX/dt - expected_rate(snapshot, X)`` for a scalar or vector field X.

    Used for evolution laws that are not in divergence form (Lie dragging,
    vorticity advection, Ertel).  ``integral`` records the volume integral of
    X for scalars and its L2 norm for vectors.
    """
    report = ConservationReport(name)

    def items():
        for snap in snapshots:
            X = quantity(snap)
            yield snap.t, {"X": X}, (snap, X)

    for _, t, d, (snap, X) in time_derivatives(items()):
        g = snap.grid
        res = d["X"] - expected_rate(snap, X)
        if X.ndim == g.dims:
            report.record(g, t, g.integrate(X), res, g.integrate(np.abs(X)))
        else:
            size = g.norm_l2(X)
            report.record(g, t, size, res, size)
    return report
