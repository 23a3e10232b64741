"""Casimir functionals ``C = int rho G d^3x`` built from Lie-dragged scalars.

The catalog integrands are functions of the advected 0-forms ``S``,
``a = A.B/rho`` and ``beta = B.grad S/rho``.  Each entry carries hand-derived
variational derivatives with respect to ``(rho, sigma = rho S, A, M = rho u)``
(``B = curl A``), used to evaluate the Casimir determining equations:

* mass/entropy conditions: ``div(rho C_M) = 0``, ``div(sigma C_M) = 0``
* potential condition: ``-C_M x B + grad(A.C_M) = 0``
* momentum condition: ``M_k grad C_Mk + rho (C_M.grad) u + rho grad C_rho
  + sigma grad C_sigma + A div(C_A) + B x C_A = 0``

Closed forms (g = 2 beta):

=================  ==================  ====================  ======================
entry              C_rho               C_sigma               C_A
=================  ==================  ====================  ======================
entropy            0                   1                     0
magnetic_helicity  0                   0                     2 B
bgrads             S div(B)/rho        -div(B)/rho           curl(grad S)
entropy_helicity   -S a                a                     S B + curl(S A)
bgrads_sq          -beta^2 + S D/rho   -D/rho, D=div(g B)    curl(g grad S)
kinetic_control    -|u|^2              0                     0   (C_M = 2u)
=================  ==================  ====================  ======================

``bgrads`` integrates to zero on a periodic box for any solenoidal B; its
derivatives are the formal ones before using ``div B = 0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .grid import cross, dot, norm_inf
from .liedrag import AdvectedObject, Kind, contract
from .solver import FluidState

CSV_FLOAT = "%.16e"


class UnsupportedFunctionalError(ValueError):
    pass


class MissingPotentialError(ValueError):
    pass


@dataclass(frozen=True)
class CasimirFunctional:
    name: str
    description: str
    needs_A: bool
    casimir: bool = True


CATALOG = {
    "entropy": CasimirFunctional("entropy", "G = S (total entropy)", False),
    "magnetic_helicity": CasimirFunctional("magnetic_helicity", "G = A.B/rho", True),
    "bgrads": CasimirFunctional("bgrads", "G = B.grad S/rho", False),
    "entropy_helicity": CasimirFunctional("entropy_helicity", "G = S A.B/rho", True),
    "bgrads_sq": CasimirFunctional("bgrads_sq", "G = (B.grad S/rho)^2", False),
}
CONTROL = CasimirFunctional("kinetic_control", "int rho |u|^2 (not a Casimir)", False, casimir=False)


def lookup(name: str) -> CasimirFunctional:
    if name in CATALOG:
        return CATALOG[name]
    if name == CONTROL.name:
        return CONTROL
    raise UnsupportedFunctionalError(
        f"{name!r} is not in the Casimir catalog ({', '.join(CATALOG)}, {CONTROL.name})"
    )


def _potential(cf: CasimirFunctional, fs: FluidState, A: np.ndarray | None) -> np.ndarray | None:
    A = fs.A if A is None else A
    if cf.needs_A and A is None:
        raise MissingPotentialError(f"Casimir {cf.name} needs the vector potential A")
    return A


def building_blocks(fs: FluidState, A: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """The Lie-dragged scalars S, a = b._alpha, beta = b._nu via contractions."""
    g = fs.grid
    b = AdvectedObject(Kind.VECTOR, fs.B / fs.rho)
    out = {"S": fs.S}
    out["beta"] = contract(b, AdvectedObject(Kind.ONE_FORM, g.grad(fs.S))).data
    if A is not None:
        out["a"] = contract(b, AdvectedObject(Kind.ONE_FORM, A)).data
    return out


def integrand(name: str, fs: FluidState, A: np.ndarray | None = None) -> np.ndarray:
    """``rho G`` on the grid."""
    cf = lookup(name)
    if cf is CONTROL:
        return fs.rho * dot(fs.u, fs.u)
    A = _potential(cf, fs, A)
    blk = building_blocks(fs, A)
    G = {
        "entropy": lambda: blk["S"],
        "magnetic_helicity": lambda: blk["a"],
        "bgrads": lambda: blk["beta"],
        "entropy_helicity": lambda: blk["S"] * blk["a"],
        "bgrads_sq": lambda: blk["beta"] ** 2,
    }[name]()
    return fs.rho * G


def casimir_value(name: str, fs: FluidState, A: np.ndarray | None = None) -> float:
    return fs.grid.integrate(integrand(name, fs, A))


def variational_derivatives(name: str, fs: FluidState, A: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Closed-form ``C_rho, C_sigma, C_A, C_M`` with ``B = curl A`` where A is used."""
    cf = lookup(name)
    g = fs.grid
    rho, S = fs.rho, fs.S
    zero_s, zero_v = g.zeros(), g.zeros_vector()
    if cf is CONTROL:
        return {"rho": -dot(fs.u, fs.u), "sigma": zero_s, "A": zero_v, "M": 2.0 * fs.u}
    A = _potential(cf, fs, A)
    B = g.curl(A) if A is not None else fs.B
    if name == "entropy":
        return {"rho": zero_s, "sigma": g.full(1.0), "A": zero_v, "M": zero_v}
    if name == "magnetic_helicity":
        return {"rho": zero_s, "sigma": zero_s, "A": 2.0 * B, "M": zero_v}
    gS = g.grad(S)
    if name == "bgrads":
        divB = g.div(B)
        return {"rho": S * divB / rho, "sigma": -divB / rho, "A": g.curl(gS), "M": zero_v}
    if name == "entropy_helicity":
        a = dot(A, B) / rho
        return {"rho": -S * a, "sigma": a, "A": S * B + g.curl(S * A), "M": zero_v}
    if name == "bgrads_sq":
        beta = dot(B, gS) / rho
        D = g.div(2.0 * beta * B)
        return {
            "rho": -beta**2 + S * D / rho,
            "sigma": -D / rho,
            "A": g.curl(2.0 * beta * gS),
            "M": zero_v,
        }
    raise UnsupportedFunctionalError(name)


def determining_residuals(name: str, fs: FluidState, A: np.ndarray | None = None) -> dict[str, float]:
    """Max-norms of the Casimir determining equations for one state.

    ``mass``/``entropy``/``potential`` vanish identically when ``C_M = 0``;
    ``momentum`` is the full condition including ``A div(C_A) + B x C_A``.
    """
    cf = lookup(name)
    g = fs.grid
    d = variational_derivatives(name, fs, A)
    A = _potential(cf, fs, A)
    if A is None:
        A_used, B = g.zeros_vector(), fs.B
    else:
        A_used, B = A, g.curl(A)
    rho, sigma, CM = fs.rho, fs.sigma, d["M"]
    M = rho * fs.u
    momentum = rho * g.grad(d["rho"]) + sigma * g.grad(d["sigma"])
    momentum = momentum + A_used * g.div(d["A"]) + cross(B, d["A"])
    if np.any(CM):
        J = g.jacobian(CM)
        momentum = momentum + np.einsum("k...,kj...->j...", M, J)
        momentum = momentum + rho * g.directional(CM, fs.u)
    mass = g.div(rho * CM)
    entropy = g.div(sigma * CM)
    potential = -cross(CM, B) + g.grad(dot(A_used, CM))
    out = {
        "mass": norm_inf(mass),
        "entropy": norm_inf(entropy),
        "potential": norm_inf(potential),
        "momentum": norm_inf(momentum),
    }
    out["total"] = max(out.values())
    return out


# -- drift along a run ----------------------------------------------------------------


@dataclass
class CasimirReport:
    name: str
    times: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    scale: float = 0.0

    @property
    def drifts(self) -> list[float]:
        c0 = self.values[0]
        denom = max(abs(c0), self.scale)
        return [abs(c - c0) / denom for c in self.values]

    @property
    def max_drift(self) -> float:
        return max(self.drifts)

    def rows(self):
        for t, c, d in zip(self.times, self.values, self.drifts):
            yield [self.name, t, c, d]


def casimir_drift(name: str, snapshots: Iterable, eps_abs: float | None = None) -> CasimirReport:
    """Track ``C(t)`` and ``|C(t) - C(0)| / max(|C(0)|, eps_abs)``.

    By default ``eps_abs`` is ``int |rho G| d^3x`` at the first snapshot, so
    functionals whose value is zero by construction are measured against the
    size of their integrand.
    """
    rep = CasimirReport(name)
    for snap in snapshots:
        dens = integrand(name, snap.fluid)
        g = snap.grid
        if not rep.times:
            rep.scale = eps_abs if eps_abs is not None else g.integrate(np.abs(dens))
            rep.scale = max(rep.scale, math.ulp(1.0))
        rep.times.append(snap.t)
        rep.values.append(g.integrate(dens))
    return rep


def write_casimir_csv(path: str | Path, reports: Iterable[CasimirReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "t", "C", "drift"])
        for rep in reports:
            for row in rep.rows():
                w.writerow([row[0]] + [CSV_FLOAT % v for v in row[1:]])


def resolve_names(selection: str | Iterable[str]) -> list[str]:
    """Expand ``"all"`` to the catalog; validate every other name."""
    names = [selection] if isinstance(selection, str) else list(selection)
    out: list[str] = []
    for n in names:
        if n == "all":
            out.extend(CATALOG)
        else:
            lookup(n)
            out.append(n)
    return out
