"""Fluid relabeling symmetries, Noether density/flux assembly and Bianchi identities.

A candidate symmetry is a canonical generator ``V`` (acting on the map
x(x0, t)) together with gauge terms ``Lambda0`` and ``Lambda``.  Candidates are
built per snapshot because they depend on the evolving fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .clebsch import generalized_vorticity
from .grid import cross, dot, norm_inf
from .invariants import (
    ConservationReport,
    ConservedPair,
    MissingInputError,
    evolution_residual,
    label_value,
    residual,
    time_derivatives,
)
from .thermo import BAROTROPIC, EquationOfState, eval_thermo


@dataclass
class SymmetryCandidate:
    name: str
    Vhat: np.ndarray
    Lambda0: np.ndarray
    LambdaFlux: np.ndarray
    gauge: bool = False

    def __post_init__(self):
        for label, arr in (("Vhat", self.Vhat), ("Lambda0", self.Lambda0), ("LambdaFlux", self.LambdaFlux)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"candidate {self.name}: {label} has non-finite values")


CANDIDATES = {
    "helicity": "V = Omega/rho with gauge Lambda0 = r Omega.grad S (gas dynamics, B = 0)",
    "cross_helicity": "V = B/rho with gauge Lambda0 = r B.grad S",
    "energy": "V = u with gauge Lambda0 = -L (f = 0)",
    "energy:bgrads": "V = u with gauge Lambda0 = -L - rho f, f = B.grad S / rho",
    "energy:ab": "V = u with gauge Lambda0 = -L - rho f, f = A.B / rho",
    "relabel_b": "V = B/rho, no gauge terms (needs B.grad S = 0)",
    "zeta_omega": "V = zeta omega/rho with zeta = 1 + S^2, no gauge terms (barotropic, omega.grad zeta = 0)",
}


class UnknownCandidateError(ValueError):
    pass


def lagrangian_density(fs, th) -> np.ndarray:
    """Eulerian MHD Lagrangian ``rho|u|^2/2 - eps - rho Phi - B^2/2``."""
    L = 0.5 * fs.rho * dot(fs.u, fs.u) - th.eps - 0.5 * dot(fs.B, fs.B)
    if fs.Phi is not None:
        L = L - fs.rho * fs.Phi
    return L


def zeta_label(S: np.ndarray) -> np.ndarray:
    return 1.0 + S * S


def make_candidate(name: str, snap, eos: EquationOfState, th=None) -> SymmetryCandidate:
    """Evaluate the named candidate on the fields of one snapshot."""
    fs, cs = snap.fluid, snap.clebsch
    g, rho, u = fs.grid, fs.rho, fs.u
    zero_flux = g.zeros_vector()
    if name in ("helicity", "cross_helicity"):
        if cs is None:
            raise MissingInputError(f"candidate {name} requires Clebsch potential r")
        carrier = generalized_vorticity(cs, fs)[1] if name == "helicity" else fs.B
        L0 = cs.r * dot(carrier, g.grad(fs.S))
        return SymmetryCandidate(name, carrier / rho, L0, u * L0, gauge=True)
    if name.startswith("energy"):
        if th is None:
            th = eval_thermo(eos, rho, fs.S)
        f = label_value(name.split(":", 1)[1], fs) if ":" in name else 0.0
        L0 = -lagrangian_density(fs, th) - rho * f
        return SymmetryCandidate(name, u.copy(), L0, -rho * u * f, gauge=True)
    if name == "relabel_b":
        return SymmetryCandidate(name, fs.B / rho, g.zeros(), zero_flux)
    if name == "zeta_omega":
        return SymmetryCandidate(name, zeta_label(fs.S) * g.curl(u) / rho, g.zeros(), zero_flux)
    raise UnknownCandidateError(f"unknown candidate {name!r}; choose from {', '.join(CANDIDATES)}")


def noether_pair(c: SymmetryCandidate, fs, eos: EquationOfState, th=None) -> ConservedPair:
    """Noether density/flux for a pure relabeling symmetry.

    ``F0 = V.(rho u) + Lambda0`` and ``F = V.(T - L I) + Lambda`` with the
    momentum flux ``T = rho u u + (p + B^2/2) I - B B``.
    """
    if th is None:
        th = eval_thermo(eos, fs.rho, fs.S)
    rho, u, B, V = fs.rho, fs.u, fs.B, c.Vhat
    F0 = rho * dot(V, u) + c.Lambda0
    iso = th.p + 0.5 * dot(B, B) - lagrangian_density(fs, th)
    flux = rho * dot(V, u) * u + iso * V - dot(V, B) * B + c.LambdaFlux
    return ConservedPair("noether:" + c.name, F0, flux)


def symmetry_terms(c: SymmetryCandidate, fs, th, dV_dt: np.ndarray) -> np.ndarray:
    """Left-hand side of the Eulerian divergence-symmetry condition, without the gauge divergence."""
    g, rho, u, B, V = fs.grid, fs.rho, fs.u, fs.B, c.Vhat
    bern = th.h - 0.5 * dot(u, u)
    if fs.Phi is not None:
        bern = bern + fs.Phi
    lie = dV_dt + g.directional(u, V) - g.directional(V, u)
    out = g.div(rho * V) * bern + rho * th.T * dot(V, g.grad(fs.S)) + rho * dot(u, lie)
    out = out + dot(B, -g.curl(cross(V, B)) + V * g.div(B))
    return out


def symmetry_residual(name: str, snapshots: Iterable, eos: EquationOfState) -> ConservationReport:
    """Pointwise residual of the divergence-symmetry condition (including ``dLambda0/dt + div Lambda``)."""
    report = ConservationReport("symmetry:" + name)

    def items():
        for snap in snapshots:
            th = eval_thermo(eos, snap.fluid.rho, snap.fluid.S)
            c = make_candidate(name, snap, eos, th)
            yield snap.t, {"V": c.Vhat, "L0": c.Lambda0}, (snap, c, th)

    for _, t, d, (snap, c, th) in time_derivatives(items()):
        g = snap.grid
        res = symmetry_terms(c, snap.fluid, th, d["V"]) + d["L0"] + g.div(c.LambdaFlux)
        report.record(g, t, g.integrate(c.Lambda0), res, g.integrate(np.abs(c.Lambda0)))
    return report


def gauge_consistency(name: str, snapshots: Iterable, eos: EquationOfState) -> ConservationReport:
    """Residual of ``dLambda0/dt + div Lambda + rho T V.grad S`` for a gauge-bearing candidate."""
    report = ConservationReport("gauge:" + name)

    def items():
        for snap in snapshots:
            th = eval_thermo(eos, snap.fluid.rho, snap.fluid.S)
            c = make_candidate(name, snap, eos, th)
            yield snap.t, {"L0": c.Lambda0}, (snap, c, th)

    for _, t, d, (snap, c, th) in time_derivatives(items()):
        fs, g = snap.fluid, snap.grid
        res = d["L0"] + g.div(c.LambdaFlux) + fs.rho * th.T * dot(c.Vhat, g.grad(fs.S))
        report.record(g, t, g.integrate(c.Lambda0), res, g.integrate(np.abs(c.Lambda0)))
    return report


def noether_residual(name: str, snapshots: Iterable, eos: EquationOfState) -> ConservationReport:
    """Conservation residual of the Noether pair built from the named candidate."""

    def produce(snap):
        return noether_pair(make_candidate(name, snap, eos), snap.fluid, eos)

    return residual(produce, snapshots, "noether:" + name)


def relabel_determining_residuals(name: str, snapshots: Iterable, eos: EquationOfState) -> dict:
    """Max-in-time norms of the four simple relabeling conditions.

    r1 = div(rho V), r2 = V.grad S, r3 = curl(V x B), r4 = dV/dt - V.grad u.
    ``regime`` is "gauge" for candidates that rely on gauge terms (these are
    expected to leave r2 or r4 nonzero) and "simple" otherwise.
    """
    worst = {"r1": 0.0, "r2": 0.0, "r3": 0.0, "r4": 0.0}
    regime = None

    def items():
        for snap in snapshots:
            c = make_candidate(name, snap, eos)
            yield snap.t, {"V": c.Vhat}, (snap, c)

    for _, t, d, (snap, c) in time_derivatives(items()):
        fs, g = snap.fluid, snap.grid
        V = c.Vhat
        regime = "gauge" if c.gauge else "simple"
        parts = {
            "r1": g.div(fs.rho * V),
            "r2": dot(V, g.grad(fs.S)),
            "r3": g.curl(cross(V, fs.B)),
            "r4": d["V"] + g.directional(fs.u, V) - g.directional(V, fs.u),
        }
        for k, v in parts.items():
            worst[k] = max(worst[k], norm_inf(v))
    return {**worst, "regime": regime}


# -- Noether second theorem: reduced Bianchi identities ------------------------------------


def vorticity_advection_residual(snapshots: Iterable, eos: EquationOfState) -> ConservationReport:
    """``d(omega)/dt - curl(u x omega)``; only an identity for a barotropic gas."""
    if eos.kind != BAROTROPIC:
        raise ValueError("vorticity 2-form advection holds only for a barotropic equation of state")

    def rate(snap, omega):
        g = snap.grid
        return g.curl(cross(snap.fluid.u, omega))

    return evolution_residual(snapshots, lambda s: s.grid.curl(s.fluid.u), rate, "bianchi:vorticity")


def cross_helicity_bianchi(snapshots: Iterable, eos: EquationOfState) -> ConservationReport:
    """Cross-helicity identity with the Euler-Lagrange factor set to zero (needs B.grad S = 0)."""

    def produce(snap):
        fs = snap.fluid
        th = eval_thermo(eos, fs.rho, fs.S)
        hc = dot(fs.u, fs.B)
        bern = th.h - 0.5 * dot(fs.u, fs.u)
        if fs.Phi is not None:
            bern = bern + fs.Phi
        return ConservedPair("bianchi:cross_helicity", hc, fs.u * hc + bern * fs.B)

    return residual(produce, snapshots, "bianchi:cross_helicity")


def potential_vorticity(fs) -> np.ndarray:
    g = fs.grid
    return dot(g.curl(fs.u), g.grad(fs.S)) / fs.rho


def ertel_residual(snapshots: Iterable) -> ConservationReport:
    """``dq/dt + u.grad q`` for the potential vorticity q = omega.grad S / rho."""

    def rate(snap, q):
        return -snap.grid.directional(snap.fluid.u, q)

    return evolution_residual(snapshots, lambda s: potential_vorticity(s.fluid), rate, "bianchi:ertel")


BIANCHI = {
    "vorticity": "vorticity 2-form advection (barotropic)",
    "cross_helicity": "cross-helicity identity (B.grad S = 0)",
    "ertel": "potential vorticity advection",
}


def bianchi_residuals(snapshots: list, eos: EquationOfState, which: Iterable[str] | None = None) -> dict:
    """Evaluate the selected reduced Bianchi identities on one run."""
    which = list(which or BIANCHI)
    out = {}
    for name in which:
        if name == "vorticity":
            out[name] = vorticity_advection_residual(snapshots, eos)
        elif name == "cross_helicity":
            out[name] = cross_helicity_bianchi(snapshots, eos)
        elif name == "ertel":
            out[name] = ertel_residual(snapshots)
        else:
            raise ValueError(f"unknown Bianchi identity {name!r}; choose from {', '.join(BIANCHI)}")
    return out

