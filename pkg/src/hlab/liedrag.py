"""Lie dragging of forms and vector fields by a flow, via proxy fields.

On the flat periodic box a 0-form is a scalar, a 1-form ``w.dx`` and a 2-form
``B.dS`` are carried by their component vectors, a 3-form ``rho d^3x`` by its
density, and a vector field ``b.grad`` by ``b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import Grid, cross, dot


class Kind(str, Enum):
    SCALAR = "0-form"
    ONE_FORM = "1-form"
    TWO_FORM = "2-form"
    THREE_FORM = "3-form"
    VECTOR = "vector"


_SCALAR_KINDS = (Kind.SCALAR, Kind.THREE_FORM)


class UnsupportedContraction(ValueError):
    pass


@dataclass(frozen=True)
class AdvectedObject:
    kind: Kind
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))

    def with_data(self, data: np.ndarray) -> AdvectedObject:
        return AdvectedObject(self.kind, data)


def drag_rate(grid: Grid, kind: Kind, data: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Eulerian time derivative that makes ``(d/dt + L_u) obj = 0``."""
    if kind is Kind.SCALAR:
        return -grid.directional(u, data)
    if kind is Kind.ONE_FORM:
        return cross(u, grid.curl(data)) - grid.grad(dot(u, data))
    if kind is Kind.TWO_FORM:
        return grid.curl(cross(u, data)) - u * grid.div(data)
    if kind is Kind.THREE_FORM:
        return -grid.div(data * u)
    if kind is Kind.VECTOR:
        return -grid.lie_bracket(u, data)
    raise ValueError(f"unknown kind {kind!r}")


def drag_rhs(grid: Grid, obj: AdvectedObject, u: np.ndarray) -> np.ndarray:
    return drag_rate(grid, obj.kind, obj.data, u)


def contract(a: AdvectedObject, b: AdvectedObject) -> AdvectedObject:
    """Interior product of a vector field with a 1-, 2- or 3-form (either argument order).

    * vector with 1-form ``w.dx``: 0-form ``v.w``
    * vector with 2-form ``B.dS``: 1-form ``(B x v).dx``
    * vector with 3-form ``rho d^3x``: 2-form ``rho v.dS``
    """
    if b.kind is Kind.VECTOR and a.kind is not Kind.VECTOR:
        a, b = b, a
    if a.kind is not Kind.VECTOR:
        raise UnsupportedContraction(f"cannot contract {a.kind.value} with {b.kind.value}")
    v = a.data
    if b.kind is Kind.ONE_FORM:
        return AdvectedObject(Kind.SCALAR, dot(v, b.data))
    if b.kind is Kind.TWO_FORM:
        return AdvectedObject(Kind.ONE_FORM, cross(b.data, v))
    if b.kind is Kind.THREE_FORM:
        return AdvectedObject(Kind.TWO_FORM, b.data * v)
    raise UnsupportedContraction(f"cannot contract vector with {b.kind.value}")


def is_scalar_kind(kind: Kind) -> bool:
    return Kind(kind) in _SCALAR_KINDS
