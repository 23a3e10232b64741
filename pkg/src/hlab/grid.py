"""Uniform periodic grids and 4th-order finite-difference calculus.

Fields are plain numpy arrays.  A scalar field on a grid with ``n = (nx, ny)``
or ``(nx, ny, nz)`` has that shape; a vector field always has shape
``(3, *n)``.  Two-dimensional grids are "2.5D": all three vector components
are carried and derivatives along z vanish identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

TWO_PI = 2.0 * math.pi

# Centered first-derivative weights, applied as correlate1d kernels.
_STENCILS = {
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([0.0, -0.5, 0.0, 0.5, 0.0]),
}

DUMP_MAGIC = b"HLAB1\n"


class GridMismatchError(ValueError):
    """Raised when a field does not live on the grid it is used with."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box with 2 or 3 axes.

    ``stencil_order`` selects the centered difference order.  Only 4 is used
    for physics; 2 exists as a negative-control hook for convergence tooling.
    """

    n: tuple[int, ...]
    length: tuple[float, ...] = ()
    stencil_order: int = 4
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = tuple(int(k) for k in self.n)
        if len(n) not in (2, 3):
            raise ValueError(f"grid must have 2 or 3 axes, got {len(n)}")
        if min(n) < 8:
            raise ValueError(f"need at least 8 points per axis, got n={n}")
        length = tuple(float(v) for v in self.length) or (TWO_PI,) * len(n)
        if len(length) != len(n):
            raise ValueError("length must have one entry per axis")
        if min(length) <= 0.0:
            raise ValueError("box lengths must be positive")
        if self.stencil_order not in _STENCILS:
            raise ValueError(f"unsupported stencil order {self.stencil_order}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "_weights", _STENCILS[self.stencil_order])

    @classmethod
    def cube(cls, dims: int, n: int, length: float = TWO_PI, **kw) -> Grid:
        return cls((n,) * dims, (length,) * dims, **kw)

    @property
    def dims(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / k for L, k in zip(self.length, self.n))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    @property
    def volume(self) -> float:
        return math.prod(self.length)

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node coordinates ``x, y, z`` broadcast to the grid shape.

        On a 2D grid ``z`` is identically zero, so analytic formulas written
        in (x, y, z) yield z-independent fields.
        """
        axes = [np.arange(k) * d for k, d in zip(self.n, self.dx)]
        mesh = list(np.meshgrid(*axes, indexing="ij"))
        if self.dims == 2:
            mesh.append(np.zeros(self.shape))
        return tuple(mesh)

    # -- field constructors --------------------------------------------------

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def zeros_vector(self) -> np.ndarray:
        return np.zeros((3, *self.shape))

    def check_scalar(self, f: np.ndarray, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise GridMismatchError(f"{name} has shape {f.shape}, grid expects {self.shape}")
        return f

    def check_vector(self, v: np.ndarray, name: str = "field") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (3, *self.shape):
            raise GridMismatchError(
                f"{name} has shape {v.shape}, grid expects {(3, *self.shape)}"
            )
        return v

    # -- calculus --------------------------------------------------------------

    def ddx(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Periodic centered derivative of a scalar array along ``axis``."""
        if axis >= self.dims:
            return np.zeros_like(f)
        return correlate1d(f, self._weights, axis=axis, mode="wrap") / self.dx[axis]

    def grad(self, f: np.ndarray) -> np.ndarray:
        f = self.check_scalar(f)
        out = self.zeros_vector()
        for a in range(self.dims):
            out[a] = self.ddx(f, a)
        return out

    def div(self, v: np.ndarray) -> np.ndarray:
        v = self.check_vector(v)
        out = self.ddx(v[0], 0)
        for a in range(1, self.dims):
            out += self.ddx(v[a], a)
        return out

    def curl(self, v: np.ndarray) -> np.ndarray:
        v = self.check_vector(v)
        d = self.ddx
        out = np.empty_like(v)
        out[0] = d(v[2], 1) - d(v[1], 2)
        out[1] = d(v[0], 2) - d(v[2], 0)
        out[2] = d(v[1], 0) - d(v[0], 1)
        return out

    def jacobian(self, v: np.ndarray) -> np.ndarray:
        """``J[i, j] = d v_i / d x_j`` with shape ``(3, 3, *n)``."""
        v = self.check_vector(v)
        out = np.zeros((3, 3, *self.shape))
        for i in range(3):
            for j in range(self.dims):
                out[i, j] = self.ddx(v[i], j)
        return out

    def directional(self, u: np.ndarray, f: np.ndarray) -> np.ndarray:
        """``(u . grad) f`` for a scalar ``f`` or componentwise for a vector."""
        if f.ndim == self.dims:
            out = u[0] * self.ddx(f, 0)
            for a in range(1, self.dims):
                out += u[a] * self.ddx(f, a)
            return out
        return np.stack([self.directional(u, f[i]) for i in range(3)])

    def lie_bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Vector-field commutator ``[u, v] = u.grad v - v.grad u``."""
        u = self.check_vector(u, "u")
        v = self.check_vector(v, "v")
        return self.directional(u, v) - self.directional(v, u)

    def integrate(self, f: np.ndarray) -> float:
        """Periodic trapezoid (= midpoint) rule over the box."""
        return float(np.sum(f) * self.cell_volume)

    def norm_l2(self, f: np.ndarray) -> float:
        """Volume-weighted L2 norm; vector fields use the pointwise magnitude."""
        sq = np.sum(f * f, axis=0) if f.ndim == self.dims + 1 else f * f
        return math.sqrt(self.integrate(sq))

    # -- binary dump -----------------------------------------------------------

    def header_line(self) -> str:
        n = list(self.n) + [1] * (3 - self.dims)
        L = list(self.length) + [1.0] * (3 - self.dims)
        return f"{self.dims} {n[0]} {n[1]} {n[2]} {L[0]!r} {L[1]!r} {L[2]!r}\n"


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def norm_inf(f: np.ndarray) -> float:
    return float(np.max(np.abs(f))) if f.size else 0.0


def write_dump(path: str | Path, grid: Grid, field_: np.ndarray) -> None:
    """Write a scalar or vector field in the HLAB1 binary format.

    Layout: magic line, ASCII geometry line, then one block of little-endian
    float64 values per component with x varying fastest.
    """
    comps = [field_] if field_.ndim == grid.dims else list(field_)
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        fh.write(grid.header_line().encode("ascii"))
        for c in comps:
            fh.write(np.asarray(c, dtype="<f8").ravel(order="F").tobytes())


def read_dump(path: str | Path) -> tuple[Grid, np.ndarray]:
    """Inverse of :func:`write_dump`; returns the grid and a scalar or (3, ...) array."""
    raw = Path(path).read_bytes()
    if not raw.startswith(DUMP_MAGIC):
        raise ValueError(f"{path}: not an HLAB1 dump")
    rest = raw[len(DUMP_MAGIC):]
    nl = rest.index(b"\n")
    parts = rest[:nl].decode("ascii").split()
    if len(parts) != 7:
        raise ValueError(f"{path}: malformed geometry line")
    dims = int(parts[0])
    n = tuple(int(p) for p in parts[1:1 + dims])
    L = tuple(float(p) for p in parts[4:4 + dims])
    grid = Grid(n, L)
    data = np.frombuffer(rest[nl + 1:], dtype="<f8")
    size = math.prod(n)
    if data.size % size:
        raise ValueError(f"{path}: payload is not a whole number of components")
    ncomp = data.size // size
    blocks = [data[i * size:(i + 1) * size].reshape(n, order="F") for i in range(ncomp)]
    arr = blocks[0].copy() if ncomp == 1 else np.stack(blocks)
    return grid, arr
