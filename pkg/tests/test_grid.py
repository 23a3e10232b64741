import math

import numpy as np
import pytest

from hlab.grid import TWO_PI, Grid, GridMismatchError, cross, dot, norm_inf, read_dump, write_dump
from hlab.invariants import fit_order, order_check

NS = (32, 64, 128)


def smooth_vector(g: Grid, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x, y, z = g.coords()
    out = np.zeros((3, *g.shape))
    for c in range(3):
        for _ in range(3):
            k = rng.integers(-2, 3, size=3)
            k[g.dims:] = 0
            out[c] += rng.uniform(0.1, 1.0) * np.cos(k[0] * x + k[1] * y + k[2] * z + rng.uniform(0, TWO_PI))
    return out


def test_construction_checks():
    with pytest.raises(ValueError):
        Grid.cube(2, 4)
    with pytest.raises(ValueError):
        Grid.cube(4, 16)
    g = Grid.cube(3, 8)
    assert g.shape == (8, 8, 8)
    assert math.isclose(g.volume, TWO_PI**3)


def test_constant_field_has_zero_derivatives():
    g = Grid.cube(3, 12)
    f = g.full(3.7)
    assert norm_inf(g.grad(f)) == 0.0
    v = np.stack([g.full(1.0), g.full(-2.0), g.full(0.5)])
    assert norm_inf(g.div(v)) == 0.0
    assert norm_inf(g.curl(v)) == 0.0


def test_grad_of_sin_x_is_fourth_order():
    errs = []
    for n in NS:
        g = Grid.cube(2, n)
        x, _, _ = g.coords()
        errs.append(norm_inf(g.grad(np.sin(x))[0] - np.cos(x)))
    assert fit_order(NS, errs) >= 3.9


def test_grad_two_harmonics():
    g = Grid.cube(2, 64)
    x, y, _ = g.coords()
    exact = np.stack([np.cos(x), -2.0 * np.sin(2.0 * y), 0.0 * x])
    # leading truncation term of the 4th-order stencil for wavenumber k is k^5 dx^4 / 30
    bound = 1.01 * 2.0**5 * g.dx[0] ** 4 / 30.0
    assert norm_inf(g.grad(np.sin(x) + np.cos(2.0 * y)) - exact) < bound


def test_curl_of_rotation_analog():
    errs = []
    for n in NS:
        g = Grid.cube(2, n)
        x, y, _ = g.coords()
        v = np.stack([-np.sin(y), np.sin(x), 0.0 * x])
        curl = g.curl(v)
        assert norm_inf(curl[:2]) == 0.0
        errs.append(norm_inf(curl[2] - (np.cos(x) + np.cos(y))))
    assert fit_order(NS, errs) >= 3.9


def test_div_curl_of_random_field_at_roundoff():
    # the periodic stencils commute, so div(curl v) only carries round-off
    errs = []
    for n in NS:
        g = Grid.cube(3, n // 4 + 8) if n > 64 else Grid.cube(2, n)
        errs.append(norm_inf(g.div(g.curl(smooth_vector(g)))))
    assert order_check(NS, errs, 3.9).passed
    assert max(errs) < 1e-11


def test_curl_grad_at_roundoff():
    g = Grid.cube(3, 16)
    x, y, z = g.coords()
    f = np.sin(x) * np.cos(2 * y) + np.sin(y + z)
    assert norm_inf(g.curl(g.grad(f))) < 1e-12


def test_integrate_examples():
    g = Grid.cube(3, 16)
    x, _, _ = g.coords()
    assert g.integrate(g.full(1.0)) == pytest.approx(TWO_PI**3, rel=1e-15)
    assert abs(g.integrate(np.sin(x))) < 1e-12
    assert g.integrate(np.sin(x) ** 2) == pytest.approx(0.5 * TWO_PI**3, rel=1e-12)


def test_integration_by_parts_is_exact():
    g = Grid.cube(2, 32)
    x, y, _ = g.coords()
    f = np.exp(np.sin(x) * np.cos(y))
    c = np.array([0.3, -1.2, 0.7])
    val = g.integrate(dot(g.grad(f), c[:, None, None]))
    assert abs(val) <= 1e-11 * norm_inf(f)


def test_lie_bracket_examples():
    g = Grid.cube(2, 64)
    u, v = smooth_vector(g, 1), smooth_vector(g, 2)
    assert norm_inf(g.lie_bracket(u, u)) == 0.0
    assert norm_inf(g.lie_bracket(u, v) + g.lie_bracket(v, u)) <= 1e-12

    errs = []
    for n in NS:
        g = Grid.cube(2, n)
        x, y, _ = g.coords()
        a = np.stack([np.sin(y), 0.0 * x, 0.0 * x])
        b = np.stack([0.0 * x, np.sin(x), 0.0 * x])
        exact = np.stack([-np.sin(x) * np.cos(y), np.sin(y) * np.cos(x), 0.0 * x])
        errs.append(norm_inf(g.lie_bracket(a, b) - exact))
    assert fit_order(NS, errs) >= 3.9


def test_grid_mismatch_is_structural_error():
    g = Grid.cube(2, 16)
    with pytest.raises(GridMismatchError):
        g.grad(np.zeros((8, 8)))


def test_cross_and_dot():
    a = np.array([1.0, 0.0, 0.0])[:, None]
    b = np.array([0.0, 1.0, 0.0])[:, None]
    assert np.array_equal(cross(a, b)[:, 0], [0.0, 0.0, 1.0])
    assert dot(a, b)[0] == 0.0


def test_dump_round_trip(tmp_path):
    g = Grid.cube(2, 16)
    v = smooth_vector(g, 5)
    path = tmp_path / "v.hlab"
    write_dump(path, g, v)
    raw = path.read_bytes()
    assert raw.startswith(b"HLAB1\n")
    g2, v2 = read_dump(path)
    assert g2.n == g.n and g2.dims == 2
    assert np.array_equal(v, v2)


def test_dump_layout_is_x_fastest(tmp_path):
    g = Grid.cube(2, 8)
    f = np.arange(64, dtype=float).reshape(8, 8)
    path = tmp_path / "f.hlab"
    write_dump(path, g, f)
    body = path.read_bytes().split(b"\n", 2)[2]
    data = np.frombuffer(body, dtype="<f8")
    # consecutive values step along x (axis 0)
    assert data[0] == f[0, 0] and data[1] == f[1, 0]
