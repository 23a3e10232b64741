import numpy as np
import pytest

from hlab.grid import Grid
from hlab.invariants import fit_order
from hlab.thermo import BAROTROPIC, DomainError, EquationOfState, eval_thermo, first_law_residual

NS = (32, 64, 128)


def test_ideal_closed_form_values():
    eos = EquationOfState(gamma=5.0 / 3.0, K=1.0, c_v=1.0)
    th = eval_thermo(eos, np.ones(4), np.zeros(4))
    assert np.allclose(th.eps, 1.5, rtol=1e-15)
    assert np.allclose(th.p, 1.0, rtol=1e-15)
    assert np.allclose(th.h, 2.5, rtol=1e-15)
    assert np.allclose(th.T, 1.5, rtol=1e-15)


def test_barotropic_closed_form_values():
    eos = EquationOfState(BAROTROPIC, gamma=2.0, K=1.0)
    th = eval_thermo(eos, np.full(3, 2.0), np.array([0.0, 1.0, -3.0]))
    assert np.array_equal(th.p, [4.0, 4.0, 4.0])
    assert np.array_equal(th.h, [4.0, 4.0, 4.0])
    assert np.array_equal(th.T, [0.0, 0.0, 0.0])


@pytest.mark.parametrize("eos", [EquationOfState(), EquationOfState(BAROTROPIC, gamma=1.4, K=0.7)])
def test_pressure_is_gamma_minus_one_eps(eos):
    th = eval_thermo(eos, np.ones(2), np.zeros(2))
    assert np.allclose(th.p, (eos.gamma - 1.0) * th.eps, rtol=1e-15)


def test_nonpositive_density_names_index():
    rho = np.ones((4, 4))
    rho[2, 1] = -0.5
    with pytest.raises(DomainError, match=r"rho\[2, 1\]"):
        eval_thermo(EquationOfState(), rho, np.zeros_like(rho))


@pytest.mark.parametrize("kw", [{"gamma": 1.0}, {"K": 0.0}, {"c_v": -1.0}, {"kind": "tabulated"}])
def test_invalid_parameters(kw):
    with pytest.raises(ValueError):
        EquationOfState(**kw)


def test_first_law_constant_fields():
    g = Grid.cube(2, 16)
    assert first_law_residual(g, EquationOfState(), g.full(1.3), g.full(0.2)) < 1e-14


@pytest.mark.parametrize("kind", ["ideal", BAROTROPIC])
def test_first_law_order(kind):
    eos = EquationOfState(kind)
    errs = []
    for n in NS:
        g = Grid.cube(2, n)
        x, y, _ = g.coords()
        errs.append(first_law_residual(g, eos, 1.0 + 0.2 * np.sin(x), 0.1 * np.cos(y)))
    assert fit_order(NS, errs) >= 3.9


def test_thermo_fields_nonnegative():
    rng = np.random.default_rng(0)
    rho = rng.uniform(0.1, 3.0, 100)
    S = rng.uniform(-2.0, 2.0, 100)
    th = eval_thermo(EquationOfState(), rho, S)
    assert (th.p >= 0).all() and (th.h >= 0).all() and (th.T >= 0).all()
