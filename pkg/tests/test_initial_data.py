import numpy as np
import pytest
from scipy.integrate import quad

from varwave import (CauchyData, ValidationError, build_boundary_curve,
                     make_model, riemann_invariants, sample_profile,
                     total_energy)
from varwave.state import IU, IX, IT, IP, IQ, INU, IETA, IXI, IZETA


def gaussian_data(n=16001, lo=-8.0, hi=8.0):
    x = np.linspace(lo, hi, n)
    return CauchyData(x=x, u0=np.exp(-x ** 2), u1=np.zeros_like(x),
                      support=(-6.0, 6.0))


def zero_data(n=801):
    x = np.linspace(-2.0, 2.0, n)
    z = np.zeros_like(x)
    return CauchyData(x=x, u0=z, u1=z, support=(-1.0, 1.0))


def test_riemann_invariants_zero_data():
    m = make_model("constant", [1.0])
    R0, S0 = riemann_invariants(zero_data(), m)
    assert np.all(R0 == 0.0) and np.all(S0 == 0.0)


def test_riemann_invariants_gaussian_closed_form():
    m = make_model("constant", [1.0])
    data = gaussian_data()
    R0, S0 = riemann_invariants(data, m)
    exact = -2.0 * data.x * np.exp(-data.x ** 2)
    assert np.max(np.abs(R0 - exact)) <= 5e-6
    assert np.max(np.abs(S0 + exact)) <= 5e-6


def test_riemann_invariants_velocity_only():
    m = make_model("cosine", [2.0, 1.0])
    x = np.linspace(-8, 8, 2001)
    u1 = np.exp(-x ** 2)
    data = CauchyData(x=x, u0=np.zeros_like(x), u1=u1, support=(-6, 6))
    R0, S0 = riemann_invariants(data, m)
    assert np.max(np.abs(R0 - u1)) <= 1e-10
    assert np.max(np.abs(S0 - u1)) <= 1e-10


def test_total_energy_zero():
    m = make_model("constant", [1.0])
    assert total_energy(zero_data(), m) == pytest.approx(0.0, abs=1e-15)


def test_total_energy_gaussian_quadrature_oracle():
    # E0 = 2 * int 4 x^2 exp(-2x^2) dx = 2 sqrt(pi/2)
    m = make_model("constant", [1.0])
    ref = 2.0 * quad(lambda x: 4 * x * x * np.exp(-2 * x * x), -8, 8)[0]
    assert ref == pytest.approx(2.0 * np.sqrt(np.pi / 2.0), rel=1e-10)
    assert total_energy(gaussian_data(), m) == pytest.approx(ref, rel=1e-5)


def test_total_energy_velocity_step():
    m = make_model("cosine", [2.0, 1.0])
    x = np.linspace(-2, 3, 8001)
    u1 = sample_profile("smoothed_step", [1.0, 0.0, 1.0, 0.01], x)
    data = CauchyData(x=x, u0=np.zeros_like(x), u1=u1, support=(-1.5, 2.5))
    assert total_energy(data, m) == pytest.approx(2.0, rel=2e-2)


def test_boundary_curve_zero_data_is_antidiagonal():
    m = make_model("constant", [1.0])
    g = build_boundary_curve(zero_data(), m, 101)
    assert np.allclose(g.Y, -g.X, atol=1e-12)
    assert np.allclose(g.X, g.x, atol=1e-12)
    assert np.allclose(g.states[IU], 0.0)
    for idx in (IP, IQ, INU, IETA):
        assert np.allclose(g.states[idx], 1.0, atol=1e-12)
    for idx in (IXI, IZETA, IT):
        assert np.allclose(g.states[idx], 0.0, atol=1e-12)


def test_boundary_curve_unit_invariant_states():
    # where R0 = 1 the curve state has nu = 1/2 and xi = 1/2
    m = make_model("constant", [1.0])
    x = np.linspace(-8, 8, 8001)
    u1 = np.exp(-x ** 2)
    data = CauchyData(x=x, u0=np.zeros_like(x), u1=u1, support=(-6, 6))
    g = build_boundary_curve(data, m, 2001)
    k = int(np.argmin(np.abs(g.x)))   # R0(0) = u1(0) = 1
    assert g.states[INU, k] == pytest.approx(0.5, abs=1e-5)
    assert g.states[IXI, k] == pytest.approx(0.5, abs=1e-5)


def test_boundary_curve_monotone_slopes():
    m = make_model("constant", [1.0])
    data = gaussian_data()
    R0, S0 = riemann_invariants(data, m)
    g = build_boundary_curve(data, m, 1001)
    sX = np.diff(g.X) / np.diff(g.x)
    sY = np.diff(-g.Y) / np.diff(g.x)
    assert np.all(sX >= 1.0 - 1e-9)
    assert np.all(sX <= 1.0 + np.max(R0 ** 2) + 1e-9)
    assert np.all(sY >= 1.0 - 1e-9)
    assert np.all(sY <= 1.0 + np.max(S0 ** 2) + 1e-9)


def test_boundary_curve_vacuum_endpoints():
    m = make_model("constant", [1.0])
    g = build_boundary_curve(gaussian_data(), m, 501)
    assert g.X[0] == pytest.approx(g.x[0], abs=1e-9)
    # X = x + total invariant mass beyond the support
    shift = g.X[-1] - g.x[-1]
    assert shift > 0.0
    assert g.Y[-1] == pytest.approx(-(g.x[-1] + shift), rel=1e-6)


def test_boundary_curve_pad_extends_vacuum():
    m = make_model("constant", [1.0])
    g0 = build_boundary_curve(gaussian_data(), m, 501)
    g1 = build_boundary_curve(gaussian_data(), m, 501, pad=3.0)
    assert g1.x[0] <= g0.x[0] - 3.0 + 1e-9
    assert g1.x[-1] >= g0.x[-1] + 3.0 - 1e-9
    # padded nodes carry the vacuum state and X - x constant there
    left = g1.x < g0.x[0] - 1e-9
    assert np.allclose(g1.X[left] - g1.x[left], g0.X[0] - g0.x[0],
                       atol=1e-9)
    assert np.allclose(g1.states[INU, left], 1.0, atol=1e-12)


def test_nonuniform_grid_rejected():
    x = np.concatenate([np.linspace(0, 1, 50), np.linspace(1.1, 3, 50)])
    with pytest.raises(ValidationError):
        CauchyData(x=x, u0=np.zeros_like(x), u1=np.zeros_like(x),
                   support=(0.5, 2.0))


def test_support_outside_grid_rejected():
    x = np.linspace(0, 1, 101)
    with pytest.raises(ValidationError):
        CauchyData(x=x, u0=np.zeros_like(x), u1=np.zeros_like(x),
                   support=(-1.0, 0.5))


def test_sample_profiles():
    x = np.linspace(-1, 1, 11)
    assert np.all(sample_profile("zero", [], x) == 0.0)
    g = sample_profile("gaussian", [2.0, 0.5, 1.0], x)
    assert np.max(g) == pytest.approx(2.0, rel=1e-2)
    with pytest.raises(ValidationError):
        sample_profile("sawtooth", [1.0], x)
