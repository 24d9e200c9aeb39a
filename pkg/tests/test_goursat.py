import numpy as np
import pytest

from varwave import (CauchyData, ValidationError, build_boundary_curve,
                     consistency_residuals, integrate, make_model,
                     seed_lattice)
from varwave.state import IU, IX, IT, IP, IQ, INU, IETA, IXI, IZETA


def make_problem(u0_fn, model, h, pad, n=8001, lo=-8.0, hi=8.0):
    x = np.linspace(lo, hi, n)
    data = CauchyData(x=x, u0=u0_fn(x), u1=np.zeros_like(x),
                      support=(lo + 0.5, hi - 0.5))
    from varwave import riemann_invariants
    R0, _ = riemann_invariants(data, model)
    span = (hi - lo) + float(np.trapezoid(R0 ** 2, x=x))
    n_nodes = int(np.ceil(span / (h / 2.0))) + 2
    gamma = build_boundary_curve(data, model, n_nodes, pad=pad)
    return data, gamma


def all_nodes(grid):
    from varwave.goursat import _flat_nodes
    I, K, J = _flat_nodes(grid)
    return grid.states[:, I, K], I, J


def test_trivial_solution_exact():
    m = make_model("constant", [1.0])
    _, gamma = make_problem(np.zeros_like, m, 1 / 16, pad=1.5)
    grid = integrate(gamma, m, 1 / 16, t_max=1.0)
    st, I, J = all_nodes(grid)
    X = grid.X0 + grid.h * I
    Y = grid.Y0 + grid.h * J
    assert np.max(np.abs(st[IU])) <= 1e-14
    assert np.max(np.abs(st[IT] - (X + Y) / 2.0)) <= 1e-12
    assert np.max(np.abs(st[IX] - (X - Y) / 2.0)) <= 1e-12
    for idx in (IP, IQ, INU, IETA):
        assert np.max(np.abs(st[idx] - 1.0)) <= 1e-13
    for idx in (IXI, IZETA):
        assert np.max(np.abs(st[idx])) <= 1e-13


def test_trivial_residuals_roundoff():
    m = make_model("constant", [1.0])
    _, gamma = make_problem(np.zeros_like, m, 1 / 16, pad=1.5)
    grid = integrate(gamma, m, 1 / 16, t_max=1.0)
    rep = consistency_residuals(grid)
    assert rep.max_xt_X <= 1e-12 and rep.max_xt_Y <= 1e-12
    assert rep.max_circle_xi <= 1e-13 and rep.max_circle_zeta <= 1e-13
    assert rep.max_det <= 1e-13


def test_constant_speed_matches_dalembert():
    m = make_model("constant", [1.0])
    h = 1 / 32
    _, gamma = make_problem(lambda x: np.exp(-x ** 2), m, h, pad=1.5)
    grid = integrate(gamma, m, h, t_max=1.0)
    st, _, _ = all_nodes(grid)
    t, x, u = st[IT], st[IX], st[IU]
    sel = t <= 1.0
    ref = 0.5 * (np.exp(-(x[sel] + t[sel]) ** 2) +
                 np.exp(-(x[sel] - t[sel]) ** 2))
    assert np.max(np.abs(u[sel] - ref)) <= 4e-3   # O(h^2)


def test_constant_speed_circle_exact():
    m = make_model("constant", [1.0])
    h = 1 / 32
    _, gamma = make_problem(lambda x: np.exp(-x ** 2), m, h, pad=1.5)
    grid = integrate(gamma, m, h, t_max=1.0)
    rep = consistency_residuals(grid)
    assert rep.max_circle_xi <= 1e-12
    assert rep.max_circle_zeta <= 1e-12


def test_variable_speed_residuals_second_order():
    m = make_model("cosine", [2.0, 1.0])
    norms = []
    for h in (1 / 16, 1 / 32):
        _, gamma = make_problem(lambda x: np.exp(-x ** 2), m, h, pad=1.0)
        grid = integrate(gamma, m, h, t_max=0.25)
        rep = consistency_residuals(grid)
        norms.append((rep.max_xt_X, rep.max_xt_Y))
    for k in range(2):
        ratio = norms[0][k] / norms[1][k]
        assert 2.5 <= ratio <= 6.5


def test_positive_weights():
    m = make_model("cosine", [2.0, 1.0])
    h = 1 / 32
    _, gamma = make_problem(lambda x: np.exp(-x ** 2), m, h, pad=1.0)
    grid = integrate(gamma, m, h, t_max=0.5)
    st, _, _ = all_nodes(grid)
    assert np.min(st[IP]) > 0.0 and np.min(st[IQ]) > 0.0
    assert np.min(st[INU]) > 0.0 and np.min(st[IETA]) > 0.0


def test_columns_bracket_t_max():
    m = make_model("constant", [1.0])
    h = 1 / 16
    _, gamma = make_problem(lambda x: np.exp(-x ** 2), m, h, pad=1.5)
    t_max = 0.8
    grid = integrate(gamma, m, h, t_max=t_max)
    for i in range(0, grid.nx, 50):
        nr = grid.jhi[i] - grid.jlo[i] + 1
        if nr <= 0:
            continue
        tcol = grid.states[IT, i, :nr]
        assert tcol[-1] > t_max or nr == grid.ny - grid.jlo[i]


def test_seed_lattice_trivial():
    m = make_model("constant", [1.0])
    _, gamma = make_problem(np.zeros_like, m, 0.1, pad=0.5)
    grid = seed_lattice(gamma, 0.1)
    st, I, J = all_nodes(grid)
    assert np.max(np.abs(st[IT])) <= 1e-12
    assert np.max(np.abs(st[INU] - 1.0)) <= 1e-13


def test_seed_lattice_gaussian_u_values():
    m = make_model("constant", [1.0])
    data, gamma = make_problem(lambda x: np.exp(-x ** 2), m, 1 / 32, pad=0.5)
    grid = seed_lattice(gamma, 1 / 32)
    st, I, J = all_nodes(grid)
    assert np.max(np.abs(st[IU] - np.exp(-st[IX] ** 2))) <= 1e-3


def test_h_coarser_than_gamma_rejected():
    m = make_model("constant", [1.0])
    _, gamma = make_problem(np.zeros_like, m, 0.1, pad=0.5)
    with pytest.raises(ValidationError):
        seed_lattice(gamma, 0.01)


def test_bad_t_max_rejected():
    m = make_model("constant", [1.0])
    _, gamma = make_problem(np.zeros_like, m, 0.1, pad=0.5)
    with pytest.raises(ValidationError):
        integrate(gamma, m, 0.1, t_max=-1.0)
