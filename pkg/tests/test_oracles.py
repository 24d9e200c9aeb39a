import numpy as np
import pytest
from scipy.integrate import quad

from varwave import CauchyData, dalembert, fd_solve, make_model


def gaussian_data(amp=1.0, width=1.0, n=8001, lo=-8.0, hi=8.0):
    x = np.linspace(lo, hi, n)
    return CauchyData(x=x, u0=amp * np.exp(-(x / width) ** 2),
                      u1=np.zeros_like(x), support=(lo + 0.5, hi - 0.5))


def zero_fn(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def test_dalembert_zero():
    x = np.linspace(-2, 2, 101)
    assert np.all(dalembert(zero_fn, zero_fn, 1.0, 0.7, x) == 0.0)


def test_dalembert_identity_at_t0():
    x = np.linspace(-3, 3, 201)
    u0 = lambda y: np.exp(-np.asarray(y) ** 2)
    assert np.allclose(dalembert(u0, zero_fn, 1.0, 0.0, x), u0(x),
                       atol=1e-14)


def test_dalembert_velocity_quadrature():
    # u(t,x) = (1/2c) int_{x-ct}^{x+ct} u1 for u0 = 0
    u1 = lambda y: np.exp(-np.asarray(y) ** 2)
    t, c = 0.6, 2.0
    for x0 in (-0.4, 0.0, 0.9):
        ref = quad(lambda y: np.exp(-y * y),
                   x0 - c * t, x0 + c * t)[0] / (2 * c)
        got = dalembert(zero_fn, u1, c, t, np.array([x0]))[0]
        assert got == pytest.approx(ref, rel=1e-10)


def test_fd_zero_data():
    m = make_model("cosine", [2.0, 1.0])
    fd = fd_solve(gaussian_data(amp=0.0), m, 0.3, 1 / 64)
    assert not fd.blew_up
    assert np.max(np.abs(fd.u)) <= 1e-14
    assert np.max(np.abs(fd.R)) <= 1e-14


def test_fd_constant_speed_advection():
    m = make_model("constant", [1.0])
    data = gaussian_data()
    fd = fd_solve(data, m, 0.5, 1 / 128)
    ref = dalembert(lambda y: np.interp(y, data.x, data.u0), zero_fn,
                    1.0, fd.t, fd.x)
    assert np.max(np.abs(fd.u - ref)) <= 2e-4   # O(dx^2)
    assert not fd.blew_up


def test_fd_energy_conservation_variable_c():
    m = make_model("cosine", [2.0, 1.0])
    data = gaussian_data()
    drifts = []
    for dx in (1 / 64, 1 / 128):
        fd = fd_solve(data, m, 0.2, dx)
        e = np.array([v for _, v in fd.energy_series])
        drifts.append(float(np.max(np.abs(e - e[0])) / e[0]))
    assert drifts[0] <= 1e-3
    assert drifts[0] / drifts[1] >= 2.5   # ~O(dx^2)


def test_fd_snapshots_requested_times():
    m = make_model("cosine", [2.0, 1.0])
    fd = fd_solve(gaussian_data(), m, 0.2, 1 / 64,
                  snapshot_times=(0.1, 0.2))
    assert set(fd.snapshots) == {0.1, 0.2}
    u, R, S = fd.snapshots[0.1]
    assert fd.x.shape == u.shape == R.shape == S.shape
