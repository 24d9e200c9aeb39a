import numpy as np
import pytest

from varwave import (CauchyData, FieldLattice, build_boundary_curve,
                     check_interaction_bound, fields_from_grid, integrate,
                     interaction_potential, make_model,
                     picard_characteristic, riemann_invariants, snapshot,
                     total_energy, trace_from_grid)
from varwave.characteristics import rs_product_integral
from varwave.reconstruct import LevelCurve
from varwave.state import NFIELDS, IX, IP, IQ, INU, IETA


def setup_run(u0_fn, model, h, t_max, n=8001, lo=-8.0, hi=8.0):
    x = np.linspace(lo, hi, n)
    data = CauchyData(x=x, u0=u0_fn(x), u1=np.zeros_like(x),
                      support=(lo + 0.5, hi - 0.5))
    R0, _ = riemann_invariants(data, model)
    span = (hi - lo) + float(np.trapezoid(R0 ** 2, x=x))
    n_nodes = int(np.ceil(span / (h / 2.0))) + 2
    gamma = build_boundary_curve(data, model, n_nodes,
                                 pad=model.M * t_max + 1.0)
    return data, integrate(gamma, model, h, t_max=t_max)


@pytest.fixture(scope="module")
def trivial_run():
    m = make_model("constant", [1.0])
    return (m,) + setup_run(np.zeros_like, m, 1 / 16, 1.0)


@pytest.fixture(scope="module")
def gaussian_run():
    m = make_model("constant", [1.0])
    return (m,) + setup_run(lambda x: np.exp(-x ** 2), m, 1 / 32, 1.0)


@pytest.fixture(scope="module")
def varc_run():
    m = make_model("cosine", [2.0, 1.0])
    return (m,) + setup_run(lambda x: np.exp(-x ** 2), m, 1 / 64, 0.2)


def test_trivial_traces_are_straight(trivial_run):
    _, _, grid = trivial_run
    for sign, slope in (("backward", -1.0), ("forward", 1.0)):
        c = trace_from_grid(grid, 0.0, sign=sign)
        assert np.max(np.abs(c.x - slope * c.t)) <= 1e-10
        assert c.t[-1] >= 0.9


def test_gaussian_trace_speed(gaussian_run):
    _, _, grid = gaussian_run
    c = trace_from_grid(grid, 0.25, sign="backward")
    qd = np.diff(c.x) / np.diff(c.t)
    assert np.max(np.abs(qd + 1.0)) <= 5e-2  # O(h)


def test_speed_quotient_bounds(varc_run):
    m, _, grid = varc_run
    for x0 in (-0.5, 0.0, 0.5):
        for sign, lo, hi in (("backward", -m.M, -m.c0),
                             ("forward", m.c0, m.M)):
            c = trace_from_grid(grid, x0, sign=sign)
            qd = c.speed_quotients()
            assert np.all(qd >= lo - 0.05)
            assert np.all(qd <= hi + 0.05)


def test_picard_zero_fields():
    m = make_model("cosine", [2.0, 1.0])
    ts = np.linspace(0.0, 1.0, 21)
    xs = np.linspace(-3.0, 3.0, 301)
    Z = np.zeros((ts.size, xs.size))
    fields = FieldLattice(t=ts, x=xs, R=Z, S=Z.copy(), u=Z.copy())
    c0 = float(m.eval(0.0))
    curve = picard_characteristic(fields, m, 0.5, "backward")
    assert np.max(np.abs(curve.x - (0.5 - c0 * curve.t))) <= 1e-10
    curve = picard_characteristic(fields, m, -0.5, "forward")
    assert np.max(np.abs(curve.x - (-0.5 + c0 * curve.t))) <= 1e-10


def test_picard_constant_speed(gaussian_run):
    m, _, grid = gaussian_run
    fields = fields_from_grid(grid, np.linspace(0.0, 1.0, 41))
    curve = picard_characteristic(fields, m, 0.3, "backward")
    assert np.max(np.abs(curve.x - (0.3 - curve.t))) <= 1e-4
    assert curve.n_iter <= 50


def test_picard_matches_trace(varc_run):
    m, _, grid = varc_run
    fields = fields_from_grid(grid, np.linspace(0.0, 0.2, 21))
    for x0 in (-0.6, 0.0, 0.6):
        pic = picard_characteristic(fields, m, x0, "backward")
        tr = trace_from_grid(grid, x0, sign="backward")
        xi = np.interp(pic.t, tr.t, tr.x)
        keep = pic.t <= tr.t[-1]
        assert np.max(np.abs(pic.x[keep] - xi[keep])) <= 3 * grid.h


def synthetic_level(xm, mass_m, xp, mass_p, h=0.1):
    """Level curve with one backward bump at xm and one forward at xp."""
    n = 41
    Xs = np.arange(n) * h
    st = np.zeros((NFIELDS, 2 * n))
    fam = np.zeros(2 * n, dtype=np.int8)
    fam[1::2] = 1
    X = np.repeat(Xs, 2)
    Y = -X
    bump = np.exp(-np.linspace(-3, 3, n) ** 2)
    bump /= np.trapezoid(bump, x=Xs)
    st[IP] = 1.0
    st[IQ] = 1.0
    st[INU, 0::2] = 1.0 - mass_m * bump
    st[IETA, 1::2] = 1.0 - mass_p * bump
    st[INU, 1::2] = 1.0
    st[IETA, 0::2] = 1.0
    st[IX, 0::2] = xm + np.linspace(-2, 2, n)
    st[IX, 1::2] = xp + np.linspace(-2, 2, n)
    return LevelCurve(tau=0.0, X=X, Y=Y, states=st, family=fam, h=h)


def test_interaction_potential_trivial(trivial_run):
    _, _, grid = trivial_run
    assert interaction_potential(snapshot(grid, 0.5)) == pytest.approx(
        0.0, abs=1e-12)


def test_interaction_potential_separated_bumps():
    # backward mass entirely right of the forward mass -> Q = product
    import types

    lev = synthetic_level(xm=5.0, mass_m=1.0, xp=-5.0, mass_p=1.0)
    snap = types.SimpleNamespace(level=lev)
    assert interaction_potential(snap) == pytest.approx(1.0, rel=1e-6)
    # reversed order -> 0
    lev = synthetic_level(xm=-5.0, mass_m=1.0, xp=5.0, mass_p=1.0)
    snap = types.SimpleNamespace(level=lev)
    assert interaction_potential(snap) == pytest.approx(0.0, abs=1e-9)


def test_interaction_bound_trivial():
    m = make_model("constant", [1.0])
    rep = check_interaction_bound([(0.0, 0.0), (1.0, 0.0)], 0.0, m,
                                  E0=0.0, T=1.0)
    assert rep.passed and rep.lhs == 0.0


def test_interaction_bound_on_run(varc_run):
    m, data, grid = varc_run
    E0 = total_energy(data, m)
    ts = np.linspace(0.0, 0.2, 9)
    qs, rs = [], []
    for t in ts:
        snap = snapshot(grid, float(t))
        qs.append(interaction_potential(snap))
        rs.append(rs_product_integral(snap.level))
    rsq = float(np.trapezoid(rs, x=ts))
    rep = check_interaction_bound(list(zip(ts, qs)), rsq, m, E0, 0.2)
    assert rep.passed
    assert rep.lhs >= 0.0


def test_trace_outside_data_rejected(gaussian_run):
    from varwave import ValidationError
    _, _, grid = gaussian_run
    with pytest.raises(ValidationError):
        trace_from_grid(grid, 1e6, sign="backward")
