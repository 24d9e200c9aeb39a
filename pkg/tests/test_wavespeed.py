import numpy as np
import pytest

from varwave import ValidationError, make_model, log_derivative_ratio


def test_constant_model_bounds_and_derivative():
    m = make_model("constant", [1.0])
    assert m.c0 == pytest.approx(1.0)
    assert m.M >= 1.0
    u = np.linspace(-5, 5, 101)
    assert np.all(m.eval(u) == 1.0)
    assert np.all(m.deriv(u) == 0.0)


def test_cosine_model_certified_bounds():
    m = make_model("cosine", [2.0, 1.0])
    assert m.c0 == pytest.approx(1.0, abs=1e-9)
    assert m.M == pytest.approx(3.0, abs=1e-9)
    u = np.linspace(-10, 10, 10001)
    assert np.max(np.abs(m.deriv(u))) <= 1.0 + 1e-12


def test_cosine_point_values():
    m = make_model("cosine", [2.0, 1.0])
    assert m.eval(np.pi / 2) == pytest.approx(2.0, abs=1e-14)
    assert m.deriv(np.pi / 2) == pytest.approx(-1.0, abs=1e-14)


def test_log_derivative_ratio():
    const = make_model("constant", [1.0])
    assert log_derivative_ratio(const, 0.3) == 0.0
    cos = make_model("cosine", [2.0, 1.0])
    assert log_derivative_ratio(cos, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert log_derivative_ratio(cos, np.pi / 2) == pytest.approx(-0.25,
                                                                 abs=1e-14)


def test_affine_model_clipped():
    m = make_model("affine", [2.0, 1.0, 1.0, 3.0])
    assert m.eval(-5.0) == pytest.approx(1.0)
    assert m.eval(5.0) == pytest.approx(3.0)
    assert m.eval(0.5) == pytest.approx(2.5)


def test_nonpositive_speed_rejected():
    with pytest.raises(ValidationError):
        make_model("constant", [0.0])
    with pytest.raises(ValidationError):
        make_model("constant", [-1.0])


def test_unknown_kind_rejected():
    with pytest.raises(ValidationError):
        make_model("quadratic", [1.0])


def test_callable_alias():
    m = make_model("cosine", [2.0, 1.0])
    u = np.linspace(-2, 2, 7)
    assert np.allclose(m(u), m.eval(u))
