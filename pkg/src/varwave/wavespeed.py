"""Wave-speed models c(u) with certified bounds 0 < c0 <= c(u) <= M, |c'(u)| <= M."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ValidationError

CERT_SAMPLES = 10_000
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class WaveSpeedModel:
    """A wave speed c(u), its derivative, and bounds certified on `interval`.

    Immutable after construction; safe to share across threads.
    """

    name: str
    c0: float
    M: float
    interval: tuple[float, float]
    params: tuple[float, ...] = ()
    _eval: Callable[[np.ndarray], np.ndarray] = field(repr=False, default=None)
    _deriv: Callable[[np.ndarray], np.ndarray] = field(repr=False, default=None)

    def eval(self, u):
        return self._eval(np.asarray(u, dtype=float))

    def deriv(self, u):
        return self._deriv(np.asarray(u, dtype=float))

    def __call__(self, u):
        return self.eval(u)


def log_derivative_ratio(model: WaveSpeedModel, u) -> np.ndarray:
    """c'(u) / (2 c(u)), the coefficient multiplying every source term."""
    return model.deriv(u) / (2.0 * model.eval(u))


def _certify(name, fn, dfn, c0, M, interval):
    lo, hi = interval
    if not lo < hi:
        raise ValidationError(f"{name}: certification interval {interval} is empty")
    u = np.linspace(lo, hi, CERT_SAMPLES)
    c = fn(u)
    dc = dfn(u)
    if not np.all(np.isfinite(c)) or not np.all(np.isfinite(dc)):
        raise ValidationError(f"{name}: non-finite speed on {interval}")
    if c0 <= 0.0:
        raise ValidationError(f"{name}: lower speed bound c0={c0} must be positive")
    if np.min(c) < c0 - _BOUND_SLACK:
        raise ValidationError(
            f"{name}: c(u) dips to {np.min(c)} < c0={c0} on {interval}")
    if np.max(c) > M + _BOUND_SLACK:
        raise ValidationError(
            f"{name}: c(u) reaches {np.max(c)} > M={M} on {interval}")
    if np.max(np.abs(dc)) > M + _BOUND_SLACK:
        raise ValidationError(
            f"{name}: |c'(u)| reaches {np.max(np.abs(dc))} > M={M} on {interval}")


def make_model(kind: str, params: Sequence[float],
               interval: tuple[float, float] = (-10.0, 10.0),
               table: tuple[Sequence[float], Sequence[float]] | None = None,
               ) -> WaveSpeedModel:
    """Build a named wave-speed model and certify its bounds by dense sampling.

    Kinds:
      constant [c]                   c(u) = c
      affine   [a, b, lo, hi]        c(u) = clip(a + b*u, lo, hi)
      cosine   [a, b]                c(u) = a + b*cos(u)
      atan_step [base, amp, k, uc]   c(u) = base + amp*(1/2 + atan(k*(u-uc))/pi)
      tabulated []                   cubic interpolation of `table` = (u, c) data
    """
    params = tuple(float(p) for p in params)
    if kind == "constant":
        (cval,) = params
        fn = lambda u: np.full_like(u, cval)
        dfn = lambda u: np.zeros_like(u)
        c0, M = cval, cval * (1.0 + 1e-12) + 1e-300
    elif kind == "affine":
        a, b, lo, hi = params
        fn = lambda u: np.clip(a + b * u, lo, hi)
        dfn = lambda u: np.where((a + b * u > lo) & (a + b * u < hi), b, 0.0)
        c0, M = lo, max(hi, abs(b)) * (1.0 + 1e-12)
    elif kind == "cosine":
        a, b = params
        fn = lambda u: a + b * np.cos(u)
        dfn = lambda u: -b * np.sin(u)
        c0, M = a - abs(b), a + abs(b)
    elif kind == "atan_step":
        base, amp, k, uc = params
        fn = lambda u: base + amp * (0.5 + np.arctan(k * (u - uc)) / np.pi)
        dfn = lambda u: amp * k / (np.pi * (1.0 + (k * (u - uc)) ** 2))
        lo_val = min(base, base + amp)
        hi_val = max(base, base + amp, abs(amp * k / np.pi))
        c0, M = lo_val, hi_val * (1.0 + 1e-12)
    elif kind == "tabulated":
        if table is None:
            raise ValidationError("tabulated model requires (u, c) table data")
        ut = np.asarray(table[0], dtype=float)
        ct = np.asarray(table[1], dtype=float)
        spline = CubicSpline(ut, ct)
        dspline = spline.derivative()
        lo, hi = float(ut[0]), float(ut[-1])
        fn = lambda u: spline(np.clip(u, lo, hi))
        dfn = lambda u: np.where((u >= lo) & (u <= hi), dspline(np.clip(u, lo, hi)), 0.0)
        interval = (max(interval[0], lo), min(interval[1], hi))
        us = np.linspace(interval[0], interval[1], CERT_SAMPLES)
        c0 = float(np.min(fn(us)))
        M = float(max(np.max(fn(us)), np.max(np.abs(dfn(us))))) * (1.0 + 1e-9)
    else:
        raise ValidationError(f"unknown wave-speed kind {kind!r}")

    _certify(kind, fn, dfn, c0, M, interval)
    return WaveSpeedModel(name=kind, c0=float(c0), M=float(M),
                          interval=(float(interval[0]), float(interval[1])),
                          params=params, _eval=fn, _deriv=dfn)
