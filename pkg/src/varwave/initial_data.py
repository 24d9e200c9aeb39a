"""Cauchy data, Riemann invariants, total energy, and the boundary curve gamma.

The initial fields (u0, u1) live on a uniform x grid.  From them we derive
the Riemann invariants R0 = u1 + c(u0) u0' and S0 = u1 - c(u0) u0', the
conserved total energy E0, and the curve gamma in the characteristic (X, Y)
plane that carries the t = 0 values of all nine node variables.

Orientation convention: X(x) = x + int R0^2 is increasing while
Y(x) = -(x + int S0^2) is *decreasing*, so that gamma slopes downward and
the semilinear system's signs (x_X >= 0, x_Y <= 0, t_X, t_Y >= 0) push the
integration toward t > 0 as X + Y grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import PchipInterpolator

from .errors import ValidationError
from .state import (FIELD_NAMES, IETA, INU, IP, IQ, IT, IU, IX, IXI, IZETA,
                    NFIELDS, circle_project)
from .wavespeed import WaveSpeedModel


@dataclass
class CauchyData:
    """Initial fields sampled on a uniform grid, plus derived invariants."""

    x: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    support: tuple[float, float]
    R0: np.ndarray | None = None
    S0: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.u0 = np.asarray(self.u0, dtype=float)
        self.u1 = np.asarray(self.u1, dtype=float)
        if self.x.ndim != 1 or self.x.size < 5:
            raise ValidationError("need at least 5 grid samples")
        dx = np.diff(self.x)
        if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=1e-9):
            raise ValidationError("x grid must be uniform and increasing")
        lo, hi = self.support
        if not (self.x[0] <= lo < hi <= self.x[-1]):
            raise ValidationError("support must lie inside the sample grid")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])


def sample_profile(name: str, params, x: np.ndarray) -> np.ndarray:
    """Evaluate a named analytic profile on the grid x."""
    x = np.asarray(x, dtype=float)
    p = [float(v) for v in params]
    if name == "zero":
        return np.zeros_like(x)
    if name == "gaussian":
        a, c, w = p
        return a * np.exp(-(((x - c) / w) ** 2))
    if name == "sine_packet":
        a, k, c, w = p
        return a * np.sin(k * (x - c)) * np.exp(-(((x - c) / w) ** 2))
    if name == "smoothed_step":
        a, x0, x1, eps = p
        return a * 0.5 * (np.tanh((x - x0) / eps) - np.tanh((x - x1) / eps))
    raise ValidationError(f"unknown profile {name!r}")


def profile_support(name: str, params) -> tuple[float, float]:
    """Interval outside which the profile (and its derivative) is negligible."""
    p = [float(v) for v in params]
    if name == "zero":
        return (0.0, 0.0)
    if name == "gaussian":
        a, c, w = p
        return (c - 6.0 * abs(w), c + 6.0 * abs(w))
    if name == "sine_packet":
        a, k, c, w = p
        return (c - 6.0 * abs(w), c + 6.0 * abs(w))
    if name == "smoothed_step":
        a, x0, x1, eps = p
        return (x0 - 20.0 * abs(eps), x1 + 20.0 * abs(eps))
    raise ValidationError(f"unknown profile {name!r}")


def riemann_invariants(data: CauchyData, model: WaveSpeedModel):
    """R0 = u1 + c(u0) u0', S0 = u1 - c(u0) u0', zeroed outside the support.

    u0' is computed by centered differences on the grid (one-sided at the
    array ends).  Results are cached on `data`.
    """
    du0 = np.gradient(data.u0, data.dx)
    cu = model.eval(data.u0)
    R0 = data.u1 + cu * du0
    S0 = data.u1 - cu * du0
    lo, hi = data.support
    outside = (data.x < lo) | (data.x > hi)
    R0[outside] = 0.0
    S0[outside] = 0.0
    data.R0, data.S0 = R0, S0
    return R0, S0


def total_energy(data: CauchyData, model: WaveSpeedModel) -> float:
    """E0 = 2 * int [u1^2 + (c(u0) u0')^2] dx  ( = int (R0^2 + S0^2) dx )."""
    if data.R0 is None:
        riemann_invariants(data, model)
    dens = 0.5 * (data.R0 ** 2 + data.S0 ** 2)  # u1^2 + (c u0')^2 pointwise
    return float(2.0 * simpson(dens, x=data.x))


@dataclass
class BoundaryCurve:
    """The curve gamma in the (X, Y) plane with t = 0 data for all nine fields.

    Nodes are ordered by increasing X (decreasing Y).  `states` is a
    (9, n) array in the state.FIELD_NAMES order.  Monotone cubic
    interpolants over arclength support queries at arbitrary X or Y, with
    exact vacuum extension beyond the endpoints.
    """

    x: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    states: np.ndarray
    orientation: int = -1
    _interp: PchipInterpolator = field(default=None, repr=False)
    _s: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        ds = np.hypot(np.diff(self.X), np.diff(self.Y))
        if np.any(ds <= 0):
            raise ValidationError("gamma nodes must be strictly ordered")
        self._s = np.concatenate(([0.0], np.cumsum(ds)))
        stacked = np.vstack([self.X, self.Y, self.states])
        self._interp = PchipInterpolator(self._s, stacked, axis=1)
        # dense arclength table used to invert s -> X and s -> Y
        sd = np.linspace(self._s[0], self._s[-1], 4 * self._s.size)
        vals = self._interp(sd)
        self._sd, self._Xd, self._Yd = sd, vals[0], vals[1]

    @property
    def n_nodes(self) -> int:
        return self.X.size

    def _states_at_s(self, s):
        vals = self._interp(s)
        return vals[0], vals[1], circle_project(vals[2:])

    def _invert(self, target, dense_axis, axis_index):
        """Arclength s with curve coordinate == target (Newton-polished)."""
        s = np.interp(target, dense_axis, self._sd)
        dinterp = self._interp.derivative()
        for _ in range(3):
            v = self._interp(s)[axis_index]
            dv = dinterp(s)[axis_index]
            s = np.clip(s - (v - target) / dv, self._s[0], self._s[-1])
        return s

    def sample_by_X(self, Xq):
        """(Y, states) on gamma at the given X values, vacuum-extended."""
        Xq = np.atleast_1d(np.asarray(Xq, dtype=float))
        s = self._invert(np.clip(Xq, self.X[0], self.X[-1]), self._Xd, 0)
        _, Y, st = self._states_at_s(s)
        return self._extend(Xq, self.X, Y, st, sign=+1)

    def sample_by_Y(self, Yq):
        """(X, states) on gamma at the given Y values, vacuum-extended."""
        Yq = np.atleast_1d(np.asarray(Yq, dtype=float))
        s = self._invert_Y(Yq)
        X, _, st = self._states_at_s(s)
        return self._extend(Yq, self.Y, X, st, sign=-1)

    def _invert_Y(self, Yq):
        Yc = np.clip(Yq, self.Y[-1], self.Y[0])
        s = np.interp(-Yc, -self._Yd, self._sd)
        dinterp = self._interp.derivative()
        for _ in range(3):
            v = self._interp(s)[1]
            dv = dinterp(s)[1]
            s = np.clip(s - (v - Yc) / dv, self._s[0], self._s[-1])
        return s

    def _extend(self, q, own, other, st, sign):
        """Extend beyond the curve ends through the vacuum (slope dY/dX = -1)."""
        lo_end, hi_end = (own[0], own[-1])
        below = q < min(lo_end, hi_end)
        above = q > max(lo_end, hi_end)
        for mask, k in ((below, 0 if own[0] < own[-1] else -1),
                        (above, -1 if own[0] < own[-1] else 0)):
            if np.any(mask):
                d = q[mask] - own[k]
                other[mask] = other[k] - d  # vacuum slope dY/dX = -1
                for i in range(NFIELDS):
                    st[i, mask] = self.states[i, k]
                # physical x moves with |dX| = |dY| = dx in vacuum
                st[IX, mask] = self.states[IX, k] + (d if sign > 0 else -d)
        return other, st


def build_boundary_curve(data: CauchyData, model: WaveSpeedModel,
                         n_nodes: int, pad: float = 0.0) -> BoundaryCurve:
    """Construct gamma with n_nodes spaced uniformly in X.

    X(x) = x + int_{-inf}^x R0^2, Y(x) = -(x + int_{-inf}^x S0^2); node
    positions x_i are found by monotone inversion of the strictly
    increasing map x -> X(x).  Node states carry the t = 0 values
    (p = q = 1, nu = 1/(1+R0^2), eta = 1/(1+S0^2), xi = R0/(1+R0^2),
    zeta = S0/(1+S0^2), u = u0, x = x, t = 0).

    pad extends the curve by that physical length of exact vacuum on each
    side (X = x + const there), enlarging the domain of determinacy
    without refining the data grid.
    """
    if n_nodes < 2:
        raise ValidationError("gamma needs at least 2 nodes")
    if data.R0 is None:
        riemann_invariants(data, model)
    x = data.x
    P = cumulative_simpson(data.R0 ** 2, x=x, initial=0.0)
    Q = cumulative_simpson(data.S0 ** 2, x=x, initial=0.0)
    Xd = x + P
    Yd = -(x + Q)
    span = Xd[-1] - Xd[0]
    target_dX = span / (n_nodes - 1)
    if np.max(np.diff(Xd)) > 2.0 * target_dX:
        raise ValidationError(
            "sample grid too coarse for requested gamma resolution: "
            f"max grid dX = {np.max(np.diff(Xd)):.3g} > 2 * {target_dX:.3g}; "
            "refine data.dx")

    X_nodes = np.linspace(Xd[0], Xd[-1], n_nodes)
    # invert x -> X(x): linear seed on the sample grid + Newton polish
    xi = np.interp(X_nodes, Xd, x)
    pch_X = PchipInterpolator(x, Xd)
    dpch_X = pch_X.derivative()
    for _ in range(3):
        xi = np.clip(xi - (pch_X(xi) - X_nodes) / dpch_X(xi), x[0], x[-1])

    pch_Y = PchipInterpolator(x, Yd)
    Y_nodes = pch_Y(xi)
    R = PchipInterpolator(x, data.R0)(xi)
    S = PchipInterpolator(x, data.S0)(xi)
    u0i = PchipInterpolator(x, data.u0)(xi)
    # off-support nodes are exactly vacuum
    lo, hi = data.support
    outside = (xi < lo) | (xi > hi)
    R[outside] = 0.0
    S[outside] = 0.0

    if pad > 0.0:
        n_pad = int(np.ceil(pad / target_dX))
        step = np.arange(1, n_pad + 1) * target_dX
        # vacuum on both sides: dX = dx, dY = -dx, states constant
        xi = np.concatenate([xi[0] - step[::-1], xi, xi[-1] + step])
        X_nodes = np.concatenate([X_nodes[0] - step[::-1], X_nodes,
                                  X_nodes[-1] + step])
        Y_nodes = np.concatenate([Y_nodes[0] + step[::-1], Y_nodes,
                                  Y_nodes[-1] - step])
        zpad = np.zeros(n_pad)
        R = np.concatenate([zpad, R, zpad])
        S = np.concatenate([zpad, S, zpad])
        u0i = np.concatenate([zpad, u0i, zpad])

    st = np.empty((NFIELDS, xi.size))
    st[IU] = u0i
    st[IX] = xi
    st[IT] = 0.0
    st[IP] = 1.0
    st[IQ] = 1.0
    st[INU] = 1.0 / (1.0 + R ** 2)
    st[IETA] = 1.0 / (1.0 + S ** 2)
    st[IXI] = R / (1.0 + R ** 2)
    st[IZETA] = S / (1.0 + S ** 2)
    return BoundaryCurve(x=xi, X=X_nodes, Y=Y_nodes, states=st)
