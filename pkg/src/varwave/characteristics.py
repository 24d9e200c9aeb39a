"""Characteristic curves two independent ways, plus wave-interaction bounds.

Backward characteristics (speed -c) are exactly the lattice lines
X = const; forward ones (speed +c) the lines Y = const.  trace_from_grid
reads them straight off the grid.  picard_characteristic instead solves
the integral equation

    alpha(t) = alpha0 + int_0^t [ -c(u(s, x(s, alpha(s))))
               + int_{-inf}^{x(s, alpha(s))} (c'/2c)(R^2 S - R S^2) dx ] ds

by fixed-point iteration on sampled (R, S, u) fields, where x(t, .)
inverts x + int R^2(t) dx' = alpha.  The forward family satisfies the
mirrored equation (+c, S^2 in the coordinate weight, negated source).
Agreement of the two constructions is a uniqueness check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import NumericalError, ValidationError
from .goursat import CharGrid
from .reconstruct import LevelCurve, PhysicalSnapshot, measure_elements
from .state import IETA, INU, IP, IQ, IT, IU, IX, IXI, IZETA
from .wavespeed import WaveSpeedModel

PICARD_MAXITER = 500
PICARD_WINDOW = 1.0


@dataclass
class CharacteristicCurve:
    """Ordered (t, x) samples of a single characteristic."""

    sign: str          # "backward" or "forward"
    start: float       # x at t = 0
    t: np.ndarray
    x: np.ndarray
    label: float       # conserved coordinate: X (backward) or Y (forward)
    n_iter: int = 0
    residual: float = 0.0

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValidationError("characteristic samples must have "
                                  "strictly increasing t")

    def speed_quotients(self) -> np.ndarray:
        return np.diff(self.x) / np.diff(self.t)


def trace_from_grid(grid: CharGrid, x_start: float,
                    sign: str) -> CharacteristicCurve:
    """Read a characteristic off the lattice line X=const (backward) or
    Y=const (forward) through (0, x_start), interpolating linearly
    between the two neighboring lattice lines.
    """
    gamma = grid.gamma
    if not (gamma.x[0] <= x_start <= gamma.x[-1]):
        raise ValidationError(f"x_start={x_start} outside the data range")
    h = grid.h
    if sign == "backward":
        lab = float(np.interp(x_start, gamma.x, gamma.X))
        f = (lab - grid.X0) / h
        i0 = min(int(np.floor(f)), grid.nx - 2)
        th = f - i0
        # align the two columns by global row index
        jlo = max(grid.jlo[i0], grid.jlo[i0 + 1])
        jhi = min(grid.jhi[i0], grid.jhi[i0 + 1])
        if jhi < jlo:
            raise ValidationError("characteristic line has no grid coverage")
        js = np.arange(jlo, jhi + 1)
        ta = grid.states[IT, i0, js - grid.jlo[i0]]
        tb = grid.states[IT, i0 + 1, js - grid.jlo[i0 + 1]]
        xa = grid.states[IX, i0, js - grid.jlo[i0]]
        xb = grid.states[IX, i0 + 1, js - grid.jlo[i0 + 1]]
        t = (1.0 - th) * ta + th * tb
        x = (1.0 - th) * xa + th * xb
    elif sign == "forward":
        lab = float(np.interp(x_start, gamma.x, gamma.Y))
        f = (lab - grid.Y0) / h
        j0 = min(int(np.floor(f)), grid.ny - 2)
        th = f - j0
        ca = grid.row_columns(j0)
        cb = grid.row_columns(j0 + 1)
        common = np.intersect1d(ca, cb)
        if common.size == 0:
            raise ValidationError("characteristic line has no grid coverage")
        ta = grid.states[IT, common, j0 - grid.jlo[common]]
        tb = grid.states[IT, common, j0 + 1 - grid.jlo[common]]
        xa = grid.states[IX, common, j0 - grid.jlo[common]]
        xb = grid.states[IX, common, j0 + 1 - grid.jlo[common]]
        t = (1.0 - th) * ta + th * tb
        x = (1.0 - th) * xa + th * xb
    else:
        raise ValidationError(f"unknown direction {sign!r}")
    keep = np.concatenate(([True], np.diff(t) > 0))
    t, x = t[keep], x[keep]
    t = np.concatenate(([0.0], t))
    x = np.concatenate(([x_start], x))
    return CharacteristicCurve(sign=sign, start=float(x_start), t=t, x=x,
                               label=lab)


@dataclass
class FieldLattice:
    """(R, S, u) sampled on a rectangular t-x lattice (rows = times)."""

    t: np.ndarray
    x: np.ndarray
    R: np.ndarray
    S: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        nt, nx = self.t.size, self.x.size
        for f in (self.R, self.S, self.u):
            if f.shape != (nt, nx):
                raise ValidationError("field arrays must be (nt, nx)")
        if np.any(np.diff(self.t) <= 0) or np.any(np.diff(self.x) <= 0):
            raise ValidationError("t and x must be strictly increasing")


def fields_from_grid(grid: CharGrid, t_samples, n_x: int = 2001,
                     nu_floor: float = 1e-3) -> FieldLattice:
    """Resample a smooth run's snapshots onto a uniform t-x lattice."""
    from .reconstruct import snapshot

    t_samples = np.asarray(t_samples, dtype=float)
    snaps = [snapshot(grid, tau, nu_floor=nu_floor) for tau in t_samples]
    lo = min(s.x.min() for s in snaps)
    hi = max(s.x.max() for s in snaps)
    xs = np.linspace(lo, hi, n_x)
    R = np.zeros((t_samples.size, n_x))
    S = np.zeros_like(R)
    u = np.zeros_like(R)
    for k, s in enumerate(snaps):
        d = s.defined
        if not np.all(d):
            if not np.any(d):
                raise ValidationError("snapshot has no defined samples; "
                                      "fields require a smooth run")
        xk, idx = np.unique(s.x[d], return_index=True)
        R[k] = np.interp(xs, xk, s.R[d][idx], left=0.0, right=0.0)
        S[k] = np.interp(xs, xk, s.S[d][idx], left=0.0, right=0.0)
        u[k] = np.interp(xs, xk, s.u[d][idx], left=0.0, right=0.0)
    return FieldLattice(t=t_samples, x=xs, R=R, S=S, u=u)


def _alpha_tables(fields: FieldLattice, model: WaveSpeedModel, sign: str):
    """Per-time-sample tables: alpha(x), source prefix integral, u."""
    W = fields.R if sign == "backward" else fields.S
    c = model.eval(fields.u)
    cp = model.deriv(fields.u)
    src = (cp / (2.0 * c)) * (fields.R ** 2 * fields.S
                              - fields.R * fields.S ** 2)
    if sign == "forward":
        src = -src
    A = fields.x[None, :] + cumulative_trapezoid(W ** 2, fields.x,
                                                 axis=1, initial=0.0)
    G = cumulative_trapezoid(src, fields.x, axis=1, initial=0.0)
    return A, G


def _x_of_alpha(xs, A_row, alpha):
    """Invert x + int W^2 = alpha (A_row strictly increasing in x)."""
    x = np.interp(alpha, A_row, xs)
    # outside the sampled range, W = 0, so alpha - x is constant
    if alpha < A_row[0]:
        x = xs[0] - (A_row[0] - alpha)
    elif alpha > A_row[-1]:
        x = xs[-1] + (alpha - A_row[-1])
    return x


def picard_characteristic(fields: FieldLattice, model: WaveSpeedModel,
                          y_start: float, sign: str,
                          tol: float = 1e-10) -> CharacteristicCurve:
    """Fixed-point solution of the characteristic integral equation.

    Runs windows of length <= 1 in t, restarting the iteration from the
    endpoint of the previous window (the contraction constant of the
    Picard map scales with the window length).
    """
    if sign not in ("backward", "forward"):
        raise ValidationError(f"unknown direction {sign!r}")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    A, G = _alpha_tables(fields, model, sign)
    cspeed = -1.0 if sign == "backward" else 1.0
    ts, xs = fields.t, fields.x

    def integrand(k, alpha_k):
        xk = _x_of_alpha(xs, A[k], alpha_k)
        uk = np.interp(xk, xs, fields.u[k])
        gk = np.interp(xk, xs, G[k], left=G[k][0], right=G[k][-1])
        return cspeed * model.eval(uk) + gk

    t_all = np.empty(ts.size)
    x_all = np.empty(ts.size)
    n_iter_max = 0
    res = 0.0
    k0 = 0
    x_w = float(y_start)
    while k0 < ts.size:
        t_w = ts[k0]
        k1 = int(np.searchsorted(ts, t_w + PICARD_WINDOW, side="right") - 1)
        k1 = max(k1, k0)
        kk = np.arange(k0, k1 + 1)
        alpha0 = float(np.interp(x_w, xs, A[k0]))
        alpha = np.full(kk.size, alpha0)
        for n in range(1, PICARD_MAXITER + 1):
            g = np.array([integrand(k, a) for k, a in zip(kk, alpha)])
            new = alpha0 + cumulative_trapezoid(g, ts[kk], initial=0.0)
            res = float(np.max(np.abs(new - alpha)))
            alpha = new
            if res < tol:
                break
        else:
            raise NumericalError(
                f"picard iteration did not converge in {PICARD_MAXITER} "
                f"steps (residual {res:.3e})")
        n_iter_max = max(n_iter_max, n)
        for m, (k, a) in enumerate(zip(kk, alpha)):
            t_all[k0 + m] = ts[k]
            x_all[k0 + m] = _x_of_alpha(xs, A[k], a)
        x_w = x_all[k1]
        if k1 == ts.size - 1:
            break
        k0 = k1
    lab = float(np.interp(y_start, xs, A[0])) if ts[0] == 0.0 else float("nan")
    return CharacteristicCurve(sign=sign, start=float(y_start),
                               t=t_all, x=x_all, label=lab,
                               n_iter=n_iter_max, residual=res)


def interaction_potential(snap: PhysicalSnapshot) -> float:
    """Q = (mu_- x mu_+)({(x, y): x > y}) over the discretized measures."""
    (xm, mm), (xp, mp) = measure_elements(snap.level)
    if xm.size == 0 or xp.size == 0:
        return 0.0
    order = np.argsort(xp, kind="stable")
    xp_s, mp_s = xp[order], mp[order]
    cum = np.concatenate(([0.0], np.cumsum(mp_s)))
    below = cum[np.searchsorted(xp_s, xm, side="left")]
    return float(np.sum(mm * below))


def rs_product_integral(level: LevelCurve, floor: float = 1e-3) -> float:
    """int R^2 S^2 dx along one level set, over the region nu, eta > floor.

    Uses R^2 dx = p (1 - nu) dX and S = zeta/eta on the column family.
    """
    m = level.family == 0
    st = level.states
    nu, eta = st[INU, m], st[IETA, m]
    good = (nu > floor) & (eta > floor)
    integrand = np.zeros(np.count_nonzero(m))
    integrand[good] = (st[IP, m][good] * (1.0 - nu[good])
                       * (st[IZETA, m][good] / eta[good]) ** 2)
    if integrand.size < 2:
        return 0.0
    return float(np.trapezoid(integrand, x=level.X[m]))


@dataclass
class InteractionBoundReport:
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def as_dict(self):
        return dict(self.__dict__)


def check_interaction_bound(series, rsq_integral: float,
                            model: WaveSpeedModel, E0: float,
                            T: float, slack: float = 0.1
                            ) -> InteractionBoundReport:
    """Check int_0^T int R^2 S^2 dx dt against the interaction estimate

        lhs <= (2/c0) [ (Q(0) - Q(T)) + 2 M E0^2 T / c0^2 ]

    with multiplicative slack for discretization error.
    """
    ts = np.array([t for t, _ in series])
    qs = np.array([q for _, q in series])
    if ts.size < 2:
        raise ValidationError("need at least two Q samples")
    c0, M = model.c0, model.M
    rhs = (2.0 / c0) * ((qs[0] - qs[-1]) + 2.0 * M * E0 ** 2 * T / c0 ** 2)
    lhs = float(rsq_integral)
    margin = rhs * (1.0 + slack) - lhs
    return InteractionBoundReport(lhs=lhs, rhs=float(rhs),
                                  margin=float(margin),
                                  passed=bool(margin >= 0.0))
