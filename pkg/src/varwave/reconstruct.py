"""Physical-space reconstruction: level sets, snapshots, energies, atoms.

A fixed-time snapshot is the level curve {t(X, Y) = tau}, which is monotone
(increasing X, decreasing Y) because t_X, t_Y >= 0.  Along a level curve
the physical measure element is dx = nu p dX = eta q |dY|, and the
backward/forward energy measures have

    d(mu_-) = p (1 - nu) dX          d(mu_+) = q (1 - eta) |dY|

which remain valid at nu = 0 (eta = 0): concentrated energy shows up as
arcs of positive mass at a single physical point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .goursat import CharGrid
from .state import (FIELD_NAMES, IETA, INU, IP, IQ, IT, IU, IX, IXI, IZETA,
                    NFIELDS)

DEFAULT_NU_FLOOR = 1e-3


@dataclass
class LevelCurve:
    """The interpolated polyline {t = tau}, ordered by increasing X.

    family is 0 for samples interpolated along lattice columns (uniform X
    spacing h) and 1 for samples interpolated along lattice rows (uniform
    Y spacing h).
    """

    tau: float
    X: np.ndarray
    Y: np.ndarray
    states: np.ndarray   # (9, m)
    family: np.ndarray   # int8
    h: float


@dataclass
class Atom:
    x_location: float
    energy: float
    c_prime: float
    kind: str  # "backward" (nu collapse) or "forward" (eta collapse)


@dataclass
class PhysicalSnapshot:
    """Solution trace at fixed time tau."""

    tau: float
    x: np.ndarray
    u: np.ndarray
    u_t: np.ndarray
    u_x: np.ndarray
    R: np.ndarray
    S: np.ndarray
    defined: np.ndarray
    e_minus: float
    e_plus: float
    e_total: float
    atoms: list[Atom]
    level: LevelCurve = field(repr=False, default=None)


def _column_samples(grid: CharGrid, tau: float):
    """Per-column crossing of t = tau (family 0), via linear interpolation
    in t.  The crossing interval satisfies t_lo < tau <= t_hi with the
    gamma anchor (t = 0) prepended below the first stored node."""
    h = grid.h
    nrows = np.maximum(grid.jhi - grid.jlo + 1, 0)
    H = grid.states.shape[2]
    T = grid.states[IT]
    valid = np.arange(H)[None, :] < nrows[:, None]
    k = np.sum(valid & (T < tau), axis=1)
    last = np.where(nrows > 0, T[np.arange(grid.nx),
                                 np.maximum(nrows - 1, 0)], -np.inf)
    act = (nrows > 0) & (k <= nrows - 1) & (tau >= 0.0) & (tau <= last)
    ii = np.flatnonzero(act)
    if ii.size == 0:
        raise ValidationError(f"tau={tau} not covered by the grid")
    kk = k[ii]
    st_hi = grid.states[:, ii, kk]
    at_anchor = kk == 0
    st_lo = np.where(at_anchor,
                     grid.col_anchor[:, ii],
                     grid.states[:, ii, np.maximum(kk - 1, 0)])
    t_hi = st_hi[IT]
    t_lo = np.where(at_anchor, 0.0, st_lo[IT])
    y_hi = grid.Y0 + h * (grid.jlo[ii] + kk)
    y_lo = np.where(at_anchor, grid.sigma[ii], y_hi - h)
    th = np.where(t_hi > t_lo, (tau - t_lo) / np.where(t_hi > t_lo,
                                                       t_hi - t_lo, 1.0),
                  1.0)
    st = st_lo + th * (st_hi - st_lo)
    st[IT] = tau
    return grid.X0 + h * ii, y_lo + th * (y_hi - y_lo), st


def _row_samples(grid: CharGrid, tau: float):
    """Per-row crossing of t = tau (family 1), swept over adjacent column
    pairs: a row crossing lies between nodes (i-1, j) and (i, j) with
    t(i-1,j) < tau <= t(i,j), or between the gamma anchor of row j and
    the first stored node of that row."""
    h = grid.h
    Xs, Ys, states = [], [], []

    def emit(X_lo, X_hi, st_lo, st_hi, t_lo, t_hi, js):
        th = np.where(t_hi > t_lo,
                      (tau - t_lo) / np.where(t_hi > t_lo, t_hi - t_lo, 1.0),
                      1.0)
        st = st_lo + th * (st_hi - st_lo)
        st[IT] = tau
        Xs.append(X_lo + th * (X_hi - X_lo))
        Ys.append(grid.Y0 + h * js)
        states.append(st)

    for i in range(grid.nx):
        nr = grid.jhi[i] - grid.jlo[i] + 1
        if nr <= 0:
            continue
        jlo_i, jhi_i = grid.jlo[i], grid.jhi[i]
        # anchored crossings: rows whose first stored column is i
        jlo_prev = grid.jlo[i - 1] if i > 0 else jhi_i + 1
        j0, j1 = jlo_i, min(jlo_prev - 1, jhi_i)
        if j1 >= j0:
            sl = slice(j0 - jlo_i, j1 - jlo_i + 1)
            t_hi = grid.states[IT, i, sl]
            m = (tau >= 0.0) & (tau <= t_hi)
            if np.any(m):
                js = np.arange(j0, j1 + 1)[m]
                emit(grid.tau[js], grid.X0 + h * i,
                     grid.row_anchor[:, js], grid.states[:, i, sl][:, m],
                     np.zeros(js.size), t_hi[m], js)
        # interior crossings against the left column
        if i == 0:
            continue
        a = max(jlo_i, grid.jlo[i - 1])
        b = min(jhi_i, grid.jhi[i - 1])
        if b < a:
            continue
        sl_r = slice(a - jlo_i, b - jlo_i + 1)
        sl_l = slice(a - grid.jlo[i - 1], b - grid.jlo[i - 1] + 1)
        t_r = grid.states[IT, i, sl_r]
        t_l = grid.states[IT, i - 1, sl_l]
        m = (t_l < tau) & (tau <= t_r)
        if np.any(m):
            js = np.arange(a, b + 1)[m]
            emit(np.full(js.size, grid.X0 + h * (i - 1)),
                 grid.X0 + h * i,
                 grid.states[:, i - 1, sl_l][:, m],
                 grid.states[:, i, sl_r][:, m],
                 t_l[m], t_r[m], js)
    if not states:
        return np.array([]), np.array([]), np.empty((NFIELDS, 0))
    return (np.concatenate(Xs), np.concatenate(Ys),
            np.concatenate(states, axis=1))


def level_set(grid: CharGrid, tau: float) -> LevelCurve:
    """Extract the level curve {t = tau}, merging column and row crossings."""
    Xc, Yc, Sc = _column_samples(grid, tau)
    Xr, Yr, Sr = _row_samples(grid, tau)
    X = np.concatenate([Xc, Xr])
    Y = np.concatenate([Yc, Yr])
    S = np.concatenate([Sc, Sr], axis=1)
    fam = np.concatenate([np.zeros(Xc.size, np.int8), np.ones(Xr.size, np.int8)])
    order = np.lexsort((-Y, X))
    return LevelCurve(tau=tau, X=X[order], Y=Y[order], states=S[:, order],
                      family=fam[order], h=grid.h)


def energies(level: LevelCurve) -> tuple[float, float, float]:
    """(e_minus, e_plus, e_total) by trapezoid sums along the level curve.

    e_minus integrates p (1 - nu) dX over the column-family samples
    (uniform X spacing), e_plus integrates q (1 - eta) |dY| over the
    row-family samples (uniform Y spacing).
    """
    cm = level.family == 0
    rm = level.family == 1
    e_minus = 0.0
    e_plus = 0.0
    if np.count_nonzero(cm) >= 2:
        fm = level.states[IP, cm] * (1.0 - level.states[INU, cm])
        e_minus = float(np.trapezoid(fm, x=level.X[cm]))
    if np.count_nonzero(rm) >= 2:
        fp_ = level.states[IQ, rm] * (1.0 - level.states[IETA, rm])
        e_plus = float(np.trapezoid(fp_, x=-level.Y[rm]))
    return e_minus, e_plus, e_minus + e_plus


def measure_elements(level: LevelCurve):
    """Discretized measures (x_minus, m_minus), (x_plus, m_plus) along the curve.

    Trapezoid weights of p(1-nu) dX on the column family and q(1-eta)|dY|
    on the row family; atom arcs contribute automatically.
    """
    out = []
    for fam, ip_, inu_, coord_sign in ((0, IP, INU, +1), (1, IQ, IETA, -1)):
        m = level.family == fam
        xs = level.states[IX, m]
        dens = level.states[ip_, m] * (1.0 - level.states[inu_, m])
        coord = coord_sign * (level.X[m] if fam == 0 else level.Y[m])
        if xs.size < 2:
            out.append((xs, np.zeros_like(xs)))
            continue
        w = np.zeros_like(coord)
        d = np.diff(coord)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
        out.append((xs, dens * w))
    return out


def _find_atoms(level: LevelCurve, nu_floor: float, model) -> list[Atom]:
    atoms = []
    specs = (("backward", 0, IP, INU, +1), ("forward", 1, IQ, IETA, -1))
    for kind, fam, ip_, inu_, sgn in specs:
        m = level.family == fam
        if np.count_nonzero(m) < 2:
            continue
        nu = level.states[inu_, m]
        p = level.states[ip_, m]
        xs = level.states[IX, m]
        uu = level.states[IU, m]
        coord = sgn * (level.X[m] if fam == 0 else level.Y[m])
        low = nu <= nu_floor
        if not np.any(low):
            continue
        # contiguous runs of low nu
        idx = np.flatnonzero(low)
        splits = np.flatnonzero(np.diff(idx) > 1)
        for run in np.split(idx, splits + 1):
            if run.size < 2:
                continue
            sl = slice(run[0], run[-1] + 1)
            mass = float(np.trapezoid(p[sl] * (1.0 - nu[sl]), x=coord[sl]))
            if mass <= 0.0:
                continue
            w = p[sl] * (1.0 - nu[sl])
            xloc = float(np.sum(w * xs[sl]) / np.sum(w))
            uloc = float(np.sum(w * uu[sl]) / np.sum(w))
            atoms.append(Atom(x_location=xloc, energy=mass,
                              c_prime=float(model.deriv(uloc)), kind=kind))
    return atoms


def snapshot(grid: CharGrid, tau: float,
             nu_floor: float = DEFAULT_NU_FLOOR) -> PhysicalSnapshot:
    """Physical snapshot at time tau: fields, energy split, and atoms.

    (R, S, u_t, u_x) are marked defined only where both nu and eta exceed
    nu_floor; the energies need no such threshold.
    """
    level = level_set(grid, tau)
    st = level.states
    nu, eta = st[INU], st[IETA]
    defined = (nu > nu_floor) & (eta > nu_floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(defined, st[IXI] / nu, np.nan)
        S = np.where(defined, st[IZETA] / eta, np.nan)
    c = grid.model.eval(st[IU])
    u_t = 0.5 * (R + S)
    u_x = (R - S) / (2.0 * c)
    e_minus, e_plus, e_total = energies(level)
    atoms = _find_atoms(level, nu_floor, grid.model)
    return PhysicalSnapshot(tau=tau, x=st[IX].copy(), u=st[IU].copy(),
                            u_t=u_t, u_x=u_x, R=R, S=S, defined=defined,
                            e_minus=e_minus, e_plus=e_plus, e_total=e_total,
                            atoms=atoms, level=level)


def adapted_coordinate(level: LevelCurve, X) -> np.ndarray:
    """alpha(X) = x_left + int_{X_left}^{X} p dX' along the level curve.

    Inverts x + mu_-(]-inf, x]) = alpha; on gamma (tau = 0) this reduces to
    alpha = X.  alpha is strictly increasing (p > 0) and 1-Lipschitz in
    reverse: x(a2) - x(a1) <= a2 - a1.
    """
    m = level.family == 0
    Xs = level.X[m]
    if Xs.size < 2:
        raise ValidationError("level curve has too few column samples")
    p = level.states[IP, m]
    x_left = level.states[IX, m][0]
    alpha = x_left + np.concatenate(
        ([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(Xs))))
    Xq = np.atleast_1d(np.asarray(X, dtype=float))
    if np.any(Xq < Xs[0] - 1e-9) or np.any(Xq > Xs[-1] + 1e-9):
        raise ValidationError("X outside the level curve range")
    return np.interp(Xq, Xs, alpha)
