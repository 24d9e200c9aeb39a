"""Independent reference solutions for cross-validation.

Two deliberately different methods from the characteristic-plane solver:
a closed-form constant-speed solution, and an Eulerian finite-difference
integration of the first-order system

    R_t - c R_x = (c'/4c)(R^2 - S^2)
    S_t + c S_x = (c'/4c)(S^2 - R^2)
    u_t = (R + S)/2

with second-order upwind transport and Heun time stepping.  The FD
solver is only trusted before gradient blow-up and aborts once
max(|R|, |S|) exceeds ten times its initial value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import ValidationError
from .initial_data import CauchyData, riemann_invariants
from .wavespeed import WaveSpeedModel

CFL = 0.45
BLOWUP_FACTOR = 10.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def dalembert(u0, u1, c_const: float, t: float, x) -> np.ndarray:
    """Constant-speed closed form
    u(t,x) = [u0(x+ct) + u0(x-ct)]/2 + (1/2c) int_{x-ct}^{x+ct} u1.

    u0 and u1 are callables; the velocity integral uses 64-point
    Gauss-Legendre quadrature.
    """
    if c_const <= 0:
        raise ValidationError("wave speed must be positive")
    x = np.asarray(x, dtype=float)
    ct = c_const * t
    out = 0.5 * (u0(x + ct) + u0(x - ct))
    # int_{x-ct}^{x+ct} u1 by Gauss-Legendre, vectorized over x
    mid = x[..., None]
    vals = u1(mid + ct * _GL_NODES)
    out = out + (1.0 / (2.0 * c_const)) * ct * (vals @ _GL_WEIGHTS)
    return out


@dataclass
class FDFields:
    """Finite-difference solution trace."""

    t: float
    x: np.ndarray
    u: np.ndarray
    R: np.ndarray
    S: np.ndarray
    blew_up: bool
    t_stop: float
    energy_series: list = field(default_factory=list)   # (t, int R^2+S^2 dx)
    snapshots: dict = field(default_factory=dict)       # time -> (u, R, S)

    @property
    def energy(self) -> float:
        return float(simpson(self.R ** 2 + self.S ** 2, x=self.x))


def fd_solve(data: CauchyData, model: WaveSpeedModel, t_end: float,
             dx: float, snapshot_times=()) -> FDFields:
    """March (R, S, u) on a uniform x grid up to t_end.

    The grid pads the data support by M*t_end + 1 on each side so the
    compactly supported fields never reach the boundary.  Aborts (with
    blew_up=True and the last safe time) once max(|R|, |S|) exceeds
    BLOWUP_FACTOR times its initial value.
    """
    if t_end <= 0:
        raise ValidationError("t_end must be positive")
    if dx <= 0:
        raise ValidationError("dx must be positive")
    pad = model.M * t_end + 1.0
    lo, hi = data.support[0] - pad, data.support[1] + pad
    n = int(np.ceil((hi - lo) / dx)) + 1
    xs = lo + dx * np.arange(n)
    u = np.interp(xs, data.x, data.u0, left=0.0, right=0.0)
    R0, S0 = riemann_invariants(data, model)
    R = np.interp(xs, data.x, R0, left=0.0, right=0.0)
    S = np.interp(xs, data.x, S0, left=0.0, right=0.0)
    cap = BLOWUP_FACTOR * max(float(np.max(np.abs(R))),
                              float(np.max(np.abs(S))), 1e-300)

    def rhs(u_, R_, S_):
        c = model.eval(u_)
        g = model.deriv(u_) / (4.0 * c)
        # R transports left: one-sided difference biased right
        Rx = np.zeros_like(R_)
        Rx[:-2] = (-3.0 * R_[:-2] + 4.0 * R_[1:-1] - R_[2:]) / (2.0 * dx)
        # S transports right: one-sided difference biased left
        Sx = np.zeros_like(S_)
        Sx[2:] = (3.0 * S_[2:] - 4.0 * S_[1:-1] + S_[:-2]) / (2.0 * dx)
        coupling = g * (R_ ** 2 - S_ ** 2)
        return ((R_ + S_) / 2.0, c * Rx + coupling, -c * Sx - coupling)

    dt = CFL * dx / model.M
    t = 0.0
    snap_left = sorted(float(s) for s in snapshot_times)
    energy_series = [(0.0, float(simpson(R ** 2 + S ** 2, x=xs)))]
    snaps = {}
    blew_up = False
    while t < t_end - 1e-14:
        step = min(dt, t_end - t)
        if snap_left:
            step = min(step, snap_left[0] - t) if snap_left[0] > t + 1e-14 \
                else step
        ku, kR, kS = rhs(u, R, S)
        u1_, R1_, S1_ = u + step * ku, R + step * kR, S + step * kS
        ku2, kR2, kS2 = rhs(u1_, R1_, S1_)
        u_n = u + 0.5 * step * (ku + ku2)
        R_n = R + 0.5 * step * (kR + kR2)
        S_n = S + 0.5 * step * (kS + kS2)
        if max(float(np.max(np.abs(R_n))), float(np.max(np.abs(S_n)))) > cap:
            blew_up = True
            break
        u, R, S = u_n, R_n, S_n
        t += step
        energy_series.append((t, float(simpson(R ** 2 + S ** 2, x=xs))))
        while snap_left and t >= snap_left[0] - 1e-12:
            snaps[snap_left.pop(0)] = (u.copy(), R.copy(), S.copy())
    return FDFields(t=t if not blew_up else t, x=xs, u=u, R=R, S=S,
                    blew_up=blew_up, t_stop=t, energy_series=energy_series,
                    snapshots=snaps)
