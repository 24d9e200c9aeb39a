"""Goursat integration of the characteristic-plane semilinear system.

The nine variables (u, x, t, p, q, nu, eta, xi, zeta) satisfy, with
c = c(u) and c' = dc/du,

    u_X  = xi p / (2c)              u_Y  = zeta q / (2c)
    x_X  = nu p / 2                 x_Y  = -eta q / 2
    t_X  = nu p / (2c)              t_Y  = eta q / (2c)
    p_Y  = c'/(4c^2) (zeta - xi) p q
    q_X  = c'/(4c^2) (xi - zeta) p q
    nu_Y = c'/(4c^2) xi (nu - eta) q
    eta_X = -c'/(4c^2) zeta (nu - eta) p
    xi_Y  = -c'/(8c^2) (eta + nu) q + c'/(4c^2) (xi^2 + eta nu) q
    zeta_X = -c'/(8c^2) (eta + nu) p + c'/(4c^2) (zeta^2 + eta nu) p

Data live on the decreasing curve gamma (t = 0).  Marching proceeds over
a square lattice of spacing h, wavefront by wavefront along anti-diagonals
i + j = const; each new corner is closed with a trapezoidal rule and a
damped fixed-point iteration.  Lattice cells cut by gamma use the exact
crossing points of gamma with the cell edges as anchors (fractional step
lengths), which keeps the boundary layer second-order accurate.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .initial_data import BoundaryCurve
from .state import (FIELD_NAMES, IETA, INU, IP, IQ, IT, IU, IX, IXI, IZETA,
                    NFIELDS, NodeState)
from .wavespeed import WaveSpeedModel

FP_TOL = 1e-12
FP_MAXITER = 50
FP_FAIL_TOL = 1e-8
PQ_FLOOR = 1e-10
_CHUNK_ROWS = 256
# state arrays above this size are backed by an unlinked temporary file
# (the OS pages them) instead of resident memory
_RAM_STATES_BYTES = 1_500_000_000


def _alloc_states(nx: int, H: int) -> np.ndarray:
    """(NFIELDS, nx, H) state array, disk-backed when large.

    The resident variant is NaN-filled.  The disk-backed variant is left
    sparse (untouched cells read as zero) so that only rows the sweep
    actually writes ever occupy pages; consumers never read outside the
    per-column [jlo, jhi] range, so the fill value is unobservable.
    """
    if NFIELDS * nx * H * 8 <= _RAM_STATES_BYTES:
        return np.full((NFIELDS, nx, H), np.nan)
    fd, path = tempfile.mkstemp(suffix=".npy")
    os.close(fd)
    states = np.lib.format.open_memmap(
        path, mode="w+", dtype=np.float64, shape=(NFIELDS, nx, H))
    os.unlink(path)  # space is reclaimed when the mapping is dropped
    return states


@dataclass
class ResidualReport:
    """Max and L2 norms of the lattice consistency residuals."""

    max_xt_X: float
    max_xt_Y: float
    l2_xt_X: float
    l2_xt_Y: float
    max_circle_xi: float
    max_circle_zeta: float
    max_det: float
    n_nodes: int
    n_det_nodes: int

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class CharGrid:
    """Characteristic-plane lattice solution in column-packed storage.

    Column i holds rows j = jlo[i] .. jhi[i] of the global lattice
    (X, Y) = (X0 + i h, Y0 + j h); row j of column i sits at packed index
    j - jlo[i] of states[:, i, :].  col_anchor / row_anchor carry the gamma
    crossing state of each lattice column / row.
    """

    X0: float
    Y0: float
    h: float
    nx: int
    ny: int
    jlo: np.ndarray
    jhi: np.ndarray
    states: np.ndarray
    sigma: np.ndarray       # Y of gamma crossing per column
    tau: np.ndarray         # X of gamma crossing per row
    col_anchor: np.ndarray  # (9, nx)
    row_anchor: np.ndarray  # (9, ny)
    gamma: BoundaryCurve
    model: WaveSpeedModel | None = None
    t_max: float = 0.0
    fp_iter_max: int = 0
    fp_residual_max: float = 0.0

    def Xs(self) -> np.ndarray:
        return self.X0 + self.h * np.arange(self.nx)

    def Ys(self) -> np.ndarray:
        return self.Y0 + self.h * np.arange(self.ny)

    def n_rows(self, i: int) -> int:
        return int(self.jhi[i] - self.jlo[i] + 1)

    def column(self, i: int, fidx: int) -> np.ndarray:
        """Field values along column i, rows jlo[i]..jhi[i]."""
        return self.states[fidx, i, :self.n_rows(i)]

    def node(self, i: int, j: int) -> NodeState:
        if not (self.jlo[i] <= j <= self.jhi[i]):
            raise IndexError(f"node ({i},{j}) not computed")
        return NodeState(*self.states[:, i, j - self.jlo[i]])

    def has_node(self, i: int, j: int) -> bool:
        return 0 <= i < self.nx and self.jlo[i] <= j <= self.jhi[i]

    def row_columns(self, j: int) -> np.ndarray:
        """Indices of columns whose computed range includes global row j."""
        return np.where((self.jlo <= j) & (j <= self.jhi))[0]

    def row_values(self, j: int, fidx: int, cols: np.ndarray) -> np.ndarray:
        return self.states[fidx, cols, j - self.jlo[cols]]

    def defined_mask(self) -> tuple[np.ndarray, np.ndarray]:
        """(i, packed j) indices of all computed nodes."""
        n = self.jhi - self.jlo + 1
        i_idx = np.repeat(np.arange(self.nx), np.maximum(n, 0))
        k_idx = np.concatenate([np.arange(max(m, 0)) for m in n]) if self.nx else np.array([], int)
        return i_idx, k_idx


def _rhs_X(st: np.ndarray, c: np.ndarray, cp: np.ndarray) -> np.ndarray:
    """(du, dx, dt, dq, deta, dzeta)/dX at the given states."""
    u, x, t, p, q, nu, eta, xi, zeta = st
    g = cp / (4.0 * c * c)
    out = np.empty((6,) + u.shape)
    out[0] = xi * p / (2.0 * c)
    out[1] = 0.5 * nu * p
    out[2] = nu * p / (2.0 * c)
    out[3] = g * (xi - zeta) * p * q
    out[4] = -g * zeta * (nu - eta) * p
    out[5] = (-0.5 * g * (eta + nu) + g * (zeta * zeta + eta * nu)) * p
    return out


def _rhs_Y(st: np.ndarray, c: np.ndarray, cp: np.ndarray) -> np.ndarray:
    """(du, dx, dt, dp, dnu, dxi)/dY at the given states."""
    u, x, t, p, q, nu, eta, xi, zeta = st
    g = cp / (4.0 * c * c)
    out = np.empty((6,) + u.shape)
    out[0] = zeta * q / (2.0 * c)
    out[1] = -0.5 * eta * q
    out[2] = eta * q / (2.0 * c)
    out[3] = g * (zeta - xi) * p * q
    out[4] = g * xi * (nu - eta) * q
    out[5] = (-0.5 * g * (eta + nu) + g * (xi * xi + eta * nu)) * q
    return out


_YVARS = (IP, INU, IXI)   # advanced along +Y (rows 3..5 of _rhs_Y)
_XVARS = (IQ, IETA, IZETA)  # advanced along +X (rows 3..5 of _rhs_X)


def _corner_update(C, L, B, dX, dY, fL, fB, c, cp):
    """One trapezoidal corrector pass; returns the new corner states."""
    fC_X = _rhs_X(C, c, cp)
    fC_Y = _rhs_Y(C, c, cp)
    new = np.empty_like(C)
    # one-directional variables
    for k, fidx in enumerate(_XVARS):
        new[fidx] = L[fidx] + 0.5 * dX * (fL[3 + k] + fC_X[3 + k])
    for k, fidx in enumerate(_YVARS):
        new[fidx] = B[fidx] + 0.5 * dY * (fB[3 + k] + fC_Y[3 + k])
    # u, x, t have both derivatives prescribed: advance along both edges, average
    for k, fidx in enumerate((IU, IX, IT)):
        from_L = L[fidx] + 0.5 * dX * (fL[k] + fC_X[k])
        from_B = B[fidx] + 0.5 * dY * (fB[k] + fC_Y[k])
        new[fidx] = 0.5 * (from_L + from_B)
    return new


def seed_lattice(gamma: BoundaryCurve, h: float) -> CharGrid:
    """Lay out the lattice and initialize the boundary layer along gamma.

    Computes the gamma crossing of every lattice column and row (states
    re-projected onto the circle relations), and provisionally fills each
    column's first on-domain node with its crossing state.  integrate()
    replaces the provisional values with properly integrated ones.
    """
    if h <= 0:
        raise ValidationError("lattice spacing h must be positive")
    if np.max(np.diff(gamma.X)) > h * (1.0 + 1e-9):
        raise ValidationError(
            f"h={h} exceeds gamma node spacing {np.max(np.diff(gamma.X)):.3g}; "
            "rebuild gamma with more nodes")
    X0 = float(gamma.X[0])
    Y0 = float(gamma.Y[-1])
    Ymax = float(gamma.Y[0])
    nx = int(np.floor((gamma.X[-1] - X0) / h + 1e-9)) + 1
    ny = int(np.floor((Ymax - Y0) / h + 1e-9)) + 1

    Xs = X0 + h * np.arange(nx)
    Ys = Y0 + h * np.arange(ny)
    sigma, col_anchor = gamma.sample_by_X(Xs)
    tau, row_anchor = gamma.sample_by_Y(Ys)

    jlo = np.ceil((sigma - Y0) / h - 1e-9).astype(int)
    jhi = jlo - 1  # nothing integrated yet; jlo > ny-1 marks an empty column

    H = min(_CHUNK_ROWS, ny)
    states = np.full((NFIELDS, nx, H), np.nan)
    grid = CharGrid(X0=X0, Y0=Y0, h=h, nx=nx, ny=ny, jlo=jlo, jhi=jhi,
                    states=states, sigma=sigma, tau=tau,
                    col_anchor=col_anchor, row_anchor=row_anchor, gamma=gamma)
    # provisional straddling-node fill (order-zero seed; integrate() redoes it)
    valid = jlo <= ny - 1
    grid.states[:, valid, 0] = col_anchor[:, valid]
    grid.jhi[valid] = jlo[valid]
    return grid


def integrate(gamma: BoundaryCurve, model: WaveSpeedModel, h: float,
              t_max: float) -> CharGrid:
    """March the lattice solution from gamma up to t_max in every column.

    Each column keeps its first node with t > t_max so that every level
    set tau <= t_max is bracketed.  Raises NumericalError if a cell fixed
    point stalls above FP_FAIL_TOL or if p or q falls below PQ_FLOOR.
    """
    if t_max <= 0:
        raise ValidationError("t_max must be positive")
    grid = seed_lattice(gamma, h)
    grid.model = model
    grid.t_max = float(t_max)
    nx, ny = grid.nx, grid.ny

    # preallocate the packed height from the slowest vertical time advance
    # (dt per row ~ h/(2c) at unit weights) to avoid repeated regrowth
    # copies; rows compress well below that rate where eta and q shrink
    # (increasingly so as concentrations deepen under refinement), so
    # budget several times the unit-weight estimate.  Arrays past the
    # resident-memory threshold go straight to the full unpacked height
    # on a disk-backed mapping, which rules out regrowth entirely.
    H0 = min(ny, max(_CHUNK_ROWS, int(4.2 * t_max * 2.0 * model.M / h) + 32))
    if NFIELDS * nx * H0 * 8 > _RAM_STATES_BYTES:
        H0 = ny
    if H0 > grid.states.shape[2]:
        grid.states = _alloc_states(nx, H0)  # seed fill is provisional
    grid.jhi[:] = grid.jlo - 1  # discard the provisional seed fill

    active = grid.jlo <= ny - 1
    jnext = grid.jlo.copy()
    ii = np.arange(nx)
    Y_of = lambda j: grid.Y0 + grid.h * j
    X_of = lambda i: grid.X0 + grid.h * i

    k_min = int(np.min(ii + grid.jlo))
    k_max = nx - 1 + ny - 1
    for k in range(k_min, k_max + 1):
        j_all = k - ii
        sel = active & (j_all == jnext) & (j_all >= 0) & (j_all <= ny - 1)
        I = ii[sel]
        if I.size == 0:
            if not np.any(active):
                break
            continue
        J = k - I

        # drop columns whose left lattice neighbor was never computed because
        # the neighbor column already hit t_max (monotonicity => t > t_max here)
        left_in = I - 1
        has_left_col = I > 0
        left_done = has_left_col & (grid.jhi[np.maximum(left_in, 0)] < J) & \
            (J >= grid.jlo[np.maximum(left_in, 0)])
        if np.any(left_done):
            active[I[left_done]] = False
            keep = ~left_done
            I, J = I[keep], J[keep]
            if I.size == 0:
                continue

        # bottom anchors
        B = np.empty((NFIELDS, I.size))
        use_node_b = J - 1 >= grid.jlo[I]
        if np.any(use_node_b):
            ib = I[use_node_b]
            B[:, use_node_b] = grid.states[:, ib, J[use_node_b] - 1 - grid.jlo[ib]]
        if np.any(~use_node_b):
            B[:, ~use_node_b] = grid.col_anchor[:, I[~use_node_b]]
        dY = np.where(use_node_b, grid.h, Y_of(J) - grid.sigma[I])

        # left anchors
        L = np.empty((NFIELDS, I.size))
        use_node_l = (I > 0) & (J >= grid.jlo[np.maximum(I - 1, 0)])
        if np.any(use_node_l):
            il = I[use_node_l] - 1
            L[:, use_node_l] = grid.states[:, il, J[use_node_l] - grid.jlo[il]]
        if np.any(~use_node_l):
            L[:, ~use_node_l] = grid.row_anchor[:, J[~use_node_l]]
        dX = np.where(use_node_l, grid.h, X_of(I) - grid.tau[J])
        dX = np.maximum(dX, 0.0)
        dY = np.maximum(dY, 0.0)

        cL = model.eval(L[IU]); cpL = model.deriv(L[IU])
        cB = model.eval(B[IU]); cpB = model.deriv(B[IU])
        fL = _rhs_X(L, cL, cpL)
        fB = _rhs_Y(B, cB, cpB)

        # Euler predictor
        C = B.copy()
        for kk, fidx in enumerate(_XVARS):
            C[fidx] = L[fidx] + dX * fL[3 + kk]
        for kk, fidx in enumerate(_YVARS):
            C[fidx] = B[fidx] + dY * fB[3 + kk]
        for kk, fidx in enumerate((IU, IX, IT)):
            C[fidx] = 0.5 * (L[fidx] + dX * fL[kk] + B[fidx] + dY * fB[kk])

        res_prev = np.full(I.size, np.inf)
        damped = np.zeros(I.size, dtype=bool)
        n_it = 0
        for n_it in range(1, FP_MAXITER + 1):
            c = model.eval(C[IU]); cp = model.deriv(C[IU])
            new = _corner_update(C, L, B, dX, dY, fL, fB, c, cp)
            res = np.max(np.abs(new - C) / (1.0 + np.abs(new)), axis=0)
            damped |= res > res_prev
            C = np.where(damped, 0.5 * (new + C), new)
            res_prev = res
            if np.max(res) <= FP_TOL:
                break
        grid.fp_iter_max = max(grid.fp_iter_max, n_it)
        grid.fp_residual_max = max(grid.fp_residual_max, float(np.max(res_prev)))
        if np.max(res_prev) > FP_FAIL_TOL:
            bad = int(np.argmax(res_prev))
            raise NumericalError(
                f"cell fixed point stalled at residual {res_prev[bad]:.3e} "
                f"in cell (i={I[bad]}, j={J[bad]})")
        if np.min(C[IP]) < PQ_FLOOR or np.min(C[IQ]) < PQ_FLOOR:
            bad = int(np.argmin(np.minimum(C[IP], C[IQ])))
            raise NumericalError(
                f"relabeling weight fell below {PQ_FLOOR} "
                f"in cell (i={I[bad]}, j={J[bad]})")

        # store, growing the packed height if needed
        packed = J - grid.jlo[I]
        if np.max(packed) >= grid.states.shape[2]:
            extra = np.full((NFIELDS, nx, _CHUNK_ROWS), np.nan)
            grid.states = np.concatenate([grid.states, extra], axis=2)
        grid.states[:, I, packed] = C
        grid.jhi[I] = J
        jnext[I] = J + 1

        done = C[IT] > t_max
        if np.any(done):
            active[I[done]] = False
    return grid



def _flat_nodes(grid: CharGrid, lo: int = 0, hi: int | None = None):
    """Flattened (column, slot, row) index arrays over stored nodes in
    columns lo..hi-1."""
    hi = grid.nx if hi is None else hi
    nrows = np.maximum(grid.jhi[lo:hi] - grid.jlo[lo:hi] + 1, 0)
    I = np.repeat(np.arange(lo, hi), nrows)
    if I.size == 0:
        K = np.empty(0, dtype=int)
    else:
        K = np.concatenate([np.arange(n) for n in nrows if n > 0])
    return I, K, grid.jlo[I] + K


_RESIDUAL_BLOCK = 1024


def consistency_residuals(grid: CharGrid) -> ResidualReport:
    """Lattice residuals of x_X = c t_X, x_Y = -c t_Y, the circle relations,
    and the Jacobian identity |det D(t,x)| = pq / (2c (1+R^2)(1+S^2)).

    The derivative residuals use centered lattice differences on nodes
    whose four neighbors are stored.  The Jacobian identity is evaluated
    through the differential relations x_X = nu p/2, x_Y = -eta q/2,
    t_X = nu p/(2c), t_Y = eta q/(2c) at each node (so it probes the
    algebraic state consistency, not the truncation error), restricted to
    nodes with nu, eta > 0.1, with R = xi/nu and S = zeta/eta.

    Columns are processed in blocks so peak memory stays bounded on
    large lattices.
    """
    h = grid.h
    model = grid.model
    circ_xi = circ_zeta = max_det = 0.0
    mx = my = 0.0
    ssx = ssy = 0.0
    n_nodes = n_det = 0

    for lo in range(0, grid.nx, _RESIDUAL_BLOCK):
        I, K, J = _flat_nodes(grid, lo, min(lo + _RESIDUAL_BLOCK, grid.nx))
        if I.size == 0:
            continue
        n_nodes += int(I.size)
        st = grid.states[:, I, K]
        circ_xi = max(circ_xi, float(np.max(np.abs(
            st[IXI] ** 2 - st[INU] * (1.0 - st[INU])))))
        circ_zeta = max(circ_zeta, float(np.max(np.abs(
            st[IZETA] ** 2 - st[IETA] * (1.0 - st[IETA])))))

        nu, eta = st[INU], st[IETA]
        good = (nu > 0.1) & (eta > 0.1)
        if np.any(good):
            n_det += int(np.count_nonzero(good))
            cg = model.eval(st[IU][good])
            p, q = st[IP][good], st[IQ][good]
            nug, etag = nu[good], eta[good]
            det = nug * etag * p * q / (2.0 * cg)
            R = st[IXI][good] / nug
            S = st[IZETA][good] / etag
            rhs = p * q / (2.0 * cg * (1.0 + R ** 2) * (1.0 + S ** 2))
            max_det = max(max_det, float(np.max(np.abs(det - rhs))))

        # horizontal neighbors (i +/- 1, j)
        def _side(di):
            In = I + di
            ok = (In >= 0) & (In < grid.nx)
            Ic = np.clip(In, 0, grid.nx - 1)
            slot = J - grid.jlo[Ic]
            ok &= (slot >= 0) & (J <= grid.jhi[Ic])
            return ok, Ic, np.clip(slot, 0, grid.states.shape[2] - 1)

        okR, IR, sR = _side(+1)
        okL, IL, sL = _side(-1)
        mh = okR & okL
        if np.any(mh):
            x_X = (grid.states[IX, IR[mh], sR[mh]] -
                   grid.states[IX, IL[mh], sL[mh]]) / (2.0 * h)
            t_X = (grid.states[IT, IR[mh], sR[mh]] -
                   grid.states[IT, IL[mh], sL[mh]]) / (2.0 * h)
            rx = np.abs(x_X - model.eval(st[IU][mh]) * t_X)
            mx = max(mx, float(np.max(rx)))
            ssx += float(np.sum(rx ** 2))

        # vertical neighbors (i, j +/- 1) live in the same packed column
        mv = (K >= 1) & (J + 1 <= grid.jhi[I])
        if np.any(mv):
            x_Y = (grid.states[IX, I[mv], K[mv] + 1] -
                   grid.states[IX, I[mv], K[mv] - 1]) / (2.0 * h)
            t_Y = (grid.states[IT, I[mv], K[mv] + 1] -
                   grid.states[IT, I[mv], K[mv] - 1]) / (2.0 * h)
            ry = np.abs(x_Y + model.eval(st[IU][mv]) * t_Y)
            my = max(my, float(np.max(ry)))
            ssy += float(np.sum(ry ** 2))

    return ResidualReport(max_xt_X=mx, max_xt_Y=my,
                          l2_xt_X=float(h * np.sqrt(ssx)),
                          l2_xt_Y=float(h * np.sqrt(ssy)),
                          max_circle_xi=circ_xi, max_circle_zeta=circ_zeta,
                          max_det=max_det, n_nodes=n_nodes,
                          n_det_nodes=n_det)
