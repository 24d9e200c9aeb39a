"""Layout of the per-node state vector on the characteristic plane.

Every point of the characteristic plane carries nine scalars: the solution
value u, the physical coordinates (x, t), the relabeling weights (p, q),
the x-stretch factors (nu, eta) and the scaled gradients (xi, zeta).
They are stored as rows of a (9, ...) float array in this fixed order.
"""

from typing import NamedTuple

import numpy as np

FIELD_NAMES = ("u", "x", "t", "p", "q", "nu", "eta", "xi", "zeta")

IU, IX, IT, IP, IQ, INU, IETA, IXI, IZETA = range(9)

NFIELDS = 9


class NodeState(NamedTuple):
    u: float
    x: float
    t: float
    p: float
    q: float
    nu: float
    eta: float
    xi: float
    zeta: float


def vacuum_state(u: float = 0.0, x: float = 0.0, t: float = 0.0) -> np.ndarray:
    """State where both Riemann invariants vanish (R = S = 0)."""
    s = np.zeros(NFIELDS)
    s[IU], s[IX], s[IT] = u, x, t
    s[IP] = s[IQ] = 1.0
    s[INU] = s[IETA] = 1.0
    return s


def circle_project(states: np.ndarray) -> np.ndarray:
    """Project (nu, xi) and (eta, zeta) back onto xi^2 = nu(1-nu), zeta^2 = eta(1-eta).

    The pair (nu - 1/2, xi) must lie on the circle of radius 1/2 about the
    origin; interpolation can push it off, so rescale radially.  Operates
    in place on a (9, ...) array and returns it.
    """
    for i_nu, i_xi in ((INU, IXI), (IETA, IZETA)):
        a = states[i_nu] - 0.5
        b = states[i_xi]
        r = np.hypot(a, b)
        scale = np.where(r > 0, 0.5 / np.maximum(r, 1e-300), 1.0)
        states[i_nu] = 0.5 + a * scale
        states[i_xi] = b * scale
    return states
