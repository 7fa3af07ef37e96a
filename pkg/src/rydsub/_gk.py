"""Gauss-Kronrod 7/15 rule and its in-panel integration matrix."""

import numpy as np
from numpy.polynomial import legendre

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
])
_WGK0 = 0.209482141084727828012999174891714
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
])
_WG0 = 0.417959183673469387755102040816327

# ascending nodes on [-1, 1]
NODES = np.concatenate([-_XGK, [0.0], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK, [_WGK0], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
GAUSS_W = np.zeros(15)
GAUSS_W[1::2] = np.concatenate([_WG, [_WG0], _WG[::-1]])


def _integration_matrix(nodes):
    """M[j, i] = integral from -1 to nodes[j] of the i-th Lagrange basis polynomial."""
    n = len(nodes)
    vander = legendre.legvander(nodes, n - 1)
    coef = np.linalg.inv(vander)
    out = np.empty((n, n))
    for i in range(n):
        anti = legendre.legint(coef[:, i], lbnd=-1.0)
        out[:, i] = legendre.legval(nodes, anti)
    return out


def partial_weights(t):
    """Weights w_i with sum_i w_i f(node_i) ~ integral from -1 to t of f."""
    n = len(NODES)
    vander = legendre.legvander(NODES, n - 1)
    coef = np.linalg.inv(vander)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((t.size, n))
    for i in range(n):
        anti = legendre.legint(coef[:, i], lbnd=-1.0)
        out[:, i] = legendre.legval(t, anti)
    return out


INTEG = _integration_matrix(NODES)
