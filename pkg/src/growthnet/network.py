"""Economic network instances on weighted graphs.

An :class:`EconomyNetwork` bundles the full problem data: symmetric
nonnegative edge weights w_ij, per-node technology levels A_i (linear
output-in-capital coefficients, net of depreciation), CRRA curvature gamma,
discount rate rho, preference weights p_i, initial capital k, and an optional
nonnegative consumption operator N (identity by default).

The capital dynamics generated by these data are

    K'(t) = (L + A) K(t) - N C(t),

where L is the graph Laplacian built here (off-diagonal w_ij, diagonal
-sum of incident weights) and A is diag(technology).

Construction is permissive: a network object can hold invalid parameter
values (say gamma = 1) so that :func:`validate` can enumerate every
violation; operations that rely on an invariant raise when it fails.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import ValidationError

# Weights below this are treated as absent edges for connectivity purposes,
# so float dust cannot make a disconnected graph look connected.
CONNECTIVITY_EPS = 1e-15


class EconomyNetwork:
    """Immutable problem instance; see module docstring for the symbols."""

    def __init__(self, weights, technology, rho, gamma, pref_weights,
                 initial_capital, consumption_operator=None):
        W = np.atleast_2d(np.asarray(weights, dtype=float))
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValidationError(f"weights must be a square matrix, got shape {W.shape}")
        n = W.shape[0]
        if n < 1:
            raise ValidationError("need at least one node")

        A = np.asarray(technology, dtype=float).reshape(-1)
        p = np.asarray(pref_weights, dtype=float).reshape(-1)
        k = np.asarray(initial_capital, dtype=float).reshape(-1)
        for name, v in (("technology", A), ("pref_weights", p), ("initial_capital", k)):
            if v.shape != (n,):
                raise ValidationError(f"{name} must have length {n}, got {v.shape}")

        if consumption_operator is None:
            N = np.eye(n)
        else:
            N = np.asarray(consumption_operator, dtype=float)
            if N.shape != (n, n):
                raise ValidationError(f"consumption_operator must be {n}x{n}, got {N.shape}")

        self.n = n
        self.weights = W
        self.technology = A
        self.rho = float(rho)
        self.gamma = float(gamma)
        self.pref_weights = p
        self.initial_capital = k
        self.consumption_operator = N
        for arr in (self.weights, self.technology, self.pref_weights,
                    self.initial_capital, self.consumption_operator):
            arr.setflags(write=False)

    @classmethod
    def from_upper_triangle(cls, n, upper_weights, technology, rho, gamma,
                            pref_weights, initial_capital, consumption_operator=None):
        """Build a network from the strict upper triangle of the weight matrix.

        ``upper_weights`` lists w_ij for i < j in row-major order
        (w_12, w_13, ..., w_1n, w_23, ...); the lower triangle is mirrored,
        so an asymmetric weight matrix is unrepresentable on this path.
        """
        upper = np.asarray(upper_weights, dtype=float).reshape(-1)
        expected = n * (n - 1) // 2
        if upper.size != expected:
            raise ValidationError(
                f"expected {expected} upper-triangle weights for n={n}, got {upper.size}")
        W = np.zeros((n, n))
        idx = 0
        for i in range(n):
            for j in range(i + 1, n):
                W[i, j] = W[j, i] = upper[idx]
                idx += 1
        return cls(W, technology, rho, gamma, pref_weights, initial_capital,
                   consumption_operator)

    def identity_consumption(self) -> bool:
        return bool(np.array_equal(self.consumption_operator, np.eye(self.n)))

    def __repr__(self):
        return (f"EconomyNetwork(n={self.n}, rho={self.rho}, gamma={self.gamma}, "
                f"A={self.technology.tolist()})")


def build_laplacian(weights) -> np.ndarray:
    """Graph Laplacian: off-diagonal l_ij = w_ij, diagonal l_ii = -sum_{j!=i} w_ij.

    Every row sums to zero and the result is symmetric negative semidefinite.
    Raises ValidationError naming the offending entry for asymmetric or
    negative input.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    n = W.shape[0]
    if W.ndim != 2 or W.shape[1] != n:
        raise ValidationError(f"weights must be square, got shape {W.shape}")
    for i in range(n):
        for j in range(i + 1, n):
            if W[i, j] != W[j, i]:
                raise ValidationError(f"weights not symmetric at ({i + 1},{j + 1})")
    ii, jj = np.where(W < 0)
    if ii.size:
        raise ValidationError(f"negative weight at ({ii[0] + 1},{jj[0] + 1})")
    off = W - np.diag(np.diag(W))
    return off - np.diag(off.sum(axis=1))


def system_matrix(net: EconomyNetwork) -> np.ndarray:
    """L + diag(A): symmetric Metzler matrix generating the capital flow."""
    return build_laplacian(net.weights) + np.diag(net.technology)


def is_irreducible(weights) -> bool:
    """True iff the graph with edges {w_ij > CONNECTIVITY_EPS} is connected.

    Breadth-first search from node 0; a single node counts as connected.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    n = W.shape[0]
    if n == 1:
        return True
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.where(W[i] > CONNECTIVITY_EPS)[0]:
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def validate(net: EconomyNetwork) -> list[str]:
    """Enumerate every violated invariant as a descriptor string.

    Node indices in descriptors are 1-based, matching the w_ij symbol
    convention. The spectral condition rho > lambda0*(1-gamma) is a planner
    concern and is deliberately not checked here.
    """
    out = []
    W, n = net.weights, net.n
    for i in range(n):
        if W[i, i] != 0.0:
            out.append(f"nonzero-diagonal({i + 1})")
        for j in range(i + 1, n):
            if W[i, j] != W[j, i]:
                out.append(f"nonsymmetric-weight({i + 1},{j + 1})")
            if W[i, j] < 0 or W[j, i] < 0:
                out.append(f"negative-weight({i + 1},{j + 1})")
    for i in range(n):
        if not net.technology[i] > 0:
            out.append(f"nonpositive-technology({i + 1})")
        if not net.pref_weights[i] > 0:
            out.append(f"nonpositive-pref-weight({i + 1})")
        if net.initial_capital[i] < 0:
            out.append(f"negative-initial-capital({i + 1})")
    if not net.rho > 0:
        out.append("nonpositive-rho")
    if not net.gamma > 0:
        out.append("nonpositive-gamma")
    elif net.gamma == 1.0:
        out.append("gamma-equals-one")
    N = net.consumption_operator
    if (N < 0).any():
        i, j = [int(v[0]) for v in np.where(N < 0)]
        out.append(f"negative-consumption-operator({i + 1},{j + 1})")
    else:
        # N^T q must be strictly positive for q >> 0, which needs every
        # column of N to carry at least one positive entry.
        for j in range(n):
            if not (N[:, j] > 0).any():
                out.append(f"consumption-operator-zero-column({j + 1})")
    return out
