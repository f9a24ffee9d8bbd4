"""Grid-based dynamic-programming solver for the state-constrained
consumption problem on truncated positive-orthant boxes (one or two nodes).

This is the independent cross-check for the closed-form machinery: it never
uses the explicit value or feedback beyond sizing the control grid. The
scheme is semi-Lagrangian: on a uniform grid the value satisfies the fixed
point of

    V(x) <- max over a control grid of { h*U(c) + e^{-rho h} * Interp(V)(x + h*((L+A)x - Nc)) }

with multilinear interpolation. Controls whose one-step image leaves the box
below any lower bound are excluded from the max (the discrete analogue of
the positivity constraint); images above an upper bound are clamped (box
truncation). Where no gridded control is admissible the update falls back to
zero consumption for gamma < 1 (utility 0) and to the smallest gridded
control with the image projected into the box for gamma > 1.

Two iteration modes reach the same fixed point:

* ``howard`` (default): alternate a greedy policy-improvement sweep with an
  exact evaluation of the greedy policy (sparse direct solve of
  (I - e^{-rho h} S) V = h*u). The reported residual is the sup-norm of the
  last Bellman update, a certificate that the returned array is the fixed
  point. Converges in a handful of sweeps.
* ``value``: plain fixed-point (value) iteration; kept as an independent
  cross-check of the Howard accelerator on small grids (its sweep count
  scales like 1/(rho*h), which is impractical on fine grids).

The two-node greedy sweep is compiled on first use (numba); the one-node
sweep is plain vectorized numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AssumptionError, NumericError, ValidationError
from .network import EconomyNetwork, system_matrix
from .planner import build_plan
from .spectral import eig_symmetric, frobenius_pair

#: smallest gridded consumption rate per axis
CONTROL_FLOOR = 1e-4

#: fixed-point tolerance (sup norm) and sweep cap
SWEEP_TOL = 1e-9
MAX_ITER = 100_000

#: images this far below a lower bound still count as admissible (roundoff)
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Discretization parameters: per-axis bounds and point counts, the
    discount rate of the grid problem (normally the network's rho), the
    semi-Lagrangian time step h (None selects 0.1 * spacing / max-drift),
    and the number of control points per axis (log-spaced)."""

    lower: tuple
    upper: tuple
    points: tuple
    rho: float
    h: float | None = None
    control_points: int = 48

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        points = tuple(int(v) for v in np.atleast_1d(self.points))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "points", points)
        if not (len(lower) == len(upper) == len(points)):
            raise ValidationError("lower/upper/points must have equal lengths")
        if not 1 <= len(points) <= 2:
            raise ValidationError("grid solver supports one or two axes")
        for lo, up, m in zip(lower, upper, points):
            if not (up > lo >= 0):
                raise ValidationError("need upper > lower >= 0 on every axis")
            if m < 16:
                raise ValidationError("need at least 16 points per axis")
        if not self.rho > 0:
            raise ValidationError("rho must be positive")
        if self.h is not None and not self.h > 0:
            raise ValidationError("h must be positive")
        if self.control_points < 2:
            raise ValidationError("need at least 2 control points per axis")

    @property
    def n(self) -> int:
        return len(self.points)

    def axes(self) -> tuple:
        return tuple(np.linspace(lo, up, m) for lo, up, m
                     in zip(self.lower, self.upper, self.points))

    def spacing(self) -> tuple:
        return tuple((up - lo) / (m - 1) for lo, up, m
                     in zip(self.lower, self.upper, self.points))


@dataclass(frozen=True)
class GridValue:
    """Converged grid value: the value array over grid nodes (shape =
    spec.points), the iteration count, the sup-norm residual of the last
    sweep, and the grid axes for interpolation."""

    values: np.ndarray
    iterations: int
    residual: float
    axes: tuple

    def __post_init__(self):
        self.values.setflags(write=False)
        for ax in self.axes:
            ax.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.ndim


def solve_hjb_grid(net: EconomyNetwork, spec: GridSpec, mode: str = "howard",
                   warm_start: GridValue | None = None) -> GridValue:
    """Solve the grid fixed point for a one- or two-node network.

    ``warm_start`` (a GridValue on the same box, any resolution) is
    interpolated onto the new grid as the initial guess — useful for
    coarse-to-fine continuation; it affects only the iteration count, never
    the fixed point. Raises NumericError if the sweep cap is hit.
    """
    if net.n > 2:
        raise ValidationError("grid solver supports n <= 2 only")
    if net.n != spec.n:
        raise ValidationError(f"grid has {spec.n} axes but network has {net.n} nodes")
    if mode not in ("howard", "value"):
        raise ValidationError("mode must be 'howard' or 'value'")
    gamma = net.gamma
    if gamma == 1.0:
        raise ValidationError("grid solver requires gamma != 1")
    if gamma > 1.0 and min(spec.lower) <= 0:
        raise ValidationError(
            "gamma > 1 needs lower bounds away from 0 (value diverges there)")

    dec = eig_symmetric(system_matrix(net))
    lam0, _ = frobenius_pair(dec, technology=net.technology)
    if not spec.rho - lam0 * (1.0 - gamma) > 0:
        raise AssumptionError(
            f"rho = {spec.rho} must exceed lambda0*(1-gamma) = {lam0 * (1.0 - gamma)}")

    axes = spec.axes()
    nodes = _node_matrix(axes)                    # (n_nodes, n)
    M = system_matrix(net)
    N = net.consumption_operator
    c_grids = _control_grids(net, dec, spec)
    combos = _cartesian(c_grids)                  # (n_combos, n)
    p = net.pref_weights

    h = spec.h
    if h is None:
        drift_cap = float((np.abs(M) @ np.asarray(spec.upper)
                           + np.abs(N) @ np.array([g[-1] for g in c_grids])).max())
        h = 0.1 * min(spec.spacing()) / drift_cap
    beta = math.exp(-spec.rho * h)

    base = nodes + h * (nodes @ M.T)              # zero-consumption images
    shifts = h * (combos @ N.T)                   # per-combo image offset
    h_util = h * _crra(combos, gamma) @ p
    if gamma < 1.0:
        fb_shift = np.zeros(net.n)
        fb_util = 0.0                             # zero consumption, U(0) = 0
    else:
        c_min = np.array([g[0] for g in c_grids])
        fb_shift = h * (N @ c_min)
        fb_util = h * float(_crra(c_min, gamma) @ p)

    geom = _Geometry(spec, axes)
    if warm_start is not None:
        v = _prolong(warm_start, spec).ravel()
    else:
        v = np.zeros(nodes.shape[0])

    if mode == "value":
        v, iters, residual = _value_iteration(v, base, shifts, h_util,
                                              fb_shift, fb_util, beta, geom)
    else:
        v, iters, residual = _howard(v, base, shifts, h_util,
                                     fb_shift, fb_util, beta, geom)
    return GridValue(values=v.reshape(spec.points), iterations=iters,
                     residual=residual, axes=axes)


def compare_to_explicit(gridvalue: GridValue, plan, region):
    """(max, mean) relative error of the grid value against the closed-form
    value over the grid nodes inside ``region`` (per-axis (lo, hi) pairs).

    A meaningful validation only where the closed form solves the
    constrained problem (plan.condition_holds); off that regime the numbers
    are informational.
    """
    region = np.atleast_2d(np.asarray(region, dtype=float))
    if region.shape != (gridvalue.n, 2):
        raise ValidationError(f"region must be {gridvalue.n} (lo, hi) pairs")
    for (lo, hi), ax in zip(region, gridvalue.axes):
        if lo < ax[0] - 1e-12 or hi > ax[-1] + 1e-12 or lo >= hi:
            raise ValidationError("region must be a nonempty box inside the grid")

    nodes = _node_matrix(gridvalue.axes)
    inside = np.ones(nodes.shape[0], dtype=bool)
    for j, (lo, hi) in enumerate(region):
        inside &= (nodes[:, j] >= lo - 1e-12) & (nodes[:, j] <= hi + 1e-12)
    pts = nodes[inside]
    kb = pts @ plan.b0
    if not (kb > 0).all():
        raise ValidationError("region must satisfy <k, b0> > 0")
    exact = plan.alpha ** plan.gamma / (1.0 - plan.gamma) * kb ** (1.0 - plan.gamma)
    rel = np.abs(gridvalue.values.ravel()[inside] - exact) / np.abs(exact)
    return float(rel.max()), float(rel.mean())


# ---------------------------------------------------------------------------
# iteration drivers

def _value_iteration(v, base, shifts, h_util, fb_shift, fb_util, beta, geom):
    for it in range(1, MAX_ITER + 1):
        v_new, _ = _greedy_sweep(v, base, shifts, h_util, fb_shift, fb_util,
                                 beta, geom)
        residual = float(np.abs(v_new - v).max())
        v = v_new
        if residual <= SWEEP_TOL:
            return v, it, residual
    raise NumericError(f"value iteration did not converge in {MAX_ITER} sweeps")


def _howard(v, base, shifts, h_util, fb_shift, fb_util, beta, geom):
    for it in range(1, MAX_ITER + 1):
        v_new, policy = _greedy_sweep(v, base, shifts, h_util, fb_shift,
                                      fb_util, beta, geom)
        residual = float(np.abs(v_new - v).max())
        if residual <= SWEEP_TOL:
            return v_new, it, residual
        v = _policy_value(policy, base, shifts, h_util, fb_shift, fb_util,
                          beta, geom)
    raise NumericError(f"policy iteration did not converge in {MAX_ITER} rounds")


class _Geometry:
    """Flattened grid geometry shared by the sweep/evaluation kernels."""

    def __init__(self, spec: GridSpec, axes):
        self.n = spec.n
        self.lower = np.asarray(spec.lower)
        self.upper = np.asarray(spec.upper)
        self.points = spec.points
        self.inv_dx = 1.0 / np.asarray(spec.spacing())


def _greedy_sweep(v, base, shifts, h_util, fb_shift, fb_util, beta, geom):
    if geom.n == 1:
        return _sweep_1d(v, base[:, 0], shifts[:, 0], h_util,
                         float(geom.lower[0]), float(geom.upper[0]),
                         float(geom.inv_dx[0]), geom.points[0], beta,
                         float(fb_shift[0]), fb_util)
    kern = _kernels()
    return kern(v, base[:, 0], base[:, 1], shifts[:, 0], shifts[:, 1], h_util,
                float(geom.lower[0]), float(geom.lower[1]),
                float(geom.upper[0]), float(geom.upper[1]),
                float(geom.inv_dx[0]), float(geom.inv_dx[1]),
                geom.points[0], geom.points[1], beta,
                float(fb_shift[0]), float(fb_shift[1]), fb_util, _EDGE_TOL)


def _sweep_1d(v, base, shifts, h_util, lo, up, inv_dx, npts, beta,
              fb_shift, fb_util):
    y = base[None, :] - shifts[:, None]                    # (combos, nodes)
    ok = y >= lo - _EDGE_TOL
    np.clip(y, lo, up, out=y)
    frac = (y - lo) * inv_dx
    ix = np.minimum(frac.astype(np.int64), npts - 2)
    w = frac - ix
    interp = (1.0 - w) * v[ix] + w * v[ix + 1]
    vals = np.where(ok, h_util[:, None] + beta * interp, -np.inf)
    policy = np.argmax(vals, axis=0)
    best = vals[policy, np.arange(base.size)]
    stuck = ~np.isfinite(best)
    if stuck.any():
        y = np.clip(base[stuck] - fb_shift, lo, up)
        frac = (y - lo) * inv_dx
        ix = np.minimum(frac.astype(np.int64), npts - 2)
        w = frac - ix
        best[stuck] = fb_util + beta * ((1.0 - w) * v[ix] + w * v[ix + 1])
        policy[stuck] = -1
    return best, policy


def _sweep_2d_py(v, base_x, base_y, sh_x, sh_y, h_util, lo_x, lo_y, up_x, up_y,
                 inv_dx, inv_dy, nx, ny, beta, fb_x, fb_y, fb_util, edge_tol):
    n_nodes = base_x.size
    n_combos = sh_x.size
    out = np.empty(n_nodes)
    policy = np.empty(n_nodes, np.int64)
    for i in range(n_nodes):
        bx = base_x[i]
        by = base_y[i]
        best = -1.0e300          # fastmath-safe stand-in for -inf
        best_c = -1
        for c in range(n_combos):
            yx = bx - sh_x[c]
            yy = by - sh_y[c]
            if yx < lo_x - edge_tol or yy < lo_y - edge_tol:
                continue
            val = h_util[c] + beta * _bilinear(v, yx, yy, lo_x, lo_y, up_x,
                                               up_y, inv_dx, inv_dy, nx, ny)
            if val > best:
                best = val
                best_c = c
        if best_c < 0:
            best = fb_util + beta * _bilinear(v, bx - fb_x, by - fb_y, lo_x,
                                              lo_y, up_x, up_y, inv_dx,
                                              inv_dy, nx, ny)
        out[i] = best
        policy[i] = best_c
    return out, policy


def _bilinear_py(v, yx, yy, lo_x, lo_y, up_x, up_y, inv_dx, inv_dy, nx, ny):
    if yx < lo_x:
        yx = lo_x
    elif yx > up_x:
        yx = up_x
    if yy < lo_y:
        yy = lo_y
    elif yy > up_y:
        yy = up_y
    fx = (yx - lo_x) * inv_dx
    fy = (yy - lo_y) * inv_dy
    ix = int(fx)
    iy = int(fy)
    if ix > nx - 2:
        ix = nx - 2
    if iy > ny - 2:
        iy = ny - 2
    wx = fx - ix
    wy = fy - iy
    b = ix * ny + iy
    return ((1.0 - wx) * ((1.0 - wy) * v[b] + wy * v[b + 1])
            + wx * ((1.0 - wy) * v[b + ny] + wy * v[b + ny + 1]))


_bilinear = _bilinear_py
_COMPILED = None


def _kernels():
    """Compile the two-node sweep on first use (cached across processes)."""
    global _COMPILED, _bilinear
    if _COMPILED is None:
        from numba import njit
        _bilinear = njit(cache=True, fastmath=True, inline="always")(_bilinear_py)
        _COMPILED = njit(cache=True, fastmath=True)(_sweep_2d_py)
    return _COMPILED


def _policy_value(policy, base, shifts, h_util, fb_shift, fb_util, beta, geom):
    """Exact value of a fixed policy: solve (I - beta*S) v = h*u where S is
    the sparse interpolation operator of the policy's one-step images."""
    n_nodes = base.shape[0]
    stuck = policy < 0
    img = base - np.where(stuck[:, None], fb_shift, shifts[np.maximum(policy, 0)])
    util = np.where(stuck, fb_util, h_util[np.maximum(policy, 0)])

    np.clip(img, geom.lower, geom.upper, out=img)
    frac = (img - geom.lower) * geom.inv_dx
    idx = np.minimum(frac.astype(np.int64), np.asarray(geom.points) - 2)
    w = frac - idx

    if geom.n == 1:
        cols = np.stack([idx[:, 0], idx[:, 0] + 1], axis=1)
        wts = np.stack([1.0 - w[:, 0], w[:, 0]], axis=1)
    else:
        ny = geom.points[1]
        flat = idx[:, 0] * ny + idx[:, 1]
        cols = np.stack([flat, flat + 1, flat + ny, flat + ny + 1], axis=1)
        wx, wy = w[:, 0], w[:, 1]
        wts = np.stack([(1 - wx) * (1 - wy), (1 - wx) * wy,
                        wx * (1 - wy), wx * wy], axis=1)
    rows = np.repeat(np.arange(n_nodes), cols.shape[1])
    S = sp.coo_matrix((wts.ravel(), (rows, cols.ravel())),
                      shape=(n_nodes, n_nodes)).tocsc()
    A = sp.identity(n_nodes, format="csc") - beta * S
    return spla.splu(A).solve(util)


# ---------------------------------------------------------------------------
# grid plumbing

def _crra(c, gamma: float):
    """Elementwise power utility c^{1-gamma}/(1-gamma)."""
    return c ** (1.0 - gamma) / (1.0 - gamma)


def _control_grids(net: EconomyNetwork, dec, spec: GridSpec) -> list:
    """Per-axis log-spaced control grids over [CONTROL_FLOOR, c_max] with
    c_max twice the largest feedback consumption on the grid (falling back
    to a technology-scaled cap when no explicit feedback exists)."""
    upper = np.asarray(spec.upper)
    if net.identity_consumption():
        plan = build_plan(net, dec)
        c_cap = 2.0 * plan.feedback @ upper
    else:
        c_cap = 2.0 * float(net.technology.max()) * upper
    c_cap = np.maximum(c_cap, 10.0 * CONTROL_FLOOR)
    return [np.geomspace(CONTROL_FLOOR, float(ci), spec.control_points)
            for ci in c_cap]


def _cartesian(grids: list) -> np.ndarray:
    if len(grids) == 1:
        return grids[0][:, None]
    a, b = grids
    return np.stack([np.repeat(a, b.size), np.tile(b, a.size)], axis=1)


def _node_matrix(axes) -> np.ndarray:
    if len(axes) == 1:
        return axes[0][:, None]
    x, y = axes
    return np.stack([np.repeat(x, y.size), np.tile(y, x.size)], axis=1)


def _prolong(coarse: GridValue, spec: GridSpec) -> np.ndarray:
    """Interpolate a coarse solution onto the target GridSpec's axes (same box)."""
    if coarse.n != spec.n:
        raise ValidationError("warm start has the wrong dimension")
    for ax, lo, up in zip(coarse.axes, spec.lower, spec.upper):
        if abs(ax[0] - lo) > 1e-12 or abs(ax[-1] - up) > 1e-12:
            raise ValidationError("warm start must live on the same box")
    axes = spec.axes()
    if spec.n == 1:
        return np.interp(axes[0], coarse.axes[0], coarse.values)
    from scipy.interpolate import RegularGridInterpolator
    interp = RegularGridInterpolator(coarse.axes, coarse.values)
    return interp(_node_matrix(axes)).reshape(spec.points)
