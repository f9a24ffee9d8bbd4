"""Closed-form analysis of the two-node economy with symmetric weight w and
unit preference weights.

With lambda0(w) available in closed form, everything of interest reduces to
two scalar functions of w:

    G(w)   = (A2 - A1)/(A2 - lambda0(w)) - 1   (the eigenvector ratio b0_2/b0_1)
    Psi(w) = (rho - lambda0(w))/(rho - A1(1-gamma))

The off-diagonal feedback entry is f12(w) = (rho - lambda0(w)(1-gamma)) /
(gamma [G^{-1} + G^{-1/gamma}]), monotonically decreasing with f12 -> +inf
as w -> 0+, while its mirror is f21 = f12 * G^{-(1+1/gamma)} <= f12. The
admissibility condition w >= max(f12, f21) therefore holds exactly on a ray
[w_bar, +inf), and w_bar is found by bisection on a monotone function.

value_profile tabulates (w, lambda0, g, V_b0(w;k), condition_holds) over a
weight grid through the ordinary spectral+plan pipeline and attaches the
tail-monotonicity classification of w -> V(w;k):

    * A1 = A2: constant (from (rho - A(1-gamma))/(2 gamma) on);
    * A1 < A2, k1 <= k2: decreasing on [w_bar, +inf);
    * A1 < A2, k1 > k2: decreasing or increasing on a tail ray according to
      the sign of (A2-A1)/g_inf - (k2-k1)/k_bar, where g_inf =
      (A_bar(1-gamma) - rho)/gamma < 0 is the infinite-coupling growth rate.

Below w_bar the table still reports the auxiliary value V_b0 but flags
condition_holds=False; no claim is made about the constrained value there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .network import EconomyNetwork, system_matrix
from .planner import build_plan, value_auxiliary
from .spectral import eig_symmetric, two_node_closed_form

#: bracket within which the condition threshold is searched
_W_LO, _W_HI = 1e-8, 1e6


@dataclass(frozen=True)
class TwoNodeInstance:
    """Two-node problem data: technologies A1 <= A2, discount rho, curvature
    gamma != 1, strictly positive initial capital (k1, k2); p1 = p2 = 1."""

    A1: float
    A2: float
    rho: float
    gamma: float
    k: tuple[float, float]

    def __post_init__(self):
        if not (0 < self.A1 <= self.A2):
            raise ValidationError("need 0 < A1 <= A2")
        if not self.rho > 0:
            raise ValidationError("rho must be positive")
        if self.gamma <= 0 or self.gamma == 1.0:
            raise ValidationError("gamma must be positive and != 1")
        if not self.rho > self.A2 * (1.0 - self.gamma):
            raise ValidationError(
                f"need rho > A2*(1-gamma) = {self.A2 * (1.0 - self.gamma)}")
        if not (self.k[0] > 0 and self.k[1] > 0):
            raise ValidationError("initial capital must be strictly positive")

    def network(self, w: float) -> EconomyNetwork:
        """The two-node economy at coupling w."""
        weights = np.array([[0.0, w], [w, 0.0]])
        return EconomyNetwork(
            weights=weights, technology=np.array([self.A1, self.A2]),
            rho=self.rho, gamma=self.gamma, pref_weights=np.ones(2),
            initial_capital=np.asarray(self.k, dtype=float))

    @property
    def g_inf(self) -> float:
        """Infinite-coupling growth rate (A_bar(1-gamma) - rho)/gamma < 0."""
        a_bar = 0.5 * (self.A1 + self.A2)
        return (a_bar * (1.0 - self.gamma) - self.rho) / self.gamma


def G_and_Psi(inst: TwoNodeInstance, w: float) -> tuple[float, float]:
    """(G(w), Psi(w)); G = 1 identically when A1 = A2.

    G(w) > 1 and decreasing for A1 < A2; Psi decreasing from 1 at w -> 0+
    to (2 rho - (A1+A2)) / (2 (rho - A1(1-gamma))) at w -> +inf.
    """
    if not w > 0:
        raise ValidationError("w must be positive")
    lam0, ratio = two_node_closed_form(inst.A1, inst.A2, w)
    psi = (inst.rho - lam0) / (inst.rho - inst.A1 * (1.0 - inst.gamma))
    return ratio, psi


def f12_of_w(inst: TwoNodeInstance, w: float) -> float:
    """Feedback entry f12(w) = (rho - lambda0(w)(1-gamma)) /
    (gamma [G(w)^{-1} + G(w)^{-1/gamma}]): decreasing, diverging as w -> 0+,
    and constant (rho - A(1-gamma))/(2 gamma) when A1 = A2."""
    if not w > 0:
        raise ValidationError("w must be positive")
    lam0, _ = two_node_closed_form(inst.A1, inst.A2, w)
    G, _ = G_and_Psi(inst, w)
    denom = G ** -1.0 + G ** (-1.0 / inst.gamma)
    return (inst.rho - lam0 * (1.0 - inst.gamma)) / (inst.gamma * denom)


def _f21_of_w(inst: TwoNodeInstance, w: float) -> float:
    """Mirror entry f21(w) = f12(w) * G(w)^{-(1+1/gamma)} <= f12(w)."""
    G, _ = G_and_Psi(inst, w)
    return f12_of_w(inst, w) * G ** -(1.0 + 1.0 / inst.gamma)


def thresholds(inst: TwoNodeInstance) -> tuple[float, float]:
    """(w_bar, w_under): the coupling above which the admissibility condition
    holds for all larger w, and the coupling below which it certainly fails
    (f12(w) > w), each bisected to 1e-8. Always w_under <= w_bar.
    """
    w_bar = _bisect_crossing(lambda w: max(f12_of_w(inst, w), _f21_of_w(inst, w)) - w,
                             "condition threshold")
    w_under = _bisect_crossing(lambda w: f12_of_w(inst, w) - w, "failure threshold")
    # spot-check the claimed monotone tail rather than trusting it blindly
    for w in w_bar * np.array([1.0 + 1e-6, 2.0, 10.0, 1e3]):
        if max(f12_of_w(inst, w), _f21_of_w(inst, w)) > w * (1.0 + 1e-9):
            raise NumericError(f"condition unexpectedly fails at w={w:.6g}")
    return w_bar, w_under


def _bisect_crossing(h, label: str) -> float:
    """Root of a decreasing h on [_W_LO, _W_HI] (positive left of the root)."""
    lo, hi = _W_LO, _W_HI
    if h(lo) <= 0:
        return lo
    if h(hi) > 0:
        raise NumericError(f"{label}: no sign change in [{_W_LO:g}, {_W_HI:g}]")
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classification(inst: TwoNodeInstance) -> str:
    """Tail monotonicity of w -> V(w;k): 'constant', 'decreasing',
    'increasing', or 'unclassified' on the boundary case."""
    if inst.A1 == inst.A2:
        return "constant"
    k1, k2 = inst.k
    if k1 <= k2:
        return "decreasing"
    # Sign of the large-w limit of X(w) = gamma/(rho - lambda0(w)(1-gamma))
    # + (A2-A1)/(A2-lambda0)^2 * (k2 G^(1/gamma) - k1)/((k1+k2 G)(G+G^(1/gamma))):
    # X_bar = -1/g_inf + (k2-k1)/((A2-A1) k_mean); dV/dw has the sign of -X.
    x_bar = (k2 - k1) / (0.5 * (k1 + k2)) - (inst.A2 - inst.A1) / inst.g_inf
    if x_bar > 0:
        return "decreasing"
    if x_bar < 0:
        return "increasing"
    return "unclassified"


def value_profile(inst: TwoNodeInstance, w_grid) -> dict:
    """Evaluate the pipeline on a grid of couplings.

    Returns a dict with arrays ``w``, ``lambda0``, ``g``, ``value``
    (V_b0(w;k)), boolean ``condition_holds``, plus the scalar fields
    ``classification``, ``w_bar``, ``w_under``. Rows are sorted by w.
    """
    w_grid = np.sort(np.asarray(w_grid, dtype=float).reshape(-1))
    if w_grid.size == 0:
        raise ValidationError("w grid is empty")
    if not (w_grid > 0).all():
        raise ValidationError("w grid must be strictly positive")

    k = np.asarray(inst.k, dtype=float)
    lam0 = np.empty(w_grid.size)
    g = np.empty(w_grid.size)
    value = np.empty(w_grid.size)
    holds = np.empty(w_grid.size, dtype=bool)
    for j, w in enumerate(w_grid):
        net = inst.network(w)
        plan = build_plan(net, eig_symmetric(system_matrix(net)))
        lam0[j] = plan.lambda0
        g[j] = plan.growth_rate
        value[j] = value_auxiliary(plan, k)
        holds[j] = plan.condition_holds
    w_bar, w_under = thresholds(inst)
    return {
        "w": w_grid, "lambda0": lam0, "g": g, "value": value,
        "condition_holds": holds, "classification": classification(inst),
        "w_bar": w_bar, "w_under": w_under,
    }
