"""The explicit optimal plan: Hamiltonian, feedback matrix, value functions,
closed-form optimal paths, and the admissibility condition.

Everything here is driven by the Frobenius eigenpair (lambda_0, b0) of the
system matrix L + A. With

    Phi(u)  = sum_i p_i^{1/gamma} u_i^{(gamma-1)/gamma},
    alpha   = gamma * Phi(b0) / (rho - lambda_0 * (1 - gamma)),
    g       = (lambda_0 - rho) / gamma,

the auxiliary value function is V_{b0}(k) = alpha^gamma/(1-gamma) *
<k, b0>^{1-gamma}, the optimal consumption is linear feedback C = F K with
f_ij = (1/alpha) (p_i/b0_i)^{1/gamma} b0_j, and the optimal capital path is
an explicit combination of the eigenmodes of L + A. The feedback plan solves
the original orthant-constrained problem whenever the graph is strongly
enough connected, namely w_ij >= f_ij for all i != j; that verdict and its
margins are part of the plan.

None of the plan quantities depend on the normalization of b0 (rescaling
b0 -> c*b0 rescales alpha and Phi so that F, g, V, and the paths are
unchanged); the stored b0 is unit-norm by default. The steady direction is
kept in the normalization-free form y = (alpha/||b0||^2) b0 +
sum_m beta_m/(lambda_m - g) b^m.

The explicit solution requires gamma != 1 and an identity consumption
operator; the Hamiltonian helpers below also cover the log-utility case
gamma = 1 and a general N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError, ValidationError
from .network import EconomyNetwork, is_irreducible, system_matrix
from .spectral import SpectralDecomposition, frobenius_pair


@dataclass(frozen=True)
class ExplicitPlan:
    """Closed-form solution bundle for one network instance."""

    lambda0: float
    b0: np.ndarray                 # strictly positive; unit norm at default scale
    phi: float                     # Phi(b0) > 0
    alpha: float                   # > 0, requires rho - lambda0*(1-gamma) > 0
    growth_rate: float             # g = (lambda0 - rho)/gamma
    feedback: np.ndarray           # F, optimal consumption C = F K
    condition_holds: bool          # w_ij >= f_ij for all i != j
    condition_margins: np.ndarray  # w_ij - f_ij off-diagonal, +inf on diagonal
    steady_direction: np.ndarray | None   # y; None when g <= lambda_1
    betas: np.ndarray              # beta_m = <c_hat(b0), b^m>, m = 1..n-1
    g_dominant: bool               # g > lambda_1
    # problem data carried for the path/value evaluations
    rho: float
    gamma: float
    pref_weights: np.ndarray

    def __post_init__(self):
        for arr in (self.b0, self.feedback, self.condition_margins,
                    self.betas, self.pref_weights):
            arr.setflags(write=False)
        if self.steady_direction is not None:
            self.steady_direction.setflags(write=False)

    @property
    def n(self) -> int:
        return self.b0.size

    def min_condition_margin(self) -> float:
        return float(self.condition_margins.min())


# ---------------------------------------------------------------------------
# Hamiltonian machinery (supports gamma = 1 and general N; used by the HJB
# residual checks as well as by the plan construction)

def hamiltonian(q, gamma: float, p, N=None) -> float:
    """Maximized current-value Hamiltonian H(q) = sup_{c >= 0} {U_gamma(c) - <N c, q>}.

    Finite only for strictly positive q, where it evaluates to
    (gamma/(1-gamma)) * sum_i p_i^{1/gamma} [N^T q]_i^{1-1/gamma} for
    gamma != 1 and sum_i p_i (log(p_i/[N^T q]_i) - 1) for gamma = 1;
    +inf otherwise (a return value, not an error).
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    p = np.asarray(p, dtype=float).reshape(-1)
    if (q <= 0).any():
        return float("inf")
    Ntq = q if N is None else np.asarray(N, dtype=float).T @ q
    if gamma == 1.0:
        return float(np.sum(p * (np.log(p / Ntq) - 1.0)))
    return float(gamma / (1.0 - gamma) * np.sum(p ** (1.0 / gamma) * Ntq ** (1.0 - 1.0 / gamma)))


def hamiltonian_maximizer(q, gamma: float, p, N=None) -> np.ndarray:
    """The unique maximizer c_hat_i(q) = (p_i / [N^T q]_i)^{1/gamma}, q >> 0."""
    q = np.asarray(q, dtype=float).reshape(-1)
    p = np.asarray(p, dtype=float).reshape(-1)
    if (q <= 0).any():
        raise ValidationError("hamiltonian_maximizer requires strictly positive q")
    Ntq = q if N is None else np.asarray(N, dtype=float).T @ q
    return (p / Ntq) ** (1.0 / gamma)


def phi(u, gamma: float, p) -> float:
    """Phi(u) = sum_i p_i^{1/gamma} u_i^{(gamma-1)/gamma} for u >> 0."""
    u = np.asarray(u, dtype=float).reshape(-1)
    p = np.asarray(p, dtype=float).reshape(-1)
    if (u <= 0).any():
        raise ValidationError("phi requires strictly positive u")
    return float(np.sum(p ** (1.0 / gamma) * u ** ((gamma - 1.0) / gamma)))


def nonlinear_eig_residual(mu: float, u, net: EconomyNetwork) -> float:
    """Residual ||(L+A)u - [rho/(1-gamma) - mu*Phi(u)] u||.

    A residual at roundoff level certifies that (mu, u) solves the nonlinear
    eigenvalue problem, hence that the associated power ansatz is a classical
    solution of the HJB equation. The particular solution is
    mu = (rho/(1-gamma) - lambda_0)/Phi(b0), u = b0.
    """
    if not mu * (1.0 - net.gamma) > 0:
        raise ValidationError("need mu*(1-gamma) > 0")
    u = np.asarray(u, dtype=float).reshape(-1)
    if (u <= 0).any():
        raise ValidationError("u must be strictly positive")
    M = system_matrix(net)
    lam = net.rho / (1.0 - net.gamma) - mu * phi(u, net.gamma, net.pref_weights)
    return float(np.linalg.norm(M @ u - lam * u))


# ---------------------------------------------------------------------------
# plan construction

def build_plan(net: EconomyNetwork, dec: SpectralDecomposition,
               b0_scale: float = 1.0) -> ExplicitPlan:
    """Assemble the explicit plan from the spectral decomposition of L + A.

    ``b0_scale`` rescales the Frobenius eigenvector before the plan
    quantities are computed; the default 1.0 stores the unit-norm b0. Any
    positive scale yields identical F, g, values and paths (normalization
    invariance), which the test suite checks by recomputation.
    """
    if net.gamma == 1.0:
        raise ValidationError("the explicit plan requires gamma != 1")
    if net.gamma <= 0:
        raise ValidationError("gamma must be positive")
    if not net.identity_consumption():
        raise AssumptionError(
            "the explicit plan is only available for the identity consumption operator")
    if not is_irreducible(net.weights):
        raise AssumptionError("graph is not connected; Frobenius pair undefined")
    if b0_scale <= 0:
        raise ValidationError("b0_scale must be positive")

    rho, gamma, p = net.rho, net.gamma, net.pref_weights
    lam0, b0 = frobenius_pair(dec, technology=net.technology)
    b0 = b0_scale * b0
    if not rho - lam0 * (1.0 - gamma) > 0:
        raise AssumptionError(
            f"rho = {rho} must exceed lambda0*(1-gamma) = {lam0 * (1.0 - gamma)}")

    ph = phi(b0, gamma, p)
    alpha = gamma * ph / (rho - lam0 * (1.0 - gamma))
    g = (lam0 - rho) / gamma
    chat = (p / b0) ** (1.0 / gamma)      # maximizer at q = b0
    F = np.outer(chat, b0) / alpha

    margins = net.weights - F
    np.fill_diagonal(margins, np.inf)
    holds = bool(margins.min() >= -1e-12)

    lam = dec.eigenvalues
    B = dec.eigenvectors
    betas = np.array([float(chat @ B[:, m]) for m in range(1, net.n)])
    g_dominant = net.n == 1 or g > float(lam[1])
    y = None
    if g_dominant:
        y = (alpha / float(b0 @ b0)) * b0
        for m in range(1, net.n):
            y = y + betas[m - 1] / (float(lam[m]) - g) * B[:, m]

    return ExplicitPlan(
        lambda0=lam0, b0=b0, phi=ph, alpha=alpha, growth_rate=g, feedback=F,
        condition_holds=holds, condition_margins=margins,
        steady_direction=y, betas=betas, g_dominant=g_dominant,
        rho=rho, gamma=gamma, pref_weights=p.copy())


# ---------------------------------------------------------------------------
# values

def value_auxiliary(plan: ExplicitPlan, k) -> float:
    """V_{b0}(k) = alpha^gamma/(1-gamma) * <k, b0>^{1-gamma} on <k, b0> > 0.

    Equals the value of the original orthant-constrained problem for every
    k in the nonnegative orthant whenever plan.condition_holds.
    """
    k = np.asarray(k, dtype=float).reshape(-1)
    kb = float(k @ plan.b0)
    if not kb > 0:
        raise ValidationError("value is defined on the half-space <k, b0> > 0")
    return plan.alpha ** plan.gamma / (1.0 - plan.gamma) * kb ** (1.0 - plan.gamma)


def value_gradient(plan: ExplicitPlan, k) -> np.ndarray:
    """Closed-form gradient DV_{b0}(k) = alpha^gamma <k, b0>^{-gamma} b0."""
    k = np.asarray(k, dtype=float).reshape(-1)
    kb = float(k @ plan.b0)
    if not kb > 0:
        raise ValidationError("gradient is defined on the half-space <k, b0> > 0")
    return plan.alpha ** plan.gamma * kb ** (-plan.gamma) * plan.b0


def value_uncoupled(net: EconomyNetwork, k) -> float:
    """Value of the fully disconnected economy (all weights zero):
    V(k) = sum_i p_i/(1-gamma) * [gamma/(rho - A_i(1-gamma))]^gamma * k_i^{1-gamma}.
    """
    _check_uncoupled(net)
    k = np.asarray(k, dtype=float).reshape(-1)
    rho, gamma, p, A = net.rho, net.gamma, net.pref_weights, net.technology
    with np.errstate(divide="ignore"):
        terms = p / (1.0 - gamma) * (gamma / (rho - A * (1.0 - gamma))) ** gamma \
            * k ** (1.0 - gamma)
    return float(terms.sum())


def uncoupled_paths(net: EconomyNetwork, k, t):
    """Optimal paths of the disconnected economy.

    K_i(t) = k_i e^{g_i t} and C_i(t) = ((rho - A_i(1-gamma))/gamma) k_i
    e^{g_i t} with per-node rate g_i = (A_i - rho)/gamma. Scalar t gives a
    pair of length-n vectors; an array of times gives (len(t), n) arrays.
    """
    _check_uncoupled(net)
    k = np.asarray(k, dtype=float).reshape(-1)
    rho, gamma, A = net.rho, net.gamma, net.technology
    gi = (A - rho) / gamma
    t_arr = np.asarray(t, dtype=float)
    growth = np.exp(np.multiply.outer(t_arr, gi))
    K = k * growth
    C = (rho - A * (1.0 - gamma)) / gamma * K
    return K, C


def _check_uncoupled(net: EconomyNetwork):
    if (net.weights != 0).any():
        raise ValidationError("uncoupled formulas require all weights zero")
    if not ((net.rho - net.technology * (1.0 - net.gamma)) > 0).all():
        raise AssumptionError("need rho > A_i*(1-gamma) for every node")


# ---------------------------------------------------------------------------
# closed-form optimal paths

def closed_loop_trajectory(plan: ExplicitPlan, dec: SpectralDecomposition, k, t):
    """Optimal capital path K_hat(t) of the closed-loop dynamics K' = (L+A-F)K.

    Modal form: (<k,b0>/alpha) e^{g t} y plus, for each non-Frobenius mode m,
    (<k,b^m> - beta_m <k,b0>/(alpha (lambda_m - g))) e^{lambda_m t} b^m.
    Requires g > lambda_1 (the regime where e^{g t} is the dominant term and
    the steady-state reading of the expansion applies). Scalar t gives a
    length-n vector, an array of times a (len(t), n) array.
    """
    if not plan.g_dominant:
        raise AssumptionError("closed-form path requires g > lambda_1")
    return _modal_path(plan, dec, k, t)


def _modal_path(plan: ExplicitPlan, dec: SpectralDecomposition, k, t):
    """Evaluate the closed-loop path expansion for any spectrum.

    Algebraically identical to the modal form above, but written pole-free:
    the b^m coefficient is <k,b^m> e^{lambda_m t} - (<k,b0>/alpha) beta_m *
    D_m(t) with the divided difference D_m(t) = (e^{g t} - e^{lambda_m t}) /
    (g - lambda_m), evaluated through expm1 so the formula stays accurate
    arbitrarily close to (and at) a resonance g = lambda_m. Used directly by
    breakdown detection, which is meaningful whether or not g dominates.
    """
    k = np.asarray(k, dtype=float).reshape(-1)
    t_in = np.asarray(t, dtype=float)
    t_arr = np.atleast_1d(t_in)
    lam, B = dec.eigenvalues, dec.eigenvectors
    g = plan.growth_rate
    c0 = float(k @ plan.b0) / plan.alpha
    lead = c0 * plan.alpha / float(plan.b0 @ plan.b0)

    out = np.exp(g * t_arr)[:, None] * (lead * plan.b0)[None, :]
    for m in range(1, plan.n):
        lam_m = float(lam[m])
        e_m = np.exp(lam_m * t_arr)
        x = (g - lam_m) * t_arr
        rel = np.ones_like(t_arr)
        nz = x != 0
        rel[nz] = np.expm1(x[nz]) / x[nz]
        dd = t_arr * e_m * rel
        coeff = float(k @ B[:, m]) * e_m - c0 * plan.betas[m - 1] * dd
        out += coeff[:, None] * B[:, m][None, :]
    return out[0] if t_in.ndim == 0 else out


def optimal_control_path(plan: ExplicitPlan, k, t):
    """Optimal consumption C_hat_i(t) = (1/alpha)(p_i/b0_i)^{1/gamma} <k,b0> e^{g t}.

    Identical to F @ K_hat(t); strictly positive and growing at the exact
    rate g. Scalar/array t as in :func:`closed_loop_trajectory`.
    """
    k = np.asarray(k, dtype=float).reshape(-1)
    kb = float(k @ plan.b0)
    if not kb > 0:
        raise ValidationError("optimal control requires <k, b0> > 0")
    chat = (plan.pref_weights / plan.b0) ** (1.0 / plan.gamma)
    base = kb / plan.alpha * chat
    t_arr = np.asarray(t, dtype=float)
    return np.multiply.outer(np.exp(plan.growth_rate * t_arr), base) \
        if t_arr.ndim else np.exp(plan.growth_rate * t_arr) * base


def steady_state(plan: ExplicitPlan, k) -> np.ndarray:
    """Limit of the detrended path e^{-g t} K_hat(t): K_bar = (<k,b0>/alpha) y.

    Nonnegative for nonnegative k whenever the admissibility condition holds.
    """
    if not plan.g_dominant:
        raise AssumptionError("steady state requires g > lambda_1")
    k = np.asarray(k, dtype=float).reshape(-1)
    return float(k @ plan.b0) / plan.alpha * plan.steady_direction


def gain_of_optimal(plan: ExplicitPlan, k) -> float:
    """Discounted utility of the optimal plan in closed form:
    J = [sum_i p_i C_hat_i(0)^{1-gamma}/(1-gamma)] / (rho - g(1-gamma)).

    Coincides with value_auxiliary(plan, k) -- the verification identity of
    the explicit solution (rho > g(1-gamma) follows from rho > lambda0(1-gamma)).
    """
    k = np.asarray(k, dtype=float).reshape(-1)
    kb = float(k @ plan.b0)
    if not kb > 0:
        raise ValidationError("gain requires <k, b0> > 0")
    rho, gamma = plan.rho, plan.gamma
    denom = rho - plan.growth_rate * (1.0 - gamma)
    if not denom > 0:
        raise AssumptionError("need rho > g*(1-gamma)")
    c0 = optimal_control_path(plan, k, 0.0)
    u0 = float(np.sum(plan.pref_weights * c0 ** (1.0 - gamma))) / (1.0 - gamma)
    return u0 / denom
