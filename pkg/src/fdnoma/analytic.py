"""Analytical outage-probability evaluators.

Near-user outage is an exact double integral over the selected user's
position (adaptive quadrature) together with closed-form upper and lower
bounds obtained by pinning the relay-to-user angle at its extremes and
applying Gauss-Chebyshev quadrature to the radial integral.  Far-user
outage has a closed form built from incomplete-gamma terms for the RNRF
strategy, a Gauss-Chebyshev-assisted closed form for the NNNF strategy,
and high-SNR specializations at path-loss exponent 2.

The far-user expressions model the relay-to-far-user distance by the far
user's distance from the base station (the ring of relays is small
compared to the far ring), matching far_distance_model="bs-centered".

Incomplete gamma functions are evaluated in-module: a finite sum for
integer order, power series below the x = a + 1 crossover and a Lentz
continued fraction above it, giving ~1e-14 relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import DerivedScalars, ParameterError, SystemParams

BOUNDARY_SLACK = 1e-9  # values may stray this far outside [0, 1]

_MAX_ITER = 500
_TINY = 1e-300


class QuadratureError(RuntimeError):
    """Adaptive quadrature missed the requested tolerance.

    Carries the achieved estimate in ``value`` and the error estimate in
    ``achieved``.
    """

    def __init__(self, message: str, value: float, achieved: float):
        super().__init__(message)
        self.value = value
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Chebyshev nodes cos((2m-1)pi/2M), m = 1..M, strictly decreasing.

    The sqrt(1 - node^2) factors are the implicit weights each formula
    multiplies in; they are cached here for convenience.
    """

    m: int
    nodes: np.ndarray
    sin_theta: np.ndarray


@dataclass(frozen=True)
class AnalyticResult:
    value: float
    method: str
    m_used: int


def chebyshev_grid(m: int) -> QuadratureGrid:
    if m < 1:
        raise ParameterError("node count must be >= 1")
    k = np.arange(1, m + 1)
    nodes = np.cos((2 * k - 1) * np.pi / (2 * m))
    return QuadratureGrid(m=m, nodes=nodes, sin_theta=np.sin((2 * k - 1) * np.pi / (2 * m)))


# ---------------------------------------------------------------------------
# incomplete gamma machinery


def _reg_lower_series(a: float, x: float) -> float:
    """P(a, x) by power series; preferred for x < a + 1."""
    term = 1.0 / a
    total = term
    n = a
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _reg_upper_cf(a: float, x: float) -> float:
    """Q(a, x) by modified Lentz continued fraction; preferred for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _reg_upper_int(n: int, x: float) -> float:
    """Q(n, x) = exp(-x) * sum_{k<n} x^k / k! for integer n >= 1."""
    term = 1.0
    total = 1.0
    for k in range(1, n):
        term *= x / k
        total += term
    return total * math.exp(-x)


def reg_upper_gamma(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if a <= 0:
        raise ParameterError("gamma order must be positive")
    if x < 0:
        raise ParameterError("gamma argument must be non-negative")
    if x == 0:
        return 1.0
    if float(a).is_integer() and a <= 600:
        return _reg_upper_int(int(a), x)
    if x < a + 1.0:
        return 1.0 - _reg_lower_series(a, x)
    return _reg_upper_cf(a, x)


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x)."""
    if a <= 0:
        raise ParameterError("gamma order must be positive")
    if x < 0:
        raise ParameterError("gamma argument must be non-negative")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _reg_lower_series(a, x)
    return 1.0 - _reg_upper_cf(a, x)


def upper_inc_gamma(a: float, x: float) -> float:
    """Upper incomplete gamma integral from x to infinity of t^(a-1) e^-t."""
    return reg_upper_gamma(a, x) * math.gamma(a)


def _reg_gamma_diff(a: float, x_lo: float, x_hi: float) -> float:
    """P(a, x_hi) - P(a, x_lo) = [Gamma(a, x_lo) - Gamma(a, x_hi)] / Gamma(a).

    Differencing the regularized functions on a common branch keeps the
    result accurate when both arguments sit far into the same tail.
    """
    if x_hi < x_lo:
        raise ParameterError("need x_lo <= x_hi")
    if x_hi < a + 1.0:
        return _reg_lower_series(a, x_hi) - _reg_lower_series(a, x_lo)
    if x_lo >= a + 1.0:
        return _reg_upper_cf(a, x_lo) - _reg_upper_cf(a, x_hi)
    return 1.0 - _reg_lower_series(a, x_lo) - _reg_upper_cf(a, x_hi)


# ---------------------------------------------------------------------------
# shared pieces


def _finish(raw: float, method: str, m_used: int) -> AnalyticResult:
    if raw < -BOUNDARY_SLACK or raw > 1.0 + BOUNDARY_SLACK:
        raise ValueError("computed outage probability %r is out of range" % raw)
    return AnalyticResult(value=min(1.0, max(0.0, raw)), method=method, m_used=m_used)


def _near_user_density(params: SystemParams) -> float:
    """Normalization of the nearest-user radial pdf on the disc."""
    return 2 * math.pi * params.lambda_n / -math.expm1(
        -math.pi * params.lambda_n * params.r1 ** 2)


def _far_user_density(params: SystemParams) -> float:
    """Normalization of the nearest-user radial pdf on the ring."""
    return 2 * math.pi * params.lambda_f / -math.expm1(
        -math.pi * params.lambda_f * (params.r3 ** 2 - params.r2 ** 2))


def _near_trivial(derived: DerivedScalars):
    """The always-in-outage regimes shared by all near-user evaluators."""
    if not derived.mu_defined or math.isinf(derived.mu):
        return _finish(1.0, "closed-form", 0)
    if derived.mu == 0.0:
        return _finish(0.0, "closed-form", 0)
    return None


def _relay_decode_prob(params: SystemParams, derived: DerivedScalars) -> float:
    """Probability the relay decodes the far stream (self-interference nulled)."""
    denom = derived.rho_s * (params.a2 - derived.tau2 * params.a1)
    if denom <= 0:
        return 0.0
    return reg_upper_gamma(params.n_r, derived.tau2 * params.r1 ** params.alpha / denom)


def _near_integral(params: SystemParams, derived: DerivedScalars,
                   weight, theta_r: float, epsabs: float):
    """Common adaptive evaluator for the exact near-user outage integrals.

    weight(r) is the radial density of the selected near user's distance.
    Returns (value, integrand evaluations).
    """
    mu = derived.mu
    alpha = params.alpha
    r1 = params.r1
    coeff = params.q_r * derived.rho_r * mu if params.q_r > 0 else 0.0
    evals = [0]

    def bracket(theta, r):
        evals[0] += 1
        dist_sq = r1 * r1 + r * r - 2.0 * r1 * r * math.cos(theta_r - theta)
        return 1.0 - math.exp(-mu * r ** alpha) / (
            1.0 + coeff * dist_sq ** (-alpha / 2.0) * r ** alpha)

    def radial(r):
        if coeff == 0.0:
            evals[0] += 1
            inner = 1.0 - math.exp(-mu * r ** alpha)
        else:
            inner, _ = integrate.quad(bracket, -math.pi, math.pi, args=(r,),
                                      epsabs=epsabs * 1e-2, limit=200)
            inner /= 2.0 * math.pi
        return weight(r) * inner

    value, err = integrate.quad(radial, 0.0, r1, epsabs=epsabs * 0.5,
                                limit=200)
    if err > epsabs:
        raise QuadratureError(
            "near-user outage integral achieved %.3e > requested %.3e" % (err, epsabs),
            value=value, achieved=err)
    return value, evals[0]


def _near_bound_sum(params: SystemParams, derived: DerivedScalars, eta: int,
                    grid: QuadratureGrid, radial_factor) -> float:
    """Gauss-Chebyshev sum shared by both near-user bounds.

    eta = +1 pins the relay at the selected user's angle (worst-case
    interference distance, upper bound); eta = -1 pins it opposite.
    """
    if eta not in (1, -1):
        raise ParameterError("eta must be +1 (upper) or -1 (lower)")
    mu = derived.mu
    alpha = params.alpha
    r1 = params.r1
    coeff = params.q_r * derived.rho_r * mu if params.q_r > 0 else 0.0
    c = (grid.nodes + 1.0) * r1 / 2.0
    dist_sq = r1 * r1 + c * c - 2.0 * eta * r1 * c
    with np.errstate(divide="ignore"):
        interference = np.where(
            c > 0, coeff * dist_sq ** (-alpha / 2.0) * c ** alpha, 0.0)
    bracket = 1.0 - np.exp(-mu * c ** alpha) / (1.0 + interference)
    return float(np.sum(grid.sin_theta * bracket * radial_factor(c)))


# ---------------------------------------------------------------------------
# near-user outage, random selection


def near_rnrf_exact(params: SystemParams, derived: DerivedScalars,
                    theta_r: float = 0.0, epsabs: float = 1e-8) -> AnalyticResult:
    """Exact outage of a randomly selected near user (uniform on the disc)."""
    trivial = _near_trivial(derived)
    if trivial is not None:
        return trivial
    weight = lambda r: 2.0 * r / params.r1 ** 2
    value, evals = _near_integral(params, derived, weight, theta_r, epsabs)
    return _finish(value, "exact-integral", evals)


def near_rnrf_bound(params: SystemParams, derived: DerivedScalars, eta: int,
                    grid: QuadratureGrid) -> AnalyticResult:
    """Closed-form bound on the random-selection near-user outage."""
    trivial = _near_trivial(derived)
    if trivial is not None:
        return trivial
    total = math.pi / (2.0 * grid.m) * _near_bound_sum(
        params, derived, eta, grid, lambda c: grid.nodes + 1.0)
    method = "chebyshev-bound-upper" if eta == 1 else "chebyshev-bound-lower"
    return _finish(total, method, grid.m)


# ---------------------------------------------------------------------------
# near-user outage, nearest selection


def near_nnnf_exact(params: SystemParams, derived: DerivedScalars,
                    theta_r: float = 0.0, epsabs: float = 1e-8) -> AnalyticResult:
    """Exact outage of the nearest near user (nearest-point radial law)."""
    trivial = _near_trivial(derived)
    if trivial is not None:
        return trivial
    ups = _near_user_density(params)
    lam = params.lambda_n
    weight = lambda r: ups * r * math.exp(-math.pi * lam * r * r)
    value, evals = _near_integral(params, derived, weight, theta_r, epsabs)
    return _finish(value, "exact-integral", evals)


def near_nnnf_bound(params: SystemParams, derived: DerivedScalars, eta: int,
                    grid: QuadratureGrid) -> AnalyticResult:
    """Closed-form bound on the nearest-selection near-user outage."""
    trivial = _near_trivial(derived)
    if trivial is not None:
        return trivial
    ups = _near_user_density(params)
    lam = params.lambda_n
    factor = lambda c: c * np.exp(-math.pi * lam * c * c)
    total = math.pi * ups * params.r1 / (2.0 * grid.m) * _near_bound_sum(
        params, derived, eta, grid, factor)
    method = "chebyshev-bound-upper" if eta == 1 else "chebyshev-bound-lower"
    return _finish(total, method, grid.m)


# ---------------------------------------------------------------------------
# far-user outage, random selection


def far_rnrf(params: SystemParams, derived: DerivedScalars) -> AnalyticResult:
    """Closed-form outage of a randomly selected far user.

    The success probability is the relay-decode probability times the
    ring-averaged forward-link CDF complement; the radial average reduces
    to differences of upper incomplete gammas of order k + 2/alpha.
    """
    if derived.tau2 == 0.0:
        return _finish(0.0, "closed-form", 0)
    decode = _relay_decode_prob(params, derived)
    if decode == 0.0:
        return _finish(1.0, "closed-form", 0)
    alpha = params.alpha
    beta = derived.beta
    b3 = 2.0 / (params.r3 ** 2 - params.r2 ** 2)
    total = 0.0
    for k in range(params.n_t - 1):
        eps = k + 2.0 / alpha
        diff = _reg_gamma_diff(eps, beta * params.r2 ** alpha,
                               beta * params.r3 ** alpha) * math.gamma(eps)
        total += beta ** (k - eps) / (math.factorial(k) * alpha) * diff
    return _finish(1.0 - decode * b3 * total, "closed-form", 0)


def far_rnrf_alpha2(params: SystemParams, derived: DerivedScalars) -> AnalyticResult:
    """High-SNR far-user outage at path-loss exponent 2, random selection.

    Specialization of :func:`far_rnrf` with the relay-decode probability
    at its high-SNR limit of 1; the gamma orders become integers and each
    ring average collapses to a difference of truncated exponential sums
    (evaluated as regularized lower gammas for stability at small beta).
    """
    if params.alpha != 2:
        raise ParameterError("alpha must equal 2 for the alpha2 specialization")
    if derived.tau2 == 0.0:
        return _finish(0.0, "alpha2-high-snr", 0)
    if derived.tau2 > params.a2 / params.a1:
        return _finish(1.0, "alpha2-high-snr", 0)
    beta = derived.beta
    b3 = 2.0 / (params.r3 ** 2 - params.r2 ** 2)
    total = 0.0
    for k in range(params.n_t - 1):
        # beta^k (G(r2) - G(r3)) = [P(k+1, beta r3^2) - P(k+1, beta r2^2)] / beta
        total += _reg_gamma_diff(k + 1, beta * params.r2 ** 2,
                                 beta * params.r3 ** 2) / beta
    return _finish(1.0 - b3 / 2.0 * total, "alpha2-high-snr", 0)


# ---------------------------------------------------------------------------
# far-user outage, nearest selection


def far_nnnf(params: SystemParams, derived: DerivedScalars,
             grid: QuadratureGrid) -> AnalyticResult:
    """Outage of the nearest far user; the radial average over the
    nearest-point law has no closed form and is evaluated with the
    Gauss-Chebyshev rule on the supplied grid.

    The nearest-point density normalization exp(pi lambda_f r2^2) is folded
    into the node exponent, keeping every factor representable at high
    densities.
    """
    if derived.tau2 == 0.0:
        return _finish(0.0, "closed-form", 0)
    decode = _relay_decode_prob(params, derived)
    if decode == 0.0:
        return _finish(1.0, "closed-form", 0)
    alpha = params.alpha
    beta = derived.beta
    lam = params.lambda_f
    r2, r3 = params.r2, params.r3
    ups = _far_user_density(params)
    s = (r3 - r2) * (grid.nodes + 1.0) / 2.0 + r2
    exponent = -(beta * s ** alpha + math.pi * lam * (s * s - r2 * r2))
    total = 0.0
    for k in range(params.n_t - 1):
        nodes_sum = float(np.sum(grid.sin_theta * s ** (alpha * k + 1)
                                 * np.exp(exponent)))
        total += beta ** k / math.factorial(k) * nodes_sum
    prefactor = ups * math.pi * (r3 - r2) / (2.0 * grid.m)
    return _finish(1.0 - decode * prefactor * total, "closed-form", grid.m)


def far_nnnf_alpha2(params: SystemParams, derived: DerivedScalars) -> AnalyticResult:
    """High-SNR nearest-far-user outage at path-loss exponent 2.

    Closed form: the combined decay rate delta = beta + pi lambda_f makes
    each radial average a difference of truncated exponential sums.  The
    density normalization is folded into the exponents as in far_nnnf.
    """
    if params.alpha != 2:
        raise ParameterError("alpha must equal 2 for the alpha2 specialization")
    if derived.tau2 == 0.0:
        return _finish(0.0, "alpha2-high-snr", 0)
    if derived.tau2 > params.a2 / params.a1:
        return _finish(1.0, "alpha2-high-snr", 0)
    beta = derived.beta
    lam = params.lambda_f
    r2, r3 = params.r2, params.r3
    delta = beta + math.pi * lam
    ups = _far_user_density(params)

    def folded(x: float, k: int) -> float:
        # exp(pi lam r2^2) * H(x) * delta^(k+1), with H the truncated sum
        y = delta * x * x
        term = 1.0
        total = 1.0
        for j in range(1, k + 1):
            term *= y / j
            total += term
        return math.exp(math.pi * lam * r2 * r2 - y) * total

    total = 0.0
    for k in range(params.n_t - 1):
        total += beta ** k * (folded(r2, k) - folded(r3, k)) / delta ** (k + 1)
    return _finish(1.0 - ups / 2.0 * total, "alpha2-high-snr", 0)
