"""Network-level scalar parameters and the quantities derived from them.

All values are kept in linear units (watts, meters); decibel conversion
happens once at the CLI boundary.  The derived quantities are the SNRs,
SINR decoding thresholds and the composite threshold ``mu`` that drives
the near-user outage integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

FD = "FD"
HD = "HD"

FAR_DISTANCE_MODELS = ("exact", "bs-centered")


class ParameterError(ValueError):
    """A system parameter violates one of its documented constraints."""


@dataclass(frozen=True)
class SystemParams:
    """Scalar description of one network configuration.

    Geometry: near users live in a disc of radius ``r1`` centred on the
    base station, far users in the ring ``r2 <= r <= r3``, and ``k_relays``
    decode-and-forward relays sit evenly spaced on the circle of radius
    ``r1``.  Powers are linear watts; ``alpha`` is the path-loss exponent.
    ``q_r`` is the variance of the residual relay-to-near-user interference
    channel (0 means perfect cancellation) and ``sigma_rr_sq`` the variance
    of the residual self-interference channel at the full-duplex relay.

    ``far_distance_model`` selects whether the relay-to-far-user link uses
    the true relay position ("exact") or the far user's distance from the
    base station ("bs-centered", the approximation the closed-form far-user
    analysis is built on).
    """

    r1: float = 2.0
    r2: float = 8.0
    r3: float = 10.0
    lambda_n: float = 10.0
    lambda_f: float = 10.0
    alpha: float = 3.0
    p_s: float = 1000.0
    p_r: float = 1000.0
    noise_power: float = 10 ** 0.1
    a1: float = 0.2
    a2: float = 0.8
    rate1: float = 0.4
    rate2: float = 0.4
    n_t: int = 3
    n_r: int = 3
    k_relays: int = 3
    q_r: float = 0.0
    sigma_rr_sq: float = 1.0
    far_distance_model: str = "exact"

    def __post_init__(self):
        validate_params(self)

    def with_updates(self, **kwargs) -> "SystemParams":
        return replace(self, **kwargs)


def validate_params(p: SystemParams) -> None:
    """Raise ParameterError naming the first violated constraint."""
    checks = [
        (p.r1 > 0, "r1 must be positive"),
        (p.r1 < p.r2, "r1 < r2 required (near disc inside far ring)"),
        (p.r2 < p.r3, "r2 < r3 required (far ring must have positive width)"),
        (p.lambda_n > 0, "lambda_n must be positive"),
        (p.lambda_f > 0, "lambda_f must be positive"),
        (p.alpha >= 2, "alpha >= 2 required"),
        (p.p_s > 0, "p_s must be positive"),
        (p.p_r > 0, "p_r must be positive"),
        (p.noise_power > 0, "noise_power must be positive"),
        (p.a1 > 0, "a1 must be positive"),
        (p.a2 > 0, "a2 must be positive"),
        (abs(p.a1 + p.a2 - 1.0) <= 1e-12, "a1 + a2 = 1 required"),
        (p.a1 < p.a2, "a1 < a2 required (weaker stream gets more power)"),
        (p.rate1 >= 0, "rate1 must be non-negative"),
        (p.rate2 >= 0, "rate2 must be non-negative"),
        (p.n_t >= 2, "n_t >= 2 required (transmit null-steering needs spare dimensions)"),
        (p.n_r >= 1, "n_r >= 1 required"),
        (p.k_relays >= 1, "k_relays >= 1 required"),
        (p.q_r >= 0, "q_r must be non-negative"),
        (p.sigma_rr_sq >= 0, "sigma_rr_sq must be non-negative"),
        (p.far_distance_model in FAR_DISTANCE_MODELS,
         "far_distance_model must be one of %s" % (FAR_DISTANCE_MODELS,)),
    ]
    for ok, message in checks:
        if not ok:
            raise ParameterError(message)
    for name in ("r1", "r2", "r3", "lambda_n", "lambda_f", "alpha", "p_s",
                 "p_r", "noise_power", "a1", "a2", "rate1", "rate2", "q_r",
                 "sigma_rr_sq"):
        if not math.isfinite(getattr(p, name)):
            raise ParameterError("%s must be finite" % name)


@dataclass(frozen=True)
class DerivedScalars:
    """Dimensionless quantities used by both the simulator and the formulas.

    ``mu`` is the effective near-user threshold max(1/zeta, tau1/b1).  It is
    only meaningful while tau2 <= a2/a1; beyond that the power-domain split
    cannot support the far stream and the near user is always in outage.
    That regime is flagged by ``mu_defined = False`` and consumers must
    return outage probability 1 instead of using ``mu``.
    """

    rho_s: float
    rho_r: float
    tau1: float
    tau2: float
    zeta: float
    mu: float
    beta: float
    b0: float
    b1: float
    mu_defined: bool


def db_to_linear(x_db: float) -> float:
    """Convert a dB power quantity (dBW) to linear watts."""
    if not math.isfinite(x_db):
        raise ParameterError("dB value must be finite")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ParameterError("linear power must be positive for dB conversion")
    return 10.0 * math.log10(x)


def rate_to_threshold(rate: float, duplex: str = FD) -> float:
    """SINR threshold implied by a target spectral efficiency.

    Full duplex delivers the message in one slot, so the threshold is
    2**rate - 1.  The half-duplex relay needs two slots per message, so the
    per-slot rate doubles and the threshold becomes 2**(2*rate) - 1.
    """
    if rate < 0:
        raise ParameterError("rate must be non-negative")
    if duplex == FD:
        return 2.0 ** rate - 1.0
    if duplex == HD:
        return 2.0 ** (2.0 * rate) - 1.0
    raise ParameterError("duplex must be FD or HD")


def derive_scalars(params: SystemParams, duplex: str = FD) -> DerivedScalars:
    """Populate every derived scalar for one parameter set.

    zeta = rho_s*(a2 - a1*tau2)/tau2 and mu = max(1/zeta, tau1/b1).  The
    reciprocal 1/zeta is computed directly so that tau2 = 0 cleanly yields
    mu driven by tau1 alone, and tau2 = a2/a1 yields zeta = 0, mu = inf
    (outage probability 1 through the defined branch).
    """
    validate_params(params)
    rho_s = params.p_s / params.noise_power
    rho_r = params.p_r / params.noise_power
    tau1 = rate_to_threshold(params.rate1, duplex)
    tau2 = rate_to_threshold(params.rate2, duplex)
    b0 = rho_s * params.a2
    b1 = rho_s * params.a1
    beta = tau2 / rho_r

    mu_defined = tau2 <= params.a2 / params.a1
    if mu_defined:
        # >= 0 in this branch; clamp float round-off at the tau2 = a2/a1 boundary
        denom = max(rho_s * (params.a2 - params.a1 * tau2), 0.0)
        zeta = denom / tau2 if tau2 > 0 else math.inf
        inv_zeta = tau2 / denom if denom > 0 else math.inf
        mu = max(inv_zeta, tau1 / b1)
    else:
        zeta = rho_s * (params.a2 - params.a1 * tau2) / tau2  # negative
        mu = math.nan
    return DerivedScalars(rho_s=rho_s, rho_r=rho_r, tau1=tau1, tau2=tau2,
                          zeta=zeta, mu=mu, beta=beta, b0=b0, b1=b1,
                          mu_defined=mu_defined)
