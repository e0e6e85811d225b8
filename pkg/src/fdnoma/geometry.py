"""User deployment sampling, user/relay selection and plane geometry.

Point sets are (n, 2) float arrays of cartesian coordinates; single points
are lightweight :class:`Point2D` values.  Sampling is rejection-free: radii
come from the inverse CDF of the appropriate radial law, angles are uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams

RNRF = "RNRF"
NNNF = "NNNF"
STRATEGIES = (RNRF, NNNF)


class EmptyRegionError(Exception):
    """A user region came up empty; the caller should resample the deployment."""


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def theta(self) -> float:
        return math.atan2(self.y, self.x)

    @classmethod
    def from_polar(cls, r: float, theta: float) -> "Point2D":
        return cls(r * math.cos(theta), r * math.sin(theta))


@dataclass(frozen=True)
class Topology:
    """One sampled deployment with users and relay already selected."""

    near_users: np.ndarray
    far_users: np.ndarray
    relays: np.ndarray
    selected_near: Point2D
    selected_far: Point2D
    selected_relay: Point2D
    d_bs_near: float
    d_bs_far: float
    d_relay_near: float
    d_relay_far: float


def sample_disc_ppp(radius: float, density: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on a disc: Poisson count, uniform positions."""
    if radius <= 0 or density <= 0:
        raise ValueError("radius and density must be positive")
    n = rng.poisson(density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    theta = -math.pi + 2 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_ring_ppp(r_in: float, r_out: float, density: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on the ring r_in <= r <= r_out."""
    if not 0 < r_in < r_out:
        raise ValueError("need 0 < r_in < r_out")
    if density <= 0:
        raise ValueError("density must be positive")
    n = rng.poisson(density * math.pi * (r_out * r_out - r_in * r_in))
    r = np.sqrt(r_in * r_in + rng.random(n) * (r_out * r_out - r_in * r_in))
    theta = -math.pi + 2 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def place_relays(k: int, r1: float, offset_angle: float = 0.0) -> np.ndarray:
    """k relays evenly spaced on the circle of radius r1."""
    if k < 1:
        raise ValueError("k >= 1 required")
    angles = offset_angle + 2 * math.pi * np.arange(k) / k
    return np.column_stack((r1 * np.cos(angles), r1 * np.sin(angles)))


def select_users(near_users: np.ndarray, far_users: np.ndarray, strategy: str,
                 rng: np.random.Generator) -> tuple[Point2D, Point2D]:
    """Pick one near and one far user.

    RNRF picks uniformly at random, NNNF picks the user closest to the base
    station in each region.  Raises EmptyRegionError when either set is
    empty; the Monte Carlo driver resamples the deployment in that case
    (the model conditions on at least one user being present).
    """
    if strategy not in STRATEGIES:
        raise ValueError("strategy must be one of %s" % (STRATEGIES,))
    if len(near_users) == 0 or len(far_users) == 0:
        raise EmptyRegionError("empty user region")
    if strategy == RNRF:
        ni = rng.integers(len(near_users))
        fi = rng.integers(len(far_users))
    else:
        ni = int(np.argmin(np.einsum("ij,ij->i", near_users, near_users)))
        fi = int(np.argmin(np.einsum("ij,ij->i", far_users, far_users)))
    return Point2D(*near_users[ni]), Point2D(*far_users[fi])


def select_relay(relays: np.ndarray, far: Point2D) -> Point2D:
    """Relay with minimum Euclidean distance to the selected far user.

    Ties break to the lowest index (a measure-zero event under continuous
    placement, fixed for reproducibility).
    """
    if len(relays) == 0:
        raise ValueError("relays must be non-empty")
    d = (relays[:, 0] - far.x) ** 2 + (relays[:, 1] - far.y) ** 2
    return Point2D(*relays[int(np.argmin(d))])


def relay_user_distance(r1, d_bs_user, theta_r, theta_i):
    """Law-of-cosines distance between a ring point at radius r1 and a user.

    Accepts scalars or broadcastable arrays.
    """
    return np.sqrt(r1 * r1 + d_bs_user * d_bs_user
                   - 2.0 * r1 * d_bs_user * np.cos(theta_r - theta_i))


def sample_topology(params: SystemParams, strategy: str, rng: np.random.Generator,
                    relay_offset: float = 0.0, max_resamples: int = 100000) -> Topology:
    """Sample deployments until both regions are non-empty, then select.

    Mirrors the conditioning of the outage analysis: deployments with an
    empty near or far region are redrawn, not counted as outage.
    """
    relays = place_relays(params.k_relays, params.r1, relay_offset)
    for _ in range(max_resamples):
        near = sample_disc_ppp(params.r1, params.lambda_n, rng)
        far = sample_ring_ppp(params.r2, params.r3, params.lambda_f, rng)
        try:
            sel_near, sel_far = select_users(near, far, strategy, rng)
        except EmptyRegionError:
            continue
        relay = select_relay(relays, sel_far)
        d_bs_near = sel_near.r
        d_bs_far = sel_far.r
        return Topology(
            near_users=near, far_users=far, relays=relays,
            selected_near=sel_near, selected_far=sel_far, selected_relay=relay,
            d_bs_near=d_bs_near, d_bs_far=d_bs_far,
            d_relay_near=relay_user_distance(params.r1, d_bs_near,
                                             relay.theta, sel_near.theta),
            d_relay_far=relay_user_distance(params.r1, d_bs_far,
                                            relay.theta, sel_far.theta),
        )
    raise EmptyRegionError("no non-empty deployment after %d attempts" % max_resamples)


# Radial laws of the selected users, conditioned on a non-empty region.
# These are the inverse CDFs the vectorized Monte Carlo engine samples from;
# the deployment-based path above must match them in distribution (tested).

def nearest_radius_disc(u, lam: float, radius: float):
    """Inverse CDF of the nearest-point distance in a disc PPP given N >= 1."""
    a = -np.expm1(-math.pi * lam * radius * radius)
    return np.sqrt(-np.log1p(-np.asarray(u) * a) / (math.pi * lam))


def nearest_radius_ring(u, lam: float, r_in: float, r_out: float):
    """Inverse CDF of the nearest-point distance in a ring PPP given N >= 1."""
    a = -np.expm1(-math.pi * lam * (r_out * r_out - r_in * r_in))
    return np.sqrt(r_in * r_in - np.log1p(-np.asarray(u) * a) / (math.pi * lam))


def uniform_radius_disc(u, radius: float):
    """Inverse CDF of the distance of a uniformly picked disc point."""
    return radius * np.sqrt(np.asarray(u))


def uniform_radius_ring(u, r_in: float, r_out: float):
    """Inverse CDF of the distance of a uniformly picked ring point."""
    return np.sqrt(r_in * r_in + np.asarray(u) * (r_out * r_out - r_in * r_in))
