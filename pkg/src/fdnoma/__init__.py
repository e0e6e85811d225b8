"""Full-duplex multi-antenna relay cooperative NOMA outage toolkit.

Monte Carlo simulation of a stochastic-geometry downlink (near users in a
disc, far users in a ring, a circle of decode-and-forward relays) and the
matching analytical outage-probability evaluators, cross-validated against
each other.
"""

from .analytic import AnalyticResult, QuadratureGrid, chebyshev_grid, upper_inc_gamma
from .beamform import Beamformers, DegenerateChannelError, mrc_receive, tzf_transmit
from .channel import ChannelDraw, draw_channels
from .geometry import NNNF, RNRF, EmptyRegionError, Point2D, Topology
from .link import LinkSinrs, compute_sinrs, outage_far, outage_near
from .mc import OutageEstimate, run_trials, sweep
from .model import (DerivedScalars, ParameterError, SystemParams, db_to_linear,
                    derive_scalars, rate_to_threshold)

__version__ = "0.1.0"

__all__ = [
    "AnalyticResult", "Beamformers", "ChannelDraw", "DegenerateChannelError",
    "DerivedScalars", "EmptyRegionError", "LinkSinrs", "NNNF", "OutageEstimate",
    "ParameterError", "Point2D", "QuadratureGrid", "RNRF", "SystemParams",
    "Topology", "chebyshev_grid", "compute_sinrs", "db_to_linear",
    "derive_scalars", "draw_channels", "mrc_receive", "outage_far",
    "outage_near", "rate_to_threshold", "run_trials", "sweep",
    "tzf_transmit", "upper_inc_gamma",
]
