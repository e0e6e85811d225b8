"""Per-trial SINR evaluation and outage predicates.

Signal model for one trial: the base station superposes both users'
streams with power split (a1, a2); the full-duplex relay receives through
w_r while transmitting the far stream through w_t, so its SINR carries a
residual self-interference term; the near user decodes the far stream
first (treating its own as interference), cancels it, then decodes its
own stream over whatever relay interference leaks through f_1; the far
user only hears the relay.

The half-duplex baseline is an engineering reconstruction used for the
duplexing comparison; see ``hd_sinrs`` for its documented assumptions.

All arithmetic broadcasts, so these functions serve both the single-trial
dataclass path and the vectorized Monte Carlo engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamform import compute_beamformers
from .channel import ChannelDraw
from .geometry import Topology
from .model import DerivedScalars, SystemParams


@dataclass(frozen=True)
class LinkSinrs:
    """Instantaneous link qualities for one trial (or a batch of trials)."""

    gamma_relay: np.ndarray      # relay decoding the far stream, with SI term
    gamma_near_x2: np.ndarray    # near user decoding the far stream
    gamma_near_x1: np.ndarray    # near user decoding its own stream after SIC
    snr_far: np.ndarray          # far user receiving the relay's forward link


def sinrs_from_gains(params: SystemParams, derived: DerivedScalars,
                     d_bs_near, d_relay_near, d_far_link,
                     mrc_gain, si_leak, near_gain, interference_gain,
                     forward_gain) -> LinkSinrs:
    """Assemble the four SINRs from path gains and beamforming gains.

    d_far_link is the relay-to-far-user distance actually used by the
    forward link; the caller picks it according to far_distance_model.
    """
    rho_s, rho_r = derived.rho_s, derived.rho_r
    a1, a2, alpha = params.a1, params.a2, params.alpha

    path_relay = params.r1 ** -alpha
    path_near = np.asarray(d_bs_near) ** -alpha
    path_relay_near = np.asarray(d_relay_near) ** -alpha
    path_far = np.asarray(d_far_link) ** -alpha

    relay_signal = rho_s * path_relay * mrc_gain
    gamma_relay = (a2 * relay_signal) / (a1 * relay_signal + rho_r * si_leak + 1.0)

    near_signal = rho_s * path_near * near_gain
    relay_interference = rho_r * path_relay_near * interference_gain
    gamma_near_x2 = (a2 * near_signal) / (a1 * near_signal + relay_interference + 1.0)
    gamma_near_x1 = (a1 * near_signal) / (relay_interference + 1.0)

    snr_far = rho_r * path_far * forward_gain
    return LinkSinrs(gamma_relay=gamma_relay, gamma_near_x2=gamma_near_x2,
                     gamma_near_x1=gamma_near_x1, snr_far=snr_far)


def compute_sinrs(params: SystemParams, derived: DerivedScalars,
                  topology: Topology, channels: ChannelDraw,
                  beamformers=None) -> LinkSinrs:
    """SINRs for a single sampled trial."""
    if beamformers is None:
        beamformers = compute_beamformers(channels.h_r, channels.h_rr, channels.f_2)
    w_r, w_t = beamformers.w_r, beamformers.w_t
    mrc_gain = np.abs(np.vdot(w_r, channels.h_r)) ** 2
    si_leak = np.abs(np.vdot(w_r, channels.h_rr @ w_t)) ** 2
    near_gain = np.abs(channels.h_1) ** 2
    interference_gain = np.abs(channels.f_1 @ w_t) ** 2
    forward_gain = np.abs(channels.f_2 @ w_t) ** 2
    d_far_link = (topology.d_bs_far if params.far_distance_model == "bs-centered"
                  else topology.d_relay_far)
    return sinrs_from_gains(params, derived, topology.d_bs_near,
                            topology.d_relay_near, d_far_link,
                            mrc_gain, si_leak, near_gain, interference_gain,
                            forward_gain)


def outage_near(sinrs: LinkSinrs, tau1: float, tau2: float):
    """Near-user outage: fails unless it decodes the far stream and then its own."""
    return ~((sinrs.gamma_near_x2 > tau2) & (sinrs.gamma_near_x1 > tau1))


def outage_far(sinrs: LinkSinrs, tau2: float):
    """Far-user outage: the decode-and-forward chain fails at either hop."""
    return ~((sinrs.gamma_relay > tau2) & (sinrs.snr_far > tau2))


def hd_sinrs(params: SystemParams, derived: DerivedScalars,
             d_bs_near, d_relay_near, d_far_link,
             mrc_gain, near_gain, hd_forward_gain) -> LinkSinrs:
    """Half-duplex baseline SINRs under the "RF chains preserved" condition.

    Reconstruction assumptions (the comparison is defined by these, all
    isolated here):
      * two slots per message, so the decoding thresholds for both user
        classes are computed with duplex=HD (rate doubled per slot);
      * the relay keeps the full-duplex antenna partition: n_r receive
        antennas with maximal-ratio combining in the first slot, n_t
        transmit antennas with matched-filter transmission to the far user
        in the second slot (same RF chains per operation as the
        full-duplex relay uses simultaneously);
      * no self-interference at the relay and no relay interference at the
        near user, since reception and transmission never overlap;
      * per-slot transmit powers stay at p_s and p_r.
    """
    rho_s, rho_r = derived.rho_s, derived.rho_r
    a1, a2, alpha = params.a1, params.a2, params.alpha

    relay_signal = rho_s * params.r1 ** -alpha * mrc_gain
    gamma_relay = (a2 * relay_signal) / (a1 * relay_signal + 1.0)

    near_signal = rho_s * np.asarray(d_bs_near) ** -alpha * near_gain
    gamma_near_x2 = (a2 * near_signal) / (a1 * near_signal + 1.0)
    gamma_near_x1 = a1 * near_signal

    snr_far = rho_r * np.asarray(d_far_link) ** -alpha * hd_forward_gain
    return LinkSinrs(gamma_relay=gamma_relay, gamma_near_x2=gamma_near_x2,
                     gamma_near_x1=gamma_near_x1, snr_far=snr_far)


def outage_hd_baseline(params: SystemParams, derived: DerivedScalars,
                       topology: Topology, channels: ChannelDraw,
                       tau1_hd: float, tau2_hd: float):
    """(near outage, far outage) for the half-duplex baseline on one trial.

    Uses the same channel draw as the full-duplex evaluation: the relay's
    receive array sees h_r, and its matched-filter transmission achieves
    the full gain ||f_2||^2.
    """
    mrc_gain = np.einsum("i,i->", channels.h_r.conj(), channels.h_r).real
    near_gain = np.abs(channels.h_1) ** 2
    hd_forward_gain = np.einsum("i,i->", channels.f_2.conj(), channels.f_2).real
    d_far_link = (topology.d_bs_far if params.far_distance_model == "bs-centered"
                  else topology.d_relay_far)
    sinrs = hd_sinrs(params, derived, topology.d_bs_near,
                     topology.d_relay_near, d_far_link,
                     mrc_gain, near_gain, hd_forward_gain)
    return (bool(outage_near(sinrs, tau1_hd, tau2_hd)),
            bool(outage_far(sinrs, tau2_hd)))
