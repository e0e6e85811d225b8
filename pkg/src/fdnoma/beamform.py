"""Relay beamformers: maximal-ratio receive and null-steered transmit.

The receive vector aligns with the incoming channel.  The transmit vector
is the projection of the matched-filter direction onto the null space of
the effective self-interference row h_r^H @ h_rr, which cancels the loop
interference exactly while keeping the largest possible forward gain.  The
projection is the rank-one update B = I - v v^H / ||v||^2 with
v = h_rr^H @ h_r; a null-space factorization oracle cross-checks it in the
test suite.

All functions broadcast over leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPSILON = 1e-12  # relative degeneracy threshold


class DegenerateChannelError(Exception):
    """A measure-zero channel draw left a beamformer undefined; resample."""


@dataclass(frozen=True)
class Beamformers:
    """Receive/transmit unit vectors plus the null-space projector."""

    w_r: np.ndarray
    w_t: np.ndarray
    b_proj: np.ndarray


def _hermitian_sq_norm(x: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", x.conj(), x).real


def mrc_receive(h_r: np.ndarray) -> np.ndarray:
    """Unit receive vector aligned with h_r, so |w_r^H h_r|^2 = ||h_r||^2."""
    h_r = np.asarray(h_r)
    norm = np.sqrt(_hermitian_sq_norm(h_r))
    if np.any(norm == 0):
        raise DegenerateChannelError("zero receive channel")
    return h_r / norm[..., None]


def si_projection(h_r: np.ndarray, h_rr: np.ndarray,
                  epsilon: float = EPSILON) -> np.ndarray:
    """Orthogonal projector onto the transmit directions with zero
    self-interference, i.e. the null space of h_r^H @ h_rr.

    Falls back to the identity where ||h_r^H h_rr|| is negligible relative
    to the operand norms (the constraint is then vacuous, e.g. with a zero
    residual self-interference matrix).
    """
    h_r = np.asarray(h_r)
    h_rr = np.asarray(h_rr)
    n_t = h_rr.shape[-1]
    v = np.einsum("...ij,...i->...j", h_rr.conj(), h_r)  # (h_r^H h_rr)^H
    v_sq = _hermitian_sq_norm(v)
    scale = _hermitian_sq_norm(h_r) * np.einsum("...ij,...ij->...",
                                                h_rr.conj(), h_rr).real
    active = v_sq > (epsilon ** 2) * scale
    eye = np.broadcast_to(np.eye(n_t, dtype=complex), h_rr.shape[:-2] + (n_t, n_t))
    safe = np.where(v_sq > 0, v_sq, 1.0)
    outer = np.einsum("...i,...j->...ij", v, v.conj()) / safe[..., None, None]
    return np.where(active[..., None, None], eye - outer, eye)


def tzf_transmit(h_r: np.ndarray, h_rr: np.ndarray, f_2: np.ndarray,
                 epsilon: float = EPSILON) -> tuple[np.ndarray, np.ndarray]:
    """Unit transmit vector maximizing |f_2^T w_t|^2 subject to
    h_r^H h_rr w_t = 0.

    Returns (w_t, b_proj) where w_t = B f_2^* / ||B f_2^*|| and b_proj is
    the constraint projector B.  The achieved gain equals ||B f_2^*||^2.
    """
    f_2 = np.asarray(f_2)
    b_proj = si_projection(h_r, h_rr, epsilon)
    direction = np.einsum("...ij,...j->...i", b_proj, f_2.conj())
    norm_sq = _hermitian_sq_norm(direction)
    if np.any(norm_sq <= (epsilon ** 2) * _hermitian_sq_norm(f_2)):
        raise DegenerateChannelError("matched-filter direction lies in the nulled subspace")
    w_t = direction / np.sqrt(norm_sq)[..., None]
    return w_t, b_proj


def compute_beamformers(h_r: np.ndarray, h_rr: np.ndarray, f_2: np.ndarray,
                        epsilon: float = EPSILON) -> Beamformers:
    """Both beamformers for one channel draw."""
    w_t, b_proj = tzf_transmit(h_r, h_rr, f_2, epsilon)
    return Beamformers(w_r=mrc_receive(h_r), w_t=w_t, b_proj=b_proj)


def tzf_gains(h_r: np.ndarray, h_rr: np.ndarray, f_1: np.ndarray,
              f_2: np.ndarray, epsilon: float = EPSILON):
    """Batched per-trial beamforming gains for the Monte Carlo engine.

    Returns (mrc_gain, si_leak, interference_gain, forward_gain, degenerate):
      mrc_gain          |w_r^H h_r|^2 = ||h_r||^2
      si_leak           |w_r^H h_rr w_t|^2 (zero up to rounding under the null)
      interference_gain |f_1^T w_t|^2
      forward_gain      |f_2^T w_t|^2 = ||B f_2^*||^2
      degenerate        boolean mask of rows needing a redraw
    """
    h_r = np.asarray(h_r)
    h_rr = np.asarray(h_rr)
    f_1 = np.asarray(f_1)
    f_2 = np.asarray(f_2)

    h_sq = _hermitian_sq_norm(h_r)
    v = np.einsum("...ij,...i->...j", h_rr.conj(), h_r)
    v_sq = _hermitian_sq_norm(v)
    rr_sq = np.einsum("...ij,...ij->...", h_rr.conj(), h_rr).real
    active = v_sq > (epsilon ** 2) * h_sq * rr_sq

    f2c = f_2.conj()
    coeff = np.einsum("...j,...j->...", v.conj(), f2c) / np.where(v_sq > 0, v_sq, 1.0)
    direction = f2c - np.where(active, coeff, 0.0)[..., None] * v
    dir_sq = _hermitian_sq_norm(direction)

    degenerate = (h_sq == 0) | (dir_sq <= (epsilon ** 2) * _hermitian_sq_norm(f_2))
    safe_h = np.where(h_sq > 0, h_sq, 1.0)
    safe_dir = np.where(dir_sq > 0, dir_sq, 1.0)
    w_r = h_r / np.sqrt(safe_h)[..., None]
    w_t = direction / np.sqrt(safe_dir)[..., None]

    si_leak = np.abs(np.einsum("...i,...ij,...j->...", w_r.conj(), h_rr, w_t)) ** 2
    interference_gain = np.abs(np.einsum("...i,...i->...", f_1, w_t)) ** 2
    forward_gain = np.abs(np.einsum("...i,...i->...", f_2, w_t)) ** 2
    return h_sq, si_leak, interference_gain, forward_gain, degenerate
