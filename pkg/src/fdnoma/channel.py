"""Small-scale fading draws.

All links are quasi-static Rayleigh: each entry is circularly-symmetric
complex Gaussian, realized as independent N(0, var/2) real and imaginary
parts.  One draw per Monte Carlo trial; there is no intra-trial time axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams


@dataclass(frozen=True)
class ChannelDraw:
    """One fading realization.

    h_r   : base station -> relay receive array, shape (n_r,), unit variance
    h_rr  : residual self-interference matrix, shape (n_r, n_t), variance sigma_rr_sq
    h_1   : base station -> near user, complex scalar, unit variance
    f_1   : relay -> near user residual interference, shape (n_t,), variance q_r
    f_2   : relay -> far user, shape (n_t,), unit variance
    """

    h_r: np.ndarray
    h_rr: np.ndarray
    h_1: complex
    f_1: np.ndarray
    f_2: np.ndarray


@dataclass(frozen=True)
class ChannelBatch:
    """Vectorized fading draws with a leading trial axis."""

    h_r: np.ndarray    # (n, n_r)
    h_rr: np.ndarray   # (n, n_r, n_t)
    h_1: np.ndarray    # (n,)
    f_1: np.ndarray    # (n, n_t)
    f_2: np.ndarray    # (n, n_t)


def standard_normal_width(params: SystemParams) -> int:
    """Real draws consumed per trial by draw_channel_batch."""
    nr, nt = params.n_r, params.n_t
    return 2 * (nr + nr * nt + 1 + nt + nt)


def channels_from_normals(params: SystemParams, z: np.ndarray) -> ChannelBatch:
    """Assemble a ChannelBatch from a (n, width) block of standard normals.

    The block layout is fixed (h_r, h_rr, h_1, f_1, f_2; real parts before
    imaginary parts within each field) so that a trial's channels depend
    only on its row of ``z``.
    """
    nr, nt = params.n_r, params.n_t
    n = z.shape[0]
    offset = 0

    def take(count: int, variance: float) -> np.ndarray:
        nonlocal offset
        scale = np.sqrt(variance / 2.0)
        block = scale * (z[:, offset:offset + count]
                         + 1j * z[:, offset + count:offset + 2 * count])
        offset += 2 * count
        return block

    h_r = take(nr, 1.0)
    h_rr = take(nr * nt, params.sigma_rr_sq).reshape(n, nr, nt)
    h_1 = take(1, 1.0)[:, 0]
    f_1 = take(nt, params.q_r)
    f_2 = take(nt, 1.0)
    return ChannelBatch(h_r=h_r, h_rr=h_rr, h_1=h_1, f_1=f_1, f_2=f_2)


def draw_channel_batch(params: SystemParams, n: int,
                       rng: np.random.Generator) -> ChannelBatch:
    z = rng.standard_normal((n, standard_normal_width(params)))
    return channels_from_normals(params, z)


def draw_channels(params: SystemParams, rng: np.random.Generator) -> ChannelDraw:
    """One fading realization (a batch of one, squeezed)."""
    b = draw_channel_batch(params, 1, rng)
    return ChannelDraw(h_r=b.h_r[0], h_rr=b.h_rr[0], h_1=complex(b.h_1[0]),
                       f_1=b.f_1[0], f_2=b.f_2[0])
