"""Color cross-talk channel, its SVD, and the pre/post equalizers.

Imperfect receive color filters couple the green and blue tunnels with
strength `epsilon` while red stays clean. The coupling acts identically
on every basis coefficient, so the full channel is the 3x3 color matrix
lifted blockwise to the joint coefficient space. Pre-equalizing with
P = V S^-1 and post-equalizing with U^T turns the link into an identity
with white noise preserved (U^T has orthonormal rows).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SpecError


@dataclass(frozen=True)
class CrosstalkChannel:
    epsilon: float
    color_matrix: np.ndarray      # 3x3
    u: np.ndarray                 # 3x3 left singular vectors
    singular_values: np.ndarray   # length 3
    v: np.ndarray                 # 3x3 right singular vectors
    per_color: int                # block size 2K+1

    def __post_init__(self):
        for arr in (self.color_matrix, self.u, self.singular_values, self.v):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return 3 * self.per_color

    @property
    def h(self) -> np.ndarray:
        """Full (6K+3)-dimensional channel matrix."""
        return np.kron(self.color_matrix, np.eye(self.per_color))

    @property
    def precoder(self) -> np.ndarray:
        """3x3 pre-equalizer P = V S^-1."""
        return self.v / self.singular_values[None, :]

    @property
    def precoder_inv(self) -> np.ndarray:
        """P^-1 = S V^T, used to map waveform-space targets back."""
        return self.singular_values[:, None] * self.v.T

    @property
    def post_equalizer(self) -> np.ndarray:
        """3x3 post-equalizer U^T (orthonormal rows)."""
        return self.u.T

    @property
    def is_identity(self) -> bool:
        return self.epsilon == 0.0


def build_channel(epsilon: float, subcarriers: int) -> CrosstalkChannel:
    """Build the cross-talk channel for a given coupling index.

    The SVD is computed on the 3x3 color matrix and lifted by block
    structure; the matrix is symmetric positive definite for
    epsilon < 1/3 with eigenvalues {1, 1-eps, 1-3eps}. Singular vectors
    are sign-normalized (first nonzero entry of each column of V
    positive) so the equalizers are deterministic.
    """
    if not 0.0 <= epsilon < 1 / 3:
        raise SpecError(f"crosstalk: {epsilon:g} outside [0, 1/3)")
    m = np.array([[1.0, 0.0, 0.0],
                  [0.0, 1 - 2 * epsilon, epsilon],
                  [0.0, epsilon, 1 - 2 * epsilon]])
    u, s, vt = np.linalg.svd(m)
    v = vt.T
    for j in range(3):
        nz = np.nonzero(np.abs(v[:, j]) > 1e-12)[0][0]
        if v[nz, j] < 0:
            v[:, j] = -v[:, j]
            u[:, j] = -u[:, j]
    per_color = 2 * subcarriers + 1
    return CrosstalkChannel(float(epsilon), m, u, s, v, per_color)


def _apply_blockwise(mat3: np.ndarray, vec: np.ndarray, per_color: int) -> np.ndarray:
    """Apply a 3x3 color map blockwise to joint point(s) or stacked vectors."""
    vec = np.asarray(vec, dtype=float)
    d = 3 * per_color
    flat = vec.reshape(-1)
    if flat.size % d != 0:
        raise SpecError(f"vector length {flat.size} not a multiple of D={d}")
    blocks = flat.reshape(-1, 3, per_color)
    out = np.einsum("xy,nyc->nxc", mat3, blocks)
    return out.reshape(vec.shape)


def apply_precoder(channel: CrosstalkChannel, vec: np.ndarray) -> np.ndarray:
    """Apply P pointwise: accepts a D-vector, D x Nc matrix, or stacked vector."""
    if np.asarray(vec).ndim == 2:  # D x Nc: apply per column
        return _apply_blockwise(channel.precoder, np.asarray(vec).T,
                                channel.per_color).T
    return _apply_blockwise(channel.precoder, vec, channel.per_color)


def apply_post(channel: CrosstalkChannel, vec: np.ndarray) -> np.ndarray:
    """Apply the post-equalizer U^T pointwise (same shapes as apply_precoder)."""
    if np.asarray(vec).ndim == 2:
        return _apply_blockwise(channel.post_equalizer, np.asarray(vec).T,
                                channel.per_color).T
    return _apply_blockwise(channel.post_equalizer, vec, channel.per_color)


def apply_channel(channel: CrosstalkChannel, vec: np.ndarray) -> np.ndarray:
    """Apply the raw channel H pointwise."""
    if np.asarray(vec).ndim == 2:
        return _apply_blockwise(channel.color_matrix, np.asarray(vec).T,
                                channel.per_color).T
    return _apply_blockwise(channel.color_matrix, vec, channel.per_color)
