"""Orthonormal DC/cosine/sine basis, sampling grids, and waveform synthesis.

Basis functions over one symbol interval [0, Ts] with a rectangular
pulse: sqrt(1/Ts) for the DC term and sqrt(2/Ts)*cos/sin(2 pi k t / Ts)
for subcarrier k. All waveform-domain constraints act on samples of
these functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import COLOR_NAMES, SpecError


@dataclass(frozen=True)
class SampleGrid:
    """Uniform sample times over [0, Ts] and the basis evaluated there.

    `eval_vectors` has one row per sample: [sqrt(1/Ts),
    sqrt(2/Ts)cos(2 pi f_1 t), sqrt(2/Ts)sin(2 pi f_1 t), ...,
    cos/sin at f_K], with f_k = k/Ts. The grid for K subcarriers at
    oversampling No has N+1 = 2*K*No + 1 points; the final sample t=Ts
    duplicates t=0 for these periodic functions and is kept so the grid
    covers the full interval.
    """

    times: np.ndarray
    eval_vectors: np.ndarray  # (N+1) x (2K+1)

    def __post_init__(self):
        self.times.setflags(write=False)
        self.eval_vectors.setflags(write=False)

    @property
    def num_samples(self) -> int:
        return self.times.size


def build_grid(subcarriers: int, symbol_time: float, oversampling: int,
               density: int = 1) -> SampleGrid:
    """Build the constraint sampling grid.

    `density` multiplies the oversampling rate; the post-design
    negativity check uses density=20.

    subcarriers == 0 is the 1-D test mode: a single constant basis
    function sampled once at t=0.
    """
    if oversampling < 1 or density < 1:
        raise SpecError("oversampling: must be >= 1")
    if symbol_time <= 0:
        raise SpecError("symbol_time: must be positive")
    ts = float(symbol_time)
    if subcarriers == 0:
        times = np.zeros(1)
        vecs = np.full((1, 1), np.sqrt(1 / ts))
        return SampleGrid(times, vecs)
    n = 2 * subcarriers * oversampling * density
    times = np.arange(n + 1) * (ts / n)
    vecs = np.empty((n + 1, 2 * subcarriers + 1))
    vecs[:, 0] = np.sqrt(1 / ts)
    for k in range(1, subcarriers + 1):
        phase = 2 * np.pi * (k / ts) * times
        vecs[:, 2 * k - 1] = np.sqrt(2 / ts) * np.cos(phase)
        vecs[:, 2 * k] = np.sqrt(2 / ts) * np.sin(phase)
    return SampleGrid(times, vecs)


def fine_grid(subcarriers: int, symbol_time: float, oversampling: int) -> SampleGrid:
    """20x denser grid used for post-design negativity detection."""
    return build_grid(subcarriers, symbol_time, oversampling, density=20)


def _color_block(point: np.ndarray, color: int, per_color: int) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    if point.size == per_color:
        return point
    if point.size == 3 * per_color:
        return point[color * per_color:(color + 1) * per_color]
    raise SpecError(
        f"point: expected {per_color} or {3 * per_color} coefficients, "
        f"got {point.size}")


def synthesize_waveform(point: np.ndarray, color, grid: SampleGrid) -> np.ndarray:
    """Sampled drive waveform of one color of one constellation point.

    `point` may be a joint-layout vector (6K+3) or a single color block
    (2K+1). `color` is an index 0/1/2 or one of "red"/"green"/"blue".
    """
    if isinstance(color, str):
        color = COLOR_NAMES.index(color)
    per_color = grid.eval_vectors.shape[1]
    block = _color_block(point, color, per_color)
    return grid.eval_vectors @ block


def dc_expectation(point: np.ndarray, symbol_time: float) -> np.ndarray:
    """Per-color mean intensity of a joint-layout point.

    Only the DC basis has a nonzero time average, so the mean intensity
    of color p is its DC coefficient times sqrt(1/Ts).
    """
    point = np.asarray(point, dtype=float)
    if point.size % 3 != 0:
        raise SpecError("point: joint layout required (3 color blocks)")
    per_color = point.size // 3
    dc = np.array([point[p * per_color] for p in range(3)])
    return dc * np.sqrt(1 / symbol_time)


def waveform_matrix(points: np.ndarray, grid: SampleGrid) -> np.ndarray:
    """All sampled waveforms of a D x Nc matrix of joint points.

    Returns an array of shape (3, Nc, N+1): colors x points x samples.
    For single-color matrices (D = 2K+1) the first axis has length 1.
    """
    per_color = grid.eval_vectors.shape[1]
    d = points.shape[0]
    ncolors = d // per_color
    if ncolors * per_color != d:
        raise SpecError("points: row count incompatible with grid")
    out = np.empty((ncolors, points.shape[1], grid.num_samples))
    for x in range(ncolors):
        block = points[x * per_color:(x + 1) * per_color]
        out[x] = (grid.eval_vectors @ block).T
    return out
