"""Constraint rows of the design programs.

All rows act on the variable vector (s, t): the stacked constellation
(point-major, D coefficients per point) followed by the epigraph
variable t standing for the squared minimum distance. Selector matrices
(pair differences, per-point blocks, per-color blocks) are realized as
index arithmetic, never materialized densely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import SampleGrid, waveform_matrix
from .model import Constellation, SpecError


@dataclass(frozen=True)
class AffineRow:
    """One affine constraint row: coeffs . x (sense) rhs."""

    coeffs: np.ndarray
    rhs: float
    sense: str  # "<=", ">=" or "="

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "="):
            raise SpecError(f"sense: unknown {self.sense!r}")
        if not np.all(np.isfinite(self.coeffs)) or not np.isfinite(self.rhs):
            raise SpecError("row data must be finite")

    def value(self, x: np.ndarray) -> float:
        return float(self.coeffs @ x)

    def satisfied(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        v = self.value(x)
        if self.sense == "<=":
            return v <= self.rhs + tol
        if self.sense == ">=":
            return v >= self.rhs - tol
        return abs(v - self.rhs) <= tol


@dataclass(frozen=True)
class RowBlock:
    """A homogeneous block of affine rows with a shared sense."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    sense: str

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    def to_affine_rows(self) -> list[AffineRow]:
        dense = np.asarray(self.matrix.todense())
        return [AffineRow(dense[i], float(self.rhs[i]), self.sense)
                for i in range(dense.shape[0])]

    def max_violation(self, x: np.ndarray) -> float:
        v = self.matrix @ x
        if self.sense == "<=":
            return float(np.maximum(v - self.rhs, 0).max(initial=0.0))
        if self.sense == ">=":
            return float(np.maximum(self.rhs - v, 0).max(initial=0.0))
        return float(np.abs(v - self.rhs).max(initial=0.0))


def pair_index(p: int, q: int, num_points: int) -> int:
    """Linear index of the unordered point pair (p, q), 1-based, p < q."""
    if not 1 <= p < q <= num_points:
        raise SpecError(f"pair ({p},{q}): need 1 <= p < q <= {num_points}")
    return (p - 1) * num_points - p * (p + 1) // 2 + q


def pair_from_index(l: int, num_points: int) -> tuple[int, int]:
    """Inverse of pair_index."""
    total = num_points * (num_points - 1) // 2
    if not 1 <= l <= total:
        raise SpecError(f"pair index {l} outside 1..{total}")
    p = 1
    while pair_index(p, num_points, num_points) < l:
        p += 1
    q = l - (p - 1) * num_points + p * (p + 1) // 2
    return p, q


def all_pairs(num_points: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based (p, q) arrays of every unordered pair, in pair-index order."""
    return np.triu_indices(num_points, k=1)


def pair_distance_sq(stacked: np.ndarray, p: int, q: int, dim: int) -> float:
    """Squared distance between points p and q (1-based) of a stacked vector."""
    stacked = np.asarray(stacked, dtype=float)
    bp = stacked[(p - 1) * dim:p * dim]
    bq = stacked[(q - 1) * dim:q * dim]
    d = bp - bq
    return float(d @ d)


def linearize_distance(s0: np.ndarray, p: int, q: int, dim: int) -> AffineRow:
    """First-order underestimate of the (p, q) squared distance.

    The row reads 2 s0^T F s - t >= s0^T F s0 in (s, t); evaluated at
    s = s0 the affine part equals the true squared distance, and for any
    s it never exceeds it (F is positive semidefinite).
    """
    s0 = np.asarray(s0, dtype=float)
    n = s0.size
    coeffs = np.zeros(n + 1)
    bp = slice((p - 1) * dim, p * dim)
    bq = slice((q - 1) * dim, q * dim)
    d0 = s0[bp] - s0[bq]
    coeffs[bp] = 2 * d0
    coeffs[bq] = -2 * d0
    coeffs[n] = -1.0
    return AffineRow(coeffs, float(d0 @ d0), ">=")


def pair_rows_sparse(stacked: np.ndarray, dim: int,
                     sel_p: np.ndarray, sel_q: np.ndarray,
                     n_vars: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """Vectorized pair linearizations for selected 0-based pairs.

    Returns (A, rhs) with rows A x >= rhs over (s, t), t last.
    """
    nc = n_vars // dim  # number of points; n_vars = dim*nc + 1
    pts = np.asarray(stacked, dtype=float).reshape(nc, dim)
    dif = pts[sel_p] - pts[sel_q]
    m = len(sel_p)
    ar = np.arange(dim)
    data = np.concatenate([2 * dif, -2 * dif, -np.ones((m, 1))], axis=1)
    cols = np.concatenate([sel_p[:, None] * dim + ar[None, :],
                           sel_q[:, None] * dim + ar[None, :],
                           np.full((m, 1), n_vars - 1)], axis=1)
    rows = np.repeat(np.arange(m), 2 * dim + 1)
    a = sp.coo_matrix((data.ravel(), (rows, cols.ravel())),
                      shape=(m, n_vars)).tocsr()
    return a, (dif * dif).sum(axis=1)


def amplitude_matrix(grid: SampleGrid, ncolors: int,
                     precoder: np.ndarray | None = None) -> np.ndarray:
    """Map from one point's coefficients to its sampled drive amplitudes.

    Returns M of shape (ncolors*(N+1), D) with D = ncolors*(2K+1); row
    block x gives color x's waveform samples of (P @ point). With no
    precoder P is the identity.
    """
    per_color = grid.eval_vectors.shape[1]
    ns = grid.num_samples
    d = ncolors * per_color
    m = np.zeros((ncolors * ns, d))
    for x in range(ncolors):
        m[x * ns:(x + 1) * ns, x * per_color:(x + 1) * per_color] = grid.eval_vectors
    if precoder is not None:
        if ncolors != precoder.shape[0]:
            raise SpecError("precoder: color count mismatch")
        m = m @ np.kron(precoder, np.eye(per_color))
    return m


def power_color_rows(num_points: int, symbol_time: float,
                     optical_power: float, color_ratios,
                     precoder: np.ndarray | None = None) -> list[AffineRow]:
    """Equality rows tying the average per-color intensity to its target.

    Row x encodes (1/Nc) * sum_i sqrt(1/Ts) * (P s_i)_{dc,x} =
    optical_power * ratio_x over the joint stacked vector (t unused).
    """
    ratios = np.asarray(color_ratios, dtype=float)
    ncolors = ratios.size
    per_color_w = None
    rows = []
    for x in range(ncolors):
        w = _dc_weight(x, ncolors, symbol_time, precoder)
        per_color = w.size // ncolors
        n = w.size * num_points
        coeffs = np.zeros(n + 1)
        coeffs[:n] = np.tile(w / num_points, num_points)
        rows.append(AffineRow(coeffs, float(optical_power * ratios[x]), "="))
        per_color_w = per_color
    del per_color_w
    return rows


def _dc_weight(color: int, ncolors: int, symbol_time: float,
               precoder: np.ndarray | None) -> np.ndarray:
    """Per-point coefficient weights of one color's mean intensity."""
    if precoder is None:
        precoder = np.eye(ncolors)
    per_color = 1 if ncolors == 1 else None
    # weight = sqrt(1/Ts) * (row of P selecting color's DC) lifted per block
    pc = precoder.shape[0]
    if pc != ncolors:
        raise SpecError("precoder: color count mismatch")
    # infer block size from usage: caller passes through power_color_weights
    raise NotImplementedError


def power_color_weights(per_color: int, ncolors: int, symbol_time: float,
                        precoder: np.ndarray | None = None) -> np.ndarray:
    """Weights W (ncolors x D) with W @ point = per-color mean intensities."""
    sel = np.zeros((ncolors, ncolors * per_color))
    for x in range(ncolors):
        sel[x, x * per_color] = np.sqrt(1 / symbol_time)
    if precoder is not None:
        sel = sel @ np.kron(precoder, np.eye(per_color))
    return sel


def dynamic_range_rows(num_points: int, max_amplitude: float,
                       grid: SampleGrid, ncolors: int = 3,
                       precoder: np.ndarray | None = None) -> RowBlock:
    """Sampled dynamic range rows 0 <= amplitude <= max for every
    (color, point, sample), emitted as "<=" rows (lower side negated).

    Row count is 2 * ncolors * num_points * (N+1).
    """
    m = amplitude_matrix(grid, ncolors, precoder)
    a_one = sp.csr_matrix(m)
    d = m.shape[1]
    n_vars = d * num_points + 1
    a_pts = sp.kron(sp.eye(num_points), a_one, format="csr")
    a_pts = sp.hstack([a_pts, sp.csr_matrix((a_pts.shape[0], 1))], format="csr")
    upper = a_pts
    lower = -a_pts
    mat = sp.vstack([lower, upper], format="csr")
    rhs = np.concatenate([np.zeros(lower.shape[0]),
                          np.full(upper.shape[0], max_amplitude)])
    assert mat.shape == (2 * ncolors * num_points * grid.num_samples, n_vars)
    return RowBlock(mat, rhs, "<=")


def _norm_linearization(s0_block: np.ndarray) -> tuple[np.ndarray, float]:
    """Gradient form of ||.|| at s0: since the norm is homogeneous, its
    first-order expansion collapses to (s0 . s)/||s0||."""
    nrm = float(np.linalg.norm(s0_block))
    if nrm == 0.0:
        raise SpecError("linearization point must be nonzero")
    return s0_block / nrm, nrm


def lpapr_rows(s0: np.ndarray, num_points: int, grid: SampleGrid,
               beta, ncolors: int = 3,
               precoder: np.ndarray | None = None) -> RowBlock:
    """Linearized long-term PAPR rows, one per (color, point, sample).

    The nonconvex constraint peak <= sqrt(beta_x/Nc)*||s|| is convexified
    by expanding ||s|| to first order at s0 (tangent at s0, so s0 itself
    stays feasible whenever it meets the true constraint).
    """
    s0 = np.asarray(s0, dtype=float)
    g, _ = _norm_linearization(s0)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (ncolors,))
    m = amplitude_matrix(grid, ncolors, precoder)
    ns = grid.num_samples
    d = m.shape[1]
    n = d * num_points
    blocks = []
    for x in range(ncolors):
        scale = np.sqrt(beta[x] / num_points)
        mx = m[x * ns:(x + 1) * ns]
        rows = np.zeros((ns * num_points, n + 1))
        for i in range(num_points):
            rows[i * ns:(i + 1) * ns, i * d:(i + 1) * d] = mx
        rows[:, :n] -= scale * g[None, :]
        blocks.append(rows)
    mat = sp.csr_matrix(np.vstack(blocks))
    return RowBlock(mat, np.zeros(mat.shape[0]), "<=")


def ipapr_rows(s0: np.ndarray, num_points: int, grid: SampleGrid,
               beta, symbol_time: float, ncolors: int = 3,
               precoder: np.ndarray | None = None) -> RowBlock:
    """Linearized individual PAPR rows, one per (color, point, sample).

    The per-waveform constraint peak_{x,i} <= sqrt(beta_{x,i}/Ts) *
    ||coeffs_{x,i}|| is linearized at s0's matching block. beta may be
    scalar or an (ncolors, num_points) array.
    """
    s0 = np.asarray(s0, dtype=float)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (ncolors, num_points))
    m = amplitude_matrix(grid, ncolors, precoder)
    ns = grid.num_samples
    d = m.shape[1]
    per_color = d // ncolors
    n = d * num_points
    pts0 = s0.reshape(num_points, d)
    data, rows_ix, cols_ix = [], [], []
    rhs = []
    r = 0
    for x in range(ncolors):
        mx = m[x * ns:(x + 1) * ns]
        for i in range(num_points):
            blk = pts0[i, x * per_color:(x + 1) * per_color]
            g, _ = _norm_linearization(blk)
            scale = np.sqrt(beta[x, i] / symbol_time)
            # amplitude part: full point block; norm part: color block only
            row_block = np.zeros((ns, d))
            row_block[:, :] = mx
            row_block[:, x * per_color:(x + 1) * per_color] -= scale * g[None, :]
            for k in range(ns):
                nzc = np.nonzero(row_block[k])[0]
                data.append(row_block[k, nzc])
                cols_ix.append(i * d + nzc)
                rows_ix.append(np.full(nzc.size, r))
                rhs.append(0.0)
                r += 1
    mat = sp.coo_matrix((np.concatenate(data),
                         (np.concatenate(rows_ix), np.concatenate(cols_ix))),
                        shape=(r, n + 1)).tocsr()
    return RowBlock(mat, np.asarray(rhs), "<=")


def measure_papr(constellation: Constellation, grid: SampleGrid,
                 precoder: np.ndarray | None = None
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Measured PAPR of a design on the given grid.

    Returns (long_term, individual): long_term[x] is the squared peak of
    color x over all points and samples divided by the mean coefficient
    energy per point; individual[x, i] is waveform (x, i)'s squared peak
    over its own average power.
    """
    pts = constellation.points
    if precoder is not None:
        per_color = grid.eval_vectors.shape[1]
        pts = np.kron(precoder, np.eye(per_color)) @ pts
    energy = float(np.sum(constellation.points ** 2))
    if energy == 0.0:
        raise SpecError("zero-energy constellation has no PAPR")
    waves = waveform_matrix(pts, grid)      # colors x points x samples
    ncolors, npts, _ = waves.shape
    mean_energy = energy / npts
    peaks = waves.max(axis=2)               # colors x points
    long_term = peaks.max(axis=1) ** 2 / mean_energy
    per_color = pts.shape[0] // ncolors
    block_energy = np.empty((ncolors, npts))
    for x in range(ncolors):
        block = pts[x * per_color:(x + 1) * per_color]
        block_energy[x] = (block ** 2).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        individual = peaks ** 2 * constellation.symbol_time / block_energy
    return long_term, individual
