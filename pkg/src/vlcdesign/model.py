"""Domain types and dimensional bookkeeping for the constellation designer.

The signal space per LED color is spanned by one DC basis function plus
cos/sin pairs for each subcarrier, giving 2K+1 coefficients per color.
A joint design point stacks the three color blocks (R, G, B) into a
6K+3 vector; a per-color design point is a single 2K+1 block.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

COLOR_NAMES = ("red", "green", "blue")


class ConstraintMode(str, Enum):
    DYNAMIC_RANGE = "dynamic_range"
    L_PAPR = "l_papr"
    I_PAPR = "i_papr"


class SpecError(ValueError):
    """A design specification violates one of its invariants."""


@dataclass(frozen=True)
class DesignSpec:
    """All scenario parameters for one design run.

    Attributes
    ----------
    subcarriers : int
        Number of subcarriers per LED (K >= 0; 0 only for the 1-D test mode).
    num_points : int
        Constellation size, must be a power of two.
    optical_power : float
        Average optical power target across the three LEDs.
    color_ratios : tuple of 3 floats
        Average color ratio vector; nonnegative entries summing to one.
    max_amplitude : float
        Upper limit of the LED linear dynamic range (lower limit is 0).
    symbol_time : float
        Symbol interval.
    oversampling : int
        Oversampling rate of the waveform-domain constraint grid.
    crosstalk : float
        Cross-talk index between the green and blue receive tunnels,
        in [0, 1/3).
    constraint_mode : ConstraintMode
        Waveform constraint family: two-sided dynamic range, or one of
        the PAPR replacements (which keep nonnegativity).
    papr_limit : float
        PAPR bound used by the PAPR modes; ignored otherwise.
    restarts : int
        Number of multi-start repetitions of the local optimizer.
    seed : int
        Base RNG seed; restart r uses the stream (seed, r).
    sca_tol : float
        Relative convergence tolerance on the squared minimum distance.
    sca_max_iter : int
        Iteration cap per restart.
    """

    subcarriers: int = 2
    num_points: int = 64
    optical_power: float = 20.0
    color_ratios: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    max_amplitude: float = 80.0
    symbol_time: float = 1.0
    oversampling: int = 4
    crosstalk: float = 0.0
    constraint_mode: ConstraintMode = ConstraintMode.DYNAMIC_RANGE
    papr_limit: float = 4.0
    restarts: int = 20
    seed: int = 0
    sca_tol: float = 1e-5
    sca_max_iter: int = 100

    # electrical/optical conversion factors are unity in this model
    @property
    def bits_per_symbol(self) -> int:
        return int(round(np.log2(self.num_points)))

    @property
    def dim_per_color(self) -> int:
        return 2 * self.subcarriers + 1

    @property
    def joint_dim(self) -> int:
        return 3 * self.dim_per_color

    @property
    def sample_count(self) -> int:
        """Number of grid intervals N = 2*K*No (grid has N+1 points)."""
        return 2 * self.subcarriers * self.oversampling

    def with_(self, **kwargs) -> "DesignSpec":
        return validate_spec(replace(self, **kwargs))


def validate_spec(spec: DesignSpec) -> DesignSpec:
    """Check every invariant; return the spec unchanged if all hold.

    Raises SpecError naming the first violated invariant.
    """
    if spec.subcarriers < 0:
        raise SpecError(f"subcarriers: must be >= 0, got {spec.subcarriers}")
    nc = spec.num_points
    if nc < 2 or (nc & (nc - 1)) != 0:
        raise SpecError(f"num_points: {nc} is not a power of two >= 2")
    ratios = np.asarray(spec.color_ratios, dtype=float)
    if ratios.shape != (3,):
        raise SpecError("color_ratios: expected exactly 3 entries")
    if np.any(ratios < 0):
        raise SpecError(f"color_ratios: entries must be nonnegative, got {ratios}")
    if abs(ratios.sum() - 1.0) > 1e-9:
        raise SpecError(f"color_ratios: ratios sum to {ratios.sum():g} != 1")
    if spec.optical_power <= 0:
        raise SpecError("optical_power: must be positive")
    if spec.max_amplitude <= 0:
        raise SpecError("max_amplitude: must be positive")
    if spec.optical_power * ratios.max() >= spec.max_amplitude:
        raise SpecError(
            "optical_power: per-color mean intensity "
            f"{spec.optical_power * ratios.max():g} does not fit below "
            f"max_amplitude {spec.max_amplitude:g}")
    if spec.symbol_time <= 0:
        raise SpecError("symbol_time: must be positive")
    if spec.oversampling < 1:
        raise SpecError("oversampling: must be >= 1")
    if not 0.0 <= spec.crosstalk < 1 / 3:
        raise SpecError(
            f"crosstalk: {spec.crosstalk:g} outside [0, 1/3); the channel "
            "matrix becomes singular at 1/3")
    mode = spec.constraint_mode
    if not isinstance(mode, ConstraintMode):
        try:
            mode = ConstraintMode(mode)
        except ValueError:
            raise SpecError(f"constraint_mode: unknown mode {mode!r}") from None
        object.__setattr__(spec, "constraint_mode", mode)
    if mode is not ConstraintMode.DYNAMIC_RANGE and spec.papr_limit <= 1.0:
        raise SpecError("papr_limit: PAPR bound must exceed 1")
    if spec.restarts < 1:
        raise SpecError("restarts: must be >= 1")
    if spec.sca_tol <= 0:
        raise SpecError("sca_tol: must be positive")
    if spec.sca_max_iter < 1:
        raise SpecError("sca_max_iter: must be >= 1")
    return spec


@dataclass(frozen=True)
class Constellation:
    """A designed constellation: columns of `points` are the symbols.

    mode is "joint" (D = 6K+3, blocks R|G|B per point) or one of
    "red"/"green"/"blue" for a single-color design (D = 2K+1).
    The stacked view concatenates the columns point-major: point 0's
    D coefficients first, then point 1's, and so on.
    """

    mode: str
    subcarriers: int
    symbol_time: float
    points: np.ndarray  # D x Nc, read-only

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        expected = self.dim
        if pts.ndim != 2 or pts.shape[0] != expected:
            raise SpecError(
                f"points: expected {expected} rows for mode={self.mode!r}, "
                f"got shape {pts.shape}")

    @property
    def dim(self) -> int:
        per_color = 2 * self.subcarriers + 1
        return 3 * per_color if self.mode == "joint" else per_color

    @property
    def num_points(self) -> int:
        return self.points.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        return self.points.T.reshape(-1)

    @classmethod
    def from_stacked(cls, mode: str, subcarriers: int, symbol_time: float,
                     stacked: np.ndarray, num_points: int) -> "Constellation":
        vec = np.asarray(stacked, dtype=float)
        dim = vec.size // num_points
        if dim * num_points != vec.size:
            raise SpecError("stacked: length not divisible by num_points")
        return cls(mode, subcarriers, symbol_time,
                   vec.reshape(num_points, dim).T.copy())

    def color_block(self, color: int) -> np.ndarray:
        """Rows of `points` holding color `color` (0=R, 1=G, 2=B)."""
        per_color = 2 * self.subcarriers + 1
        if self.mode != "joint":
            if color != COLOR_NAMES.index(self.mode):
                raise SpecError(f"constellation holds only {self.mode}")
            return self.points
        return self.points[color * per_color:(color + 1) * per_color]

    def dc_index(self, color: int) -> int:
        """Row index of color `color`'s DC coefficient."""
        if self.mode != "joint":
            return 0
        return color * (2 * self.subcarriers + 1)

    def min_distance(self) -> float:
        """Exact minimum pairwise Euclidean distance between columns."""
        d2 = pairwise_sq_distances(self.points)
        return float(np.sqrt(d2.min()))


def pairwise_sq_distances(points: np.ndarray) -> np.ndarray:
    """Squared distances of all unordered column pairs, in pair-index order.

    Pair ordering matches the linear pair index: (1,2), (1,3), ...,
    (1,Nc), (2,3), ... with 1-based point labels.
    """
    nc = points.shape[1]
    p, q = np.triu_indices(nc, k=1)
    diff = points[:, p] - points[:, q]
    return (diff * diff).sum(axis=0)


@dataclass(frozen=True)
class DesignResult:
    """Outcome of a multi-start design run."""

    constellation: Constellation
    d_min: float
    iterations: tuple[int, ...]          # per restart
    restart_scores: tuple[float, ...]    # d_min of every local optimum
    post_dc_bias: tuple[float, float, float]  # amplitude added per color
    lpapr: tuple[float, ...]             # measured long-term PAPR per color
    ipapr: np.ndarray | None             # colors x points individual PAPR
    status: str                          # converged | iteration_cap | infeasible
    traces: tuple = field(default=(), repr=False)

    def __post_init__(self):
        best = max(self.restart_scores)
        if abs(self.d_min - best) > 1e-8 * max(1.0, abs(best)):
            raise SpecError("d_min must equal the best restart score")
