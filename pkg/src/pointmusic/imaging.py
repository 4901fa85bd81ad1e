"""MUSIC-type imaging of point scatterers from a far-field matrix.

The signal subspace of ``F`` is spanned by the test vectors
``phi_z = exp(-ik theta_j . z)`` of the true scatterers. A projector ``Pi``
onto its orthogonal complement turns this into the indicator
``I(z) = 1 / |Pi phi_z|``, which blows up at the scatterers. Two projector
constructions are provided (left singular vectors of ``F``, and
``I - F F^+`` through the pseudo-inverse) together with explicit rank
policies, a grid scanner, peak extraction and scoring.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, ValidationError
from .forward import FarFieldMatrix
from .wavecore import DirectionSet, Point3, _as_point, _as_points, wavenumber

EPS_FLOOR = 1e-12
MERGE_RADIUS = 3
DEFAULT_REL_THRESHOLD = 0.2
EXHAUSTIVE_MATCH_MAX = 8

EXACT_RANK = "exact-rank"
FIXED_RANK = "fixed-rank"
LARGEST_GAP = "largest-gap"
SVD_RANGE = "svd"
PSEUDO_INVERSE = "pinv"


@dataclass(frozen=True)
class RankPolicy:
    """How many singular vectors of ``F`` count as signal.

    Use the constructors :meth:`exact`, :meth:`fixed` and :meth:`largest_gap`.
    ``cap=None`` for the largest-gap policy means ``N - 1``.
    """

    mode: str
    rel_tol: Optional[float] = None
    rank: Optional[int] = None
    cap: Optional[int] = None

    def __post_init__(self):
        if self.mode == EXACT_RANK:
            if self.rel_tol is None or not 0 < self.rel_tol < 1:
                raise ValidationError("exact-rank policy needs 0 < rel_tol < 1")
        elif self.mode == FIXED_RANK:
            if self.rank is None or int(self.rank) != self.rank or self.rank < 1:
                raise ValidationError("fixed-rank policy needs an integer rank >= 1")
        elif self.mode == LARGEST_GAP:
            if self.cap is not None and (int(self.cap) != self.cap or self.cap < 1):
                raise ValidationError("largest-gap cap must be an integer >= 1")
        else:
            raise ValidationError(
                f"unknown rank policy {self.mode!r}; expected one of "
                f"{EXACT_RANK}, {FIXED_RANK}, {LARGEST_GAP}"
            )

    @classmethod
    def exact(cls, rel_tol: float = 1e-8) -> "RankPolicy":
        return cls(EXACT_RANK, rel_tol=rel_tol)

    @classmethod
    def fixed(cls, rank: int) -> "RankPolicy":
        return cls(FIXED_RANK, rank=rank)

    @classmethod
    def largest_gap(cls, cap: Optional[int] = None) -> "RankPolicy":
        return cls(LARGEST_GAP, cap=cap)

    @classmethod
    def default(cls, n_sources: Optional[int] = None) -> "RankPolicy":
        """Fixed rank when the source count is known, largest gap otherwise."""
        if n_sources is None:
            return cls.largest_gap()
        return cls.fixed(n_sources)

    def params(self) -> dict:
        if self.mode == EXACT_RANK:
            return {"rel_tol": self.rel_tol}
        if self.mode == FIXED_RANK:
            return {"rank": self.rank}
        return {} if self.cap is None else {"cap": self.cap}

    def select(self, sv: np.ndarray) -> int:
        """Signal rank for descending singular values ``sv``."""
        sv = np.asarray(sv, dtype=float)
        n = len(sv)
        if self.mode == EXACT_RANK:
            return max(1, int(np.count_nonzero(sv > self.rel_tol * sv[0])))
        if self.mode == FIXED_RANK:
            if self.rank > n:
                raise ValidationError(f"fixed rank {self.rank} exceeds matrix size {n}")
            return int(self.rank)
        if n == 1:
            return 1
        cap = n - 1 if self.cap is None else self.cap
        if cap > n:
            raise ValidationError(f"largest-gap cap {cap} exceeds matrix size {n}")
        cap = min(cap, n - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = sv[:cap] / sv[1 : cap + 1]
        ratios = np.where(np.isnan(ratios), 0.0, ratios)
        return int(np.argmax(ratios)) + 1


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector onto the complement of the selected signal subspace."""

    matrix: np.ndarray
    rank_used: int
    policy: RankPolicy
    source: str
    singular_values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def steering_vector(z, dirs: DirectionSet, w) -> np.ndarray:
    """Test vector ``phi_z[j] = exp(-ik theta_j . z)``."""
    return _steering_rows(_as_point(z)[None, :], dirs.vectors, wavenumber(w))[0]


def _steering_rows(z: np.ndarray, theta: np.ndarray, k: float) -> np.ndarray:
    # elementwise dot products keep every row bit-identical regardless of batch size
    phase = z[:, 0:1] * theta[:, 0] + z[:, 1:2] * theta[:, 1] + z[:, 2:3] * theta[:, 2]
    return np.exp(-1j * k * phase)


def _svd(F: FarFieldMatrix):
    E = np.asarray(F.entries if isinstance(F, FarFieldMatrix) else F, dtype=complex)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ValidationError(f"far-field matrix must be square, got shape {E.shape}")
    U, sv, Vh = np.linalg.svd(E)
    if sv[0] == 0.0:
        raise DomainError("degenerate far-field data: F is the zero matrix")
    return E, U, sv, Vh


def svd_range_projector(F: FarFieldMatrix, policy: RankPolicy) -> Projector:
    """``I - sum_{i <= r} q_i q_i^*`` over the leading left singular vectors of ``F``."""
    E, U, sv, _ = _svd(F)
    n = len(sv)
    r = policy.select(sv)
    if r == n:
        # the complement of the whole space is {0}
        Pi = np.zeros((n, n), dtype=complex)
    else:
        Q = U[:, :r]
        Pi = np.eye(n, dtype=complex) - Q @ Q.conj().T
    Pi.setflags(write=False)
    return Projector(Pi, r, policy, SVD_RANGE, sv)


def pseudo_inverse_projector(F: FarFieldMatrix, policy: RankPolicy) -> Projector:
    """``Q_proj = I - F F^+`` with ``F^+`` truncated at the rank chosen by ``policy``.

    The truncation is passed to the pseudo-inverse as a relative cutoff
    placed geometrically between ``sigma_r`` and ``sigma_{r+1}``.
    """
    E, _, sv, _ = _svd(F)
    n = len(sv)
    r = policy.select(sv)
    if r == n:
        Q = np.zeros((n, n), dtype=complex)
    else:
        lo = sv[r]
        cutoff = math.sqrt(sv[r - 1] * lo) if lo > 0 else 0.5 * sv[r - 1]
        if not lo < cutoff < sv[r - 1]:
            raise DomainError(
                f"rank policy splits a degenerate singular value at index {r}"
            )
        Fp = np.linalg.pinv(E, rcond=cutoff / sv[0])
        Q = np.eye(n, dtype=complex) - E @ Fp
    Q.setflags(write=False)
    return Projector(Q, r, policy, PSEUDO_INVERSE, sv)


def make_projector(F: FarFieldMatrix, source: str, policy: RankPolicy) -> Projector:
    if source == SVD_RANGE:
        return svd_range_projector(F, policy)
    if source == PSEUDO_INVERSE:
        return pseudo_inverse_projector(F, policy)
    raise ValidationError(f"unknown projector source {source!r}; expected 'svd' or 'pinv'")


def _indicator_rows(z: np.ndarray, proj: Projector, theta: np.ndarray, k: float) -> np.ndarray:
    phi = _steering_rows(z, theta, k)
    res = np.linalg.norm(phi @ proj.matrix.T, axis=1)
    return 1.0 / np.maximum(res, EPS_FLOOR)


def _check_dims(proj: Projector, dirs: DirectionSet) -> None:
    if proj.n != len(dirs):
        raise ValidationError(
            f"projector is {proj.n}x{proj.n} but the direction set has {len(dirs)} directions"
        )


def indicator(z, proj: Projector, dirs: DirectionSet, w) -> float:
    """``1 / max(|Pi phi_z|, 1e-12)``; always finite and positive."""
    _check_dims(proj, dirs)
    return float(_indicator_rows(_as_point(z)[None, :], proj, dirs.vectors, wavenumber(w))[0])


def indicator_values(z, proj: Projector, dirs: DirectionSet, w) -> np.ndarray:
    """Vectorized :func:`indicator` over points of shape (..., 3)."""
    _check_dims(proj, dirs)
    za = _as_points(z)
    flat = za.reshape(-1, 3)
    return _indicator_rows(flat, proj, dirs.vectors, wavenumber(w)).reshape(za.shape[:-1])


class Region(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float


DEFAULT_REGION = Region(-10.0, 10.0, -10.0, 10.0)


def grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Nodes ``lo + i * step`` for i = 0 .. floor((hi - lo) / step)."""
    if not step > 0:
        raise ValidationError("grid step must be positive")
    if hi < lo:
        raise ValidationError("grid region is empty")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


@dataclass(frozen=True, eq=False)
class Heatmap:
    """Indicator values on a planar grid; ``values[iy, ix]`` is row-major in y."""

    region: Region
    step: float
    values: np.ndarray
    plane_z: float = 0.0

    @property
    def xs(self) -> np.ndarray:
        return grid_axis(self.region.xmin, self.region.xmax, self.step)

    @property
    def ys(self) -> np.ndarray:
        return grid_axis(self.region.ymin, self.region.ymax, self.step)

    def node(self, iy: int, ix: int) -> Point3:
        return Point3(float(self.xs[ix]), float(self.ys[iy]), float(self.plane_z))


def scan_grid(region, step: float, plane_z: float, proj: Projector, dirs: DirectionSet, w,
              workers: int = 1) -> Heatmap:
    """Evaluate the indicator at every node of a planar grid.

    Each grid row is an independent unit of work, so the result is
    bit-identical for any ``workers``.
    """
    _check_dims(proj, dirs)
    region = Region(*map(float, region))
    k = wavenumber(w)
    xs = grid_axis(region.xmin, region.xmax, step)
    ys = grid_axis(region.ymin, region.ymax, step)
    theta = dirs.vectors

    def row(y):
        z = np.column_stack([xs, np.full_like(xs, y), np.full_like(xs, plane_z)])
        return _indicator_rows(z, proj, theta, k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, ys))
    else:
        rows = [row(y) for y in ys]
    values = np.vstack(rows)
    values.setflags(write=False)
    return Heatmap(region, float(step), values, float(plane_z))


def _peak_nodes(h: Heatmap, expected: Optional[int], rel_threshold: float,
                merge_radius: float = MERGE_RADIUS) -> list[tuple[int, int, float]]:
    if not 0 < rel_threshold <= 1:
        raise ValidationError("rel_threshold must lie in (0, 1]")
    V = np.asarray(h.values, dtype=float)
    if V.size == 0:
        raise ValidationError("empty heatmap")
    padded = np.pad(V, 1, constant_values=-np.inf)
    ny, nx = V.shape
    strict = np.ones_like(V, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            strict &= V > padded[1 + dy : 1 + dy + ny, 1 + dx : 1 + dx + nx]
    strict &= V >= rel_threshold * V.max()
    iy, ix = np.nonzero(strict)  # row-major order
    vals = V[iy, ix]
    order = np.argsort(-vals, kind="stable")
    kept: list[tuple[int, int, float]] = []
    for o in order:
        cy, cx = int(iy[o]), int(ix[o])
        if all(math.hypot(cy - py, cx - px) > merge_radius for py, px, _ in kept):
            kept.append((cy, cx, float(vals[o])))
    if expected is not None:
        kept = kept[:expected]
    return kept


def extract_peaks(h: Heatmap, expected: Optional[int] = None,
                  rel_threshold: float = DEFAULT_REL_THRESHOLD) -> list[Point3]:
    """Strict 8-neighbour local maxima, thresholded and merged.

    Maxima below ``rel_threshold * max`` are dropped; of two maxima within
    three grid steps only the larger survives (the earlier one in row-major
    order on ties). Results are sorted by decreasing indicator value and cut
    to ``expected`` when given.
    """
    return [h.node(iy, ix) for iy, ix, _ in _peak_nodes(h, expected, rel_threshold)]


class Assignment(NamedTuple):
    pairs: list[tuple[int, int]]
    errors: list[float]
    unmatched_estimates: list[int]
    unmatched_truth: list[int]


def match_points(estimates: Sequence, truth: Sequence) -> Assignment:
    """Minimum-total-distance one-to-one matching of estimates to true positions.

    Exhaustive over permutations when both lists have at most eight entries,
    Hungarian assignment otherwise. ``pairs`` are (estimate, truth) index
    pairs sorted by estimate index.
    """
    E = np.array([_as_point(p) for p in estimates])
    T = np.array([_as_point(p) for p in truth])
    if len(E) == 0 or len(T) == 0:
        raise ValidationError("estimates and truth must be non-empty")
    D = np.linalg.norm(E[:, None, :] - T[None, :, :], axis=-1)
    ne, nt = D.shape
    if max(ne, nt) <= EXHAUSTIVE_MATCH_MAX:
        best, best_cost = None, np.inf
        if ne <= nt:
            for perm in itertools.permutations(range(nt), ne):
                cost = D[np.arange(ne), perm].sum()
                if cost < best_cost:
                    best, best_cost = [(i, t) for i, t in enumerate(perm)], cost
        else:
            for perm in itertools.permutations(range(ne), nt):
                cost = D[perm, np.arange(nt)].sum()
                if cost < best_cost:
                    best, best_cost = sorted((e, j) for j, e in enumerate(perm)), cost
        pairs = best
    else:
        rows, cols = linear_sum_assignment(D)
        pairs = sorted(zip(rows.tolist(), cols.tolist()))
    used_e = {e for e, _ in pairs}
    used_t = {t for _, t in pairs}
    return Assignment(
        pairs,
        [float(D[e, t]) for e, t in pairs],
        [i for i in range(ne) if i not in used_e],
        [j for j in range(nt) if j not in used_t],
    )


def localization_error(estimates: Sequence, truth: Sequence) -> list[float]:
    """Per-pair distances under the optimal one-to-one matching."""
    return match_points(estimates, truth).errors


def peak_contrast(h: Heatmap, truth: Sequence) -> float:
    """Weakest source response relative to the grid median.

    For each true position take the largest heatmap value within one grid
    node of it; return the smallest of these divided by the median of the
    whole heatmap.
    """
    V = np.asarray(h.values)
    xs, ys = h.xs, h.ys
    med = float(np.median(V))
    worst = np.inf
    for p in truth:
        p = _as_point(p)
        ix = int(np.clip(np.rint((p[0] - xs[0]) / h.step), 0, len(xs) - 1))
        iy = int(np.clip(np.rint((p[1] - ys[0]) / h.step), 0, len(ys) - 1))
        win = V[max(iy - 1, 0) : iy + 2, max(ix - 1, 0) : ix + 2]
        worst = min(worst, float(win.max()))
    return worst / med


@dataclass
class LocalizationResult:
    peaks: list[Point3]
    indicator_at_peaks: list[float]
    matched_errors: Optional[list[Optional[float]]] = None
    contrast: Optional[float] = None
    unmatched_truth: list[int] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        """Largest matched error; infinite if any true source went unmatched."""
        if self.matched_errors is None:
            raise ValueError("no ground truth was supplied")
        if self.unmatched_truth or any(e is None for e in self.matched_errors):
            return math.inf
        return max(self.matched_errors) if self.matched_errors else math.inf


def localize(h: Heatmap, truth: Optional[Sequence] = None, expected: Optional[int] = None,
             rel_threshold: float = DEFAULT_REL_THRESHOLD) -> LocalizationResult:
    """Extract peaks and, when ``truth`` is given, score them against it."""
    nodes = _peak_nodes(h, expected, rel_threshold)
    peaks = [h.node(iy, ix) for iy, ix, _ in nodes]
    values = [v for _, _, v in nodes]
    result = LocalizationResult(peaks, values)
    if truth is not None and len(truth):
        result.contrast = peak_contrast(h, truth)
        if peaks:
            m = match_points(peaks, truth)
            errs: list[Optional[float]] = [None] * len(peaks)
            for (e, _), d in zip(m.pairs, m.errors):
                errs[e] = d
            result.matched_errors = errs
            result.unmatched_truth = m.unmatched_truth
        else:
            result.matched_errors = []
            result.unmatched_truth = list(range(len(truth)))
    return result
