"""Geometric and wave primitives.

Points, unit directions and scatterer sets are immutable value types backed
by small numpy arrays. Every geometric quantity is three dimensional; planar
configurations are embedded at ``z = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ValidationError

UNIT_TOL = 1e-12


class Point3(NamedTuple):
    x: float
    y: float
    z: float = 0.0


class Direction(NamedTuple):
    """Unit vector in R^3. Use :meth:`from_vector` to build one from raw data."""

    ux: float
    uy: float
    uz: float

    @classmethod
    def from_vector(cls, v) -> "Direction":
        a = _as_point(v)
        norm = np.linalg.norm(a)
        if norm == 0.0:
            raise ValidationError("direction vector must be non-zero")
        a = a / norm
        return cls(float(a[0]), float(a[1]), float(a[2]))


def _as_point(x) -> np.ndarray:
    """Coerce a 2- or 3-component array-like into a finite float (3,) array."""
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape == (2,):
        a = np.array([a[0], a[1], 0.0])
    if a.shape != (3,):
        raise ValidationError(f"expected a point with 2 or 3 coordinates, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("point coordinates must be finite")
    return a


def _as_points(x) -> np.ndarray:
    """Like :func:`_as_point` but for a stack of points, shape (..., 3)."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0 or a.shape[-1] not in (2, 3):
        raise ValidationError(f"expected points with 2 or 3 coordinates, got shape {a.shape}")
    if a.shape[-1] == 2:
        a = np.concatenate([a, np.zeros(a.shape[:-1] + (1,))], axis=-1)
    if not np.all(np.isfinite(a)):
        raise ValidationError("point coordinates must be finite")
    return a


def _as_direction(d) -> np.ndarray:
    a = _as_point(d)
    if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
        raise ValidationError("direction must be a unit vector (|d| = 1 within 1e-12)")
    return a


@dataclass(frozen=True)
class WaveConfig:
    k: float

    def __post_init__(self):
        k = float(self.k)
        if not np.isfinite(k) or k <= 0:
            raise ValidationError(f"wavenumber must be positive and finite, got {self.k!r}")
        object.__setattr__(self, "k", k)


def wavenumber(w) -> float:
    """Return the wavenumber from a :class:`WaveConfig` or a bare number."""
    if isinstance(w, WaveConfig):
        return w.k
    return WaveConfig(w).k


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScattererSet:
    """Positions ``y_m`` (M, 3) and complex scattering coefficients ``alpha_m`` (M,).

    Raises
    ------
    ValidationError
        On length mismatch, coincident positions or ``Im alpha < 0``.
    """

    positions: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        pos = _as_points(self.positions)
        if pos.ndim == 1:
            pos = pos[None, :]
        if pos.ndim != 2:
            raise ValidationError("positions must be an (M, 3) array")
        alphas = np.atleast_1d(np.asarray(self.alphas, dtype=complex))
        if alphas.ndim != 1 or len(alphas) != len(pos):
            raise ValidationError(
                f"got {len(pos)} positions but {alphas.size} scattering coefficients"
            )
        if len(pos) < 1:
            raise ValidationError("at least one scatterer is required")
        if not np.all(np.isfinite(alphas)):
            raise ValidationError("scattering coefficients must be finite")
        if np.any(alphas.imag < 0):
            raise ValidationError("scattering coefficients must satisfy Im(alpha) >= 0")
        dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
        np.fill_diagonal(dist, np.inf)
        if np.any(dist == 0.0):
            raise ValidationError("scatterer positions must be pairwise distinct")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "alphas", _frozen(alphas))

    @classmethod
    def from_lists(cls, points: Sequence, alphas: Sequence) -> "ScattererSet":
        return cls(np.asarray([_as_point(p) for p in points]), alphas)

    def __len__(self) -> int:
        return len(self.alphas)

    @property
    def points(self) -> list[Point3]:
        return [Point3(*map(float, p)) for p in self.positions]

    def shifted(self, t) -> "ScattererSet":
        return ScattererSet(self.positions + _as_point(t), self.alphas)


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """N pairwise-distinct unit vectors used both for incidence and observation."""

    vectors: np.ndarray = field()

    def __post_init__(self):
        v = _as_points(self.vectors)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or len(v) < 1:
            raise ValidationError("a direction set needs at least one (3,) vector")
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > UNIT_TOL):
            raise ValidationError("every direction must be a unit vector")
        if len(v) > 1:
            gap = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
            np.fill_diagonal(gap, np.inf)
            if np.any(gap <= UNIT_TOL):
                raise ValidationError("directions must be pairwise distinct")
        object.__setattr__(self, "vectors", _frozen(v))

    @classmethod
    def from_vectors(cls, vectors) -> "DirectionSet":
        """Normalize raw vectors, then validate."""
        v = _as_points(vectors)
        if v.ndim == 1:
            v = v[None, :]
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValidationError("direction vectors must be non-zero")
        return cls(v / norms)

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def dirs(self) -> list[Direction]:
        return [Direction(*map(float, u)) for u in self.vectors]


def fundamental_solution(x, y, k) -> complex:
    """Helmholtz fundamental solution ``exp(ik r) / (4 pi r)`` with ``r = |x - y|``.

    ``x`` and ``y`` broadcast against each other, so stacks of points are
    accepted and an array is returned.
    """
    k = float(k.k) if isinstance(k, WaveConfig) else float(k)
    xa = _as_points(x)
    ya = _as_points(y)
    r = np.linalg.norm(xa - ya, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("singular kernel: fundamental solution evaluated at coincident points")
    val = np.exp(1j * k * r) / (4 * np.pi * r)
    return complex(val) if np.ndim(val) == 0 else val


def plane_wave(x, d, k) -> complex:
    """Incident plane wave ``exp(ik x.d)``. Broadcasts over stacks of ``x``."""
    kk = wavenumber(k)
    xa = _as_points(x)
    val = np.exp(1j * kk * (xa @ _as_direction(d)))
    return complex(val) if np.ndim(val) == 0 else val


def uniform_circle_directions(n: int) -> DirectionSet:
    """``n`` equally spaced directions ``(cos 2pi j/n, sin 2pi j/n, 0)``, j = 0..n-1."""
    if int(n) != n or n < 1:
        raise ValidationError(f"number of directions must be a positive integer, got {n!r}")
    t = 2 * np.pi * np.arange(int(n)) / int(n)
    return DirectionSet(np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1))
