"""Forward multiple-scattering model for M point scatterers.

The closed-form solution goes through the M x M interaction matrix ``P``
(off-diagonal ``Phi_k(y_m, y_j)``, diagonal ``ik/4pi - alpha_j``). The
Foldy-Lax route in :func:`foldy_lax_total_field` solves a differently
scaled system and never forms ``P``, so it can be used as an oracle for
:func:`total_field`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, InadmissibleWavenumberError, ValidationError
from .wavecore import (
    DirectionSet,
    ScattererSet,
    _as_direction,
    _as_points,
    wavenumber,
)

RCOND_MIN = 1e-12
POLE_TOL = 1e-12
# below this size an explicit inverse is fine
EXPLICIT_INVERSE_MAX_M = 8


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    entries: np.ndarray
    k: float
    scatterers: ScattererSet = field(repr=False)


@dataclass(frozen=True, eq=False)
class FarFieldMatrix:
    """N x N far-field samples ``F[j, l] = u_inf(theta_j, theta_l)`` plus provenance.

    ``generator`` names the random bit generator used by the last noise
    application, or is ``None`` for clean data.
    """

    entries: np.ndarray
    noisy: bool = False
    delta: float = 0.0
    seed: Optional[int] = None
    generator: Optional[str] = None

    @property
    def n(self) -> int:
        return self.entries.shape[0]


class Admissibility(NamedTuple):
    ok: bool
    rcond: float


def _pairwise_kernel(pos: np.ndarray, k: float) -> np.ndarray:
    """Phi_k(y_m, y_j) for m != j, zero on the diagonal."""
    r = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(r, 1.0)
    phi = np.exp(1j * k * r) / (4 * np.pi * r)
    np.fill_diagonal(phi, 0.0)
    return phi


def build_interaction_matrix(s: ScattererSet, w) -> InteractionMatrix:
    k = wavenumber(w)
    P = _pairwise_kernel(s.positions, k)
    P[np.diag_indices_from(P)] = 1j * k / (4 * np.pi) - s.alphas
    P.setflags(write=False)
    return InteractionMatrix(P, k, s)


def check_admissible(P: InteractionMatrix) -> Admissibility:
    """Reciprocal 2-norm condition number of ``P``; ``ok`` iff it exceeds 1e-12."""
    sv = np.linalg.svd(P.entries, compute_uv=False)
    rcond = 0.0 if sv[0] == 0.0 else float(sv[-1] / sv[0])
    return Admissibility(rcond > RCOND_MIN, rcond)


def _require_admissible(P: InteractionMatrix) -> None:
    adm = check_admissible(P)
    if not adm.ok:
        raise InadmissibleWavenumberError(adm.rcond)


def amplitude_matrix(P: InteractionMatrix) -> np.ndarray:
    """Scattering amplitude matrix ``A = -P^{-1}``.

    Raises
    ------
    InadmissibleWavenumberError
        If ``P`` fails :func:`check_admissible`.
    """
    _require_admissible(P)
    M = len(P.entries)
    if M <= EXPLICIT_INVERSE_MAX_M:
        A = -np.linalg.inv(P.entries)
    else:
        A = -np.linalg.solve(P.entries, np.eye(M, dtype=complex))
    A.setflags(write=False)
    return A


def steering_matrix(s: ScattererSet, dirs: DirectionSet, w) -> np.ndarray:
    """M x N matrix ``H[m, l] = exp(ik y_m . theta_l)``."""
    k = wavenumber(w)
    return np.exp(1j * k * (s.positions @ dirs.vectors.T))


def _reject_source_points(x: np.ndarray, s: ScattererSet) -> np.ndarray:
    r = np.linalg.norm(x[..., None, :] - s.positions, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("evaluation at source point")
    return r


def scattered_field(x, d, s: ScattererSet, w):
    """Closed-form scattered field ``-sum_{m,j} [P^-1]_{mj} e^{ik y_j.d} Phi_k(x, y_m)``.

    ``x`` may be a single point or an array of points of shape (..., 3).
    """
    k = wavenumber(w)
    xa = _as_points(x)
    da = _as_direction(d)
    r = _reject_source_points(xa, s)
    A = amplitude_matrix(build_interaction_matrix(s, k))
    # A @ incident phases at the scatterers, then radiate from each y_m
    coef = A @ np.exp(1j * k * (s.positions @ da))
    phi = np.exp(1j * k * r) / (4 * np.pi * r)
    val = phi @ coef
    return complex(val) if np.ndim(val) == 0 else val


def total_field(x, d, s: ScattererSet, w):
    k = wavenumber(w)
    xa = _as_points(x)
    da = _as_direction(d)
    val = np.exp(1j * k * (xa @ da)) + scattered_field(xa, da, s, k)
    return complex(val) if np.ndim(val) == 0 else val


def foldy_lax_coefficients(d, s: ScattererSet, w) -> np.ndarray:
    """Exciting-field values ``C_j`` at each scatterer from the Foldy-Lax system.

    Solves ``J C = (e^{ik y_j.d})_j`` with ``J[j, i] = delta_ji - (1 - delta_ji) g_i Phi_k(y_j, y_i)``
    and ``g_i = 1 / (alpha_i - ik/4pi)``.
    """
    k = wavenumber(w)
    da = _as_direction(d)
    g = foldy_lax_strengths(s, k)
    J = np.eye(len(s), dtype=complex) - _pairwise_kernel(s.positions, k) * g[None, :]
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= RCOND_MIN * sv[0]:
        raise DomainError("Foldy-Lax system singular")
    return np.linalg.solve(J, np.exp(1j * k * (s.positions @ da)))


def foldy_lax_strengths(s: ScattererSet, w) -> np.ndarray:
    """Single-scatterer strengths ``g_j(k) = 1 / (alpha_j - ik/4pi)``."""
    k = wavenumber(w)
    denom = s.alphas - 1j * k / (4 * np.pi)
    if np.any(np.abs(denom) <= POLE_TOL):
        raise DomainError("Foldy-Lax strength has a pole: alpha_j = ik/4pi")
    return 1.0 / denom


def foldy_lax_total_field(x, d, s: ScattererSet, w):
    """Total field from the self-consistent Foldy-Lax system (independent of ``P``)."""
    k = wavenumber(w)
    xa = _as_points(x)
    da = _as_direction(d)
    r = _reject_source_points(xa, s)
    C = foldy_lax_coefficients(da, s, k)
    g = foldy_lax_strengths(s, k)
    phi = np.exp(1j * k * r) / (4 * np.pi * r)
    val = np.exp(1j * k * (xa @ da)) + phi @ (g * C)
    return complex(val) if np.ndim(val) == 0 else val


def far_field_pattern(obs, d, s: ScattererSet, w) -> complex:
    """``u_inf(xhat, d) = -sum_{m,j} [P^-1]_{mj} exp(ik (y_j.d - xhat.y_m))``."""
    k = wavenumber(w)
    xhat = _as_direction(obs)
    da = _as_direction(d)
    A = amplitude_matrix(build_interaction_matrix(s, k))
    out = np.exp(-1j * k * (s.positions @ xhat)) @ A @ np.exp(1j * k * (s.positions @ da))
    return complex(out)


def synthesize_far_field(dirs: DirectionSet, s: ScattererSet, w) -> FarFieldMatrix:
    """Clean N x N far-field matrix over all (observation, incidence) pairs.

    Built entrywise from the double sum rather than as ``H^* A H``, so that
    the factorization can be checked against it.
    """
    k = wavenumber(w)
    A = amplitude_matrix(build_interaction_matrix(s, k))
    proj = s.positions @ dirs.vectors.T  # (M, N): y_m . theta_l
    outgoing = np.exp(-1j * k * proj).T  # [j, m]
    incoming = np.exp(1j * k * proj).T  # [l, q]
    # terms[j, l, m, q] = e^{-ik theta_j.y_m} a_mq e^{ik y_q.theta_l}
    terms = outgoing[:, None, :, None] * A[None, None, :, :] * incoming[None, :, None, :]
    F = terms.sum(axis=(2, 3))
    F.setflags(write=False)
    return FarFieldMatrix(F)


def born_far_field(dirs: DirectionSet, s: ScattererSet, w, strengths=None) -> FarFieldMatrix:
    """Far-field matrix without multiple scattering.

    ``F[j, l] = sum_m tau_m exp(ik (y_m.theta_l - theta_j.y_m))``. The strengths
    ``tau_m`` default to :func:`foldy_lax_strengths`.
    """
    k = wavenumber(w)
    if strengths is None:
        tau = foldy_lax_strengths(s, k)
    else:
        tau = np.broadcast_to(np.asarray(strengths, dtype=complex), (len(s),))
    H = steering_matrix(s, dirs, k)
    F = (H.conj().T * tau[None, :]) @ H
    F.setflags(write=False)
    return FarFieldMatrix(F)


def factorization_residual(F: FarFieldMatrix, dirs: DirectionSet, s: ScattererSet, w) -> float:
    """Relative Frobenius distance ``|F - H^* A H| / |F|``."""
    k = wavenumber(w)
    H = steering_matrix(s, dirs, k)
    A = amplitude_matrix(build_interaction_matrix(s, k))
    if F.entries.shape != (H.shape[1], H.shape[1]):
        raise ValidationError("far-field matrix does not match the direction set")
    return float(np.linalg.norm(F.entries - H.conj().T @ A @ H) / np.linalg.norm(F.entries))
