"""Seeded complex uniform measurement noise."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .forward import FarFieldMatrix

GENERATOR_NAME = "numpy.random.Philox"


@dataclass(frozen=True)
class NoiseSpec:
    delta: float
    seed: int = 0

    def __post_init__(self):
        delta = float(self.delta)
        if not np.isfinite(delta) or delta < 0:
            raise ValidationError(f"noise level must be finite and >= 0, got {self.delta!r}")
        seed = int(self.seed)
        if seed != self.seed or not 0 <= seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "seed", seed)


def uniform_draws(shape, seed: int) -> np.ndarray:
    """Uniform(-1, 1) draws of shape ``shape + (2,)`` from a Philox stream.

    Draws are consumed in row-major order, real part before imaginary part
    for each entry, so entry ``(i, j)`` always sees the same two numbers.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-1.0, 1.0, size=tuple(shape) + (2,))


def add_noise(F: FarFieldMatrix, spec: NoiseSpec) -> FarFieldMatrix:
    """Return ``F + delta * max|F_ij| * (U + iV)`` with U, V iid Uniform(-1, 1).

    The output is a pure function of ``(F, delta, seed)``. ``delta = 0``
    returns the entries unchanged but still marks the matrix as noisy.
    """
    E = np.asarray(F.entries)
    if spec.delta == 0.0:
        out = E.copy()
    else:
        u = uniform_draws(E.shape, spec.seed)
        scale = spec.delta * np.abs(E).max()
        out = E + scale * (u[..., 0] + 1j * u[..., 1])
    out.setflags(write=False)
    return replace(F, entries=out, noisy=True, delta=spec.delta, seed=spec.seed,
                   generator=GENERATOR_NAME)
