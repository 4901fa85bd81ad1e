"""Named experiment configurations.

Planar source positions are embedded at z = 0. Noisy presets use the
pseudo-inverse projector with the largest-gap rank policy; the noise seed
defaults to 0 and can be overridden from the command line.
"""
from __future__ import annotations

import copy
import math

from .errors import ValidationError
from .runner import NoiseConfig, PeakConfig, ProjectorConfig, RunConfig, SourceSpec

THREE = [(5.0, 0.0), (-5.0, 0.0), (3.0, 9.0)]
THREE_ALPHA = [1 + 1j, 3 + 5j, -1 + 5j]

SIX = [(3.0, -2.0), (5.0, 3.0), (-7.0, 9.0), (4.0, 8.0), (-3.0, -2.0), (7.0, 8.0)]
SIX_ALPHA = [1 + 1j, 3 + 5j, -1 + 5j, 1j, -2 + 7j, 6 + 3j]

ALPHA_SETS = {
    "alpha1": [1j, 5j, 7j, 4j, 9j, 10j],
    "alpha2": [3 + 2j, 5 + 3j, -1 + 5j, -4 + 1j, 2 + 7j, -3 + 6j],
    "alpha3": [1j, -3 + 5j, 5j, 5 + 8j, 7j, -6 + 3j],
}
NOISE_SWEEP_ALPHA = ALPHA_SETS["alpha3"]

EXACT = ProjectorConfig("svd", "exact-rank", {"rel_tol": 1e-8})
PINV_GAP = ProjectorConfig("pinv", "largest-gap", {})


def _config(name, description, positions, alphas, *, k=2 * math.pi, n=20, delta=0.2,
            projector=PINV_GAP) -> RunConfig:
    sources = tuple(SourceSpec((x, y, 0.0), complex(a)) for (x, y), a in zip(positions, alphas))
    return RunConfig(
        name=name,
        description=description,
        wavenumber=k,
        sources=sources,
        num_directions=n,
        noise=NoiseConfig(delta=delta, seed=0),
        projector=projector,
        peaks=PeakConfig(expected=len(sources), rel_threshold=0.2),
        output_dir=f"runs/{name}",
    )


def _build() -> dict[str, RunConfig]:
    p = {
        "fig1a": _config("fig1a", "three sources, noise-free, range of F from the SVD",
                         THREE, THREE_ALPHA, delta=0.0, projector=EXACT),
        "fig1b": _config("fig1b", "three sources, delta = 0.001, naive exact-rank SVD range "
                         "(expected to fail)", THREE, THREE_ALPHA, delta=0.001,
                         projector=EXACT),
        "fig1c": _config("fig1c", "three sources, noise-free, pseudo-inverse projector",
                         THREE, THREE_ALPHA, delta=0.0),
        "fig1d": _config("fig1d", "three sources, delta = 0.2, pseudo-inverse projector",
                         THREE, THREE_ALPHA, delta=0.2),
    }
    for m in (4, 5, 6):
        p[f"sources{m}"] = _config(f"sources{m}", f"{m} sources, delta = 0.2",
                                   SIX[:m], SIX_ALPHA[:m])
    for n in (30, 40, 50):
        p[f"dirs{n}"] = _config(f"dirs{n}", f"six sources, {n} directions, delta = 0.2",
                                SIX, SIX_ALPHA, n=n)
    for label, mult in (("k-pi", 1), ("k-3pi", 3), ("k-4pi", 4)):
        p[label] = _config(label, f"six sources, k = {mult if mult > 1 else ''}pi, delta = 0.2",
                           SIX, SIX_ALPHA, k=mult * math.pi)
    for label, alphas in ALPHA_SETS.items():
        p[label] = _config(label, f"six sources, scattering coefficients {label}, delta = 0.2",
                           SIX, alphas)
    note = " (the other sweeps run at 0.2)"
    for label, delta in (("delta05", 0.5), ("delta1", 1.0), ("delta2", 2.0)):
        p[label] = _config(label, f"six sources, delta = {delta:g}{note}",
                           SIX, NOISE_SWEEP_ALPHA, delta=delta)
    return p


PRESETS = _build()


def preset_names() -> list[str]:
    return list(PRESETS)


def preset(name: str) -> RunConfig:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        ) from None
