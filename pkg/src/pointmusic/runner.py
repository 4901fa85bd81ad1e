"""End-to-end experiments: forward model, noise, projector, grid scan, peaks.

Configurations are YAML documents whose keys mirror :class:`RunConfig`.
Complex numbers are written as ``[re, im]``. Outputs of a run are
``heatmap.csv``, ``heatmap.pgm``, ``peaks.csv``, ``report.json`` and
``timings.json`` (wall-clock times are kept out of ``report.json`` so that
reports are byte-identical across repeated runs).
"""
from __future__ import annotations

import copy
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .errors import InadmissibleWavenumberError, ValidationError
from .forward import build_interaction_matrix, check_admissible, synthesize_far_field
from .imaging import (
    DEFAULT_REGION,
    Heatmap,
    RankPolicy,
    Region,
    localize,
    make_projector,
    scan_grid,
)
from .noise import NoiseSpec, add_noise
from .wavecore import ScattererSet, WaveConfig, uniform_circle_directions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceSpec:
    position: tuple[float, float, float]
    alpha: complex


@dataclass(frozen=True)
class NoiseConfig:
    delta: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class ProjectorConfig:
    source: str = "pinv"
    policy: str = "largest-gap"
    params: dict = field(default_factory=dict)

    def rank_policy(self, n_sources: Optional[int] = None) -> RankPolicy:
        p = self.params
        if self.policy == "exact-rank":
            return RankPolicy.exact(p.get("rel_tol", 1e-8))
        if self.policy == "fixed-rank":
            return RankPolicy.fixed(p["rank"] if "rank" in p else n_sources)
        if self.policy == "largest-gap":
            return RankPolicy.largest_gap(p.get("cap"))
        raise ValidationError(f"unknown rank policy {self.policy!r}")


@dataclass(frozen=True)
class PeakConfig:
    expected: Optional[int] = None
    rel_threshold: float = 0.2


@dataclass(frozen=True)
class RunConfig:
    wavenumber: float
    sources: tuple[SourceSpec, ...]
    num_directions: int
    region: tuple[float, float, float, float] = tuple(DEFAULT_REGION)
    step: float = 0.1
    plane_z: float = 0.0
    noise: NoiseConfig = NoiseConfig()
    projector: ProjectorConfig = ProjectorConfig()
    peaks: PeakConfig = PeakConfig()
    output_dir: Optional[str] = None
    name: str = "custom"
    description: str = ""

    def validate(self) -> "RunConfig":
        if not self.sources:
            raise ValidationError("config needs at least one source")
        if self.num_directions < len(self.sources):
            raise ValidationError(
                f"num_directions ({self.num_directions}) must be >= number of sources "
                f"({len(self.sources)})"
            )
        if not self.step > 0:
            raise ValidationError("step must be positive")
        if len(self.region) != 4 or self.region[1] < self.region[0] or self.region[3] < self.region[2]:
            raise ValidationError("region must be [xmin, xmax, ymin, ymax] with min <= max")
        if self.projector.source not in ("svd", "pinv"):
            raise ValidationError(f"projector source must be svd or pinv, got {self.projector.source!r}")
        NoiseSpec(self.noise.delta, self.noise.seed)
        WaveConfig(self.wavenumber)
        self.projector.rank_policy(len(self.sources))
        return self

    def scatterers(self) -> ScattererSet:
        return ScattererSet([s.position for s in self.sources], [s.alpha for s in self.sources])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sources"] = [
            {"position": list(s.position), "alpha": [s.alpha.real, s.alpha.imag]}
            for s in self.sources
        ]
        d["region"] = list(self.region)
        d["projector"]["params"] = dict(self.projector.params)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)}")
        try:
            sources = tuple(
                SourceSpec(
                    tuple(float(c) for c in (list(s["position"]) + [0.0])[:3]),
                    complex(float(s["alpha"][0]), float(s["alpha"][1])),
                )
                for s in d.pop("sources")
            )
            kw: dict[str, Any] = dict(
                wavenumber=float(d.pop("wavenumber")),
                num_directions=int(d.pop("num_directions")),
                sources=sources,
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise ValidationError(f"malformed config: {exc!r}") from exc
        if "region" in d:
            kw["region"] = tuple(float(v) for v in d.pop("region"))
        for key in ("step", "plane_z"):
            if key in d:
                kw[key] = float(d.pop(key))
        if "noise" in d:
            nz = d.pop("noise")
            kw["noise"] = NoiseConfig(float(nz.get("delta", 0.0)), int(nz.get("seed", 0)))
        if "projector" in d:
            pr = dict(d.pop("projector"))
            pr["params"] = dict(pr.get("params") or {})
            kw["projector"] = ProjectorConfig(**pr)
        if "peaks" in d:
            pk = d.pop("peaks")
            exp = pk.get("expected")
            kw["peaks"] = PeakConfig(None if exp is None else int(exp),
                                     float(pk.get("rel_threshold", 0.2)))
        kw.update(d)
        return cls(**kw).validate()


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def parse_config(text: str) -> RunConfig:
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValidationError("config must be a mapping")
    return RunConfig.from_dict(data)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


@dataclass
class RunReport:
    config: dict
    rank_used: int
    singular_values_clean: list[float]
    singular_values_noisy: Optional[list[float]]
    peaks: list[dict]
    matched_errors: Optional[list[Optional[float]]]
    contrast: Optional[float]
    admissibility_rcond: float
    noise_generator: Optional[str]
    timings: dict = field(default_factory=dict)
    heatmap: Optional[Heatmap] = field(default=None, repr=False, compare=False)

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            f.name: copy.deepcopy(getattr(self, f.name))
            for f in fields(self)
            if f.name not in ("heatmap", "timings")
        }
        if include_timings:
            d["timings"] = dict(self.timings)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(**d)

    @property
    def max_error(self) -> float:
        n_truth = len(self.config["sources"])
        errs = [e for e in (self.matched_errors or []) if e is not None]
        if len(errs) < n_truth:
            return math.inf
        return max(errs)


def _fmt(v: float) -> str:
    return repr(float(v))


def emit_heatmap(h: Heatmap, directory, stem: str = "heatmap") -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (x,y,indicator per node, row-major) and ``<stem>.pgm``.

    The graymap is plain (P2), 8-bit, of log10(indicator) rescaled linearly
    to 0..255, with the top image row at the largest y. A constant heatmap
    maps to level 0 everywhere.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    xs, ys, V = h.xs, h.ys, np.asarray(h.values, dtype=float)
    csv_path = out / f"{stem}.csv"
    lines = ["x,y,indicator"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(V[iy, ix])}")
    csv_path.write_text("\n".join(lines) + "\n")

    L = np.log10(V)
    lo, hi = float(L.min()), float(L.max())
    if hi > lo:
        gray = np.rint((L - lo) / (hi - lo) * 255).astype(int)
    else:
        gray = np.zeros(L.shape, dtype=int)
    gray = gray[::-1]
    pgm = [f"P2\n{gray.shape[1]} {gray.shape[0]}\n255"]
    for row in gray:
        # plain PGM lines should not exceed 70 characters
        line = ""
        for tok in map(str, row):
            if len(line) + len(tok) + 1 > 70:
                pgm.append(line)
                line = tok
            else:
                line = f"{line} {tok}" if line else tok
        pgm.append(line)
    pgm_path = out / f"{stem}.pgm"
    pgm_path.write_text("\n".join(pgm) + "\n")
    return csv_path, pgm_path


def emit_peaks(report: RunReport, path) -> Path:
    path = Path(path)
    lines = ["x,y,indicator,matched_error"]
    for p in report.peaks:
        err = "" if p["matched_error"] is None else _fmt(p["matched_error"])
        lines.append(f"{_fmt(p['x'])},{_fmt(p['y'])},{_fmt(p['indicator'])},{err}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_report(report: RunReport, directory) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(json.dumps(report.to_dict(include_timings=False), indent=2) + "\n")
    (out / "timings.json").write_text(json.dumps(report.timings, indent=2) + "\n")
    return path


def load_report(directory) -> RunReport:
    out = Path(directory)
    d = json.loads((out / "report.json").read_text())
    timings = out / "timings.json"
    d["timings"] = json.loads(timings.read_text()) if timings.exists() else {}
    return RunReport.from_dict(d)


def run_experiment(cfg: RunConfig, write: bool = True, workers: int = 1) -> RunReport:
    """Synthesize, perturb and invert far-field data for one configuration.

    Raises
    ------
    ValidationError
        If the config is invalid (e.g. fewer directions than sources).
    InadmissibleWavenumberError
        If the interaction matrix is (nearly) singular at this wavenumber.
    """
    cfg.validate()
    t0 = time.perf_counter()
    timings = {}
    s = cfg.scatterers()
    w = WaveConfig(cfg.wavenumber)
    dirs = uniform_circle_directions(cfg.num_directions)
    adm = check_admissible(build_interaction_matrix(s, w))
    if not adm.ok:
        raise InadmissibleWavenumberError(adm.rcond)

    F_clean = synthesize_far_field(dirs, s, w)
    sv_clean = np.linalg.svd(F_clean.entries, compute_uv=False)
    F = F_clean
    if cfg.noise.delta > 0:
        F = add_noise(F_clean, NoiseSpec(cfg.noise.delta, cfg.noise.seed))
    timings["forward"] = time.perf_counter() - t0

    t = time.perf_counter()
    proj = make_projector(F, cfg.projector.source, cfg.projector.rank_policy(len(s)))
    timings["projector"] = time.perf_counter() - t
    log.info("%s: rank_used=%d of %d", cfg.name, proj.rank_used, proj.n)

    t = time.perf_counter()
    h = scan_grid(Region(*cfg.region), cfg.step, cfg.plane_z, proj, dirs, w, workers=workers)
    timings["scan"] = time.perf_counter() - t

    t = time.perf_counter()
    loc = localize(h, truth=s.positions, expected=cfg.peaks.expected,
                   rel_threshold=cfg.peaks.rel_threshold)
    timings["peaks"] = time.perf_counter() - t

    errs = loc.matched_errors or [None] * len(loc.peaks)
    peaks = [
        {"x": p.x, "y": p.y, "z": p.z, "indicator": v, "matched_error": e}
        for p, v, e in zip(loc.peaks, loc.indicator_at_peaks, errs)
    ]
    timings["total"] = time.perf_counter() - t0
    report = RunReport(
        config=cfg.to_dict(),
        rank_used=proj.rank_used,
        singular_values_clean=[float(v) for v in sv_clean],
        singular_values_noisy=(
            [float(v) for v in proj.singular_values] if F.noisy else None
        ),
        peaks=peaks,
        matched_errors=loc.matched_errors,
        contrast=loc.contrast,
        admissibility_rcond=adm.rcond,
        noise_generator=F.generator,
        timings=timings,
        heatmap=h,
    )
    if write and cfg.output_dir:
        out = Path(cfg.output_dir)
        emit_heatmap(h, out)
        emit_peaks(report, out / "peaks.csv")
        write_report(report, out)
        (out / "config.yaml").write_text(dump_config(cfg))
    return report


def with_overrides(cfg: RunConfig, output_dir=None, seed=None) -> RunConfig:
    if output_dir is not None:
        cfg = replace(cfg, output_dir=str(output_dir))
    if seed is not None:
        cfg = replace(cfg, noise=replace(cfg.noise, seed=int(seed)))
    return cfg
