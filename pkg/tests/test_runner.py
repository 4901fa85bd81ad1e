import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointmusic import Heatmap, InadmissibleWavenumberError, Region, ValidationError
from pointmusic.presets import PRESETS, preset, preset_names
from pointmusic.runner import (
    NoiseConfig,
    PeakConfig,
    ProjectorConfig,
    RunConfig,
    SourceSpec,
    dump_config,
    emit_heatmap,
    load_config,
    load_report,
    parse_config,
    run_experiment,
    with_overrides,
)

# expected preset parameters, written out by hand rather than imported
SIX = [(3, -2), (5, 3), (-7, 9), (4, 8), (-3, -2), (7, 8)]
BASE_ALPHA = [1 + 1j, 3 + 5j, -1 + 5j, 1j, -2 + 7j, 6 + 3j]
NOISE_ALPHA = [1j, -3 + 5j, 5j, 5 + 8j, 7j, -6 + 3j]
PI = math.pi
EXPECTED = {
    # name: (positions, alphas, k, N, delta)
    "fig1a": ([(5, 0), (-5, 0), (3, 9)], [1 + 1j, 3 + 5j, -1 + 5j], 2 * PI, 20, 0.0),
    "fig1b": ([(5, 0), (-5, 0), (3, 9)], [1 + 1j, 3 + 5j, -1 + 5j], 2 * PI, 20, 0.001),
    "fig1c": ([(5, 0), (-5, 0), (3, 9)], [1 + 1j, 3 + 5j, -1 + 5j], 2 * PI, 20, 0.0),
    "fig1d": ([(5, 0), (-5, 0), (3, 9)], [1 + 1j, 3 + 5j, -1 + 5j], 2 * PI, 20, 0.2),
    "sources4": (SIX[:4], BASE_ALPHA[:4], 2 * PI, 20, 0.2),
    "sources5": (SIX[:5], BASE_ALPHA[:5], 2 * PI, 20, 0.2),
    "sources6": (SIX, BASE_ALPHA, 2 * PI, 20, 0.2),
    "dirs30": (SIX, BASE_ALPHA, 2 * PI, 30, 0.2),
    "dirs40": (SIX, BASE_ALPHA, 2 * PI, 40, 0.2),
    "dirs50": (SIX, BASE_ALPHA, 2 * PI, 50, 0.2),
    "k-pi": (SIX, BASE_ALPHA, PI, 20, 0.2),
    "k-3pi": (SIX, BASE_ALPHA, 3 * PI, 20, 0.2),
    "k-4pi": (SIX, BASE_ALPHA, 4 * PI, 20, 0.2),
    "alpha1": (SIX, [1j, 5j, 7j, 4j, 9j, 10j], 2 * PI, 20, 0.2),
    "alpha2": (SIX, [3 + 2j, 5 + 3j, -1 + 5j, -4 + 1j, 2 + 7j, -3 + 6j], 2 * PI, 20, 0.2),
    "alpha3": (SIX, NOISE_ALPHA, 2 * PI, 20, 0.2),
    "delta05": (SIX, NOISE_ALPHA, 2 * PI, 20, 0.5),
    "delta1": (SIX, NOISE_ALPHA, 2 * PI, 20, 1.0),
    "delta2": (SIX, NOISE_ALPHA, 2 * PI, 20, 2.0),
}


def test_preset_names_complete():
    assert set(preset_names()) == set(EXPECTED)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_preset_parameters(name):
    positions, alphas, k, n, delta = EXPECTED[name]
    cfg = preset(name)
    assert [s.position for s in cfg.sources] == [(float(x), float(y), 0.0) for x, y in positions]
    assert [s.alpha for s in cfg.sources] == alphas
    assert cfg.wavenumber == k
    assert cfg.num_directions == n
    assert cfg.noise.delta == delta
    assert cfg.step == 0.1
    assert cfg.peaks.expected == len(positions)


def test_preset_projectors():
    for name in ("fig1a", "fig1b"):
        assert (preset(name).projector.source, preset(name).projector.policy) == ("svd", "exact-rank")
    for name in set(EXPECTED) - {"fig1a", "fig1b"}:
        assert (preset(name).projector.source, preset(name).projector.policy) == ("pinv", "largest-gap")


def test_noise_sweep_descriptions_mention_baseline():
    for name in ("delta05", "delta1", "delta2"):
        assert "0.2" in preset(name).description


def test_unknown_preset_lists_valid_names():
    with pytest.raises(ValidationError, match="fig1a.*delta2"):
        preset("fig9")


def test_preset_returns_independent_copy():
    a = preset("fig1a")
    a.projector.params["rel_tol"] = 0.5
    assert PRESETS["fig1a"].projector.params["rel_tol"] == 1e-8


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_config_round_trip_presets(name):
    cfg = preset(name)
    assert parse_config(dump_config(cfg)) == cfg
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


coords = st.floats(-20, 20, allow_nan=False).map(lambda v: round(v, 3))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(coords, coords, coords), min_size=1, max_size=4, unique=True),
    st.floats(0.1, 20),
    st.floats(0, 3),
    st.integers(0, 2**63),
    st.sampled_from(["svd", "pinv"]),
)
def test_config_round_trip_random(points, k, delta, seed, source):
    sources = tuple(SourceSpec(p, complex(i, i + 1)) for i, p in enumerate(points))
    cfg = RunConfig(
        wavenumber=k,
        sources=sources,
        num_directions=len(points) + 3,
        noise=NoiseConfig(delta, seed),
        projector=ProjectorConfig(source, "fixed-rank", {"rank": len(points)}),
        peaks=PeakConfig(None, 0.3),
    )
    assert parse_config(dump_config(cfg)) == cfg


def test_config_validation():
    base = preset("fig1a").to_dict()
    bad = dict(base, num_directions=2)
    with pytest.raises(ValidationError, match="num_directions"):
        RunConfig.from_dict(bad)
    with pytest.raises(ValidationError):
        RunConfig.from_dict(dict(base, step=0))
    with pytest.raises(ValidationError):
        RunConfig.from_dict(dict(base, noise={"delta": -1, "seed": 0}))
    with pytest.raises(ValidationError, match="unknown config keys"):
        RunConfig.from_dict(dict(base, colour="red"))
    with pytest.raises(ValidationError):
        parse_config("- just a list")


def test_config_file_format(tmp_path):
    text = """
wavenumber: 6.283185307179586
sources:
  - {position: [5, 0, 0], alpha: [1, 1]}
  - {position: [-5, 0], alpha: [3, 5]}
num_directions: 20
region: [-8, 8, -8, 8]
step: 0.2
noise: {delta: 0.0, seed: 3}
projector: {source: svd, policy: exact-rank, params: {rel_tol: 1.0e-8}}
peaks: {expected: 2, rel_threshold: 0.2}
"""
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.sources[1] == SourceSpec((-5.0, 0.0, 0.0), 3 + 5j)
    assert cfg.region == (-8.0, 8.0, -8.0, 8.0)
    rep = run_experiment(with_overrides(cfg, output_dir=tmp_path / "out"))
    assert rep.max_error <= 0.2


def test_inadmissible_wavenumber_aborts():
    k = 2 * math.pi
    cfg = RunConfig(k, (SourceSpec((0.0, 0.0, 0.0), 1j * k / (4 * math.pi)),), 4)
    with pytest.raises(InadmissibleWavenumberError, match="S_alpha"):
        run_experiment(cfg, write=False)


def test_emit_single_node_heatmap(tmp_path):
    h = Heatmap(Region(1.5, 1.5, -2.0, -2.0), 0.1, np.array([[2.0]]))
    csv, pgm = emit_heatmap(h, tmp_path)
    assert csv.read_text().splitlines() == ["x,y,indicator", "1.5,-2.0,2.0"]
    assert pgm.read_text().split() == ["P2", "1", "1", "255", "0"]


def test_emit_constant_heatmap(tmp_path):
    h = Heatmap(Region(0, 0.4, 0, 0.2), 0.1, np.full((3, 5), 7.5))
    csv, pgm = emit_heatmap(h, tmp_path)
    tokens = pgm.read_text().split()
    assert tokens[:4] == ["P2", "5", "3", "255"]
    assert set(tokens[4:]) == {"0"} and len(tokens[4:]) == 15
    assert all(len(line) <= 70 for line in pgm.read_text().splitlines())
    rows = csv.read_text().splitlines()
    assert len(rows) == 16 and rows[2] == "0.1,0.0,7.5"


def test_emit_heatmap_orientation(tmp_path):
    V = np.array([[1.0, 1.0], [1.0, 100.0]])  # bright node at largest x and y
    h = Heatmap(Region(0, 1, 0, 1), 1.0, V)
    _, pgm = emit_heatmap(h, tmp_path)
    vals = list(map(int, pgm.read_text().split()[4:]))
    assert vals == [0, 255, 0, 0]


def test_fig1a_outputs(tmp_path):
    cfg = with_overrides(preset("fig1a"), output_dir=tmp_path)
    rep = run_experiment(cfg)
    assert rep.rank_used == 3 and rep.max_error <= 0.1
    for name in ("heatmap.csv", "heatmap.pgm", "peaks.csv", "report.json", "timings.json", "config.yaml"):
        assert (tmp_path / name).exists()
    peaks = (tmp_path / "peaks.csv").read_text().splitlines()
    assert peaks[0] == "x,y,indicator,matched_error" and len(peaks) == 4
    lines = (tmp_path / "heatmap.csv").read_text().splitlines()
    assert len(lines) == 1 + 201 * 201
    # bright spots at the sources in the graymap
    gray = np.array(list(map(int, (tmp_path / "heatmap.pgm").read_text().split()[4:]))).reshape(201, 201)[::-1]
    for x, y in [(5, 0), (-5, 0), (3, 9)]:
        assert gray[round((y + 10) / 0.1), round((x + 10) / 0.1)] == 255
    assert np.median(gray) < 128
    assert load_config(tmp_path / "config.yaml") == cfg


def test_report_round_trip(tmp_path):
    rep = run_experiment(with_overrides(preset("fig1d"), output_dir=tmp_path))
    loaded = load_report(tmp_path)
    assert loaded == rep
    assert json.loads((tmp_path / "report.json").read_text())["noise_generator"] == "numpy.random.Philox"
    assert "timings" not in json.loads((tmp_path / "report.json").read_text())
    assert set(loaded.timings) >= {"forward", "projector", "scan", "peaks", "total"}


def test_full_run_determinism(tmp_path):
    names = ("heatmap.csv", "heatmap.pgm", "peaks.csv", "report.json")
    cfg = with_overrides(preset("sources4"), output_dir=tmp_path, seed=17)
    run_experiment(cfg)
    first = {n: (tmp_path / n).read_bytes() for n in names}
    run_experiment(cfg, workers=3)
    assert {n: (tmp_path / n).read_bytes() for n in names} == first


def test_seed_override_changes_noise():
    a = run_experiment(with_overrides(preset("fig1d"), seed=1), write=False)
    b = run_experiment(with_overrides(preset("fig1d"), seed=2), write=False)
    assert a.singular_values_noisy != b.singular_values_noisy
    assert a.singular_values_clean == b.singular_values_clean
