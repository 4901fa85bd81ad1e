"""
Locating scatterers from clean data
===================================

With noise-free data the signal subspace is exactly three dimensional, so the
projector onto its complement kills the steering vector at each true source
and the indicator blows up there.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from pointmusic.presets import preset
from pointmusic.runner import run_experiment, with_overrides

OUT = Path(__file__).with_name("output")

cfg = with_overrides(preset("fig1a"), output_dir=OUT / "fig1a")
rep = run_experiment(cfg, workers=4)

print("rank used:", rep.rank_used)
for p in rep.peaks:
    print(f"peak at ({p['x']:.2f}, {p['y']:.2f})  error {p['matched_error']:.3f}")
print(f"contrast: {rep.contrast:.3g}")

# the indicator spans many decades, so plot it on a log scale
h = rep.heatmap
fig, ax = plt.subplots(figsize=(5, 5))
ax.imshow(h.values, origin="lower", extent=cfg.region, norm=matplotlib.colors.LogNorm())
ax.plot([s.position[0] for s in cfg.sources], [s.position[1] for s in cfg.sources],
        "r+", ms=12)
ax.set_title("indicator, clean data")
fig.savefig(OUT / "02_noise_free_music.png", dpi=120)
