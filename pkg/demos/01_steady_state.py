"""Cancel a steady far-end echo and look at the statistics.

Renders a 10 s SteadyState scene, runs the canceller and prints the echo
reduction over time plus the mean of each recorded statistic. In steady
state the main and shadow filters share the selections and P_d stays near
zero.

    python3 demos/01_steady_state.py
"""

import numpy as np

from sdmh_aec.pipeline import run_aec
from sdmh_aec.simulator import LABELS, Scenario, render_scenario
from sdmh_aec.stats import STAT_NAMES

scene = render_scenario(Scenario(LABELS[0], seed=21, duration=10.0))
result = run_aec(scene.x, scene.d)

# echo return loss enhancement per second of audio
sr = scene.sample_rate
for sec in range(int(len(scene.d) / sr)):
    seg = slice(sec * sr, (sec + 1) * sr)
    erle = 10 * np.log10(np.sum(scene.d[seg] ** 2) / np.sum(result.residual[seg] ** 2))
    print(f"{sec:2d}-{sec + 1:2d} s  ERLE {erle:5.1f} dB")

print()
print(f"recorded frames: {len(result.recorded)} (from frame {result.first_recorded})")
for name, value in zip(STAT_NAMES, result.recorded.mean(axis=0)):
    print(f"  mean {name:4s} {value:.3f}")
