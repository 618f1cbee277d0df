"""How each scene class shows up in the statistics.

Runs one clip per class from the same room and reference, then prints a
coarse text timeline of P_s - P_m, U_m (full bar 0.02) and U_s (full
bar 0.005) around the event. The event sits at frame 500 and lasts 1 s
(about 94 frames); the statistics trail it by the pipeline latency
printed at the top.

    python3 demos/02_event_signatures.py [seed]
"""

import sys

import numpy as np

from sdmh_aec.pipeline import run_aec, stats_latency_frames
from sdmh_aec.simulator import LABELS, Scenario, render_scenario

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 3
STEP = 16  # frames per printed row


def bar(v, scale, width=20):
    n = int(round(min(max(v / scale, 0.0), 1.0) * width))
    return "#" * n + "." * (width - n)


print(f"statistics latency: {stats_latency_frames():.2f} frames")
for label in LABELS:
    scene = render_scenario(Scenario(label, seed))
    res = run_aec(scene.x, scene.d, synthesize=False)
    s = res.smoothed
    print(f"\n{label.value}")
    print(" frame  P_s-P_m  U_m                   U_s")
    for f in range(460, 780, STEP):
        row = s[f:f + STEP].mean(axis=0)
        print(f"  {f:4d}  {row[1] - row[0]:+.2f}   {bar(row[3], 0.02)}  {bar(row[4], 0.005)}")
    print(f"  max U_m {np.max(s[469:, 3]):.4f}  max U_s {np.max(s[469:, 4]):.4f}")
