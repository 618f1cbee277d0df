"""Classify scenes from their statistic trajectories.

Builds a small in-memory dataset, extracts the 15 summary features per
clip and reports leave-one-out 5-NN accuracy with a confusion matrix. The
full 25-per-class run is what the CLI does:

    sdmh-aec simulate --out data
    sdmh-aec aec --manifest data/manifest.csv --out-dir stats --no-residual
    sdmh-aec features stats/*_stats.csv --manifest data/manifest.csv -o features.csv
    sdmh-aec evaluate features.csv

This script uses 6 clips per class so it finishes in about a minute. With
so few neighbours per class, quiet double-talk clips (high echo-to-speech
ratio) can land among the steady-state ones; the full dataset separates
them.

    python3 demos/03_scene_classification.py
"""

from sdmh_aec.features import EventRecord, evaluate_loo, extract_features, format_confusion
from sdmh_aec.pipeline import run_aec
from sdmh_aec.simulator import iter_dataset

records = []
for row, scene in iter_dataset(n_per_class=6, base_seed=0):
    res = run_aec(scene.x, scene.d, synthesize=False)
    records.append(EventRecord(row.label, extract_features(res.recorded), row.seed))
    print(f"  {row.id:20s} done")

ev = evaluate_loo(records, k=5)
print(f"\nleave-one-out accuracy {ev.accuracy:.3f}")
print(format_confusion(ev.confusion))
