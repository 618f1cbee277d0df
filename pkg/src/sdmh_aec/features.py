"""Clip-level features from a statistics trajectory, plus a k-NN check of separability.

The 15-element feature vector holds, for each of P_m, P_s, P_d, U_m, U_s in
that order, the mean, the population variance and the dynamic range
(max - min) over the analysis window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .simulator import LABELS, EventLabel
from .stats import STAT_NAMES

FEATURE_NAMES = tuple(f"{stat}_{kind}" for stat in STAT_NAMES for kind in ("mean", "var", "range"))
STD_FLOOR = 1e-12


@dataclass
class EventRecord:
    label: EventLabel
    features: np.ndarray
    scenario_seed: int = 0


def extract_features(traj) -> np.ndarray:
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or traj.shape[1] != 5:
        raise InputError(f"trajectory must have shape (n, 5), got {traj.shape}")
    if traj.shape[0] < 2:
        raise InputError("trajectory needs at least two frames")
    mean = traj.mean(axis=0)
    rng = traj.max(axis=0) - traj.min(axis=0)
    # a constant column has zero spread; don't let rounding in the mean leak in
    var = np.where(rng > 0, traj.var(axis=0), 0.0)
    return np.stack([mean, var, rng], axis=1).reshape(15)


@dataclass
class ZScore:
    mean: np.ndarray
    std: np.ndarray


def _matrix(dataset) -> np.ndarray:
    return np.array([np.asarray(r.features if isinstance(r, EventRecord) else r, float)
                     for r in dataset])


def zscore_fit(dataset) -> ZScore:
    """Per-dimension mean/std of EventRecords (or bare vectors)."""
    if len(dataset) == 0:
        raise InputError("cannot fit normalisation on an empty dataset")
    m = _matrix(dataset)
    return ZScore(m.mean(axis=0), np.maximum(m.std(axis=0), STD_FLOOR))


def zscore_apply(params: ZScore, features) -> np.ndarray:
    return (np.asarray(features, float) - params.mean) / params.std


def knn_classify(train, query, k: int = 5) -> EventLabel:
    """Majority vote of the ``k`` nearest records.

    Vote ties go to the class with the smallest summed distance among its
    voters, then to the earlier class in :data:`LABELS`.
    """
    if len(train) == 0:
        raise InputError("training set is empty")
    if not 1 <= k <= len(train):
        raise InputError(f"k={k} must lie in 1..{len(train)}")
    m = _matrix(train)
    dist = np.sqrt(np.sum((m - np.asarray(query, float)) ** 2, axis=1))
    order = np.argsort(dist, kind="stable")[:k]
    votes = {}
    for i in order:
        lab = EventLabel.parse(train[i].label)
        n, total = votes.get(lab, (0, 0.0))
        votes[lab] = (n + 1, total + dist[i])
    return min(votes, key=lambda lab: (-votes[lab][0], votes[lab][1], LABELS.index(lab)))


@dataclass
class Evaluation:
    accuracy: float
    confusion: np.ndarray  # rows true, columns predicted, in LABELS order
    predictions: list


def evaluate_loo(dataset, k: int = 5, normalize: bool = True) -> Evaluation:
    """Leave-one-out k-NN; the z-score is refit on each training fold."""
    counts = {lab: 0 for lab in LABELS}
    for r in dataset:
        counts[EventLabel.parse(r.label)] += 1
    short = [lab.value for lab, c in counts.items() if c < 2]
    if short:
        raise InputError(f"need at least 2 records per class; short: {', '.join(short)}")
    confusion = np.zeros((len(LABELS), len(LABELS)), dtype=int)
    preds = []
    for i, rec in enumerate(dataset):
        train = [r for j, r in enumerate(dataset) if j != i]
        if normalize:
            z = zscore_fit(train)
            train = [EventRecord(r.label, zscore_apply(z, r.features), r.scenario_seed) for r in train]
            q = zscore_apply(z, rec.features)
        else:
            q = rec.features
        pred = knn_classify(train, q, k)
        preds.append(pred)
        confusion[LABELS.index(EventLabel.parse(rec.label)), LABELS.index(pred)] += 1
    return Evaluation(float(np.trace(confusion) / len(dataset)), confusion, preds)


def format_confusion(confusion) -> str:
    names = [lab.value for lab in LABELS]
    width = max(len(n) for n in names) + 2
    lines = ["true \\ pred".ljust(width) + "".join(n.rjust(width) for n in names)]
    for name, row in zip(names, np.asarray(confusion)):
        lines.append(name.ljust(width) + "".join(str(v).rjust(width) for v in row))
    return "\n".join(lines)


def write_confusion_csv(path, confusion) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true"] + [lab.value for lab in LABELS])
        for lab, row in zip(LABELS, np.asarray(confusion)):
            w.writerow([lab.value] + [int(v) for v in row])


def write_features_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "seed"] + [f"f{i}" for i in range(15)])
        for r in records:
            w.writerow([EventLabel.parse(r.label).value, int(r.scenario_seed)]
                       + [repr(float(v)) for v in r.features])


def read_features_csv(path) -> list:
    path = Path(path)
    records = []
    expected = ["label", "seed"] + [f"f{i}" for i in range(15)]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            raise InputError(f"{path}:1: expected header {','.join(expected)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                if len(rec) != 17:
                    raise ValueError(f"expected 17 fields, got {len(rec)}")
                label = EventLabel(rec[0])
                records.append(EventRecord(label, np.array([float(v) for v in rec[2:]]), int(rec[1])))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return records
