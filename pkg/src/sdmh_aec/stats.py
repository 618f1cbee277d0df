"""Ensemble statistics over the lower sub-bands and their EMA smoothing.

The statistics vector per frame is ``[P_m, P_s, P_d, U_m, U_s]``: the
fractions of the first ``n_stats`` bands whose output came from the main
residual, the shadow residual and the microphone, and the fractions in which
the main (resp. shadow) filter received the other filter's coefficients.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controller import FrameOutcomes, Selection
from .errors import ConfigError, InputError

STAT_NAMES = ("P_m", "P_s", "P_d", "U_m", "U_s")
DEFAULT_SEED = (1 / 3, 1 / 3, 1 / 3, 0.0, 0.0)
N_STATS = 100
TIME_CONSTANT = 0.2


def aggregate(outcomes: FrameOutcomes, n_stats: int = N_STATS) -> np.ndarray:
    """Raw statistics vector from the first ``n_stats`` bands of one frame."""
    if n_stats <= 0:
        raise ConfigError("n_stats must be positive")
    if n_stats > len(outcomes):
        raise ConfigError(f"n_stats={n_stats} exceeds the {len(outcomes)} available bands")
    sel = np.asarray(outcomes.selected[:n_stats])
    counts = np.bincount(sel, minlength=3)[:3]
    u_m = np.count_nonzero(outcomes.copied_into_main[:n_stats])
    u_s = np.count_nonzero(outcomes.copied_into_shadow[:n_stats])
    return np.array([counts[Selection.MAIN], counts[Selection.SHADOW], counts[Selection.MIC],
                     u_m, u_s], dtype=float) / n_stats


def alpha_from_time_constant(t_f: float, t_c: float) -> float:
    if t_f <= 0 or t_c <= 0:
        raise ConfigError("frame period and time constant must be positive")
    return math.exp(-t_f / t_c)


@dataclass
class SmootherState:
    value: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_SEED))
    alpha: float = alpha_from_time_constant(512 / 48000, TIME_CONSTANT)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")


def init_smoother(seed_value=DEFAULT_SEED, alpha: float | None = None,
                  t_f: float = 512 / 48000, t_c: float = TIME_CONSTANT) -> SmootherState:
    seed = np.array(seed_value, dtype=float)
    if seed.shape != (5,):
        raise ConfigError("seed must have 5 elements")
    if np.any(seed < 0) or np.any(seed > 1) or abs(seed[:3].sum() - 1.0) > 1e-12:
        raise ConfigError("seed must lie in [0, 1] with P_m + P_s + P_d = 1")
    if alpha is None:
        alpha = alpha_from_time_constant(t_f, t_c)
    return SmootherState(seed, alpha)


def smooth(state: SmootherState, s_raw) -> np.ndarray:
    """One EMA step; updates ``state`` and returns a copy of the new value."""
    state.value = state.alpha * state.value + (1.0 - state.alpha) * np.asarray(s_raw, float)
    return state.value.copy()


def write_stats_csv(path, smoothed, first_frame: int = 0) -> None:
    smoothed = np.asarray(smoothed, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("frame",) + STAT_NAMES)
        for i, row in enumerate(smoothed):
            w.writerow([first_frame + i] + [repr(float(v)) for v in row])


def read_stats_csv(path):
    """Returns (frames[int], stats[n, 5]); raises InputError with the line number."""
    path = Path(path)
    frames, rows = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != ("frame",) + STAT_NAMES:
            raise InputError(f"{path}:1: expected header frame,{','.join(STAT_NAMES)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                if len(rec) != 6:
                    raise ValueError(f"expected 6 fields, got {len(rec)}")
                frames.append(int(rec[0]))
                rows.append([float(v) for v in rec[1:]])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return np.array(frames, dtype=int), np.array(rows, dtype=float).reshape(-1, 5)
