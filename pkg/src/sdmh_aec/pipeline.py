"""End-to-end canceller: filterbank, hypothesis control, statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import filterbank
from .adaptive import PnlmsParams
from .config import RunConfig
from .controller import BandHypothesisState, step_frame
from .errors import InputError
from .stats import aggregate, alpha_from_time_constant, init_smoother, smooth


@dataclass
class AecResult:
    raw: np.ndarray        # (n_frames, 5)
    smoothed: np.ndarray   # (n_frames, 5)
    residual: np.ndarray | None
    first_recorded: int    # frame index of the first post-truncation row

    @property
    def recorded(self) -> np.ndarray:
        return self.smoothed[self.first_recorded:]


def stats_latency_frames(cfg: RunConfig | None = None, smoothed: bool = True) -> float:
    """How many frames the statistics trail the signal they describe.

    Three parts: the analysis window of frame ``i`` is centred
    ``overlap / 2 - 1`` frames before its last sample, the microphone lag,
    and (for the smoothed stream) the mean delay ``alpha / (1 - alpha)`` of
    the exponential smoother. An event at frame ``t`` shows up around
    ``t + stats_latency_frames()``.
    """
    cfg = cfg or RunConfig()
    frames = filterbank.OVERLAP / 2 - 1 + cfg.mic_delay_frames
    if smoothed:
        alpha = alpha_from_time_constant(cfg.frame / cfg.sample_rate, cfg.t_c)
        frames += alpha / (1.0 - alpha)
    return frames


def run_aec(x, d, cfg: RunConfig | None = None, synthesize: bool = True) -> AecResult:
    """Cancel the echo of ``x`` in ``d`` and collect per-frame statistics."""
    cfg = cfg or RunConfig()
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if x.shape != d.shape or x.ndim != 1:
        raise InputError(f"reference and microphone must be equal-length mono, got {x.shape} and {d.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(d))):
        raise InputError("signals contain non-finite samples")

    X, _ = filterbank.analyze_signal(x, cfg.frame, cfg.bands)
    D, d_nyq = filterbank.analyze_signal(d, cfg.frame, cfg.bands)
    n_frames = X.shape[0]
    # fixed lag on the microphone side leaves room for the non-causal part
    # of the band-domain echo path
    lag = cfg.mic_delay_frames
    if lag:
        D = np.concatenate([np.zeros((lag, cfg.bands), complex), D[:-lag]])
        d_nyq = np.concatenate([np.zeros(lag), d_nyq[:-lag]])

    state = BandHypothesisState.create(cfg.bands, cfg.taps, pnlms=PnlmsParams(cfg.pnlms_rho, cfg.pnlms_delta))
    smoother = init_smoother(cfg.smoother_seed, t_f=cfg.frame / cfg.sample_rate, t_c=cfg.t_c)
    raw = np.empty((n_frames, 5))
    smoothed = np.empty((n_frames, 5))
    R = np.empty_like(D) if synthesize else None
    for i in range(n_frames):
        out = step_frame(state, X[i], D[i], cfg.control)
        raw[i] = aggregate(out, cfg.stats_bands)
        smoothed[i] = smooth(smoother, raw[i])
        if synthesize:
            R[i] = out.residual

    residual = None
    if synthesize:
        # Nyquist bin carries no echo estimate; pass the microphone through
        y = filterbank.synthesize_signal(R, d_nyq, cfg.frame)
        delay = (filterbank.OVERLAP - 1 + lag) * cfg.frame
        residual = np.zeros(len(d))
        m = min(len(y) - delay, len(d))
        residual[:m] = y[delay:delay + m]

    first = min(int(round(cfg.truncate_s * cfg.sample_rate / cfg.frame)), n_frames)
    return AecResult(raw, smoothed, residual, first)
