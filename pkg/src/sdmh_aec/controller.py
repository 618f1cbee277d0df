"""Main/shadow hypothesis control for every sub-band.

Per band and frame: both filters predict, the copy heuristic compares the
instantaneous residual powers, the lowest-power signal among the two
residuals and the microphone becomes the output, then the main filter adapts
with PNLMS at a fixed step and the shadow with NLMS at the variable step
``min(|y_s|^2 / |e_s|^2, 0.5)``.

States hold arrays with a leading band axis, so :func:`step_frame` handles all
bands at once; :func:`step_band` is the same arithmetic on a single band.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import adaptive
from .adaptive import FilterState, PnlmsParams
from .errors import ConfigError, InputError

POWER_FLOOR = 1e-30


class Selection(IntEnum):
    MAIN = 0
    SHADOW = 1
    MIC = 2


@dataclass
class ControlConfig:
    copy_threshold_db: float = 10.0
    shadow_to_main_holdover: int = 2
    main_to_shadow_holdover: int = 5
    mu_main: float = 0.5

    def __post_init__(self):
        if self.copy_threshold_db <= 0:
            raise ConfigError("copy threshold must be positive")
        if self.shadow_to_main_holdover < 1 or self.main_to_shadow_holdover < 1:
            raise ConfigError("holdover counts must be at least 1")
        if not 0 <= self.mu_main <= adaptive.MU_MAX:
            raise ConfigError("mu_main must lie in [0, 0.5]")

    @property
    def copy_ratio(self) -> float:
        return 10.0 ** (self.copy_threshold_db / 10.0)


@dataclass
class BandHypothesisState:
    """Main/shadow pair plus holdover counters.

    ``shadow_better_count`` counts consecutive frames in which the main
    residual was at least the threshold above the shadow's (so a
    shadow-to-main copy is pending), ``main_better_count`` the converse.
    """

    main: FilterState
    shadow: FilterState
    shadow_better_count: np.ndarray
    main_better_count: np.ndarray

    @classmethod
    def create(cls, n_bands: int | None = None, n_taps: int = adaptive.DEFAULT_TAPS,
               eps: float = adaptive.DEFAULT_EPS, pnlms: PnlmsParams | None = None):
        bands = () if n_bands is None else n_bands
        counter_shape = () if n_bands is None else (n_bands,)
        return cls(
            main=FilterState.zeros(n_taps, bands, eps=eps, pnlms=pnlms or PnlmsParams()),
            shadow=FilterState.zeros(n_taps, bands, eps=eps),
            shadow_better_count=np.zeros(counter_shape, int),
            main_better_count=np.zeros(counter_shape, int),
        )

    def copy(self) -> "BandHypothesisState":
        return BandHypothesisState(self.main.copy(), self.shadow.copy(),
                                   np.copy(self.shadow_better_count),
                                   np.copy(self.main_better_count))


@dataclass(frozen=True)
class BandOutcome:
    e_m: complex
    e_s: complex
    selected: Selection
    copied_into_main: bool
    copied_into_shadow: bool
    r_band: complex


@dataclass(frozen=True)
class FrameOutcomes:
    """Per-band outcomes of one frame, stored column-wise."""

    e_m: np.ndarray
    e_s: np.ndarray
    selected: np.ndarray
    copied_into_main: np.ndarray
    copied_into_shadow: np.ndarray
    residual: np.ndarray

    def __len__(self) -> int:
        return len(self.selected)

    def __getitem__(self, k) -> BandOutcome:
        return BandOutcome(complex(self.e_m[k]), complex(self.e_s[k]),
                           Selection(int(self.selected[k])),
                           bool(self.copied_into_main[k]), bool(self.copied_into_shadow[k]),
                           complex(self.residual[k]))


def update_copy_logic(p_m, p_s, shadow_better_count, main_better_count,
                      cfg: ControlConfig | None = None):
    """Advance the holdover counters; returns (copy_into_main, copy_into_shadow, sb, mb).

    Works elementwise on arrays; the returned counters are new arrays.
    """
    cfg = cfg or ControlConfig()
    p_m = np.asarray(p_m, dtype=float)
    p_s = np.asarray(p_s, dtype=float)
    if np.any(p_m < 0) or np.any(p_s < 0):
        raise InputError("residual powers must be non-negative")
    pm = np.maximum(p_m, POWER_FLOOR)
    ps = np.maximum(p_s, POWER_FLOOR)
    ratio = cfg.copy_ratio
    sb = np.where(pm >= ps * ratio, np.asarray(shadow_better_count) + 1, 0)
    mb = np.where(ps >= pm * ratio, np.asarray(main_better_count) + 1, 0)
    into_main = sb >= cfg.shadow_to_main_holdover
    into_shadow = mb >= cfg.main_to_shadow_holdover
    fired = into_main | into_shadow
    sb = np.where(fired, 0, sb)
    mb = np.where(fired, 0, mb)
    return into_main, into_shadow, sb, mb


def select_min_power(e_m, e_s, d):
    """Index of the lowest-power candidate; ties go to main, then shadow."""
    powers = np.stack([np.abs(e_m) ** 2, np.abs(e_s) ** 2, np.abs(d) ** 2])
    sel = np.argmin(powers, axis=0)
    return Selection(int(sel)) if sel.ndim == 0 else sel


def _step(state: BandHypothesisState, x, d, cfg: ControlConfig):
    y_m = adaptive.push_and_predict(state.main, x)
    y_s = adaptive.push_and_predict(state.shadow, x)
    e_m = d - y_m
    e_s = d - y_s

    into_main, into_shadow, sb, mb = update_copy_logic(
        np.abs(e_m) ** 2, np.abs(e_s) ** 2,
        state.shadow_better_count, state.main_better_count, cfg)
    state.shadow_better_count = sb
    state.main_better_count = mb

    # a copied filter now produces exactly the source's prediction
    if np.any(into_main):
        state.main.taps[into_main] = state.shadow.taps[into_main]
    if np.any(into_shadow):
        state.shadow.taps[into_shadow] = state.main.taps[into_shadow]
    e_m_adapt = np.where(into_main, e_s, e_m)
    e_s_adapt = np.where(into_shadow, e_m, e_s)
    y_s_adapt = np.where(into_shadow, y_m, y_s)

    sel = np.asarray(select_min_power(e_m, e_s, d))
    r = np.choose(sel, [e_m, e_s, d])

    adaptive.pnlms_update(state.main, e_m_adapt, cfg.mu_main)
    adaptive.nlms_update(state.shadow, e_s_adapt, adaptive.vss_shadow_step(y_s_adapt, e_s_adapt))
    return e_m, e_s, sel, into_main, into_shadow, r


def step_band(state: BandHypothesisState, x_k, d_k, cfg: ControlConfig | None = None) -> BandOutcome:
    """Process one frame of one band; ``state`` must be single-band."""
    cfg = cfg or ControlConfig()
    if not (np.isfinite(x_k) and np.isfinite(d_k)):
        raise InputError("non-finite band input")
    e_m, e_s, sel, im, is_, r = _step(state, complex(x_k), complex(d_k), cfg)
    return BandOutcome(complex(e_m), complex(e_s), Selection(int(sel)),
                       bool(im), bool(is_), complex(r))


def step_frame(states: BandHypothesisState, x_frame, d_frame,
               cfg: ControlConfig | None = None) -> FrameOutcomes:
    """Process one frame for all bands held in ``states``."""
    cfg = cfg or ControlConfig()
    x = np.asarray(getattr(x_frame, "bands", x_frame))
    d = np.asarray(getattr(d_frame, "bands", d_frame))
    n_bands = states.main.taps.shape[0]
    if x.shape != (n_bands,) or d.shape != (n_bands,):
        raise InputError(f"expected {n_bands} bands, got {x.shape} and {d.shape}")
    bad = ~(np.isfinite(x) & np.isfinite(d))
    if bad.any():
        raise InputError(f"non-finite input in band {int(np.flatnonzero(bad)[0])}")
    e_m, e_s, sel, im, is_, r = _step(states, x, d, cfg)
    return FrameOutcomes(e_m, e_s, sel, im, is_, r)
