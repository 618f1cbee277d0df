"""Complex adaptive FIR filters for one or many sub-bands.

Every function works on a :class:`FilterState` whose arrays have shape
``(..., L)``: a single band uses shape ``(L,)``, a whole filterbank
``(n_bands, L)``. Scalars passed in (``x_new``, ``e``, ``mu``) broadcast
against the leading axes.

Prediction is ``y = sum_l x[l] * h[l]`` with the delay line stored
most-recent-first. With that convention the normalised gradient step that
drives the a-posteriori error to ``(1 - mu) e`` is
``h += mu * e * conj(x) / (x^H x + eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError

DEFAULT_TAPS = 20
DEFAULT_EPS = 1e-10
VSS_FLOOR = 1e-20
MU_MAX = 0.5
MISALIGNMENT_FLOOR_DB = -300.0


@dataclass
class PnlmsParams:
    rho: float = 0.01
    delta_p: float = 0.01


@dataclass
class FilterState:
    taps: np.ndarray
    delay_line: np.ndarray
    eps: float = DEFAULT_EPS
    pnlms: PnlmsParams | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigError("regularisation eps must be positive")
        if self.taps.shape != self.delay_line.shape:
            raise ConfigError("taps and delay line must have the same shape")

    @classmethod
    def zeros(cls, n_taps: int = DEFAULT_TAPS, bands: int | tuple = (), *,
              eps: float = DEFAULT_EPS, pnlms: PnlmsParams | None = None) -> "FilterState":
        shape = (bands,) if isinstance(bands, int) else tuple(bands)
        shape = shape + (n_taps,)
        return cls(np.zeros(shape, complex), np.zeros(shape, complex), eps, pnlms)

    @property
    def n_taps(self) -> int:
        return self.taps.shape[-1]

    def copy(self) -> "FilterState":
        return FilterState(self.taps.copy(), self.delay_line.copy(), self.eps, self.pnlms)


def _check_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise InputError(f"non-finite {what}")


def push_and_predict(state: FilterState, x_new) -> np.ndarray | complex:
    """Shift ``x_new`` into the delay line and return the echo prediction."""
    _check_finite(x_new, "reference sample")
    dl = state.delay_line
    dl[..., 1:] = dl[..., :-1]
    dl[..., 0] = x_new
    return predict(state)


def predict(state: FilterState):
    y = np.sum(state.delay_line * state.taps, axis=-1)
    return y[()] if y.ndim == 0 else y


def nlms_update(state: FilterState, e, mu) -> FilterState:
    """In-place normalised LMS step; returns ``state`` for chaining."""
    _check_finite(e, "error")
    x = state.delay_line
    energy = np.sum(x.real**2 + x.imag**2, axis=-1)
    gain = np.asarray(mu * e / (energy + state.eps))
    state.taps += gain[..., None] * np.conj(x)
    return state


def proportionate_gains(taps, rho: float = 0.01, delta_p: float = 0.01) -> np.ndarray:
    """Diagonal of the PNLMS gain matrix; averages to 1 along the last axis."""
    mag = np.abs(taps)
    floor = rho * np.maximum(delta_p, mag.max(axis=-1, keepdims=True))
    gamma = np.maximum(floor, mag)
    return gamma / gamma.mean(axis=-1, keepdims=True)


def pnlms_update(state: FilterState, e, mu) -> FilterState:
    """In-place proportionate NLMS step; taps with larger magnitude adapt faster."""
    if state.pnlms is None:
        raise ConfigError("filter state has no PNLMS parameters")
    _check_finite(e, "error")
    x = state.delay_line
    g = proportionate_gains(state.taps, state.pnlms.rho, state.pnlms.delta_p)
    energy = np.sum(g * (x.real**2 + x.imag**2), axis=-1)
    gain = np.asarray(mu * e / (energy + state.eps))
    state.taps += gain[..., None] * g * np.conj(x)
    return state


def vss_shadow_step(y_s, e_s):
    """Shadow step size ``min(|y_s|^2 / |e_s|^2, 0.5)``."""
    num = np.abs(y_s) ** 2
    den = np.abs(e_s) ** 2 + VSS_FLOOR
    return np.minimum(num / den, MU_MAX)


def misalignment(h_est, h_ref) -> float:
    """Normalised coefficient error in dB (floor -300 dB for an exact match)."""
    h_est = np.asarray(h_est)
    h_ref = np.asarray(h_ref)
    if h_est.shape != h_ref.shape:
        raise InputError("coefficient vectors differ in length")
    ref = np.sum(np.abs(h_ref) ** 2)
    if ref == 0:
        raise InputError("reference coefficients are all zero")
    num = np.sum(np.abs(h_est - h_ref) ** 2)
    if num == 0:
        return MISALIGNMENT_FLOOR_DB
    return float(10.0 * np.log10(num / ref))
