"""Uniform complex-modulated (DFT) filterbank with 2x oversampling.

A frame of ``hop`` real samples maps to ``band_count`` complex sub-band
samples. Band ``k`` is centred on ``k * fs / (2 * band_count)`` Hz, so with
the defaults (48 kHz, 512 bands, hop 512) band spacing is 46.875 Hz and bands
0..99 cover 0-4687.5 Hz.

Analysis windows the last ``P = 16 * hop`` input samples with the prototype,
folds them to the FFT size ``M = 2 * band_count`` and takes an FFT. Synthesis
is the transpose: inverse FFT, periodic extension to ``P``, window, overlap-add.

The prototype is a truncated root-raised-cosine with full roll-off,

    p(t) = cos(2 pi t / M) / (1 - (4 t / M)^2),   t = n - (P - 1) / 2,

whose untruncated spectrum is ``cos(pi f / (2 df))`` for ``|f| < df``
(``df`` = band spacing) and zero elsewhere: squared responses of adjacent
bands sum to one and nothing reaches the decimation alias at ``2 df``. The
truncation to 16 hops keeps reconstruction error near -59 dB. Analysis and
synthesis use the same window, scaled for unity gain through the chain.

For real input the FFT bins 0 and ``band_count`` are real. Bin
``band_count`` (Nyquist) is not one of the exposed bands; it travels in
:attr:`SubbandFrame.nyquist` so that synthesis can still reconstruct.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, SizeError

SAMPLE_RATE = 48000
HOP = 512
BAND_COUNT = 512
OVERLAP = 16


def prototype_window(hop: int = HOP, overlap: int = OVERLAP) -> np.ndarray:
    """Prototype of length ``overlap * hop`` (FFT size ``2 * hop``)."""
    if hop <= 0:
        raise ConfigError(f"hop must be positive, got {hop}")
    if overlap < 2 or overlap % 2:
        raise ConfigError("overlap must be an even number of hops")
    size = overlap * hop
    nfft = 2 * hop
    t = np.arange(size) - (size - 1) / 2.0
    p = np.cos(2 * np.pi * t / nfft) / (1.0 - (4.0 * t / nfft) ** 2)
    # mean over the hop-periodic sum of squares sets the chain gain
    return p / np.sqrt(np.mean(np.sum(p.reshape(overlap, hop) ** 2, axis=0)))


def band_center_hz(k, band_count: int = BAND_COUNT, sample_rate: int = SAMPLE_RATE):
    return np.asarray(k) * sample_rate / (2.0 * band_count)


@dataclass
class SubbandFrame:
    """One frame of complex sub-band samples."""

    bands: np.ndarray
    frame_index: int = 0
    nyquist: float = 0.0

    def __len__(self) -> int:
        return len(self.bands)


@dataclass
class AnalysisState:
    hop: int = HOP
    band_count: int = BAND_COUNT
    prototype: np.ndarray = None
    input_history: np.ndarray = field(default=None, repr=False)
    frames_done: int = 0

    def __post_init__(self):
        if self.band_count != self.hop:
            raise ConfigError("band_count must equal hop (2x oversampled layout)")
        if self.prototype is None:
            self.prototype = prototype_window(self.hop)
        self.prototype = np.asarray(self.prototype, dtype=float)
        if len(self.prototype) % (2 * self.hop):
            raise ConfigError("prototype length must be a multiple of 2 * hop")
        if self.input_history is None:
            self.input_history = np.zeros(len(self.prototype))

    def reset(self) -> None:
        self.input_history[:] = 0.0
        self.frames_done = 0


@dataclass
class SynthesisState:
    hop: int = HOP
    band_count: int = BAND_COUNT
    prototype: np.ndarray = None
    overlap_buffer: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.band_count != self.hop:
            raise ConfigError("band_count must equal hop (2x oversampled layout)")
        if self.prototype is None:
            self.prototype = prototype_window(self.hop)
        self.prototype = np.asarray(self.prototype, dtype=float)
        if len(self.prototype) % (2 * self.hop):
            raise ConfigError("prototype length must be a multiple of 2 * hop")
        if self.overlap_buffer is None:
            self.overlap_buffer = np.zeros(len(self.prototype))

    def reset(self) -> None:
        self.overlap_buffer[:] = 0.0


def analyze(frame, state: AnalysisState) -> SubbandFrame:
    """Push ``hop`` new samples and return the sub-band frame they complete."""
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (state.hop,):
        raise SizeError(f"expected a frame of {state.hop} samples, got shape {frame.shape}")
    hist = state.input_history
    hist[: -state.hop] = hist[state.hop :]
    hist[-state.hop :] = frame
    nfft = 2 * state.band_count
    folded = (hist * state.prototype).reshape(-1, nfft).sum(axis=0)
    spec = np.fft.rfft(folded)
    out = SubbandFrame(spec[: state.band_count].copy(), state.frames_done, float(spec[-1].real))
    state.frames_done += 1
    return out


def synthesize(bands, state: SynthesisState) -> np.ndarray:
    """Overlap-add one sub-band frame; returns ``hop`` output samples.

    ``bands`` may be a :class:`SubbandFrame` or a bare complex array (the
    Nyquist bin is then taken as zero).
    """
    if isinstance(bands, SubbandFrame):
        values, nyq = bands.bands, bands.nyquist
    else:
        values, nyq = bands, 0.0
    values = np.asarray(values)
    if values.shape != (state.band_count,):
        raise SizeError(f"expected {state.band_count} bands, got shape {values.shape}")
    nfft = 2 * state.band_count
    spec = np.empty(state.band_count + 1, dtype=complex)
    spec[:-1] = values
    spec[-1] = nyq
    block = np.fft.irfft(spec, nfft)
    reps = len(state.prototype) // nfft
    buf = state.overlap_buffer
    buf += np.tile(block, reps) * state.prototype
    out = buf[: state.hop].copy()
    buf[: -state.hop] = buf[state.hop :]
    buf[-state.hop :] = 0.0
    return out


def round_trip_delay(state: AnalysisState, state2: SynthesisState) -> int:
    """Latency in samples of analyze followed by synthesize."""
    if len(state.prototype) != len(state2.prototype) or not np.array_equal(
        state.prototype, state2.prototype
    ):
        raise ConfigError("analysis and synthesis prototypes differ")
    return len(state.prototype) - state.hop


def analyze_signal(x, hop: int = HOP, band_count: int = BAND_COUNT, chunk: int = 256):
    """Analyse a whole signal; returns (bands[n_frames, band_count], nyquist[n_frames]).

    Equivalent to calling :func:`analyze` frame by frame from a zero state.
    Trailing samples that do not fill a frame are dropped.
    """
    x = np.asarray(x, dtype=float)
    n_frames = len(x) // hop
    proto = prototype_window(hop)
    nfft = 2 * band_count
    padded = np.concatenate([np.zeros(len(proto) - hop), x[: n_frames * hop]])
    windows = sliding_window_view(padded, len(proto))[::hop]
    bands = np.empty((n_frames, band_count), complex)
    nyquist = np.empty(n_frames)
    for a in range(0, n_frames, chunk):
        b = min(a + chunk, n_frames)
        folded = (windows[a:b] * proto).reshape(b - a, -1, nfft).sum(axis=1)
        spec = np.fft.rfft(folded, axis=1)
        bands[a:b] = spec[:, :band_count]
        nyquist[a:b] = spec[:, band_count].real
    return bands, nyquist


def synthesize_signal(bands, nyquist=None, hop: int = HOP) -> np.ndarray:
    """Inverse of :func:`analyze_signal`; output lags the input by the round-trip delay."""
    bands = np.asarray(bands)
    n_frames, band_count = bands.shape
    state = SynthesisState(hop=hop, band_count=band_count)
    out = np.empty(n_frames * hop)
    for i in range(n_frames):
        nyq = 0.0 if nyquist is None else nyquist[i]
        out[i * hop : (i + 1) * hop] = synthesize(SubbandFrame(bands[i], i, nyq), state)
    return out
