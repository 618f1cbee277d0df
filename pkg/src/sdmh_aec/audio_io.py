"""Float32 mono WAV reading and writing."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import InputError

SAMPLE_RATE = 48000


class WavIOError(OSError):
    """Raised when a WAV file cannot be read or written at the OS level."""


def write_wav(path, samples, sample_rate: int = SAMPLE_RATE) -> None:
    samples = np.asarray(samples, dtype=np.float32)
    if samples.ndim != 1:
        raise InputError(f"{path}: only mono signals are supported")
    try:
        wavfile.write(str(path), sample_rate, samples)
    except OSError as exc:
        raise WavIOError(f"{path}: {exc.strerror or exc}") from exc


def read_wav(path, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Load a float32 mono WAV at ``sample_rate``; returns float64 samples."""
    path = Path(path)
    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError as exc:
        raise WavIOError(f"{path}: no such file") from exc
    except OSError as exc:
        raise WavIOError(f"{path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: not a readable WAV file ({exc})") from None
    if data.dtype != np.float32:
        raise InputError(f"{path}: expected 32-bit float samples, got {data.dtype}")
    if data.ndim != 1:
        raise InputError(f"{path}: expected mono, got {data.shape[1]} channels")
    if rate != sample_rate:
        raise InputError(f"{path}: sample rate {rate} Hz, expected {sample_rate} Hz")
    return data.astype(np.float64)


def read_pair(ref_path, mic_path, sample_rate: int = SAMPLE_RATE):
    x = read_wav(ref_path, sample_rate)
    d = read_wav(mic_path, sample_rate)
    if len(x) != len(d):
        raise InputError(
            f"length mismatch: {ref_path} has {len(x)} samples, {mic_path} has {len(d)}"
        )
    return x, d
