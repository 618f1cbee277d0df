"""Synthetic reference/microphone scenes for the four acoustic event classes.

The microphone follows ``d = h * x + v``: the reference played through a room
impulse response plus whatever noise the event adds. Event classes:

* steady state: echo only (plus an optional low noise floor)
* double talk: a speech-like interferer inside the event window
* echo path change: the path cross-fades to a mildly perturbed one at the
  event start and back at the event end
* repositioning: a larger path change at the same instants, each transition
  accompanied by a short contact-noise burst
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import signal

from .audio_io import write_wav
from .errors import ConfigError, InputError

SAMPLE_RATE = 48000
RIR_LENGTH = 9600
DIRECT_LAG = 32
CROSSFADE_S = 0.05
BURST_S = 0.03
GRASP_OFFSET_DB = 10.0
REFERENCE_PEAK_DBFS = -6.0
FRAME_500_S = 500 * 512 / SAMPLE_RATE


class EventLabel(str, Enum):
    STEADY_STATE = "SteadyState"
    DOUBLE_TALK = "DoubleTalk"
    ECHO_PATH_CHANGE = "EchoPathChange"
    REPOSITIONING = "Repositioning"

    @classmethod
    def parse(cls, value) -> "EventLabel":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ConfigError(f"unknown event label {value!r}") from None


LABELS = tuple(EventLabel)
DEFAULT_SEVERITY = {EventLabel.ECHO_PATH_CHANGE: 0.3, EventLabel.REPOSITIONING: 0.7}
# echo-to-interferer ratio for double talk; level of the put-down burst for
# repositioning (the grasp burst is GRASP_OFFSET_DB quieter)
DEFAULT_SNR_DB = {EventLabel.DOUBLE_TALK: 0.0, EventLabel.REPOSITIONING: -10.0}


def _rng(seed, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


@dataclass
class RoomIR:
    h: np.ndarray
    t60: float
    seed: int


def gen_rir(seed: int, t60: float = 0.15, length: int = RIR_LENGTH,
            sample_rate: int = SAMPLE_RATE) -> RoomIR:
    """Exponentially decaying noise tail behind a unit direct-path spike at lag 32."""
    if t60 <= 0:
        raise ConfigError("T60 must be positive")
    g = _rng(seed, 0).standard_normal(length)
    lags = np.arange(length)
    h = g * np.exp(-lags * 3.0 * np.log(10.0) / (t60 * sample_rate))
    h[:DIRECT_LAG] = 0.0
    h[DIRECT_LAG] = 1.0
    return RoomIR(h / np.linalg.norm(h), t60, seed)


def perturb_rir(rir: RoomIR, severity: float, seed: int) -> RoomIR:
    """Blend ``rir`` with an independent room; severity 1 replaces it entirely."""
    if not 0 < severity <= 1:
        raise ConfigError(f"severity must lie in (0, 1], got {severity}")
    other = gen_rir(seed, rir.t60, len(rir.h))
    h = (1.0 - severity) * rir.h + severity * other.h
    return RoomIR(h / np.linalg.norm(h), rir.t60, seed)


def pink_noise(n: int, rng: np.random.Generator, sample_rate: int = SAMPLE_RATE,
               f_min: float = 20.0) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spec /= np.sqrt(np.maximum(f, f_min))
    out = np.fft.irfft(spec, n)
    return out / np.std(out)


def gen_reference(duration: float, seed: int, sample_rate: int = SAMPLE_RATE,
                  n_tones: int = 24) -> np.ndarray:
    """Music stand-in: pink noise under a bed of slowly gliding tones, peak -6 dBFS."""
    if duration <= 0:
        raise ConfigError("duration must be positive")
    rng = _rng(seed, 1)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    bed = np.zeros(n)
    base = np.geomspace(60.0, 8000.0, n_tones) * rng.uniform(0.9, 1.1, n_tones)
    for f0 in base:
        rate = rng.uniform(0.05, 0.4)
        depth = rng.uniform(0.01, 0.04) * f0
        phase = rng.uniform(0, 2 * np.pi, 2)
        # instantaneous frequency f0 + depth*sin(2 pi rate t)
        arg = 2 * np.pi * f0 * t - depth / rate * np.cos(2 * np.pi * rate * t + phase[0])
        amp = rng.uniform(0.3, 1.0) * (1.0 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.1, 0.5) * t))
        bed += amp * np.sin(arg + phase[1]) / np.sqrt(f0 / 60.0)
    bed /= np.std(bed)
    x = pink_noise(n, rng, sample_rate) + bed
    peak = np.max(np.abs(x))
    return x * (10.0 ** (REFERENCE_PEAK_DBFS / 20.0) / peak)


def speech_like(n: int, rng: np.random.Generator, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Formant-filtered noise with a roughly 4 Hz syllabic envelope (unit RMS)."""
    src = rng.standard_normal(n)
    out = np.zeros(n)
    for fc, bw in ((500.0, 120.0), (1500.0, 180.0), (2500.0, 250.0)):
        fc = fc * rng.uniform(0.85, 1.15)
        r = np.exp(-np.pi * bw / sample_rate)
        a = [1.0, -2.0 * r * np.cos(2 * np.pi * fc / sample_rate), r * r]
        out += signal.lfilter([1.0 - r], a, src)
    t = np.arange(n) / sample_rate
    rate = 4.0 * rng.uniform(0.8, 1.2)
    env = 0.5 - 0.5 * np.cos(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi))
    out *= env**1.5
    return out / np.sqrt(np.mean(out**2))


def contact_burst(n: int, rng: np.random.Generator, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Short decaying low-passed noise burst (unit RMS), like a hand on the chassis."""
    b, a = signal.butter(2, 3000.0, fs=sample_rate)
    burst = signal.lfilter(b, a, rng.standard_normal(n))
    burst *= np.exp(-np.arange(n) / (0.3 * n))
    return burst / np.sqrt(np.mean(burst**2))


@dataclass
class Scenario:
    label: EventLabel
    seed: int
    duration: float = 12.0
    event_start: float = FRAME_500_S
    event_duration: float = 1.0
    snr_db: float | None = None
    severity: float | None = None
    t60: float = 0.15
    noise_floor_db: float | None = None

    def __post_init__(self):
        self.label = EventLabel.parse(self.label)
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if not 0 <= self.event_start < self.duration:
            raise ConfigError("event_start must lie inside the clip")
        if self.event_duration <= 0 or self.event_start + self.event_duration > self.duration:
            raise ConfigError("event window must lie inside the clip")
        if self.severity is None:
            self.severity = DEFAULT_SEVERITY.get(self.label, 0.0)
        if self.snr_db is None:
            self.snr_db = DEFAULT_SNR_DB.get(self.label, 0.0)


@dataclass
class RenderedScene:
    x: np.ndarray
    d: np.ndarray
    scenario: Scenario
    # (start_s, end_s, kind) entries
    truth: list = field(default_factory=list)
    sample_rate: int = SAMPLE_RATE


def echo(x, h) -> np.ndarray:
    return signal.fftconvolve(x, h)[: len(x)]


def _path_weight(n: int, start: int, stop: int, fade: int) -> np.ndarray:
    """0 before ``start``, raised-cosine ramp to 1, back to 0 from ``stop``."""
    w = np.zeros(n)
    ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(fade) / fade)
    a = min(start + fade, n)
    w[start:a] = ramp[: a - start]
    w[a:stop] = 1.0
    b = min(stop + fade, n)
    w[stop:b] = 1.0 - ramp[: b - stop]
    return w


def render_scenario(sc: Scenario, interferer=None, sample_rate: int = SAMPLE_RATE) -> RenderedScene:
    """Render reference and microphone signals for one scenario.

    ``interferer`` optionally replaces the synthetic double-talk signal (it is
    looped or trimmed to the event window).
    """
    n = int(round(sc.duration * sample_rate))
    x = gen_reference(sc.duration, sc.seed, sample_rate)
    rir = gen_rir(sc.seed, sc.t60)
    y = echo(x, rir.h)
    d = y.copy()
    start = int(round(sc.event_start * sample_rate))
    stop = min(start + int(round(sc.event_duration * sample_rate)), n)
    truth = []
    echo_power = np.mean(y**2)

    if sc.label is EventLabel.DOUBLE_TALK:
        seg = stop - start
        if interferer is None:
            v = speech_like(seg, _rng(sc.seed, 2), sample_rate)
        else:
            src = np.asarray(interferer, dtype=float)
            if src.size == 0 or not np.any(src):
                raise InputError("interferer signal is empty or silent")
            v = np.resize(src, seg)
            v = v / np.sqrt(np.mean(v**2))
        fade = min(int(0.01 * sample_rate), seg // 2)
        taper = np.ones(seg)
        taper[:fade] = np.linspace(0, 1, fade, endpoint=False)
        taper[seg - fade:] = taper[:fade][::-1]
        d[start:stop] += v * taper * np.sqrt(echo_power / 10.0 ** (sc.snr_db / 10.0))
        truth.append((start / sample_rate, stop / sample_rate, "double_talk"))

    elif sc.label in (EventLabel.ECHO_PATH_CHANGE, EventLabel.REPOSITIONING):
        other = perturb_rir(rir, sc.severity, sc.seed + 7919)
        y2 = echo(x, other.h)
        w = _path_weight(n, start, stop, int(round(CROSSFADE_S * sample_rate)))
        d = (1.0 - w) * y + w * y2
        truth.append((start / sample_rate, stop / sample_rate, "path_changed"))
        if sc.label is EventLabel.REPOSITIONING:
            rng = _rng(sc.seed, 3)
            blen = int(round(BURST_S * sample_rate))
            # putting the device down is the harder impact
            for at, level_db in ((start, sc.snr_db + GRASP_OFFSET_DB), (stop, sc.snr_db)):
                gain = np.sqrt(echo_power / 10.0 ** (level_db / 10.0))
                b = contact_burst(blen, rng, sample_rate)[: n - at]
                d[at:at + len(b)] += gain * b
                truth.append((at / sample_rate, (at + len(b)) / sample_rate, "contact_noise"))

    if sc.noise_floor_db is not None:
        floor = _rng(sc.seed, 4).standard_normal(n)
        d = d + floor * np.sqrt(echo_power * 10.0 ** (sc.noise_floor_db / 10.0))
    return RenderedScene(x, d, sc, truth, sample_rate)


MANIFEST_HEADER = ("id", "label", "seed", "path_ref", "path_mic", "event_start_s", "event_dur_s")


@dataclass
class ManifestRow:
    id: str
    label: EventLabel
    seed: int
    path_ref: str
    path_mic: str
    event_start_s: float
    event_dur_s: float


def dataset_scenarios(n_per_class: int = 25, base_seed: int = 0, classes=None,
                      duration: float = 12.0) -> list:
    """Randomised scenario list, ``n_per_class`` per class, as (id, Scenario) pairs.

    Scene ``i`` uses the same room and reference material in every class, so
    classes differ only in the event. Double-talk level is drawn uniformly
    from [-5, 10] dB echo-to-interferer ratio; path-change severities are
    jittered by up to 20% either way; burst levels by up to 3 dB.
    """
    if n_per_class < 2:
        raise ConfigError("n_per_class must be at least 2")
    classes = LABELS if classes is None else tuple(EventLabel.parse(c) for c in classes)
    rng = np.random.default_rng([int(base_seed), 0x5EED])
    scene_seeds = rng.integers(0, 2**31 - 1, n_per_class)
    # one jitter row per (class, scene) so a class filter leaves the others unchanged
    jitter = rng.uniform(0.0, 1.0, (len(LABELS), n_per_class, 2))
    out = []
    for label in classes:
        c = LABELS.index(label)
        for i in range(n_per_class):
            u, v = jitter[c, i]
            kw = {}
            if label is EventLabel.DOUBLE_TALK:
                kw["snr_db"] = -5.0 + 15.0 * u
            elif label in DEFAULT_SEVERITY:
                kw["severity"] = DEFAULT_SEVERITY[label] * (0.8 + 0.4 * u)
                if label is EventLabel.REPOSITIONING:
                    kw["snr_db"] = DEFAULT_SNR_DB[label] - 3.0 + 6.0 * v
            sc = Scenario(label, int(scene_seeds[i]), duration=duration, **kw)
            out.append((f"{label.value}_{i:03d}", sc))
    return out


def iter_dataset(n_per_class: int = 25, base_seed: int = 0, classes=None,
                 duration: float = 12.0, interferer=None):
    """Yield (ManifestRow, RenderedScene) one clip at a time, without touching disk."""
    for ident, sc in dataset_scenarios(n_per_class, base_seed, classes, duration):
        yield (ManifestRow(ident, sc.label, sc.seed, "", "", sc.event_start, sc.event_duration),
               render_scenario(sc, interferer))


def make_dataset(n_per_class: int = 25, base_seed: int = 0, out_dir=".", classes=None,
                 duration: float = 12.0, interferer=None) -> list:
    """Write the WAV pairs and ``manifest.csv`` into ``out_dir``; returns the rows."""
    scenes = dataset_scenarios(n_per_class, base_seed, classes, duration)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"{out_dir}: cannot create directory ({exc.strerror})") from exc
    rows = []
    for ident, sc in scenes:
        scene = render_scenario(sc, interferer)
        ref, mic = out_dir / f"{ident}_ref.wav", out_dir / f"{ident}_mic.wav"
        write_wav(ref, scene.x, scene.sample_rate)
        write_wav(mic, scene.d, scene.sample_rate)
        rows.append(ManifestRow(ident, sc.label, sc.seed, ref.name, mic.name,
                                sc.event_start, sc.event_duration))
    write_manifest(out_dir / "manifest.csv", rows)
    return rows


def write_manifest(path, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MANIFEST_HEADER)
            for r in rows:
                w.writerow([r.id, r.label.value, r.seed, r.path_ref, r.path_mic,
                            repr(float(r.event_start_s)), repr(float(r.event_dur_s))])
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def read_manifest(path) -> list:
    """Rows of a manifest; relative WAV paths are resolved against its directory."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise InputError(f"{path}:1: expected header {','.join(MANIFEST_HEADER)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                if len(rec) != len(MANIFEST_HEADER):
                    raise ValueError(f"expected {len(MANIFEST_HEADER)} fields, got {len(rec)}")
                rows.append(ManifestRow(rec[0], EventLabel(rec[1]), int(rec[2]),
                                        str(path.parent / rec[3]), str(path.parent / rec[4]),
                                        float(rec[5]), float(rec[6])))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return rows
