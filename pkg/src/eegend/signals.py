"""Recordings, segments, dataset I/O and the synthetic EEG generator.

A recording is stored as ``(n_samples, n_channels)`` microvolt samples.
Column order always follows :data:`CANONICAL_CHANNELS` after loading.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

ADHD = "ADHD"
HC = "HC"
CLASSES = (ADHD, HC)

# Dataset column order, with the temporal/parietal electrodes renamed to the
# names used by the ranking tables (T3->T7, T4->T8, T5->P7, T6->P8).
CANONICAL_CHANNELS = (
    "Fz", "Cz", "Pz", "C3", "T7", "C4", "T8", "Fp1", "Fp2", "F3",
    "F4", "F7", "F8", "P3", "P4", "P7", "P8", "O1", "O2",
)
CHANNEL_ALIASES = {"T3": "T7", "T4": "T8", "T5": "P7", "T6": "P8"}

DEFAULT_SAMPLE_RATE = 128.0
DEFAULT_WINDOW = 2048


def canonical_name(name: str) -> str:
    """Map a 10-20 electrode name to its canonical spelling."""
    name = name.strip()
    return CHANNEL_ALIASES.get(name, name)


def label_to_int(label: str) -> int:
    """ADHD is the positive class (1), HC the negative class (0)."""
    if label == ADHD:
        return 1
    if label == HC:
        return 0
    raise DataError(f"unknown class label {label!r}; expected 'ADHD' or 'HC'")


@dataclass(frozen=True)
class Recording:
    subject_id: str
    label: str
    sample_rate_hz: float
    channels: tuple[str, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise DataError(f"{self.subject_id}: data must be 2-D (samples x channels)")
        label_to_int(self.label)
        if self.sample_rate_hz <= 0:
            raise DataError(f"{self.subject_id}: sample rate must be positive")
        if data.shape[1] != len(self.channels):
            raise DataError(
                f"{self.subject_id}: {data.shape[1]} data columns but "
                f"{len(self.channels)} channel names"
            )
        if len(set(self.channels)) != len(self.channels):
            raise DataError(f"{self.subject_id}: duplicate channel names")
        if data.shape[0] < 1:
            raise DataError(f"{self.subject_id}: recording has no samples")
        if not np.all(np.isfinite(data)):
            raise DataError(f"{self.subject_id}: non-finite sample values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Segment:
    subject_id: str
    label: str
    start_sample: int
    data: np.ndarray = field(repr=False)

    @property
    def y(self) -> int:
        return label_to_int(self.label)


@dataclass(frozen=True)
class Dataset:
    """A list of recordings plus (optionally) their segments.

    ``segments`` is empty until :func:`segment_dataset` is applied. Subsets
    produced by :meth:`subset` keep every recording but only some segments.
    """

    recordings: tuple[Recording, ...]
    segments: tuple[Segment, ...] = ()
    window_len: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "recordings", tuple(self.recordings))
        object.__setattr__(self, "segments", tuple(self.segments))
        ids = [r.subject_id for r in self.recordings]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate subject_id in dataset")
        if self.recordings:
            chans = self.recordings[0].channels
            for r in self.recordings[1:]:
                if r.channels != chans:
                    raise DataError(f"{r.subject_id}: channel list differs from first recording")
        known = set(ids)
        for s in self.segments:
            if s.subject_id not in known:
                raise DataError(f"segment refers to unknown subject {s.subject_id!r}")

    @property
    def channels(self) -> tuple[str, ...]:
        return self.recordings[0].channels if self.recordings else ()

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def sample_rate_hz(self) -> float:
        return self.recordings[0].sample_rate_hz if self.recordings else DEFAULT_SAMPLE_RATE

    @property
    def y(self) -> np.ndarray:
        """Segment labels as integers (1 = ADHD)."""
        return np.array([s.y for s in self.segments], dtype=int)

    def class_counts(self, unit: str = "segment") -> dict[str, int]:
        items = self.segments if unit == "segment" else self.recordings
        return {c: sum(1 for it in items if it.label == c) for c in CLASSES}

    def recording(self, subject_id: str) -> Recording:
        for r in self.recordings:
            if r.subject_id == subject_id:
                return r
        raise KeyError(subject_id)

    def subset(self, segment_indices: Iterable[int]) -> "Dataset":
        segs = tuple(self.segments[i] for i in segment_indices)
        return Dataset(self.recordings, segs, self.window_len)

    def channel_samples(self, channel: int, label: str | None = None) -> np.ndarray:
        """Concatenate one channel across all segments (optionally one class)."""
        parts = [s.data[:, channel] for s in self.segments if label is None or s.label == label]
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)


def segment_dataset(ds: Dataset, window_len: int = DEFAULT_WINDOW) -> Dataset:
    """Cut every recording into non-overlapping windows starting at sample 0.

    The trailing partial window is dropped. Segment order is recording order,
    then ascending start sample.
    """
    if int(window_len) != window_len or window_len < 2:
        raise ConfigError(f"window_len must be an integer >= 2, got {window_len!r}")
    window_len = int(window_len)
    segments = []
    for rec in ds.recordings:
        for k in range(rec.n_samples // window_len):
            start = k * window_len
            segments.append(
                Segment(rec.subject_id, rec.label, start, rec.data[start:start + window_len])
            )
    return Dataset(ds.recordings, tuple(segments), window_len)


# ---------------------------------------------------------------------------
# file I/O


def _read_matrix(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"recording file not found: {path}")
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty recording file")
    return np.array(rows, dtype=float)


def load_dataset(manifest_path) -> Dataset:
    """Load recordings listed in a JSON manifest.

    Columns are reordered to canonical channel order by name. Raises
    :class:`DataError` for missing files, malformed rows, column-count
    mismatches, unknown channel names and duplicate subject ids.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DataError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON ({exc})") from None
    for key in ("channels", "recordings"):
        if key not in manifest:
            raise DataError(f"{manifest_path}: missing key {key!r}")
    if not manifest["recordings"]:
        raise DataError(f"{manifest_path}: manifest lists no recordings")
    rate = float(manifest.get("sample_rate_hz", DEFAULT_SAMPLE_RATE))

    names = [canonical_name(c) for c in manifest["channels"]]
    unknown = [c for c in names if c not in CANONICAL_CHANNELS]
    if unknown:
        raise DataError(f"unknown channel names: {unknown}")
    if len(set(names)) != len(names):
        raise DataError("duplicate channel names in manifest")
    order = sorted(range(len(names)), key=lambda i: CANONICAL_CHANNELS.index(names[i]))
    channels = tuple(names[i] for i in order)

    recordings = []
    seen = set()
    for entry in manifest["recordings"]:
        missing = {"subject_id", "label", "path"} - set(entry)
        if missing:
            raise DataError(f"{manifest_path}: recording entry lacks {sorted(missing)}")
        sid = str(entry["subject_id"])
        if sid in seen:
            raise DataError(f"duplicate subject_id {sid!r}")
        seen.add(sid)
        data = _read_matrix(manifest_path.parent / entry["path"])
        if data.shape[1] != len(names):
            raise DataError(
                f"{entry['path']}: channel-count mismatch ({data.shape[1]} columns, "
                f"{len(names)} channels in manifest)"
            )
        recordings.append(Recording(sid, entry["label"], rate, channels, data[:, order]))
    return Dataset(tuple(recordings))


def save_dataset(ds: Dataset, out_dir, manifest_name: str = "manifest.json") -> Path:
    """Write one CSV per recording plus a manifest; returns the manifest path.

    Values are written with 17 significant digits so that a reload is
    bit-identical.
    """
    out_dir = Path(out_dir)
    (out_dir / "recordings").mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in ds.recordings:
        rel = f"recordings/{rec.subject_id}.csv"
        np.savetxt(out_dir / rel, rec.data, fmt="%.17g", delimiter=",")
        entries.append({"subject_id": rec.subject_id, "label": rec.label, "path": rel})
    manifest = {
        "sample_rate_hz": ds.sample_rate_hz,
        "channels": list(ds.channels),
        "recordings": entries,
    }
    path = out_dir / manifest_name
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic two-class EEG generator.

    Every channel carries unit-variance AR(1) background activity plus a
    channel-specific alpha-band rhythm whose strength is shared by both
    classes. On ``planted_channels`` ADHD subjects additionally carry a
    theta-band rhythm with relative amplitude ``effect_size``, which flattens
    the amplitude distribution and so raises its histogram entropy.
    """

    n_per_class: int = 20
    n_samples: int = 4096
    n_channels: int = 19
    planted_channels: tuple[int, ...] = ()
    effect_size: float = 3.0
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        object.__setattr__(self, "planted_channels", tuple(int(c) for c in self.planted_channels))
        if self.n_per_class < 1:
            raise ConfigError("n_per_class must be >= 1")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if not 1 <= self.n_channels <= len(CANONICAL_CHANNELS):
            raise ConfigError(f"n_channels must be in 1..{len(CANONICAL_CHANNELS)}")
        for c in self.planted_channels:
            if not 0 <= c < self.n_channels:
                raise ConfigError(f"planted channel {c} out of range 0..{self.n_channels - 1}")
        if len(set(self.planted_channels)) != len(self.planted_channels):
            raise ConfigError("planted channels must be unique")
        if self.effect_size < 0:
            raise ConfigError("effect_size must be nonnegative")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        allowed = {"n_per_class", "n_samples", "n_channels", "planted_channels",
                   "effect_size", "sample_rate_hz"}
        extra = set(d) - allowed
        if extra:
            raise ConfigError(f"unknown synthesis keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "n_per_class": self.n_per_class,
            "n_samples": self.n_samples,
            "n_channels": self.n_channels,
            "planted_channels": list(self.planted_channels),
            "effect_size": self.effect_size,
            "sample_rate_hz": self.sample_rate_hz,
        }


ALPHA_MAX = 2.5
GAIN_JITTER = 0.02
AMP_JITTER = 0.05


def _ar1(rng: np.random.Generator, n: int, phi: float) -> np.ndarray:
    burn = 256
    e = rng.standard_normal(n + burn)
    x = lfilter([np.sqrt(1.0 - phi * phi)], [1.0, -phi], e)
    return x[burn:]


def _rhythm(rng: np.random.Generator, n: int, fs: float, f0: float, amp: float) -> np.ndarray:
    # amplitude in units of the background std; sqrt(2) makes the rhythm's
    # own std equal to ``amp``
    f = f0 + rng.uniform(-0.5, 0.5)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(n) / fs
    return np.sqrt(2.0) * amp * np.sin(2.0 * np.pi * f * t + phase)


def synthesize_dataset(spec: SynthSpec, seed: int) -> Dataset:
    """Generate a deterministic two-class dataset for desk-scale checks.

    Recordings alternate ADHD / HC so that any prefix of the recording list
    contains both classes.
    """
    if isinstance(spec, dict):
        spec = SynthSpec.from_dict(spec)
    rng = np.random.default_rng(seed)
    n, fs, nch = spec.n_samples, spec.sample_rate_hz, spec.n_channels
    channels = CANONICAL_CHANNELS[:nch]
    planted = set(spec.planted_channels)

    # channel profile shared by both classes
    phi = rng.uniform(0.80, 0.95, size=nch)
    alpha_amp = rng.uniform(0.0, ALPHA_MAX, size=nch)
    alpha_freq = rng.uniform(9.0, 11.0, size=nch)
    for c in planted:
        alpha_amp[c] = 0.0

    recordings = []
    for i in range(spec.n_per_class):
        for label in CLASSES:
            gain = 10.0 * np.exp(GAIN_JITTER * rng.standard_normal())
            data = np.empty((n, nch))
            for c in range(nch):
                amp = alpha_amp[c] * np.exp(AMP_JITTER * rng.standard_normal())
                x = _ar1(rng, n, phi[c]) + _rhythm(rng, n, fs, alpha_freq[c], amp)
                if label == ADHD and c in planted:
                    theta_amp = spec.effect_size * np.exp(AMP_JITTER * rng.standard_normal())
                    x = x + _rhythm(rng, n, fs, 6.0, theta_amp)
                data[:, c] = gain * x
            recordings.append(
                Recording(f"{label}_{i:03d}", label, fs, channels, data)
            )
    return Dataset(tuple(recordings))


def write_synthetic(spec: SynthSpec, seed: int, out_dir) -> Path:
    """Synthesize, save as CSV + manifest, and record the planted truth."""
    ds = synthesize_dataset(spec, seed)
    path = save_dataset(ds, out_dir)
    truth = {
        "seed": seed,
        "spec": spec.to_dict(),
        "planted_channels": list(spec.planted_channels),
        "planted_channel_names": [ds.channels[c] for c in spec.planted_channels],
    }
    (Path(out_dir) / "truth.json").write_text(json.dumps(truth, indent=2) + "\n", encoding="utf-8")
    return path


def from_arrays(arrays: Sequence[np.ndarray], labels: Sequence[str],
                channels: Sequence[str] | None = None,
                sample_rate_hz: float = DEFAULT_SAMPLE_RATE) -> Dataset:
    """Build an in-memory dataset from ``(n_samples, n_channels)`` arrays."""
    recs = []
    for i, (a, lab) in enumerate(zip(arrays, labels)):
        a = np.asarray(a, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        chans = tuple(channels) if channels is not None else tuple(f"ch{j}" for j in range(a.shape[1]))
        recs.append(Recording(f"s{i:03d}", lab, sample_rate_hz, chans, a))
    return Dataset(tuple(recs))
