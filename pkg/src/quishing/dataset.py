"""Labelled URL corpus -> QR pixel features, splits and on-disk sample sets."""

from __future__ import annotations

import csv
import io
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import qr
from .errors import DegenerateSplit, EmptyFile, FormatVersionMismatch, MalformedRow

log = logging.getLogger(__name__)

N_FEATURES = qr.SIZE * qr.SIZE  # 4761

_LABELS = {"0": 0, "1": 1, "legitimate": 0, "phishing": 1}

MAGIC = b"QSET"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHQI")  # magic, version, n_samples, n_features


@dataclass(frozen=True)
class UrlRecord:
    url: bytes
    label: int

    def __post_init__(self):
        if not self.url:
            raise ValueError("url must be non-empty")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True, eq=False)
class SampleSet:
    """N x 4761 binary features, N labels and the URLs they came from.

    The URLs are provenance only; no model ever reads them.
    """

    features: np.ndarray
    labels: np.ndarray
    urls: tuple = field(default=())

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.uint8)
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if features.ndim != 2 or features.shape[1] != N_FEATURES:
            raise ValueError(f"features must be N x {N_FEATURES}, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must have one entry per feature row")
        if features.size and features.max() > 1:
            raise ValueError("features must be binary")
        if labels.size and labels.max() > 1:
            raise ValueError("labels must be binary")
        urls = tuple(bytes(u) for u in self.urls)
        if len(urls) != features.shape[0]:
            raise ValueError("one url per sample is required")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "urls", urls)

    def __len__(self):
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and self.urls == other.urls
        )

    def subset(self, indices) -> "SampleSet":
        indices = np.asarray(indices, dtype=np.intp)
        return SampleSet(self.features[indices], self.labels[indices],
                         tuple(self.urls[i] for i in indices))

    def matrix(self, i: int) -> np.ndarray:
        return self.features[i].reshape(qr.SIZE, qr.SIZE)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def _parse_label(raw: str):
    return _LABELS.get(raw.strip().lower())


def load_url_csv(path) -> list[UrlRecord]:
    """Read a `url,label` CSV. URLs containing unquoted commas are rejoined."""
    text = Path(path).read_bytes().decode("utf-8", errors="surrogateescape")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile(f"{path} is empty") from None
    names = [h.strip().lower() for h in header]
    if "url" not in names or "label" not in names:
        raise MalformedRow(1, "header must contain 'url' and 'label'")
    url_col, label_col = names.index("url"), names.index("label")
    simple = names == ["url", "label"]

    records = []
    for row in reader:
        line_no = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if simple and len(row) > 2:
            row = [",".join(row[:-1]), row[-1]]
        if len(row) != len(names):
            raise MalformedRow(line_no, f"expected {len(names)} fields, got {len(row)}")
        url = row[url_col].strip()
        label = _parse_label(row[label_col])
        if not url:
            raise MalformedRow(line_no, "empty url")
        if label is None:
            raise MalformedRow(line_no, f"unrecognised label {row[label_col]!r}")
        records.append(UrlRecord(url.encode("utf-8", errors="surrogateescape"), label))
    if not records:
        raise EmptyFile(f"{path} has a header but no rows")
    return records


def filter_encodable(records):
    """Split records into those that fit a 13-L symbol and a rejection log."""
    kept, rejected = [], []
    for rec in records:
        if len(rec.url) <= qr.CAPACITY:
            kept.append(rec)
        else:
            rejected.append((rec.url, len(rec.url)))
            log.info("rejecting %d-byte url", len(rec.url))
    return kept, rejected


def build_feature_matrix(records) -> SampleSet:
    """Row i is the row-major flattening of encode(urls[i]): index = 69*r + c."""
    records = list(records)
    features = np.empty((len(records), N_FEATURES), dtype=np.uint8)
    for i, rec in enumerate(records):
        features[i] = qr.encode(rec.url).ravel()
    labels = np.array([r.label for r in records], dtype=np.uint8)
    return SampleSet(features, labels, tuple(r.url for r in records))


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

def split_indices(labels, spec: SplitSpec):
    """Stratified split with per-class floor rounding. Returns sorted index arrays."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(spec.seed)
    classes = np.unique(labels)
    if classes.size < 2:
        raise DegenerateSplit("both classes must be present")
    train, test = [], []
    for c in classes:
        idx = rng.permutation(np.flatnonzero(labels == c))
        n_train = int(np.floor(spec.train_fraction * idx.size))
        if n_train == 0 or n_train == idx.size:
            raise DegenerateSplit(
                f"class {int(c)} with {idx.size} samples leaves an empty "
                f"{'train' if n_train == 0 else 'test'} part"
            )
        train.append(idx[:n_train])
        test.append(idx[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split_train_test(samples: SampleSet, spec: SplitSpec):
    train_idx, test_idx = split_indices(samples.labels, spec)
    return samples.subset(train_idx), samples.subset(test_idx)


# ---------------------------------------------------------------------------
# Binary sample-set files
#
#   magic "QSET" | u16 version | u64 N | u32 n_features
#   N * ceil(n_features/8) bytes of packed rows (MSB first)
#   N label bytes
#   N * (u32 length + url bytes)
# ---------------------------------------------------------------------------

def save_sample_set(samples: SampleSet, path) -> None:
    n = len(samples)
    buf = bytearray(_HEADER.pack(MAGIC, FORMAT_VERSION, n, N_FEATURES))
    buf += np.packbits(samples.features, axis=1).tobytes()
    buf += samples.labels.tobytes()
    for url in samples.urls:
        buf += struct.pack("<I", len(url)) + url
    Path(path).write_bytes(bytes(buf))


def load_sample_set(path) -> SampleSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatVersionMismatch(f"{path}: truncated header")
    magic, version, n, n_features = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatVersionMismatch(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    if n_features != N_FEATURES:
        raise FormatVersionMismatch(f"{path}: {n_features} features, expected {N_FEATURES}")
    try:
        features, labels, urls, off = _read_body(raw, n, n_features)
    except (ValueError, struct.error):
        raise FormatVersionMismatch(f"{path}: truncated body") from None
    if off != len(raw):
        raise FormatVersionMismatch(f"{path}: {len(raw) - off} trailing bytes")
    return SampleSet(features, labels, tuple(urls))


def _read_body(raw, n, n_features):
    row_bytes = (n_features + 7) // 8
    off = _HEADER.size
    packed = np.frombuffer(raw, dtype=np.uint8, count=n * row_bytes, offset=off).reshape(n, row_bytes)
    features = np.unpackbits(packed, axis=1, count=n_features)
    off += n * row_bytes
    labels = np.frombuffer(raw, dtype=np.uint8, count=n, offset=off).copy()
    off += n
    urls = []
    for _ in range(n):
        (length,) = struct.unpack_from("<I", raw, off)
        off += 4
        if off + length > len(raw):
            raise ValueError("url runs past end of file")
        urls.append(raw[off:off + length])
        off += length
    return features, labels, urls, off


def export_pgms(samples: SampleSet, directory, limit=None) -> list[Path]:
    """One P5 image per sample, named by index and label."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n = len(samples) if limit is None else min(limit, len(samples))
    paths = []
    for i in range(n):
        p = directory / f"{i:05d}_label{int(samples.labels[i])}.pgm"
        qr.write_pgm(samples.matrix(i), p)
        paths.append(p)
    return paths
