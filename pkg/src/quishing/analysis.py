"""Importance maps, pixel selection and retraining on the selected pixels."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import models
from .dataset import N_FEATURES
from .errors import EmptySelection, LengthMismatch, MissingCell
from .evaluation import auc
from .qr import SIZE

# comparison columns: one per selection source, then the unselected baseline
SELECTION_SOURCES = ("gbt_cfg2", "gbt_cfg1", "rforest")
NO_SELECTION = "none"
COMPARISON_COLUMNS = (*SELECTION_SOURCES, NO_SELECTION)


@dataclass(frozen=True)
class ImportanceVector:
    values: np.ndarray
    source_family: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (N_FEATURES,):
            raise LengthMismatch(f"importance vector must have {N_FEATURES} entries, got {v.shape}")
        if (v < 0).any():
            raise ValueError("importances must be non-negative")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_model(cls, model) -> "ImportanceVector":
        return cls(models.importance(model), model.family)


@dataclass(frozen=True)
class FeatureMask:
    selected: np.ndarray  # sorted feature indices
    source_family: str
    rule: str

    def __len__(self):
        return int(self.selected.size)

    @classmethod
    def all_features(cls) -> "FeatureMask":
        return cls(np.arange(N_FEATURES), NO_SELECTION, "all")


def _values(v):
    return v.values if isinstance(v, ImportanceVector) else np.asarray(v, dtype=np.float64)


def importance_grid(v) -> np.ndarray:
    values = _values(v)
    if values.shape != (N_FEATURES,):
        raise LengthMismatch(f"expected {N_FEATURES} values, got {values.shape}")
    return values.reshape(SIZE, SIZE).copy()


def _write_p5(pixels: np.ndarray, path) -> None:
    h, w = pixels.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.astype(np.uint8).tobytes())


def export_heatmap(grid, path, binary: bool = False) -> None:
    """PGM heatmap scaled so the grid maximum maps to 255.

    With binary=True, nonzero cells map to 255 and zero cells to 0
    (included-pixel map; invert it for the excluded map).
    """
    grid = np.asarray(grid, dtype=np.float64)
    if (grid < 0).any():
        raise ValueError("heatmap grid must be non-negative")
    if binary:
        pixels = np.where(grid > 0, 255, 0)
    else:
        top = grid.max() if grid.size else 0.0
        pixels = np.zeros(grid.shape) if top <= 0 else np.rint(grid / top * 255.0)
    _write_p5(pixels, path)


def export_excluded_map(grid, path) -> None:
    grid = np.asarray(grid, dtype=np.float64)
    _write_p5(np.where(grid > 0, 0, 255), path)


def select_features(v, top_k: int | None = None, threshold: float = 0.0) -> FeatureMask:
    """Pixels with importance > threshold, optionally capped at the top_k largest."""
    values = _values(v)
    if values.shape != (N_FEATURES,):
        raise LengthMismatch(f"expected {N_FEATURES} values, got {values.shape}")
    selected = np.flatnonzero(values > threshold)
    rule = f"importance > {threshold:g}"
    if top_k is not None:
        # stable order: larger importance first, then lower index
        order = np.lexsort((selected, -values[selected]))
        selected = np.sort(selected[order[:top_k]])
        rule += f", top {top_k}"
    if selected.size == 0:
        raise EmptySelection("no feature passes the selection rule")
    source = v.source_family if isinstance(v, ImportanceVector) else "unknown"
    return FeatureMask(selected, source, rule)


def retrain_with_selection(mask: FeatureMask, configs, train, test, seeds=None, n_jobs=1) -> dict:
    """Train each config on the masked training columns; return test AUC per family.

    `seeds` maps family -> training seed (default 0), so the same seeds reproduce
    a baseline run exactly when the mask keeps every feature.
    """
    if len(mask) == 0:
        raise EmptySelection("mask is empty")
    seeds = seeds or {}
    out = {}
    for cfg in configs:
        model = models.train(cfg, train.features, train.labels, seed=seeds.get(cfg.family, 0),
                             feature_indices=mask.selected, n_jobs=n_jobs)
        out[cfg.family] = auc(test.labels, models.predict_proba(model, test.features))
    return out


def comparison_table(results: dict, families=models.FAMILIES) -> list[dict]:
    """Family x column AUC grid from results[column][family]."""
    rows = []
    for fam in families:
        row = {"model": fam}
        for col in COMPARISON_COLUMNS:
            try:
                row[col] = results[col][fam]
            except KeyError:
                raise MissingCell(fam, col) from None
        rows.append(row)
    return rows


def write_comparison_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", *(f"auc_fs_{c}" if c != NO_SELECTION else "auc_no_fs" for c in COMPARISON_COLUMNS)])
        for row in rows:
            w.writerow([row["model"], *(f"{row[c]:.4f}" for c in COMPARISON_COLUMNS)])


def write_comparison_json(rows, path) -> None:
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


def write_importance_csv(v, path) -> None:
    values = _values(v)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "row", "col", "value"])
        for i, val in enumerate(values):
            w.writerow([i, i // SIZE, i % SIZE, repr(float(val))])


def importance_histogram(v, bins: int = 50):
    """Counts of importance values over `bins` equal-width bins on [0, max]."""
    values = _values(v)
    top = float(values.max()) if values.max() > 0 else 1.0
    return np.histogram(values, bins=bins, range=(0.0, top))


def write_histogram_csv(vectors: dict, path, bins: int = 50) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "bin_lo", "bin_hi", "count"])
        for name, v in vectors.items():
            counts, edges = importance_histogram(v, bins)
            for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
                w.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])
