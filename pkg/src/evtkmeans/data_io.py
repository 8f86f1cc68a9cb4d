"""Datasets: synthetic Gaussian blobs, noise augmentation, file loaders."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray | None = None
    name: str = "dataset"
    # original class values, indexed by the remapped label
    classes: tuple = field(default=(), compare=False)
    centers: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise InputError(f"dataset matrix must be n x d with n, d >= 1, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError("dataset contains non-finite values")
        object.__setattr__(self, "x", x)
        if self.y is not None:
            y = np.asarray(self.y, dtype=int)
            if y.shape != (x.shape[0],):
                raise InputError(f"expected {x.shape[0]} labels, got {y.shape}")
            object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SynthConfig:
    n: int = 1000
    k: int = 3
    d: int = 2
    sigma: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not self.n >= self.k >= 1:
            raise InputError("need n >= k >= 1")
        if self.d < 1:
            raise InputError("need d >= 1")
        if not self.sigma > 0:
            raise InputError("sigma must be > 0")


def gen_synthetic(cfg: SynthConfig) -> Dataset:
    """Isotropic Gaussian blobs around centers drawn uniformly from [-1, 1]^d.

    Each cluster gets ``n // k`` samples and the first ``n % k`` clusters one
    more. Rows are grouped by cluster; ``y`` holds the generating index.
    """
    rng = np.random.default_rng(cfg.seed)
    centers = rng.uniform(-1.0, 1.0, size=(cfg.k, cfg.d))
    counts = np.full(cfg.k, cfg.n // cfg.k)
    counts[: cfg.n % cfg.k] += 1
    y = np.repeat(np.arange(cfg.k), counts)
    x = centers[y] + rng.normal(0.0, cfg.sigma, size=(cfg.n, cfg.d))
    name = f"synth_n{cfg.n}_k{cfg.k}_d{cfg.d}_s{cfg.sigma:g}_seed{cfg.seed}"
    return Dataset(x, y, name, tuple(range(cfg.k)), centers)


def add_uninformative(ds: Dataset, extra_d: int, rng: np.random.Generator) -> Dataset:
    """Append ``extra_d`` standard-normal columns."""
    if extra_d < 0:
        raise InputError("extra_d must be >= 0")
    if extra_d == 0:
        return ds
    noise = rng.standard_normal((ds.n, extra_d))
    return replace(ds, x=np.hstack([ds.x, noise]), name=f"{ds.name}+{extra_d}")


def standardize(ds: Dataset, center: bool = False) -> Dataset:
    """Scale every column to unit sample variance (ddof=1).

    Columns are not centred unless ``center`` is set. Constant columns are
    left as they are.
    """
    x = ds.x.copy()
    if ds.n < 2:
        return replace(ds, x=x)
    std = x.std(axis=0, ddof=1)
    scale = std > 0
    if center:
        x[:, scale] -= x[:, scale].mean(axis=0)
    x[:, scale] /= std[scale]
    return replace(ds, x=x)


def _remap(raw_labels: list) -> tuple[np.ndarray, tuple]:
    index: dict = {}
    y = [index.setdefault(v, len(index)) for v in raw_labels]
    return np.asarray(y, dtype=int), tuple(index)


def _label_key(token: str):
    value = float(token)
    return int(value) if value.is_integer() else value


def load_libsvm(path) -> Dataset:
    """Read ``<label> <index>:<value> ...`` lines with 1-based feature indices.

    Missing features are 0. Labels are remapped to ``0..k-1`` in order of
    first appearance.
    """
    path = Path(path)
    rows: list[dict[int, float]] = []
    raw_labels = []
    n_features = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                raw_labels.append(_label_key(tokens[0]))
            except ValueError:
                raise ParseError(f"bad label {tokens[0]!r}", lineno) from None
            row: dict[int, float] = {}
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                try:
                    if not sep:
                        raise ValueError
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"malformed feature {tok!r}", lineno) from None
                if idx < 1:
                    raise ParseError(f"feature index must be >= 1, got {idx}", lineno)
                if idx in row:
                    raise ParseError(f"duplicate feature index {idx}", lineno)
                row[idx] = val
                n_features = max(n_features, idx)
            rows.append(row)
    if not rows:
        raise InputError(f"{path}: no samples")
    x = np.zeros((len(rows), max(n_features, 1)))
    for i, row in enumerate(rows):
        for idx, val in row.items():
            x[i, idx - 1] = val
    y, classes = _remap(raw_labels)
    return Dataset(x, y, path.stem, classes)


def save_libsvm(ds: Dataset, path) -> None:
    """Write in LIBSVM format, skipping zeros; values use ``repr`` for a lossless round trip."""
    y = ds.y if ds.y is not None else np.zeros(ds.n, dtype=int)
    labels = [ds.classes[v] if ds.classes else v for v in y]
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for label, row in zip(labels, ds.x):
            feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0)
            fh.write(f"{label} {feats}".rstrip() + "\n")


def load_csv(path, has_labels: bool = True, delimiter: str = ",") -> Dataset:
    """Read a delimited numeric table. With ``has_labels`` the last column is the class."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    rows = []
    width = None
    for rowno, row in enumerate(csv.reader(io.StringIO(text), delimiter=delimiter), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row {rowno} has {len(row)} fields, expected {width}", rowno)
        rows.append((rowno, row))
    if not rows:
        raise InputError(f"{path}: no samples")
    if has_labels and width < 2:
        raise ParseError("a labelled table needs at least two columns")

    def number(cell, rowno):
        try:
            return float(cell)
        except ValueError:
            raise ParseError(f"row {rowno}: not a number: {cell!r}", rowno) from None

    ncols = width - 1 if has_labels else width
    x = np.array([[number(c, r) for c in row[:ncols]] for r, row in rows])
    if not has_labels:
        return Dataset(x, None, path.stem)
    raw = []
    for r, row in rows:
        try:
            raw.append(_label_key(row[-1]))
        except ValueError:
            raw.append(row[-1].strip())
    y, classes = _remap(raw)
    return Dataset(x, y, path.stem, classes)


def save_csv(ds: Dataset, path, delimiter: str = ",") -> None:
    """Write features (and the label as the last column, if present) with full precision."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        for i, row in enumerate(ds.x):
            cells = [repr(float(v)) for v in row]
            if ds.y is not None:
                cells.append(str(ds.classes[ds.y[i]] if ds.classes else ds.y[i]))
            writer.writerow(cells)


def load_dataset(path, fmt: str = "csv", has_labels: bool = True, delimiter: str = ",") -> Dataset:
    if fmt == "libsvm":
        return load_libsvm(path)
    if fmt == "csv":
        return load_csv(path, has_labels=has_labels, delimiter=delimiter)
    raise InputError(f"unknown format {fmt!r}")
