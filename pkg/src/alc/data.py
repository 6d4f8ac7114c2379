"""Dataset ingestion, preprocessing, and cross-validation splitting.

CSV ingestion maps labels to integers in order of first appearance and keeps
the mapping on the dataset record. IDX ingestion follows the big-endian
magic/dims/payload layout used by the classic digit-image files. Iris, Wine,
and Breast Cancer ship with the package as small CSVs; larger datasets are
fetched on demand (see :mod:`alc.fetch`).

Standardization and the discriminant projection are fit objects: statistics
are computed from training rows only and then applied unchanged to validation
rows. Fit functions accept a :class:`SplitView` and refuse anything but the
training role, which is how the pipeline guarantees validation data stays
unseen until evaluation.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import AuditError, IngestError, NumericError, ParameterError
from .numkit import as_matrix

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

BUNDLED_DATASETS = ("iris", "wine", "breast_cancer")
FETCHED_DATASETS = ("voice_gender", "mnist")
DATASET_IDS = BUNDLED_DATASETS + FETCHED_DATASETS


@dataclass
class Dataset:
    """Feature matrix, integer labels, and bookkeeping for one dataset."""

    x: np.ndarray
    y: np.ndarray
    n_classes: int
    feature_names: list
    id: str
    label_names: list = field(default_factory=list)

    def __post_init__(self):
        self.x = as_matrix(self.x, "feature matrix")
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.shape[0] != self.y.size:
            raise IngestError(
                f"{self.id}: {self.x.shape[0]} feature rows but {self.y.size} labels"
            )
        if self.y.min() < 0 or self.y.max() >= self.n_classes:
            raise IngestError(f"{self.id}: labels outside [0, {self.n_classes})")
        present = np.unique(self.y)
        if present.size != self.n_classes:
            raise IngestError(
                f"{self.id}: only {present.size} of {self.n_classes} classes present"
            )

    @property
    def n_samples(self):
        return self.x.shape[0]

    @property
    def n_features(self):
        return self.x.shape[1]


@dataclass
class SplitView:
    """One side of a train/validation split, tagged with its role."""

    x: np.ndarray
    y: np.ndarray
    role: str  # "train" or "validation"


def require_train(view, what):
    if view.role != "train":
        raise AuditError(f"{what} must be fit on training rows, got a {view.role!r} view")


# ---------------------------------------------------------------------------
# ingestion


def load_csv(path, label_column=-1, has_header=True, dataset_id=None):
    """Read a numeric CSV with one label column.

    ``label_column`` is a column index (negative allowed) or, when the file
    has a header, a column name. Label values map to 0..c-1 in order of first
    appearance; the original names are kept on the dataset.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise IngestError(f"{path} is empty")

    header = None
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise IngestError(f"{path} has a header but no data rows")
    n_cols = len(rows[0])

    if isinstance(label_column, str):
        if header is None:
            raise ParameterError("label column by name requires has_header=True")
        if label_column not in header:
            raise IngestError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
    else:
        label_idx = label_column % n_cols
        if not 0 <= label_idx < n_cols:
            raise IngestError(f"{path}: label column {label_column} out of range")

    feature_idx = [i for i in range(n_cols) if i != label_idx]
    feature_names = (
        [header[i] for i in feature_idx] if header else [f"x{i}" for i in feature_idx]
    )

    x = np.empty((len(rows), len(feature_idx)))
    labels = []
    label_map = {}
    label_names = []
    for r, row in enumerate(rows):
        if len(row) != n_cols:
            raise IngestError(f"{path}: row {r + 1} has {len(row)} cells, expected {n_cols}")
        for j, i in enumerate(feature_idx):
            cell = row[i].strip()
            try:
                x[r, j] = float(cell)
            except ValueError:
                raise IngestError(
                    f"{path}: cannot parse {cell!r} at row {r + 1}, column {i + 1}"
                ) from None
        raw = row[label_idx].strip()
        if not raw:
            raise IngestError(f"{path}: missing label at row {r + 1}")
        if raw not in label_map:
            label_map[raw] = len(label_map)
            label_names.append(raw)
        labels.append(label_map[raw])

    return Dataset(
        x=x,
        y=np.asarray(labels),
        n_classes=len(label_map),
        feature_names=feature_names,
        id=dataset_id or path.stem,
        label_names=label_names,
    )


def _read_exact(fh, n, path, what):
    data = fh.read(n)
    if len(data) != n:
        raise IngestError(f"{path}: truncated while reading {what}")
    return data


def load_idx(images_path, labels_path, dataset_id="idx"):
    """Read an images/labels IDX file pair into a flattened dataset."""
    images_path, labels_path = Path(images_path), Path(labels_path)
    for p in (images_path, labels_path):
        if not p.exists():
            raise IngestError(f"no such file: {p}")

    with images_path.open("rb") as fh:
        (magic,) = struct.unpack(">I", _read_exact(fh, 4, images_path, "magic"))
        if magic != IDX_IMAGES_MAGIC:
            raise IngestError(
                f"{images_path}: bad images magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}"
            )
        count, n_rows, n_cols = struct.unpack(">III", _read_exact(fh, 12, images_path, "dims"))
        payload = _read_exact(fh, count * n_rows * n_cols, images_path, "pixel payload")
        if fh.read(1):
            raise IngestError(f"{images_path}: trailing bytes after payload")
    images = np.frombuffer(payload, dtype=np.uint8).reshape(count, n_rows * n_cols)

    with labels_path.open("rb") as fh:
        (magic,) = struct.unpack(">I", _read_exact(fh, 4, labels_path, "magic"))
        if magic != IDX_LABELS_MAGIC:
            raise IngestError(
                f"{labels_path}: bad labels magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}"
            )
        (label_count,) = struct.unpack(">I", _read_exact(fh, 4, labels_path, "count"))
        label_payload = _read_exact(fh, label_count, labels_path, "label payload")
        if fh.read(1):
            raise IngestError(f"{labels_path}: trailing bytes after payload")
    labels = np.frombuffer(label_payload, dtype=np.uint8).astype(np.int64)

    if count != label_count:
        raise IngestError(
            f"image count {count} does not match label count {label_count}"
        )
    n_classes = int(labels.max()) + 1 if labels.size else 0
    return Dataset(
        x=images.astype(np.float64),
        y=labels,
        n_classes=n_classes,
        feature_names=[f"px{i}" for i in range(n_rows * n_cols)],
        id=dataset_id,
        label_names=[str(c) for c in range(n_classes)],
    )


def write_idx_images(path, images):
    """Write a (count, rows, cols) uint8 array in IDX image layout."""
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ParameterError(f"images must be 3-D (count, rows, cols), got {images.shape}")
    with Path(path).open("wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    with Path(path).open("wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.size))
        fh.write(labels.tobytes())


# ---------------------------------------------------------------------------
# preprocessing


STD_FLOOR = 1e-12


def standardize_fit(x):
    """Per-column mean and population standard deviation, floored for constants."""
    x = as_matrix(x)
    if x.shape[0] < 2:
        raise ParameterError("standardization needs at least two rows")
    return x.mean(axis=0), np.maximum(x.std(axis=0), STD_FLOOR)


def standardize_apply(x, means, stds):
    return (as_matrix(x) - means) / stds


def standardize(x):
    """Fit and apply in one step; returns (transformed, means, stds)."""
    means, stds = standardize_fit(x)
    return standardize_apply(x, means, stds), means, stds


@dataclass
class LdaModel:
    """Discriminant projection fit on labeled training data."""

    projection: np.ndarray  # features x components, orthonormal columns
    class_means: np.ndarray  # classes x features
    n_components: int


def lda_fit(x, y, n_components):
    """Fit a linear discriminant projection onto ``n_components`` axes.

    Solves the between/within scatter problem through a ridge-regularized
    symmetric eigen-decomposition, then orthonormalizes the projection and
    fixes each column's sign so the first nonzero component is positive.
    """
    x = as_matrix(x)
    y = np.asarray(y, dtype=np.int64)
    classes = np.unique(y)
    c = classes.size
    if n_components > c - 1:
        raise ParameterError(
            f"at most classes-1={c - 1} components are separable, requested {n_components}"
        )
    if n_components < 1:
        raise ParameterError("need at least one component")

    f = x.shape[1]
    overall_mean = x.mean(axis=0)
    class_means = np.vstack([x[y == k].mean(axis=0) for k in classes])
    scatter_within = np.zeros((f, f))
    scatter_between = np.zeros((f, f))
    for i, k in enumerate(classes):
        rows = x[y == k]
        centered = rows - class_means[i]
        scatter_within += centered.T @ centered
        offset = (class_means[i] - overall_mean)[:, None]
        scatter_between += rows.shape[0] * (offset @ offset.T)

    ridge = 1e-6 * np.trace(scatter_within) / f
    scatter_within += np.eye(f) * max(ridge, STD_FLOOR)

    try:
        within_vals, within_vecs = np.linalg.eigh(scatter_within)
        if within_vals.min() <= 0:
            raise NumericError("within-class scatter not positive definite after ridge")
        inv_sqrt = within_vecs @ np.diag(within_vals**-0.5) @ within_vecs.T
        sym = inv_sqrt @ scatter_between @ inv_sqrt
        sym = 0.5 * (sym + sym.T)
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"discriminant eigen-decomposition failed: {exc}") from exc

    order = np.argsort(vals)[::-1][:n_components]
    directions = inv_sqrt @ vecs[:, order]
    projection, _ = np.linalg.qr(directions)
    for j in range(projection.shape[1]):
        col = projection[:, j]
        nonzero = np.flatnonzero(np.abs(col) > 1e-12)
        if nonzero.size and col[nonzero[0]] < 0:
            projection[:, j] = -col
    return LdaModel(projection=projection, class_means=class_means, n_components=n_components)


def lda_transform(x, model):
    return as_matrix(x) @ model.projection


# ---------------------------------------------------------------------------
# splitting and encoding


@dataclass
class FoldPlan:
    """Fold index per sample; every fold mirrors the class proportions."""

    k: int
    assignments: np.ndarray


def stratified_kfold(y, k, rng):
    """Assign samples to ``k`` folds, stratified by class.

    Samples of each class are shuffled and dealt round-robin; the deal start
    rotates across classes so leftover samples spread over different folds.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise ParameterError(f"need at least 2 folds, got {k}")
    if k > y.size:
        raise ParameterError(f"cannot split {y.size} samples into {k} folds")
    assignments = np.empty(y.size, dtype=np.int64)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            warnings.warn(
                f"class {cls} has only {idx.size} samples for {k} folds; "
                "some folds will miss it"
            )
        rng.shuffle(idx)
        for j, sample in enumerate(idx):
            assignments[sample] = (j + offset) % k
        offset += idx.size % k
    return FoldPlan(k=k, assignments=assignments)


def one_hot(y, n_classes):
    y = np.asarray(y, dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ParameterError(f"labels must lie in [0, {n_classes})")
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def stratified_subsample(y, n, rng):
    """Indices of a class-proportional subsample of size ``n``."""
    y = np.asarray(y, dtype=np.int64)
    if not 1 <= n <= y.size:
        raise ParameterError(f"subsample size {n} outside [1, {y.size}]")
    classes, counts = np.unique(y, return_counts=True)
    quotas = np.floor(counts * (n / y.size)).astype(int)
    remainders = counts * (n / y.size) - quotas
    shortfall = n - quotas.sum()
    for i in np.argsort(remainders)[::-1][:shortfall]:
        quotas[i] += 1
    picks = []
    for cls, quota in zip(classes, quotas):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        picks.append(idx[:quota])
    return np.sort(np.concatenate(picks))


# ---------------------------------------------------------------------------
# bundled datasets


def bundled_csv_path(name):
    if name not in BUNDLED_DATASETS:
        raise ParameterError(f"{name!r} is not a bundled dataset")
    return resources.files("alc.datasets") / f"{name}.csv"


def load_dataset(dataset_id, data_dir=None):
    """Load any known dataset by id.

    Bundled ids read their packaged CSV. ``voice_gender`` reads voice.csv and
    ``mnist`` reads the four IDX files from ``data_dir`` (see
    :func:`alc.fetch.fetch_dataset` for obtaining them); the two IDX splits
    are concatenated into one 70k-sample pool.
    """
    if dataset_id in BUNDLED_DATASETS:
        with resources.as_file(bundled_csv_path(dataset_id)) as path:
            return load_csv(path, label_column="label", has_header=True, dataset_id=dataset_id)
    if dataset_id == "voice_gender":
        from .fetch import dataset_dir

        path = Path(dataset_dir(data_dir, "voice_gender")) / "voice.csv"
        if not path.exists():
            raise IngestError(
                f"{path} not found; run `alc fetch voice_gender` first"
            )
        return load_csv(path, label_column="label", has_header=True, dataset_id="voice_gender")
    if dataset_id == "mnist":
        from .fetch import dataset_dir

        root = Path(dataset_dir(data_dir, "mnist"))
        names = [
            ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
            ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
        ]
        parts = []
        for images_name, labels_name in names:
            images, labels = root / images_name, root / labels_name
            if not images.exists() or not labels.exists():
                raise IngestError(
                    f"{images_name} / {labels_name} not found in {root}; "
                    "run `alc fetch mnist` first"
                )
            parts.append(load_idx(images, labels, dataset_id="mnist"))
        return Dataset(
            x=np.vstack([p.x for p in parts]),
            y=np.concatenate([p.y for p in parts]),
            n_classes=parts[0].n_classes,
            feature_names=parts[0].feature_names,
            id="mnist",
            label_names=parts[0].label_names,
        )
    raise ParameterError(f"unknown dataset id {dataset_id!r}; expected one of {DATASET_IDS}")
