"""Dataset generation and ingestion for the bundled learning tasks.

Covers noisy-sine regression tuples, the imbalanced transaction table
(real CSV or a schema-identical synthetic surrogate), and IDX-format image
sets (the standard big-endian layout) with class filtering.  A synthetic
four-class digit generator writes genuine IDX files so the full loader
path runs without any external download.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    split: str = "full"
    provenance: tuple = ()

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise DataFormatError("feature/label row counts differ")

    def __len__(self) -> int:
        return len(self.labels)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        return h.hexdigest()


def gen_noisy_sine(n: int, eps: float, x_range=(-2.0, 2.0), seed: int = 0) -> Dataset:
    """Tuples (x_i, sin x_i + noise) with x uniform on the range, noise ~ N(0, eps)."""
    if n < 1 or eps < 0:
        raise DataFormatError("need n >= 1 and eps >= 0")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(x_range[0], x_range[1], n)
    ys = np.sin(xs) + (rng.normal(0.0, eps, n) if eps > 0 else 0.0)
    return Dataset(
        features=xs.reshape(-1, 1),
        labels=np.asarray(ys, dtype=float),
        provenance=(("source", "noisy_sine"), ("eps", eps), ("n", n), ("seed", seed)),
    )


# ---------------------------------------------------------------------------
# transaction data


@dataclass(frozen=True)
class SyntheticFraudConfig:
    """Two Gaussian blobs in feature space, schema-identical to the real table."""

    n_genuine: int = 2000
    n_fraud: int = 200
    n_features: int = 28
    separation: float = 3.0


def synthetic_fraud(config: SyntheticFraudConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    shift = config.separation / np.sqrt(config.n_features)
    genuine = rng.normal(0.0, 1.0, (config.n_genuine, config.n_features))
    fraud = rng.normal(0.0, 1.0, (config.n_fraud, config.n_features)) + shift
    features = np.vstack([genuine, fraud])
    labels = np.array([0] * config.n_genuine + [1] * config.n_fraud)
    return features, labels


def read_fraud_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """28 feature columns plus a class column (0 genuine, 1 fraud).

    A header row is accepted; when it carries V1..V28/Class names those
    columns are selected, which also digests the common full-table export.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    start = 0
    feat_idx = None
    class_idx = None
    first = rows[0]
    if any(not _is_float(c) for c in first):
        start = 1
        names = [c.strip().strip('"') for c in first]
        if "Class" in names and all(f"V{i}" in names for i in range(1, 29)):
            feat_idx = [names.index(f"V{i}") for i in range(1, 29)]
            class_idx = names.index("Class")
    features, labels = [], []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row:
            continue
        try:
            if feat_idx is not None:
                feats = [float(row[i]) for i in feat_idx]
                label = int(float(row[class_idx]))
            else:
                if len(row) != 29:
                    raise ValueError(f"expected 29 columns, got {len(row)}")
                feats = [float(v) for v in row[:28]]
                label = int(float(row[28]))
        except (ValueError, IndexError) as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
        if label not in (0, 1):
            raise DataFormatError(f"{path}: line {lineno}: class must be 0 or 1, got {label}")
        features.append(feats)
        labels.append(label)
    if not labels:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(features, dtype=float), np.asarray(labels, dtype=int)


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def prepare_fraud(source, seed: int) -> tuple[Dataset, Dataset]:
    """Undersampled train/test split with train-set standardization.

    Fraud rows are halved; the training set takes one half plus three times
    as many genuine rows sampled without replacement; the test set takes
    the other fraud half, an equal genuine block, and every remaining
    genuine row.  Features are standardized with training-set statistics
    only.
    """
    if isinstance(source, SyntheticFraudConfig):
        features, labels = synthetic_fraud(source, seed)
        origin = ("source", "synthetic")
    else:
        features, labels = read_fraud_csv(source)
        origin = ("source", str(source))
    rng = np.random.default_rng(seed)
    fraud_idx = rng.permutation(np.flatnonzero(labels == 1))
    genuine_idx = rng.permutation(np.flatnonzero(labels == 0))
    if len(fraud_idx) < 2 or len(genuine_idx) < 4 * (len(fraud_idx) // 2):
        raise DataFormatError("not enough rows for the 3:1 undersampled split")
    half = len(fraud_idx) // 2
    f1, f2 = fraud_idx[:half], fraud_idx[half:]
    g1 = genuine_idx[: 3 * half]
    g2 = genuine_idx[3 * half : 6 * half]
    g3 = genuine_idx[6 * half :]
    train_idx = rng.permutation(np.concatenate([f1, g1]))
    test_idx = rng.permutation(np.concatenate([f2, g2, g3]))
    mean = features[train_idx].mean(axis=0)
    std = features[train_idx].std(axis=0)
    std[std < 1e-9] = 1.0
    scaled = (features - mean) / std
    prov = (origin, ("seed", seed), ("standardized", True))
    train = Dataset(scaled[train_idx], labels[train_idx], "train", prov)
    test = Dataset(scaled[test_idx], labels[test_idx], "test", prov)
    return train, test


# ---------------------------------------------------------------------------
# IDX image data


def read_idx_images(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise DataFormatError(f"{path}: truncated IDX header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise DataFormatError(f"{path}: bad magic 0x{magic:08x}, expected images file")
        raw = fh.read(count * rows * cols)
        if len(raw) != count * rows * cols:
            raise DataFormatError(f"{path}: truncated image data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) < 8:
            raise DataFormatError(f"{path}: truncated IDX header")
        magic, count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise DataFormatError(f"{path}: bad magic 0x{magic:08x}, expected labels file")
        raw = fh.read(count)
        if len(raw) != count:
            raise DataFormatError(f"{path}: truncated label data")
    return np.frombuffer(raw, dtype=np.uint8)


def write_idx_images(path, images: np.ndarray):
    images = np.asarray(images, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def load_mnist(
    train_images,
    train_labels,
    test_images,
    test_labels,
    classes=(0, 1, 2, 3),
    train_limit: int | None = None,
    test_limit: int | None = None,
    seed: int = 0,
) -> tuple[Dataset, Dataset]:
    """Load IDX image/label pairs, filter classes, scale pixels to [0, 1].

    Limits subsample class-balanced under the seed (desk-scale runs).
    """
    out = []
    rng = np.random.default_rng(seed)
    for split, img_path, lab_path, limit in (
        ("train", train_images, train_labels, train_limit),
        ("test", test_images, test_labels, test_limit),
    ):
        images = read_idx_images(img_path)
        labels = read_idx_labels(lab_path)
        if len(images) != len(labels):
            raise DataFormatError("image/label counts differ")
        mask = np.isin(labels, list(classes))
        images, labels = images[mask], labels[mask]
        if limit is not None and limit < len(labels):
            per_class = limit // len(classes)
            chosen = []
            for c in classes:
                idx = np.flatnonzero(labels == c)
                take = min(per_class, len(idx))
                chosen.append(rng.permutation(idx)[:take])
            keep = rng.permutation(np.concatenate(chosen))
            images, labels = images[keep], labels[keep]
        feats = images.reshape(len(images), -1).astype(float) / 255.0
        remap = {c: i for i, c in enumerate(sorted(classes))}
        mapped = np.array([remap[int(l)] for l in labels])
        out.append(
            Dataset(
                feats,
                mapped,
                split,
                (("source", str(img_path)), ("classes", tuple(sorted(classes))), ("seed", seed)),
            )
        )
    return out[0], out[1]


def downsample_images(features: np.ndarray, side: int = 28, factor: int = 2) -> np.ndarray:
    """Block-average flattened square images by an integer factor."""
    n = len(features)
    small = side // factor
    imgs = features.reshape(n, small, factor, small, factor)
    return imgs.mean(axis=(2, 4)).reshape(n, small * small)


def one_hot(labels: np.ndarray, classes: int) -> np.ndarray:
    eye = np.eye(classes)
    return eye[np.asarray(labels, dtype=int)]


# ---------------------------------------------------------------------------
# synthetic digits (IDX surrogate so the image pipeline runs offline)

_DIGIT_TEMPLATES = {
    0: ["0011100", "0100010", "0100010", "0100010", "0100010", "0100010", "0011100"],
    1: ["0001000", "0011000", "0001000", "0001000", "0001000", "0001000", "0111110"],
    2: ["0011100", "0100010", "0000010", "0000100", "0001000", "0010000", "0111110"],
    3: ["0011100", "0100010", "0000010", "0001100", "0000010", "0100010", "0011100"],
}


def synthetic_digits(n_per_class: int, seed: int, classes=(0, 1, 2, 3)) -> tuple[np.ndarray, np.ndarray]:
    """Render noisy, shifted 28x28 glyphs for the requested classes."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    base = {}
    for c in classes:
        grid = np.array([[int(ch) for ch in row] for row in _DIGIT_TEMPLATES[c]], dtype=float)
        base[c] = np.kron(grid, np.ones((4, 4)))
    for c in classes:
        for _ in range(n_per_class):
            img = base[c].copy()
            img = _blur(img)
            img = np.roll(img, rng.integers(-2, 3), axis=0)
            img = np.roll(img, rng.integers(-2, 3), axis=1)
            img = img * rng.uniform(0.7, 1.0)
            img = img + rng.normal(0.0, 0.08, img.shape)
            images.append(np.clip(img, 0.0, 1.0))
            labels.append(c)
    order = rng.permutation(len(labels))
    images = (np.asarray(images)[order] * 255).astype(np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)[order]
    return images, labels


def _blur(img: np.ndarray) -> np.ndarray:
    out = img.copy()
    out[1:, :] += img[:-1, :]
    out[:-1, :] += img[1:, :]
    out[:, 1:] += img[:, :-1]
    out[:, :-1] += img[:, 1:]
    return out / 5.0


def write_synthetic_digit_files(directory, n_train_per_class: int, n_test_per_class: int, seed: int) -> dict:
    """Write a 4-class IDX quartet; returns the four paths."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tr_img, tr_lab = synthetic_digits(n_train_per_class, seed)
    te_img, te_lab = synthetic_digits(n_test_per_class, seed + 1)
    paths = {
        "train_images": directory / "train-images-idx3-ubyte",
        "train_labels": directory / "train-labels-idx1-ubyte",
        "test_images": directory / "t10k-images-idx3-ubyte",
        "test_labels": directory / "t10k-labels-idx1-ubyte",
    }
    write_idx_images(paths["train_images"], tr_img)
    write_idx_labels(paths["train_labels"], tr_lab)
    write_idx_images(paths["test_images"], te_img)
    write_idx_labels(paths["test_labels"], te_lab)
    return {k: str(v) for k, v in paths.items()}
