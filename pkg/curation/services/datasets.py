from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.feature_extraction.text import HashingVectorizer

from curation.services.errors import DataError

logger = logging.getLogger(__name__)

DataFormat = Literal["vectors", "text"]
DATA_FORMATS = ("vectors", "text")

FEATURE_DIM = 2048
NGRAM_RANGE = (2, 4)
PAIR_SEPARATOR = " [SEP] "


@dataclass
class Dataset:
    ids: List[str]
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    provenance: str = ""

    def __post_init__(self) -> None:
        self.ids = [str(sid) for sid in self.ids]
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError(f"Fitur harus matriks 2D, didapat bentuk {self.features.shape}.")
        if not (len(self.ids) == self.features.shape[0] == self.labels.shape[0]):
            raise DataError(
                f"Jumlah id ({len(self.ids)}), fitur ({self.features.shape[0]}) dan label"
                f" ({self.labels.shape[0]}) tidak sama."
            )
        if len(set(self.ids)) != len(self.ids):
            raise DataError("Id sampel harus unik.")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise DataError(f"Label di luar rentang [0, {self.n_classes}).")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def arity(self) -> int:
        return int(self.features.shape[1])

    def label_map(self) -> Dict[str, int]:
        return {sid: int(label) for sid, label in zip(self.ids, self.labels)}

    def subset(self, ids: Iterable[str], provenance: Optional[str] = None) -> "Dataset":
        position = {sid: i for i, sid in enumerate(self.ids)}
        wanted = list(ids)
        unknown = [sid for sid in wanted if sid not in position]
        if unknown:
            raise DataError(f"Id tidak ada di dataset: {unknown[:5]}.")
        idx = [position[sid] for sid in wanted]
        return Dataset(
            ids=wanted,
            features=self.features[idx].reshape(len(idx), self.arity),
            labels=self.labels[idx],
            n_classes=self.n_classes,
            provenance=provenance or self.provenance,
        )

    def relabel(self, labels: Mapping[str, int], n_classes: int, provenance: Optional[str] = None) -> "Dataset":
        return Dataset(
            ids=list(self.ids),
            features=self.features,
            labels=np.array([labels[sid] for sid in self.ids], dtype=np.int64),
            n_classes=n_classes,
            provenance=provenance or self.provenance,
        )

    def concat(self, other: "Dataset", provenance: Optional[str] = None) -> "Dataset":
        if other.arity != self.arity or other.n_classes != self.n_classes:
            raise DataError("Dataset yang digabung harus punya arity dan jumlah kelas yang sama.")
        return Dataset(
            ids=self.ids + other.ids,
            features=np.vstack([self.features, other.features]),
            labels=np.concatenate([self.labels, other.labels]),
            n_classes=self.n_classes,
            provenance=provenance or self.provenance,
        )


def _vectorizer() -> HashingVectorizer:
    return HashingVectorizer(
        analyzer="char_wb",
        ngram_range=NGRAM_RANGE,
        n_features=FEATURE_DIM,
        alternate_sign=True,
        norm="l2",
        lowercase=True,
    )


def featurize_texts(texts: Sequence[str]) -> np.ndarray:
    """Signed hashed bag of character 2-4 grams, L2-normalised rows."""
    if not texts:
        return np.zeros((0, FEATURE_DIM), dtype=np.float64)
    return _vectorizer().transform(list(texts)).toarray().astype(np.float64)


def _join_text(value, line_no: int) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, list) and value and all(isinstance(part, str) for part in value):
        return PAIR_SEPARATOR.join(value)
    raise DataError(f"Baris {line_no}: text harus string atau list string (pasangan kalimat).")


def ingest_dataset(path, data_format: DataFormat = "vectors", n_classes: Optional[int] = None) -> Dataset:
    path = Path(path)
    if data_format not in DATA_FORMATS:
        raise DataError(f"Format dataset tidak dikenal: {data_format!r}.")
    if not path.is_file():
        raise DataError(f"File dataset tidak ditemukan: {path}")

    ids: List[str] = []
    labels: List[int] = []
    vectors: List[List[float]] = []
    texts: List[str] = []
    arity: Optional[int] = None

    with path.open("r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: baris {line_no}: JSON tidak valid ({exc.msg}).") from exc
            if not isinstance(payload, dict) or "id" not in payload or "label" not in payload:
                raise DataError(f"{path}: baris {line_no}: record wajib punya 'id' dan 'label'.")

            label = payload["label"]
            if isinstance(label, bool) or not isinstance(label, int) or label < 0:
                raise DataError(f"{path}: baris {line_no}: label {label!r} di luar rentang.")
            if n_classes is not None and label >= n_classes:
                raise DataError(f"{path}: baris {line_no}: label {label} di luar rentang [0, {n_classes}).")

            if data_format == "vectors":
                features = payload.get("features")
                if not isinstance(features, list) or not features:
                    raise DataError(f"{path}: baris {line_no}: 'features' harus list angka.")
                try:
                    row = [float(v) for v in features]
                except (TypeError, ValueError) as exc:
                    raise DataError(f"{path}: baris {line_no}: fitur bukan angka.") from exc
                if not all(math.isfinite(v) for v in row):
                    raise DataError(f"{path}: baris {line_no}: fitur berisi NaN/Inf.")
                if arity is None:
                    arity = len(row)
                elif len(row) != arity:
                    raise DataError(f"{path}: baris {line_no}: arity {len(row)} berbeda dari {arity}.")
                vectors.append(row)
            else:
                if "text" not in payload:
                    raise DataError(f"{path}: baris {line_no}: record wajib punya 'text'.")
                texts.append(_join_text(payload["text"], line_no))

            ids.append(str(payload["id"]))
            labels.append(label)

    if not ids:
        raise DataError(f"Dataset kosong: {path}")
    duplicates = [sid for sid, count in Counter(ids).items() if count > 1]
    if duplicates:
        raise DataError(f"{path}: id duplikat {duplicates[:5]}.")

    features = np.array(vectors, dtype=np.float64) if data_format == "vectors" else featurize_texts(texts)
    resolved_classes = n_classes if n_classes is not None else max(max(labels) + 1, 2)
    logger.info("Dataset %s: %d sampel, arity %d, c=%d", path.name, len(ids), features.shape[1], resolved_classes)
    return Dataset(
        ids=ids,
        features=features,
        labels=np.array(labels, dtype=np.int64),
        n_classes=resolved_classes,
        provenance=f"{data_format}:{path}",
    )


def dataset_to_lines(dataset: Dataset) -> Iterable[str]:
    for sid, row, label in zip(dataset.ids, dataset.features, dataset.labels):
        yield json.dumps({"id": sid, "label": int(label), "features": row.tolist()}, sort_keys=True)


@dataclass
class PlantedNoiseBenchmark:
    train: Dataset
    dev: Dataset
    test: Dataset
    ood_test: Dataset
    # sample id -> (clean label, planted label)
    flips: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def flipped_ids(self) -> List[str]:
        return list(self.flips)


def _cluster_centers(n_classes: int, dim: int, radius: float, rotation: float = 0.0) -> np.ndarray:
    centers = np.zeros((n_classes, dim), dtype=np.float64)
    angles = 2.0 * np.pi * np.arange(n_classes) / n_classes + rotation
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    return centers


def _gaussian_split(
    rng: np.random.Generator,
    n: int,
    centers: np.ndarray,
    spread: float,
    prefix: str,
    provenance: str,
) -> Dataset:
    n_classes, dim = centers.shape
    labels = rng.integers(n_classes, size=n)
    features = centers[labels] + spread * rng.standard_normal((n, dim))
    return Dataset(
        ids=[f"{prefix}{i}" for i in range(n)],
        features=features,
        labels=labels,
        n_classes=n_classes,
        provenance=provenance,
    )


def make_planted_noise_benchmark(
    n_samples: int = 1000,
    n_classes: int = 3,
    noise_rate: float = 0.1,
    dim: int = 2,
    seed: int = 0,
    radius: float = 4.0,
    spread: float = 1.0,
    n_eval: int = 300,
) -> PlantedNoiseBenchmark:
    """Gaussian clusters with a fraction of training labels flipped uniformly to another class.

    The out-of-domain split rotates the cluster centres and widens them.
    """
    if dim < 2:
        raise DataError("Dimensi benchmark minimal 2.")
    if not 0 <= noise_rate < 1:
        raise DataError(f"noise_rate harus di [0, 1), didapat {noise_rate}.")
    rng = np.random.default_rng(seed)
    centers = _cluster_centers(n_classes, dim, radius)

    train = _gaussian_split(rng, n_samples, centers, spread, "", "planted-noise:train")
    n_flip = int(math.floor(noise_rate * n_samples + 0.5))
    flip_idx = np.sort(rng.choice(n_samples, size=n_flip, replace=False))
    labels = train.labels.copy()
    flips: Dict[str, Tuple[int, int]] = {}
    for i in flip_idx:
        clean = int(labels[i])
        draw = int(rng.integers(n_classes - 1))
        planted = draw if draw < clean else draw + 1
        labels[i] = planted
        flips[train.ids[i]] = (clean, planted)
    train = Dataset(train.ids, train.features, labels, n_classes, provenance=train.provenance)

    dev = _gaussian_split(rng, n_eval, centers, spread, "dev", "planted-noise:dev")
    test = _gaussian_split(rng, n_eval, centers, spread, "test", "planted-noise:test")
    shifted = _cluster_centers(n_classes, dim, radius, rotation=np.pi / 9)
    ood_test = _gaussian_split(rng, n_eval, shifted, spread * 1.5, "ood", "planted-noise:ood")

    logger.info("Benchmark planted-noise: N=%d, c=%d, %d label dibalik", n_samples, n_classes, n_flip)
    return PlantedNoiseBenchmark(train=train, dev=dev, test=test, ood_test=ood_test, flips=flips)
