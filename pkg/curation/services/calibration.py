from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Sequence

import numpy as np
import pandas as pd

from curation.services.datasets import Dataset
from curation.services.errors import DataError
from curation.services.trainer import ModelParams, forward

DEFAULT_BINS = 10


class Prediction(NamedTuple):
    predicted_label: int
    confidence: float
    correct: bool


class ReliabilityBin(NamedTuple):
    lower: float
    upper: float
    count: int
    mean_confidence: float
    mean_accuracy: float


@dataclass
class CalibrationReport:
    accuracy: float
    ece: float
    n_bins: int
    bins: List[ReliabilityBin] = field(default_factory=list)
    n_samples: int = 0

    def to_dict(self) -> Dict:
        return {
            "accuracy": self.accuracy,
            "ece": self.ece,
            "n_bins": self.n_bins,
            "n_samples": self.n_samples,
            "bins": [bin_._asdict() for bin_ in self.bins],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([bin_._asdict() for bin_ in self.bins], columns=ReliabilityBin._fields)


def evaluate(params: ModelParams, test_set: Dataset) -> List[Prediction]:
    """Argmax prediction per sample; ties go to the lowest class index."""
    if len(test_set) == 0:
        raise DataError("Test set kosong.")
    probs = forward(params, test_set.features).probabilities
    predicted = np.argmax(probs, axis=1)
    confidences = probs[np.arange(len(test_set)), predicted]
    return [
        Prediction(int(label), float(conf), bool(label == gold))
        for label, conf, gold in zip(predicted, confidences, test_set.labels)
    ]


def _check(predictions: Sequence[Prediction]) -> None:
    if not predictions:
        raise DataError("Daftar prediksi kosong.")


def accuracy(predictions: Sequence[Prediction]) -> float:
    _check(predictions)
    return float(np.mean([p.correct for p in predictions]))


def bin_index(confidences: np.ndarray, n_bins: int) -> np.ndarray:
    """Half-open bins (m-1)/n < v <= m/n; confidence 0 goes to the first bin."""
    uppers = np.arange(1, n_bins + 1) / n_bins
    return np.minimum(np.searchsorted(uppers, confidences, side="left"), n_bins - 1)


def reliability_bins(predictions: Sequence[Prediction], n_bins: int = DEFAULT_BINS) -> List[ReliabilityBin]:
    _check(predictions)
    if n_bins < 1:
        raise DataError(f"n_bins harus >= 1, didapat {n_bins}.")
    confidences = np.array([p.confidence for p in predictions], dtype=np.float64)
    if np.any((confidences < 0) | (confidences > 1)):
        raise DataError("Confidence harus di [0, 1].")
    correct = np.array([p.correct for p in predictions], dtype=np.float64)
    index = bin_index(confidences, n_bins)

    bins = []
    for m in range(n_bins):
        members = index == m
        count = int(members.sum())
        bins.append(
            ReliabilityBin(
                lower=m / n_bins,
                upper=(m + 1) / n_bins,
                count=count,
                mean_confidence=float(confidences[members].mean()) if count else 0.0,
                mean_accuracy=float(correct[members].mean()) if count else 0.0,
            )
        )
    return bins


def ece(predictions: Sequence[Prediction], n_bins: int = DEFAULT_BINS) -> float:
    bins = reliability_bins(predictions, n_bins)
    total = len(predictions)
    return float(sum(b.count / total * abs(b.mean_accuracy - b.mean_confidence) for b in bins if b.count))


def calibration_report(predictions: Sequence[Prediction], n_bins: int = DEFAULT_BINS) -> CalibrationReport:
    bins = reliability_bins(predictions, n_bins)
    return CalibrationReport(
        accuracy=accuracy(predictions),
        ece=ece(predictions, n_bins),
        n_bins=n_bins,
        bins=bins,
        n_samples=len(predictions),
    )
