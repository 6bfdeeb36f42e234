from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Set

import numpy as np

from curation.services.dynamics import DynamicsLog, id_sort_key
from curation.services.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

ThresholdMode = Literal["total", "per_class"]
THRESHOLD_MODES = ("total", "per_class")


@dataclass(frozen=True)
class ThresholdPlan:
    """Samples re-labelled for a threshold run; label ``fake_class_index`` does not exist in the data."""

    flipped: Dict[str, int]
    original: Dict[str, int]
    fake_class_index: int
    mode: str = "total"

    @property
    def total_flipped(self) -> int:
        return len(self.flipped)

    def relabel(self, labels: Mapping[str, int]) -> Dict[str, int]:
        return {sid: self.flipped.get(sid, label) for sid, label in labels.items()}


@dataclass
class AumReport:
    aum_by_sample: Dict[str, float]
    threshold_value: float
    percentile_k: float
    threshold_ids: Set[str] = field(default_factory=set)
    filtered_ids: Set[str] = field(default_factory=set)

    @property
    def excluded_ids(self) -> Set[str]:
        """Ids kept out of every curated set: threshold samples plus filtered samples."""
        return self.threshold_ids | self.filtered_ids

    @property
    def retained_ids(self) -> List[str]:
        excluded = self.excluded_ids
        return [sid for sid in sorted(self.aum_by_sample, key=id_sort_key) if sid not in excluded]

    def header(self) -> Dict:
        return {"threshold_value": self.threshold_value, "k": self.percentile_k}

    def to_lines(self) -> Iterable[str]:
        yield json.dumps(self.header(), sort_keys=True)
        for sid in sorted(self.aum_by_sample, key=id_sort_key):
            yield json.dumps(
                {
                    "id": sid,
                    "aum": self.aum_by_sample[sid],
                    "is_threshold_sample": sid in self.threshold_ids,
                    "filtered": sid in self.filtered_ids,
                },
                sort_keys=True,
            )


def margin(logits: Sequence[float], gold_label: int) -> float:
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size < 2:
        raise DataError(f"Margin membutuhkan minimal 2 logit, didapat {z.size}.")
    others = np.delete(z, gold_label)
    return float(z[gold_label] - np.max(others))


def aum(per_epoch_logits: Sequence[Sequence[float]], gold_label: int) -> float:
    if len(per_epoch_logits) == 0:
        raise DataError("AUM membutuhkan minimal satu epoch.")
    arities = {len(row) for row in per_epoch_logits}
    if len(arities) != 1:
        raise DataError(f"Panjang logits antar epoch tidak konsisten: {sorted(arities)}.")
    margins = [margin(row, gold_label) for row in per_epoch_logits]
    return float(np.mean(margins))


def aum_from_log(log: DynamicsLog) -> Dict[str, float]:
    values = {}
    for sample_id, group in log.groups.items():
        values[sample_id] = aum([record.logits for record in group], group[0].gold_label)
    return values


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def make_threshold_plan(
    dataset_labels: Mapping[str, int],
    n_classes: int,
    mode: ThresholdMode = "total",
    rng_seed: int = 0,
) -> ThresholdPlan:
    """Pick N/(c+1) samples (overall or per class) and give each a different label, fake class c included."""
    if mode not in THRESHOLD_MODES:
        raise ConfigError(f"Mode threshold tidak dikenal: {mode!r} (pilih {', '.join(THRESHOLD_MODES)}).")
    if n_classes < 2:
        raise ConfigError(f"Jumlah kelas minimal 2, didapat {n_classes}.")
    n_samples = len(dataset_labels)
    if n_samples < n_classes + 1:
        raise DataError(f"Threshold samples membutuhkan N >= c+1 ({n_classes + 1}), didapat N={n_samples}.")

    rng = np.random.default_rng(rng_seed)
    ordered = sorted(dataset_labels, key=id_sort_key)
    count = _round_half_up(n_samples / (n_classes + 1))

    if mode == "total":
        picks = rng.choice(len(ordered), size=count, replace=False)
        selected = [ordered[i] for i in sorted(picks)]
    else:
        selected = []
        for label in range(n_classes):
            members = [sid for sid in ordered if dataset_labels[sid] == label]
            if count > len(members):
                raise DataError(
                    f"Mode per_class meminta {count} sampel dari kelas {label}, populasi hanya {len(members)}."
                )
            picks = rng.choice(len(members), size=count, replace=False)
            selected.extend(members[i] for i in sorted(picks))

    flipped: Dict[str, int] = {}
    for sid in selected:
        original = int(dataset_labels[sid])
        # Uniform over the c labels in {0..c} other than the original.
        draw = int(rng.integers(n_classes))
        flipped[sid] = draw if draw < original else draw + 1

    logger.info(
        "Threshold plan: %d dari %d sampel dipindah label (mode=%s, c=%d)",
        len(flipped),
        n_samples,
        mode,
        n_classes,
    )
    return ThresholdPlan(
        flipped=flipped,
        original={sid: int(dataset_labels[sid]) for sid in selected},
        fake_class_index=n_classes,
        mode=mode,
    )


def compute_threshold(threshold_sample_aums: Sequence[float], k: float) -> float:
    """Nearest-rank percentile: the ceil(k/100 * n)-th smallest value."""
    values = sorted(float(v) for v in threshold_sample_aums)
    if not values:
        raise DataError("Tidak ada AUM threshold sample untuk menghitung ambang.")
    if not 0 < k <= 100:
        raise ConfigError(f"Persentil k harus di (0, 100], didapat {k}.")
    rank = max(1, math.ceil(k * len(values) / 100 - 1e-9))
    return values[rank - 1]


def filter_set(aums: Mapping[str, float], threshold_value: float) -> Set[str]:
    """Ids retained by the filter; an AUM equal to the threshold is kept."""
    return {sid for sid, value in aums.items() if value >= threshold_value}


def build_report(
    aum_by_sample: Mapping[str, float],
    threshold_ids: Iterable[str],
    k: float,
) -> AumReport:
    threshold_ids = set(threshold_ids)
    threshold_aums = [aum_by_sample[sid] for sid in sorted(threshold_ids, key=id_sort_key)]
    threshold_value = compute_threshold(threshold_aums, k)
    real = {sid: value for sid, value in aum_by_sample.items() if sid not in threshold_ids}
    filtered = set(real) - filter_set(real, threshold_value)
    logger.info(
        "AUM threshold k=%.1f -> %.4f; %d dari %d sampel disaring",
        k,
        threshold_value,
        len(filtered),
        len(real),
    )
    return AumReport(
        aum_by_sample=dict(aum_by_sample),
        threshold_value=threshold_value,
        percentile_k=float(k),
        threshold_ids=threshold_ids,
        filtered_ids=filtered,
    )


def ingest_report(stream: Iterable[str]) -> AumReport:
    header: Optional[Dict] = None
    aums: Dict[str, float] = {}
    threshold_ids: Set[str] = set()
    filtered: Set[str] = set()
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
            if header is None:
                header = {"threshold_value": float(payload["threshold_value"]), "k": float(payload["k"])}
                continue
            sid = str(payload["id"])
            aums[sid] = float(payload["aum"])
            if payload.get("is_threshold_sample"):
                threshold_ids.add(sid)
            if payload.get("filtered"):
                filtered.add(sid)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"Baris {line_no}: record laporan AUM tidak valid ({exc}).") from exc
    if header is None:
        raise DataError("Laporan AUM kosong (header tidak ditemukan).")
    return AumReport(
        aum_by_sample=aums,
        threshold_value=header["threshold_value"],
        percentile_k=header["k"],
        threshold_ids=threshold_ids,
        filtered_ids=filtered,
    )
