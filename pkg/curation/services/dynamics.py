from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from curation.services.errors import DataError

logger = logging.getLogger(__name__)

INTEGER_ID = re.compile(r"-?[0-9]+")


def id_sort_key(sample_id: str) -> Tuple[int, int, str]:
    """Integer-looking ids sort numerically ("7" before "10"), everything else by string."""
    text = str(sample_id)
    if INTEGER_ID.fullmatch(text):
        return (0, int(text), text)
    return (1, 0, text)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - np.max(z, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=axis, keepdims=True)


@dataclass(frozen=True)
class DynamicsRecord:
    """Logits of one sample at the end of one epoch."""

    sample_id: str
    epoch: int
    gold_label: int
    logits: Tuple[float, ...]

    @property
    def arity(self) -> int:
        return len(self.logits)

    def to_dict(self) -> Dict:
        return {
            "id": self.sample_id,
            "epoch": self.epoch,
            "gold": self.gold_label,
            "logits": [float(v) for v in self.logits],
        }


@dataclass(frozen=True)
class SampleStats:
    sample_id: str
    confidence: float
    variability: float
    correctness: float
    aum: Optional[float]
    epochs_observed: int

    def to_dict(self) -> Dict:
        return {
            "id": self.sample_id,
            "confidence": self.confidence,
            "variability": self.variability,
            "correctness": self.correctness,
            "aum": self.aum,
            "epochs": self.epochs_observed,
        }


class DynamicsLog:
    """Records grouped by sample id; groups keep first-appearance order and are sorted by epoch."""

    def __init__(self, records: Iterable[DynamicsRecord] = ()) -> None:
        self._groups: Dict[str, List[DynamicsRecord]] = {}
        for record in records:
            self.append(record)

    def append(self, record: DynamicsRecord) -> None:
        self._groups.setdefault(record.sample_id, []).append(record)

    @property
    def groups(self) -> Mapping[str, List[DynamicsRecord]]:
        return self._groups

    @property
    def sample_ids(self) -> List[str]:
        return list(self._groups)

    @property
    def n_epochs(self) -> int:
        return max((len(group) for group in self._groups.values()), default=0)

    def group(self, sample_id: str) -> List[DynamicsRecord]:
        return self._groups[sample_id]

    def __len__(self) -> int:
        return sum(len(group) for group in self._groups.values())

    def __iter__(self) -> Iterator[DynamicsRecord]:
        # Epoch-major, samples in first-appearance order within an epoch.
        for epoch_index in range(self.n_epochs):
            for group in self._groups.values():
                if epoch_index < len(group):
                    yield group[epoch_index]

    def to_lines(self) -> Iterator[str]:
        for record in self:
            yield json.dumps(record.to_dict(), sort_keys=True)


def ingest_log(stream: Iterable[str]) -> DynamicsLog:
    """Parse a line-delimited dynamics log, rejecting the whole stream on any structural violation."""
    seen: Dict[Tuple[str, int], int] = {}
    gold_by_id: Dict[str, int] = {}
    arity: Optional[int] = None
    records: List[DynamicsRecord] = []

    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        record = _parse_record(line, line_no)

        if arity is None:
            arity = record.arity
        elif record.arity != arity:
            raise DataError(
                f"Baris {line_no}: panjang logits {record.arity} tidak konsisten (seharusnya {arity})."
            )

        key = (record.sample_id, record.epoch)
        if key in seen:
            raise DataError(
                f"Baris {line_no}: duplikat id={record.sample_id} epoch={record.epoch}"
                f" (pertama kali di baris {seen[key]})."
            )
        seen[key] = line_no

        previous_gold = gold_by_id.setdefault(record.sample_id, record.gold_label)
        if previous_gold != record.gold_label:
            raise DataError(
                f"Baris {line_no}: label gold id={record.sample_id} berubah dari {previous_gold}"
                f" menjadi {record.gold_label}."
            )
        records.append(record)

    grouped: Dict[str, List[DynamicsRecord]] = {}
    for record in records:
        grouped.setdefault(record.sample_id, []).append(record)

    log = DynamicsLog()
    for sample_id, group in grouped.items():
        group.sort(key=lambda r: r.epoch)
        epochs = [r.epoch for r in group]
        expected = list(range(1, len(group) + 1))
        if epochs != expected:
            missing = sorted(set(range(1, max(epochs) + 1)) - set(epochs))
            raise DataError(f"id={sample_id}: epoch hilang {missing} (epoch tercatat {epochs}).")
        for record in group:
            log.append(record)

    logger.debug("Log dinamika dibaca: %d sampel, %d record", len(log.groups), len(log))
    return log


def _parse_record(line: str, line_no: int) -> DynamicsRecord:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"Baris {line_no}: JSON tidak valid ({exc.msg}).") from exc
    if not isinstance(payload, dict):
        raise DataError(f"Baris {line_no}: record harus berupa objek JSON.")

    missing = [key for key in ("id", "epoch", "gold", "logits") if key not in payload]
    if missing:
        raise DataError(f"Baris {line_no}: field hilang {missing}.")

    sample_id = payload["id"]
    if isinstance(sample_id, bool) or not isinstance(sample_id, (str, int)):
        raise DataError(f"Baris {line_no}: id harus string atau integer.")

    epoch = payload["epoch"]
    if isinstance(epoch, bool) or not isinstance(epoch, int) or epoch < 1:
        raise DataError(f"Baris {line_no}: epoch harus integer >= 1, didapat {epoch!r}.")

    logits = payload["logits"]
    if not isinstance(logits, list) or not logits:
        raise DataError(f"Baris {line_no}: logits harus list angka yang tidak kosong.")
    values = []
    for value in logits:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DataError(f"Baris {line_no}: logits berisi nilai tidak valid {value!r}.")
        values.append(float(value))

    gold = payload["gold"]
    if isinstance(gold, bool) or not isinstance(gold, int) or not 0 <= gold < len(values):
        raise DataError(f"Baris {line_no}: gold {gold!r} di luar rentang [0, {len(values)}).")

    return DynamicsRecord(sample_id=str(sample_id), epoch=epoch, gold_label=gold, logits=tuple(values))


def gold_probability(record: DynamicsRecord) -> float:
    return float(softmax(np.asarray(record.logits))[record.gold_label])


def confidence(probs: Sequence[float]) -> float:
    values = np.asarray(probs, dtype=np.float64)
    if values.size == 0:
        raise DataError("Confidence membutuhkan minimal satu epoch.")
    return float(np.mean(values))


def variability(probs: Sequence[float]) -> float:
    """Population standard deviation (divisor E)."""
    values = np.asarray(probs, dtype=np.float64)
    if values.size == 0:
        raise DataError("Variability membutuhkan minimal satu epoch.")
    if np.all(values == values[0]):
        return 0.0
    return float(np.std(values, ddof=0))


def aggregate_stats(
    log: DynamicsLog,
    aum_values: Optional[Mapping[str, float]] = None,
) -> List[SampleStats]:
    if not log.groups:
        raise DataError("Log dinamika kosong.")

    n_epochs = log.n_epochs
    ragged = [sid for sid, group in log.groups.items() if len(group) != n_epochs]
    if ragged:
        preview = ", ".join(sorted(ragged, key=id_sort_key)[:5])
        raise DataError(
            f"Cakupan epoch tidak seragam: {len(ragged)} sampel tidak punya {n_epochs} epoch (mis. {preview})."
        )

    stats: List[SampleStats] = []
    for sample_id in sorted(log.groups, key=id_sort_key):
        group = log.groups[sample_id]
        gold = group[0].gold_label
        logits = np.array([record.logits for record in group], dtype=np.float64)
        probs = softmax(logits)[:, gold]
        correct = np.argmax(logits, axis=1) == gold
        aum = None
        if aum_values is not None and sample_id in aum_values:
            aum = float(aum_values[sample_id])
        stats.append(
            SampleStats(
                sample_id=sample_id,
                confidence=confidence(probs),
                variability=variability(probs),
                correctness=float(np.mean(correct)),
                aum=aum,
                epochs_observed=n_epochs,
            )
        )
    return stats
