from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

from django.db import models

from curation.services.dynamics import SampleStats, id_sort_key
from curation.services.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

DEFAULT_FRACTION = 0.33


class Region(models.TextChoices):
    EASY = "easy", "Easy-to-learn"
    AMBIGUOUS = "ambiguous", "Ambiguous"
    HARD = "hard", "Hard-to-learn"


@dataclass(frozen=True)
class CategoryAssignment:
    sample_id: str
    region: Region
    aum_filtered: bool = False

    def to_dict(self) -> Dict:
        return {"id": self.sample_id, "region": self.region.value, "aum_filtered": self.aum_filtered}


class DataMapPoint(NamedTuple):
    variability: float
    confidence: float
    correctness: float
    region: Region


def top_count(fraction: float, n_samples: int) -> int:
    # Tolerance keeps fraction=1/3, N=9 at 3 despite the float product.
    return int(math.floor(fraction * n_samples + 1e-9))


def categorize(stats: Sequence[SampleStats], fraction: float = DEFAULT_FRACTION) -> List[CategoryAssignment]:
    """Ambiguous = top variability; easy = top confidence among the rest; hard = remainder.

    Ties fall back to ascending sample id, so the output is fully deterministic.
    """
    if not stats:
        raise DataError("Statistik sampel kosong; tidak ada yang bisa dikategorikan.")
    if not 0 < fraction <= 0.5:
        raise ConfigError(f"fraction harus di (0, 0.5], didapat {fraction}.")
    if len(stats) < 3:
        raise DataError(f"Kategorisasi membutuhkan minimal 3 sampel, didapat {len(stats)}.")

    n_top = top_count(fraction, len(stats))

    by_variability = sorted(stats, key=lambda s: (-s.variability, id_sort_key(s.sample_id)))
    ambiguous_ids = {s.sample_id for s in by_variability[:n_top]}

    remaining = [s for s in stats if s.sample_id not in ambiguous_ids]
    by_confidence = sorted(
        remaining,
        key=lambda s: (-s.confidence, s.variability, id_sort_key(s.sample_id)),
    )
    easy_ids = {s.sample_id for s in by_confidence[:n_top]}

    assignments = []
    for s in sorted(stats, key=lambda s: id_sort_key(s.sample_id)):
        if s.sample_id in ambiguous_ids:
            region = Region.AMBIGUOUS
        elif s.sample_id in easy_ids:
            region = Region.EASY
        else:
            region = Region.HARD
        assignments.append(CategoryAssignment(sample_id=s.sample_id, region=region))

    logger.info(
        "Kategorisasi %d sampel (fraction=%.3f): easy=%d ambiguous=%d hard=%d",
        len(stats),
        fraction,
        len(easy_ids),
        len(ambiguous_ids),
        len(stats) - len(easy_ids) - len(ambiguous_ids),
    )
    return assignments


def ids_in_region(assignments: Iterable[CategoryAssignment], region: Region, include_filtered: bool = True) -> List[str]:
    return [
        a.sample_id
        for a in assignments
        if a.region == region and (include_filtered or not a.aum_filtered)
    ]


def mark_filtered(assignments: Sequence[CategoryAssignment], filtered_ids: Iterable[str]) -> List[CategoryAssignment]:
    filtered = set(filtered_ids)
    return [replace(a, aum_filtered=a.sample_id in filtered or a.aum_filtered) for a in assignments]


def datamap_points(
    stats: Sequence[SampleStats],
    assignments: Optional[Sequence[CategoryAssignment]] = None,
    fraction: float = DEFAULT_FRACTION,
) -> List[DataMapPoint]:
    if not stats:
        raise DataError("Statistik sampel kosong; data map tidak bisa dibuat.")
    if assignments is None:
        assignments = categorize(stats, fraction)
    region_by_id = {a.sample_id: a.region for a in assignments}

    points = []
    for s in sorted(stats, key=lambda s: id_sort_key(s.sample_id)):
        if s.sample_id not in region_by_id:
            raise DataError(f"id={s.sample_id} tidak punya kategori.")
        points.append(DataMapPoint(s.variability, s.confidence, s.correctness, region_by_id[s.sample_id]))
    return points


def assignments_to_lines(assignments: Iterable[CategoryAssignment]) -> Iterable[str]:
    for a in assignments:
        yield json.dumps(a.to_dict(), sort_keys=True)


def ingest_assignments(stream: Iterable[str]) -> List[CategoryAssignment]:
    assignments = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
            assignments.append(
                CategoryAssignment(
                    sample_id=str(payload["id"]),
                    region=Region(payload["region"]),
                    aum_filtered=bool(payload.get("aum_filtered", False)),
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise DataError(f"Baris {line_no}: record kategori tidak valid ({exc}).") from exc
    return assignments
