from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from curation.services.errors import ConfigError, DataError

MixSpace = Literal["input", "hidden"]
MIX_SPACES = ("input", "hidden")


@dataclass(frozen=True)
class MixupConfig:
    alpha: float = 0.4
    mix_space: MixSpace = "hidden"
    batch_size: int = 32
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ConfigError(f"alpha MixUp harus > 0, didapat {self.alpha}.")
        if self.mix_space not in MIX_SPACES:
            raise ConfigError(f"mix_space tidak dikenal: {self.mix_space!r}.")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size MixUp harus >= 1, didapat {self.batch_size}.")


@dataclass(frozen=True)
class MixedSample:
    features: np.ndarray
    soft_label: np.ndarray
    lam: float
    parent_ids: Tuple[Optional[str], Optional[str]] = (None, None)


class MixPair(NamedTuple):
    i: str
    j: str
    lam: float

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "lambda": self.lam}


def sample_lambda(alpha: float, rng: np.random.Generator) -> float:
    """One Beta(alpha, alpha) draw as G1 / (G1 + G2) with G ~ Gamma(alpha, 1).

    numpy's standard_gamma handles alpha < 1 by boosting Gamma(alpha + 1) with U**(1/alpha).
    """
    if not alpha > 0:
        raise ConfigError(f"alpha MixUp harus > 0, didapat {alpha}.")
    g1 = rng.standard_gamma(alpha)
    g2 = rng.standard_gamma(alpha)
    total = g1 + g2
    if total == 0.0:
        # Both draws underflowed; the distribution is symmetric.
        return 0.5
    return float(g1 / total)


def one_hot(labels: Sequence[int], n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    encoded = np.zeros((labels.size, n_classes), dtype=np.float64)
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def mix_pair(
    sample_i: Tuple[Sequence[float], int],
    sample_j: Tuple[Sequence[float], int],
    lam: float,
    n_classes: int,
    parent_ids: Tuple[Optional[str], Optional[str]] = (None, None),
) -> MixedSample:
    x_i, y_i = np.asarray(sample_i[0], dtype=np.float64), int(sample_i[1])
    x_j, y_j = np.asarray(sample_j[0], dtype=np.float64), int(sample_j[1])
    if x_i.shape != x_j.shape:
        raise DataError(f"Arity fitur berbeda: {x_i.shape} vs {x_j.shape}.")
    for label in (y_i, y_j):
        if not 0 <= label < n_classes:
            raise DataError(f"Label {label} di luar rentang [0, {n_classes}).")
    labels = one_hot([y_i, y_j], n_classes)
    return MixedSample(
        features=lam * x_i + (1.0 - lam) * x_j,
        soft_label=lam * labels[0] + (1.0 - lam) * labels[1],
        lam=float(lam),
        parent_ids=parent_ids,
    )


def _cycling_stream(ids: Sequence[str], length: int, rng: np.random.Generator) -> List[str]:
    stream: List[str] = []
    while len(stream) < length:
        stream.extend(ids[i] for i in rng.permutation(len(ids)))
    return stream[:length]


def build_td_schedule(
    easy_ids: Sequence[str],
    ambiguous_ids: Sequence[str],
    config: MixupConfig,
    rng: np.random.Generator,
) -> List[MixPair]:
    """Easy x ambiguous pairs for one epoch of the larger pool; the smaller pool is reshuffled when exhausted."""
    if not easy_ids or not ambiguous_ids:
        raise DataError(
            f"Pool TDMixUp kosong (easy={len(easy_ids)}, ambiguous={len(ambiguous_ids)})."
        )
    length = max(len(easy_ids), len(ambiguous_ids))
    easy_stream = _cycling_stream(list(easy_ids), length, rng)
    ambiguous_stream = _cycling_stream(list(ambiguous_ids), length, rng)
    return [
        MixPair(i, j, sample_lambda(config.alpha, rng))
        for i, j in zip(easy_stream, ambiguous_stream)
    ]


def build_random_schedule(
    pool_ids: Sequence[str],
    config: MixupConfig,
    rng: np.random.Generator,
) -> List[MixPair]:
    """Pool shuffled against an independent shuffle of itself; self-pairs are re-drawn."""
    pool = list(pool_ids)
    if len(pool) < 2:
        raise DataError(f"MixUp acak membutuhkan pool >= 2 sampel, didapat {len(pool)}.")
    first = rng.permutation(len(pool))
    second = rng.permutation(len(pool))
    for position in range(len(pool)):
        while second[position] == first[position]:
            second[position] = rng.integers(len(pool))
    return [
        MixPair(pool[a], pool[b], sample_lambda(config.alpha, rng))
        for a, b in zip(first, second)
    ]


def batched(schedule: Sequence[MixPair], batch_size: int) -> Iterator[List[MixPair]]:
    for start in range(0, len(schedule), batch_size):
        yield list(schedule[start : start + batch_size])


def n_batches(n_pairs: int, batch_size: int) -> int:
    return math.ceil(n_pairs / batch_size)


def schedule_to_lines(schedule: Iterable[MixPair]) -> Iterator[str]:
    for pair in schedule:
        yield json.dumps(pair.to_dict(), sort_keys=True)
