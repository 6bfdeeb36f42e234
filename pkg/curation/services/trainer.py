from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, NamedTuple, Optional, Tuple

import numpy as np

from curation.services.datasets import Dataset
from curation.services.dynamics import DynamicsLog, DynamicsRecord, softmax
from curation.services.errors import ConfigError, DataError, NumericalError
from curation.services.mixup import (
    MixPair,
    MixupConfig,
    batched,
    build_random_schedule,
    build_td_schedule,
    n_batches,
    one_hot,
)

logger = logging.getLogger(__name__)

Optimizer = Literal["sgd", "adam"]
OPTIMIZERS = ("sgd", "adam")
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainerConfig:
    epochs: int = 6
    learning_rate: float = 0.1
    batch_size: int = 32
    hidden_width: int = 32
    optimizer: Optimizer = "sgd"
    l2: float = 0.0
    rng_seed: int = 0
    grad_clip: Optional[float] = None
    mixup: Optional[MixupConfig] = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs harus >= 1, didapat {self.epochs}.")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate tidak boleh negatif ({self.learning_rate}).")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size harus >= 1, didapat {self.batch_size}.")
        if self.hidden_width < 0:
            raise ConfigError(f"hidden_width tidak boleh negatif ({self.hidden_width}).")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"Optimizer tidak dikenal: {self.optimizer!r}.")
        if self.l2 < 0:
            raise ConfigError(f"l2 tidak boleh negatif ({self.l2}).")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ConfigError(f"grad_clip harus > 0 bila diset ({self.grad_clip}).")


@dataclass
class ModelParams:
    """Softmax regression (w1 is None) or one tanh hidden layer followed by a linear head."""

    w2: np.ndarray
    b2: np.ndarray
    w1: Optional[np.ndarray] = None
    b1: Optional[np.ndarray] = None
    seed: int = 0

    @property
    def hidden_width(self) -> int:
        return 0 if self.w1 is None else int(self.w1.shape[1])

    @property
    def arity(self) -> int:
        return int(self.w2.shape[0] if self.w1 is None else self.w1.shape[0])

    @property
    def n_outputs(self) -> int:
        return int(self.w2.shape[1])

    def tensors(self) -> Dict[str, np.ndarray]:
        tensors = {}
        if self.w1 is not None:
            tensors["w1"] = self.w1
            tensors["b1"] = self.b1
        tensors["w2"] = self.w2
        tensors["b2"] = self.b2
        return tensors

    def copy(self) -> "ModelParams":
        return ModelParams(
            w2=self.w2.copy(),
            b2=self.b2.copy(),
            w1=None if self.w1 is None else self.w1.copy(),
            b1=None if self.b1 is None else self.b1.copy(),
            seed=self.seed,
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(t)) for t in self.tensors().values())


class ForwardPass(NamedTuple):
    hidden: np.ndarray
    logits: np.ndarray
    probabilities: np.ndarray


class MixedBatch(NamedTuple):
    x_i: np.ndarray
    x_j: np.ndarray
    y_i: np.ndarray
    y_j: np.ndarray
    lam: np.ndarray


def init_params(arity: int, n_outputs: int, hidden_width: int, seed: int) -> ModelParams:
    """Uniform in [-s, s] with s = 1/sqrt(fan_in)."""
    rng = np.random.default_rng(seed)
    if hidden_width == 0:
        scale = 1.0 / np.sqrt(arity)
        return ModelParams(
            w2=rng.uniform(-scale, scale, size=(arity, n_outputs)),
            b2=rng.uniform(-scale, scale, size=n_outputs),
            seed=seed,
        )
    scale_in = 1.0 / np.sqrt(arity)
    w1 = rng.uniform(-scale_in, scale_in, size=(arity, hidden_width))
    b1 = rng.uniform(-scale_in, scale_in, size=hidden_width)
    scale_out = 1.0 / np.sqrt(hidden_width)
    w2 = rng.uniform(-scale_out, scale_out, size=(hidden_width, n_outputs))
    b2 = rng.uniform(-scale_out, scale_out, size=n_outputs)
    return ModelParams(w2=w2, b2=b2, w1=w1, b1=b1, seed=seed)


def _as_batch(params: ModelParams, features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.arity:
        raise DataError(f"Arity fitur {x.shape[-1]} tidak cocok dengan model ({params.arity}).")
    if not np.all(np.isfinite(x)):
        raise DataError("Fitur berisi NaN/Inf.")
    return x


def hidden_forward(params: ModelParams, x: np.ndarray) -> np.ndarray:
    if params.w1 is None:
        return x
    return np.tanh(x @ params.w1 + params.b1)


def head_forward(params: ModelParams, hidden: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    logits = hidden @ params.w2 + params.b2
    return logits, softmax(logits)


def forward(params: ModelParams, features: np.ndarray) -> ForwardPass:
    single = np.ndim(features) == 1
    x = _as_batch(params, features)
    hidden = hidden_forward(params, x)
    logits, probs = head_forward(params, hidden)
    if single:
        return ForwardPass(hidden[0], logits[0], probs[0])
    return ForwardPass(hidden, logits, probs)


def soft_cross_entropy(probabilities: np.ndarray, soft_label: np.ndarray):
    """-sum_k y_k log p_k with log floored at 1e-12; a float for one row, an array for a batch."""
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(soft_label, dtype=np.float64)
    if p.shape != y.shape:
        raise DataError(f"Bentuk probabilitas {p.shape} tidak cocok dengan label {y.shape}.")
    losses = -np.sum(y * np.log(np.maximum(p, LOG_FLOOR)), axis=-1)
    return float(losses) if losses.ndim == 0 else losses


def _zeros_like(params: ModelParams) -> ModelParams:
    return ModelParams(
        w2=np.zeros_like(params.w2),
        b2=np.zeros_like(params.b2),
        w1=None if params.w1 is None else np.zeros_like(params.w1),
        b1=None if params.b1 is None else np.zeros_like(params.b1),
        seed=params.seed,
    )


def _backprop(
    params: ModelParams,
    grads: ModelParams,
    parents: List[Tuple[np.ndarray, np.ndarray, np.ndarray]],
    hidden: np.ndarray,
    probs: np.ndarray,
    targets: np.ndarray,
) -> None:
    """Accumulate mean-loss gradients; ``parents`` are (x, h, weight) whose weighted sum of h is ``hidden``."""
    d_logits = (probs - targets) / probs.shape[0]
    grads.w2 += hidden.T @ d_logits
    grads.b2 += d_logits.sum(axis=0)
    if params.w1 is None:
        return
    d_hidden = d_logits @ params.w2.T
    for x, h, weight in parents:
        d_pre = weight[:, None] * d_hidden * (1.0 - h * h)
        grads.w1 += x.T @ d_pre
        grads.b1 += d_pre.sum(axis=0)


def loss_and_gradients(
    params: ModelParams,
    raw: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    mixed: Optional[MixedBatch] = None,
    mix_space: str = "hidden",
    l2: float = 0.0,
) -> Tuple[float, ModelParams]:
    """Mean CE over the raw batch plus mean soft CE over the mixed batch, weighted 1:1, plus L2 on weights."""
    grads = _zeros_like(params)
    loss = 0.0

    if raw is not None:
        x, targets = raw
        h = hidden_forward(params, x)
        _, probs = head_forward(params, h)
        loss += float(np.mean(soft_cross_entropy(probs, targets)))
        _backprop(params, grads, [(x, h, np.ones(x.shape[0]))], h, probs, targets)

    if mixed is not None:
        lam = mixed.lam
        targets = lam[:, None] * mixed.y_i + (1.0 - lam[:, None]) * mixed.y_j
        if mix_space == "input" or params.w1 is None:
            x = lam[:, None] * mixed.x_i + (1.0 - lam[:, None]) * mixed.x_j
            h = hidden_forward(params, x)
            parents = [(x, h, np.ones(x.shape[0]))]
        else:
            h_i = hidden_forward(params, mixed.x_i)
            h_j = hidden_forward(params, mixed.x_j)
            h = lam[:, None] * h_i + (1.0 - lam[:, None]) * h_j
            parents = [(mixed.x_i, h_i, lam), (mixed.x_j, h_j, 1.0 - lam)]
        _, probs = head_forward(params, h)
        loss += float(np.mean(soft_cross_entropy(probs, targets)))
        _backprop(params, grads, parents, h, probs, targets)

    if l2 > 0:
        loss += 0.5 * l2 * float(np.sum(params.w2 ** 2))
        grads.w2 += l2 * params.w2
        if params.w1 is not None:
            loss += 0.5 * l2 * float(np.sum(params.w1 ** 2))
            grads.w1 += l2 * params.w1

    return loss, grads


def clip_gradients(grads: ModelParams, max_norm: float) -> float:
    norm = float(np.sqrt(sum(np.sum(g * g) for g in grads.tensors().values())))
    if norm > max_norm:
        for g in grads.tensors().values():
            g *= max_norm / norm
    return norm


class SGD:
    def __init__(self, learning_rate: float) -> None:
        self.learning_rate = learning_rate

    def step(self, params: ModelParams, grads: ModelParams) -> None:
        gradient_tensors = grads.tensors()
        for name, tensor in params.tensors().items():
            tensor -= self.learning_rate * gradient_tensors[name]


class Adam:
    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: Dict[str, np.ndarray] = {}
        self._v: Dict[str, np.ndarray] = {}

    def step(self, params: ModelParams, grads: ModelParams) -> None:
        self.t += 1
        gradient_tensors = grads.tensors()
        for name, tensor in params.tensors().items():
            g = gradient_tensors[name]
            m = self._m.setdefault(name, np.zeros_like(tensor))
            v = self._v.setdefault(name, np.zeros_like(tensor))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1 ** self.t)
            v_hat = v / (1.0 - self.beta2 ** self.t)
            tensor -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(config: TrainerConfig):
    if config.optimizer == "adam":
        return Adam(config.learning_rate)
    return SGD(config.learning_rate)


def _streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    data_seq, mix_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(data_seq), np.random.default_rng(mix_seq)


@dataclass
class _StepRunner:
    params: ModelParams
    config: TrainerConfig
    mix_space: str = "hidden"
    optimizer: object = field(init=False)

    def __post_init__(self) -> None:
        self.optimizer = make_optimizer(self.config)

    def step(self, epoch: int, batch: int, raw, mixed=None) -> float:
        loss, grads = loss_and_gradients(self.params, raw, mixed, self.mix_space, self.config.l2)
        if not np.isfinite(loss):
            raise NumericalError(f"Loss tidak finite pada epoch {epoch}, batch {batch}.")
        if self.config.grad_clip is not None:
            clip_gradients(grads, self.config.grad_clip)
        self.optimizer.step(self.params, grads)
        if not self.params.is_finite():
            raise NumericalError(f"Parameter menjadi NaN/Inf pada epoch {epoch}, batch {batch}.")
        return loss


def train(dataset: Dataset, config: TrainerConfig, log_dynamics: bool = True) -> Tuple[ModelParams, DynamicsLog]:
    """Mini-batch training; after every epoch a full inference pass appends one record per sample."""
    if len(dataset) == 0:
        raise DataError("Dataset training kosong.")

    started = time.perf_counter()
    params = init_params(dataset.arity, dataset.n_classes, config.hidden_width, config.rng_seed)
    data_rng, _ = _streams(config.rng_seed)
    runner = _StepRunner(params, config)
    targets = one_hot(dataset.labels, dataset.n_classes)
    log = DynamicsLog()

    for epoch in range(1, config.epochs + 1):
        order = data_rng.permutation(len(dataset))
        losses = []
        for batch, start in enumerate(range(0, len(dataset), config.batch_size)):
            idx = order[start : start + config.batch_size]
            losses.append(runner.step(epoch, batch, (dataset.features[idx], targets[idx])))
        logger.debug("epoch %d/%d loss=%.6f", epoch, config.epochs, float(np.mean(losses)))

        if log_dynamics:
            logits = forward(params, dataset.features).logits
            for i, sample_id in enumerate(dataset.ids):
                log.append(
                    DynamicsRecord(
                        sample_id=sample_id,
                        epoch=epoch,
                        gold_label=int(dataset.labels[i]),
                        logits=tuple(logits[i].tolist()),
                    )
                )

    logger.info(
        "Training selesai: N=%d, E=%d, c=%d, h=%d dalam %.2fs",
        len(dataset),
        config.epochs,
        dataset.n_classes,
        config.hidden_width,
        time.perf_counter() - started,
    )
    return params, log


def _train_mixup(
    raw_set: Dataset,
    make_schedule: Callable[[np.random.Generator], List[MixPair]],
    config: TrainerConfig,
    steps_per_epoch: Optional[int] = None,
    schedule_sink: Optional[List[MixPair]] = None,
) -> ModelParams:
    mixup = config.mixup
    if mixup is None:
        raise ConfigError("Konfigurasi MixUp wajib untuk training MixUp.")
    if len(raw_set) == 0:
        raise DataError("Dataset training MixUp kosong.")

    started = time.perf_counter()
    params = init_params(raw_set.arity, raw_set.n_classes, config.hidden_width, config.rng_seed)
    data_rng, mix_rng = _streams(config.rng_seed)
    runner = _StepRunner(params, config, mix_space=mixup.mix_space)
    targets = one_hot(raw_set.labels, raw_set.n_classes)
    index = {sid: i for i, sid in enumerate(raw_set.ids)}

    for epoch in range(1, config.epochs + 1):
        schedule = make_schedule(mix_rng)
        if steps_per_epoch is not None:
            wanted = steps_per_epoch * mixup.batch_size
            while len(schedule) < wanted:
                schedule.extend(make_schedule(mix_rng))
            schedule = schedule[:wanted]
        mixed_batches = list(batched(schedule, mixup.batch_size))

        raw_order: List[int] = []
        while len(raw_order) < len(mixed_batches) * config.batch_size:
            raw_order.extend(data_rng.permutation(len(raw_set)).tolist())

        losses = []
        for batch, pairs in enumerate(mixed_batches):
            raw_idx = raw_order[batch * config.batch_size : (batch + 1) * config.batch_size]
            ii = [index[p.i] for p in pairs]
            jj = [index[p.j] for p in pairs]
            mixed = MixedBatch(
                x_i=raw_set.features[ii],
                x_j=raw_set.features[jj],
                y_i=targets[ii],
                y_j=targets[jj],
                lam=np.array([p.lam for p in pairs], dtype=np.float64),
            )
            raw = (raw_set.features[raw_idx], targets[raw_idx])
            losses.append(runner.step(epoch, batch, raw, mixed))
        logger.debug("mixup epoch %d/%d loss=%.6f steps=%d", epoch, config.epochs, float(np.mean(losses)), len(losses))

        if schedule_sink is not None and epoch == config.epochs:
            schedule_sink[:] = schedule

    logger.info(
        "Training MixUp selesai: raw=%d, E=%d, ruang=%s dalam %.2fs",
        len(raw_set),
        config.epochs,
        mixup.mix_space,
        time.perf_counter() - started,
    )
    return params


def train_tdmixup(
    easy_set: Dataset,
    ambiguous_set: Dataset,
    config: TrainerConfig,
    steps_per_epoch: Optional[int] = None,
    schedule_sink: Optional[List[MixPair]] = None,
) -> ModelParams:
    """Raw batches from easy ∪ ambiguous plus easy x ambiguous mixed batches."""
    if len(easy_set) == 0 or len(ambiguous_set) == 0:
        raise DataError(f"TDMixUp membutuhkan kedua set (easy={len(easy_set)}, ambiguous={len(ambiguous_set)}).")
    if config.mixup is None:
        raise ConfigError("Konfigurasi MixUp wajib untuk TDMixUp.")
    mixup = config.mixup
    union = easy_set.concat(ambiguous_set, provenance="easy+ambiguous")
    return _train_mixup(
        union,
        lambda rng: build_td_schedule(easy_set.ids, ambiguous_set.ids, mixup, rng),
        config,
        steps_per_epoch=steps_per_epoch,
        schedule_sink=schedule_sink,
    )


def train_random_mixup(
    pool: Dataset,
    config: TrainerConfig,
    steps_per_epoch: Optional[int] = None,
    schedule_sink: Optional[List[MixPair]] = None,
) -> ModelParams:
    if config.mixup is None:
        raise ConfigError("Konfigurasi MixUp wajib untuk MixUp acak.")
    mixup = config.mixup
    return _train_mixup(
        pool,
        lambda rng: build_random_schedule(pool.ids, mixup, rng),
        config,
        steps_per_epoch=steps_per_epoch,
        schedule_sink=schedule_sink,
    )


def td_steps_per_epoch(n_easy: int, n_ambiguous: int, mixup: MixupConfig) -> int:
    return n_batches(max(n_easy, n_ambiguous), mixup.batch_size)
