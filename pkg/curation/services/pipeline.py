from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from django.conf import settings
from dotenv import dotenv_values

from curation.services import aggregator
from curation.services.aum import (
    THRESHOLD_MODES,
    AumReport,
    aum_from_log,
    build_report,
    ingest_report,
    make_threshold_plan,
)
from curation.services.calibration import CalibrationReport, calibration_report, evaluate
from curation.services.cartography import (
    CategoryAssignment,
    Region,
    assignments_to_lines,
    categorize,
    ids_in_region,
    ingest_assignments,
    mark_filtered,
)
from curation.services.datasets import DATA_FORMATS, Dataset, dataset_to_lines, ingest_dataset, make_planted_noise_benchmark
from curation.services.dynamics import DynamicsLog, aggregate_stats, id_sort_key, ingest_log
from curation.services.errors import ConfigError, DataError
from curation.services.mixup import MIX_SPACES, MixPair, MixupConfig, schedule_to_lines
from curation.services.plotting import render_datamap_svg
from curation.services.serializers import (
    load_checkpoint,
    read_lines,
    save_checkpoint,
    write_json_atomic,
    write_lines_atomic,
    write_text_atomic,
)
from curation.services.trainer import (
    OPTIMIZERS,
    ModelParams,
    TrainerConfig,
    td_steps_per_epoch,
    train,
    train_random_mixup,
    train_tdmixup,
)

logger = logging.getLogger(__name__)

AUM_TARGETS = ("easy", "ambiguous", "all")
RANDOM_POOLS = ("union", "filtered")

PATH_KEYS = ("TRAIN_PATH", "DEV_PATH", "TEST_PATH", "OOD_TEST_PATH", "WORKDIR")
INT_KEYS = ("N_CLASSES", "SEED", "EPOCHS", "BATCH_SIZE", "HIDDEN_WIDTH", "MIXUP_BATCH_SIZE", "N_BINS", "WORKERS")
FLOAT_KEYS = ("LEARNING_RATE", "L2", "GRAD_CLIP", "MIXUP_ALPHA", "FRACTION", "AUM_K_EASY", "AUM_K_AMBIGUOUS")
STR_KEYS = ("DATA_FORMAT", "OPTIMIZER", "MIX_SPACE", "THRESHOLD_MODE", "ABLATION_SEEDS", "RANDOM_POOL", "AUM_PRESET")
KNOWN_KEYS = frozenset(PATH_KEYS + INT_KEYS + FLOAT_KEYS + STR_KEYS)

DYNAMICS = "dynamics.jsonl"
BASE_CHECKPOINT = "base.ckpt"
STATS = "stats.jsonl"
CATEGORIES = "categories.jsonl"
CATEGORIES_AUM = "categories_aum.jsonl"
DATAMAP = "datamap.svg"
TDMIXUP_CHECKPOINT = "tdmixup.ckpt"
TDMIXUP_NOAUM_CHECKPOINT = "tdmixup_noaum.ckpt"
SCHEDULE = "schedule.jsonl"


@dataclass(frozen=True)
class PipelineConfig:
    workdir: Path
    trainer: TrainerConfig
    mixup: MixupConfig
    seed: int = 13
    train_path: Optional[Path] = None
    dev_path: Optional[Path] = None
    test_path: Optional[Path] = None
    ood_test_path: Optional[Path] = None
    data_format: str = "vectors"
    n_classes: Optional[int] = None
    fraction: float = 0.33
    aum_k: Dict[str, float] = field(default_factory=lambda: {"easy": 80.0, "ambiguous": 80.0, "all": 80.0})
    threshold_mode: str = "total"
    n_bins: int = 10
    ablation_seeds: Tuple[int, ...] = (1, 2, 3, 4, 5)
    random_pool: str = "union"
    workers: int = 1

    def artifact(self, name: str) -> Path:
        return self.workdir / name

    def with_seed(self, seed: int) -> "PipelineConfig":
        mixup = replace(self.mixup, rng_seed=seed)
        return replace(self, seed=seed, mixup=mixup, trainer=replace(self.trainer, rng_seed=seed, mixup=mixup))


def _coerce(key: str, value: Any) -> Any:
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    try:
        if key in PATH_KEYS:
            return Path(str(value)).expanduser()
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Nilai konfigurasi {key}={value!r} tidak valid.") from exc
    return str(value).strip()


def _parse_seeds(value: Any) -> Tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [part for part in str(value).split(",") if part.strip()]
    try:
        seeds = tuple(int(item) for item in items)
    except ValueError as exc:
        raise ConfigError(f"ABLATION_SEEDS tidak valid: {value!r}.") from exc
    if not seeds:
        raise ConfigError("ABLATION_SEEDS tidak boleh kosong.")
    return seeds


def read_config_file(path) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"File konfigurasi tidak ditemukan: {path}")
    values = {key.upper(): value for key, value in dotenv_values(path).items()}
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"Kunci konfigurasi tidak dikenal di {path}: {', '.join(unknown)}.")
    # Relative paths resolve against the config file's directory.
    for key in PATH_KEYS:
        raw = values.get(key)
        if raw and not Path(raw).expanduser().is_absolute():
            values[key] = str(path.parent / raw)
    return values


def load_pipeline_config(config_path=None, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """Settings defaults, then the config file, then command-line overrides."""
    explicit: Dict[str, Any] = {}
    if config_path:
        explicit.update(read_config_file(config_path))
    for key, value in (overrides or {}).items():
        if value is not None:
            explicit[key.upper()] = value
    unknown = sorted(set(explicit) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"Kunci konfigurasi tidak dikenal: {', '.join(unknown)}.")

    merged: Dict[str, Any] = dict(settings.CURATION)
    preset = explicit.get("AUM_PRESET")
    if preset:
        presets = settings.AUM_K_PRESETS
        if str(preset).lower() not in presets:
            raise ConfigError(f"AUM_PRESET tidak dikenal: {preset!r} (pilih {', '.join(presets)}).")
        merged["AUM_K_EASY"] = presets[str(preset).lower()]
    merged.update(explicit)
    values = {key: _coerce(key, value) for key, value in merged.items()}

    if values.get("DATA_FORMAT") not in DATA_FORMATS:
        raise ConfigError(f"DATA_FORMAT harus salah satu dari {DATA_FORMATS}.")
    if values.get("THRESHOLD_MODE") not in THRESHOLD_MODES:
        raise ConfigError(f"THRESHOLD_MODE harus salah satu dari {THRESHOLD_MODES}.")
    if values.get("RANDOM_POOL") not in RANDOM_POOLS:
        raise ConfigError(f"RANDOM_POOL harus salah satu dari {RANDOM_POOLS}.")
    if values.get("OPTIMIZER") not in OPTIMIZERS:
        raise ConfigError(f"OPTIMIZER harus salah satu dari {OPTIMIZERS}.")
    if values.get("MIX_SPACE") not in MIX_SPACES:
        raise ConfigError(f"MIX_SPACE harus salah satu dari {MIX_SPACES}.")
    for key in ("AUM_K_EASY", "AUM_K_AMBIGUOUS"):
        if not 0 < values[key] <= 100:
            raise ConfigError(f"{key} harus di (0, 100], didapat {values[key]}.")
    if not 0 < values["FRACTION"] <= 0.5:
        raise ConfigError(f"FRACTION harus di (0, 0.5], didapat {values['FRACTION']}.")

    seed = values["SEED"]
    mixup = MixupConfig(
        alpha=values["MIXUP_ALPHA"],
        mix_space=values["MIX_SPACE"],
        batch_size=values["MIXUP_BATCH_SIZE"],
        rng_seed=seed,
    )
    trainer = TrainerConfig(
        epochs=values["EPOCHS"],
        learning_rate=values["LEARNING_RATE"],
        batch_size=values["BATCH_SIZE"],
        hidden_width=values["HIDDEN_WIDTH"],
        optimizer=values["OPTIMIZER"],
        l2=values["L2"] or 0.0,
        rng_seed=seed,
        grad_clip=values.get("GRAD_CLIP"),
        mixup=mixup,
    )
    return PipelineConfig(
        workdir=values["WORKDIR"],
        trainer=trainer,
        mixup=mixup,
        seed=seed,
        train_path=values.get("TRAIN_PATH"),
        dev_path=values.get("DEV_PATH"),
        test_path=values.get("TEST_PATH"),
        ood_test_path=values.get("OOD_TEST_PATH"),
        data_format=values["DATA_FORMAT"],
        n_classes=values.get("N_CLASSES"),
        fraction=values["FRACTION"],
        aum_k={"easy": values["AUM_K_EASY"], "ambiguous": values["AUM_K_AMBIGUOUS"], "all": values["AUM_K_EASY"]},
        threshold_mode=values["THRESHOLD_MODE"],
        n_bins=values["N_BINS"],
        ablation_seeds=_parse_seeds(values["ABLATION_SEEDS"]),
        random_pool=values["RANDOM_POOL"],
        workers=max(1, values.get("WORKERS") or 1),
    )


def load_split(config: PipelineConfig, split: str, n_classes: Optional[int] = None) -> Dataset:
    path = getattr(config, f"{split}_path")
    if path is None:
        raise ConfigError(f"{split.upper()}_PATH belum diset.")
    return ingest_dataset(path, config.data_format, n_classes if n_classes is not None else config.n_classes)


def load_assignments(config: PipelineConfig) -> List[CategoryAssignment]:
    return ingest_assignments(read_lines(config.artifact(CATEGORIES)))


def _ids_digest(ids: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(sorted(ids, key=id_sort_key)).encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# train-dynamics


def run_train_dynamics(config: PipelineConfig) -> Dict[str, Path]:
    dataset = load_split(config, "train")
    logger.info("Mulai training dynamics: N=%d, E=%d, seed=%d", len(dataset), config.trainer.epochs, config.seed)
    params, log = train(dataset, config.trainer)
    outputs = {
        "dynamics": write_lines_atomic(config.artifact(DYNAMICS), log.to_lines()),
        "checkpoint": save_checkpoint(config.artifact(BASE_CHECKPOINT), params),
    }
    logger.info("Log dinamika ditulis: %s (%d record)", outputs["dynamics"], len(log))
    return outputs


# ---------------------------------------------------------------------------
# datamap


def run_datamap(config: PipelineConfig) -> Dict[str, Path]:
    log = ingest_log(read_lines(config.artifact(DYNAMICS)))
    stats = aggregate_stats(log)
    assignments = categorize(stats, config.fraction)
    outputs = {
        "stats": write_lines_atomic(
            config.artifact(STATS), (json.dumps(s.to_dict(), sort_keys=True) for s in stats)
        ),
        "categories": write_lines_atomic(config.artifact(CATEGORIES), assignments_to_lines(assignments)),
        "datamap": write_text_atomic(
            config.artifact(DATAMAP), render_datamap_svg(stats, assignments, title=f"Data map ({len(stats)} samples)")
        ),
    }
    logger.info("Data map ditulis: %s", outputs["datamap"])
    return outputs


# ---------------------------------------------------------------------------
# aum-filter


@dataclass
class ThresholdPass:
    report: AumReport
    log: DynamicsLog
    flipped: Dict[str, int]


def threshold_pass(subset: Dataset, config: PipelineConfig, k: float) -> ThresholdPass:
    """Train a fresh (c+1)-output model on ``subset`` with threshold samples inserted and measure AUMs."""
    plan = make_threshold_plan(subset.label_map(), subset.n_classes, config.threshold_mode, config.seed)
    threshold_set = subset.relabel(
        plan.relabel(subset.label_map()),
        n_classes=subset.n_classes + 1,
        provenance=f"{subset.provenance}+threshold",
    )
    _, log = train(threshold_set, config.trainer)
    report = build_report(aum_from_log(log), plan.flipped, k)
    return ThresholdPass(report=report, log=log, flipped=plan.flipped)


def _target_ids(dataset: Dataset, assignments: Optional[Sequence[CategoryAssignment]], target: str) -> List[str]:
    if target == "all":
        return sorted(dataset.ids, key=id_sort_key)
    region = Region(target)
    return sorted(ids_in_region(assignments or [], region), key=id_sort_key)


def aum_report_name(target: str) -> str:
    return f"aum_{target}.jsonl"


def refresh_filtered_categories(config: PipelineConfig) -> Optional[Path]:
    """Rebuild categories_aum.jsonl from categories.jsonl and the easy/ambiguous AUM reports present."""
    assignments = load_assignments(config)
    for target in ("easy", "ambiguous"):
        path = config.artifact(aum_report_name(target))
        if path.is_file():
            report = ingest_report(read_lines(path))
            assignments = mark_filtered(assignments, report.excluded_ids)
    return write_lines_atomic(config.artifact(CATEGORIES_AUM), assignments_to_lines(assignments))


def run_aum_filter(
    config: PipelineConfig,
    target: str = "easy",
    k: Optional[float] = None,
    sweep: Optional[Sequence[float]] = None,
) -> Dict[str, Path]:
    if target not in AUM_TARGETS:
        raise ConfigError(f"Target AUM tidak dikenal: {target!r} (pilih {', '.join(AUM_TARGETS)}).")
    k = config.aum_k[target] if k is None else k
    if not 0 < k <= 100:
        raise ConfigError(f"Persentil k harus di (0, 100], didapat {k}.")

    dataset = load_split(config, "train")
    assignments = None if target == "all" else load_assignments(config)
    ids = _target_ids(dataset, assignments, target)
    if len(ids) < dataset.n_classes + 1:
        raise DataError(f"Set {target} terlalu kecil untuk threshold samples ({len(ids)} sampel).")
    subset = dataset.subset(ids, provenance=f"train:{target}")

    started = time.perf_counter()
    result = threshold_pass(subset, config, k)
    outputs = {
        "threshold_dynamics": write_lines_atomic(
            config.artifact(f"threshold_{target}_dynamics.jsonl"), result.log.to_lines()
        ),
        "report": write_lines_atomic(config.artifact(aum_report_name(target)), result.report.to_lines()),
    }
    if target != "all":
        outputs["categories_aum"] = refresh_filtered_categories(config)
    logger.info(
        "AUM filter %s: %d disaring, %d dipertahankan dalam %.2fs",
        target,
        len(result.report.filtered_ids),
        len(result.report.retained_ids),
        time.perf_counter() - started,
    )

    if sweep:
        outputs["sweep"] = _run_k_sweep(config, dataset, assignments, target, result, sweep)
    return outputs


def _run_k_sweep(
    config: PipelineConfig,
    dataset: Dataset,
    assignments: Optional[Sequence[CategoryAssignment]],
    target: str,
    result: ThresholdPass,
    grid: Sequence[float],
) -> Path:
    dev = load_split(config, "dev", n_classes=dataset.n_classes)
    rows = []
    for k in grid:
        report = build_report(result.report.aum_by_sample, result.flipped, k)
        dropped = report.excluded_ids
        if target == "all":
            kept = [sid for sid in dataset.ids if sid not in dropped]
            params, _ = train(dataset.subset(kept), config.trainer, log_dynamics=False)
        else:
            easy = ids_in_region(assignments, Region.EASY)
            ambiguous = ids_in_region(assignments, Region.AMBIGUOUS)
            if target == "easy":
                easy = [sid for sid in easy if sid not in dropped]
            else:
                ambiguous = [sid for sid in ambiguous if sid not in dropped]
            if not easy or not ambiguous:
                logger.warning("k=%.1f mengosongkan salah satu set; dilewati", k)
                continue
            params = train_tdmixup(dataset.subset(easy), dataset.subset(ambiguous), config.trainer)
        metrics = calibration_report(evaluate(params, dev), config.n_bins)
        rows.append(
            {
                "k": float(k),
                "threshold": report.threshold_value,
                "retained": len(report.retained_ids),
                "filtered": len(report.filtered_ids),
                "dev_accuracy": metrics.accuracy,
                "dev_ece": metrics.ece,
            }
        )
    frame = aggregator.results_frame(rows)
    logger.info("Sweep k untuk %s:\n%s", target, aggregator.render_table(frame, ("dev_accuracy", "dev_ece")))
    return write_text_atomic(config.artifact(f"aum_sweep_{target}.csv"), frame.to_csv(index=False))


# ---------------------------------------------------------------------------
# tdmixup-train


def curated_sets(
    config: PipelineConfig,
    dataset: Dataset,
    assignments: Sequence[CategoryAssignment],
    use_aum: bool,
) -> Tuple[Dataset, Dataset]:
    easy = ids_in_region(assignments, Region.EASY)
    ambiguous = ids_in_region(assignments, Region.AMBIGUOUS)
    if use_aum:
        report = ingest_report(read_lines(config.artifact(aum_report_name("easy"))))
        excluded = report.excluded_ids
        easy = [sid for sid in easy if sid not in excluded]
    if not easy:
        raise DataError("Set easy-to-learn kosong setelah filter AUM; TDMixUp tidak dijalankan.")
    if not ambiguous:
        raise DataError("Set ambiguous kosong; TDMixUp tidak dijalankan.")
    return dataset.subset(easy, provenance="train:easy"), dataset.subset(ambiguous, provenance="train:ambiguous")


def run_tdmixup_train(config: PipelineConfig, use_aum: bool = True) -> Dict[str, Path]:
    dataset = load_split(config, "train")
    easy_set, ambiguous_set = curated_sets(config, dataset, load_assignments(config), use_aum)
    logger.info(
        "Mulai TDMixUp: easy=%d ambiguous=%d (%.1f%% data), aum=%s",
        len(easy_set),
        len(ambiguous_set),
        100.0 * (len(easy_set) + len(ambiguous_set)) / len(dataset),
        use_aum,
    )
    schedule: List[MixPair] = []
    params = train_tdmixup(easy_set, ambiguous_set, config.trainer, schedule_sink=schedule)
    name = TDMIXUP_CHECKPOINT if use_aum else TDMIXUP_NOAUM_CHECKPOINT
    return {
        "checkpoint": save_checkpoint(config.artifact(name), params),
        "schedule": write_lines_atomic(config.artifact(SCHEDULE), schedule_to_lines(schedule)),
    }


# ---------------------------------------------------------------------------
# evaluate


def evaluate_split(params: ModelParams, dataset: Dataset, n_bins: int) -> CalibrationReport:
    return calibration_report(evaluate(params, dataset), n_bins)


def run_evaluate(
    config: PipelineConfig,
    checkpoint=None,
    test_path=None,
    ood_test_path=None,
) -> Dict[str, CalibrationReport]:
    params = load_checkpoint(checkpoint or config.artifact(TDMIXUP_CHECKPOINT))
    config = replace(
        config,
        test_path=Path(test_path) if test_path else config.test_path,
        ood_test_path=Path(ood_test_path) if ood_test_path else config.ood_test_path,
    )
    reports = {"test": evaluate_split(params, load_split(config, "test", params.n_outputs), config.n_bins)}
    if config.ood_test_path is not None:
        reports["ood"] = evaluate_split(params, load_split(config, "ood_test", params.n_outputs), config.n_bins)
    for name, report in reports.items():
        write_json_atomic(config.artifact(f"report_{name}.json"), report.to_dict())
    return reports


# ---------------------------------------------------------------------------
# ablation


METHODS = ["random", "tdmixup"]


def _ablation_seed(config: PipelineConfig, dataset: Dataset, test: Dataset, ood: Optional[Dataset]) -> List[Dict]:
    _, log = train(dataset, config.trainer)
    assignments = categorize(aggregate_stats(log), config.fraction)
    easy = ids_in_region(assignments, Region.EASY)
    ambiguous = ids_in_region(assignments, Region.AMBIGUOUS)

    result = threshold_pass(dataset.subset(easy), config, config.aum_k["easy"])
    excluded = result.report.excluded_ids
    easy_filtered = [sid for sid in easy if sid not in excluded]
    if not easy_filtered:
        raise DataError(f"Seed {config.seed}: filter AUM mengosongkan set easy-to-learn.")

    steps = td_steps_per_epoch(len(easy_filtered), len(ambiguous), config.mixup)
    arms = {
        "tdmixup": easy_filtered + ambiguous,
        "random": (easy + ambiguous) if config.random_pool == "union" else easy_filtered + ambiguous,
    }
    models = {
        "tdmixup": train_tdmixup(dataset.subset(easy_filtered), dataset.subset(ambiguous), config.trainer, steps),
        "random": train_random_mixup(dataset.subset(arms["random"]), config.trainer, steps),
    }

    rows = []
    for method in METHODS:
        report = evaluate_split(models[method], test, config.n_bins)
        row = {
            "method": method,
            "seed": config.seed,
            "accuracy": report.accuracy,
            "ece": report.ece,
            "n_raw": len(arms[method]),
            "raw_digest": _ids_digest(arms[method]),
            "steps_per_epoch": steps,
        }
        if ood is not None:
            ood_report = evaluate_split(models[method], ood, config.n_bins)
            row["ood_accuracy"] = ood_report.accuracy
            row["ood_ece"] = ood_report.ece
        rows.append(row)
    logger.info("Ablation seed %d selesai", config.seed)
    return rows


def run_ablation(config: PipelineConfig) -> Dict[str, Any]:
    dataset = load_split(config, "train")
    test = load_split(config, "test", dataset.n_classes)
    ood = load_split(config, "ood_test", dataset.n_classes) if config.ood_test_path else None

    seeded = [config.with_seed(seed) for seed in config.ablation_seeds]
    # Seeds are independent; results are collected in seed order.
    with ThreadPoolExecutor(max_workers=min(config.workers, len(seeded))) as executor:
        futures = [executor.submit(_ablation_seed, seeded_config, dataset, test, ood) for seeded_config in seeded]
        rows = [row for future in futures for row in future.result()]

    frame = aggregator.results_frame(rows)
    tables = {metric: aggregator.seed_table(frame, metric, METHODS) for metric in aggregator.METRICS}
    summary = aggregator.build_summary(frame, METHODS)
    summary["seeds"] = list(config.ablation_seeds)
    summary["random_pool"] = config.random_pool
    outputs = {
        "csv": write_text_atomic(config.artifact("ablation.csv"), frame.to_csv(index=False)),
        "json": write_json_atomic(config.artifact("ablation.json"), summary),
    }
    return {"frame": frame, "tables": tables, "summary": summary, "outputs": outputs}


# ---------------------------------------------------------------------------
# subset-train


def _stored_or_computed_report(config: PipelineConfig, dataset: Dataset, ids: List[str], target: str) -> AumReport:
    path = config.artifact(aum_report_name(target))
    if path.is_file():
        return ingest_report(read_lines(path))
    logger.info("Laporan %s belum ada; menjalankan threshold pass untuk %s", path.name, target)
    return threshold_pass(dataset.subset(ids), config, config.aum_k[target]).report


def run_subset_train(config: PipelineConfig) -> Dict[str, Any]:
    dataset = load_split(config, "train")
    test = load_split(config, "test", dataset.n_classes)
    ood = load_split(config, "ood_test", dataset.n_classes) if config.ood_test_path else None
    assignments = load_assignments(config)
    easy = ids_in_region(assignments, Region.EASY)
    ambiguous = ids_in_region(assignments, Region.AMBIGUOUS)
    easy_excluded = _stored_or_computed_report(config, dataset, easy, "easy").excluded_ids
    ambiguous_excluded = _stored_or_computed_report(config, dataset, ambiguous, "ambiguous").excluded_ids

    subsets = {
        "full": list(dataset.ids),
        "easy": easy,
        "easy_aum": [sid for sid in easy if sid not in easy_excluded],
        "ambiguous": ambiguous,
        "ambiguous_aum": [sid for sid in ambiguous if sid not in ambiguous_excluded],
        "easy_ambiguous": easy + ambiguous,
    }
    rows = []
    for order, (name, ids) in enumerate(subsets.items()):
        if not ids:
            logger.warning("Subset %s kosong; dilewati", name)
            continue
        params, _ = train(dataset.subset(ids), config.trainer, log_dynamics=False)
        report = evaluate_split(params, test, config.n_bins)
        row = {
            "order": order,
            "subset": name,
            "n": len(ids),
            "fraction": len(ids) / len(dataset),
            "accuracy": report.accuracy,
            "ece": report.ece,
        }
        if ood is not None:
            ood_report = evaluate_split(params, ood, config.n_bins)
            row["ood_accuracy"] = ood_report.accuracy
            row["ood_ece"] = ood_report.ece
        rows.append(row)

    frame = aggregator.results_frame(rows).sort_values("order").drop(columns="order").reset_index(drop=True)
    path = write_text_atomic(config.artifact("subsets.csv"), frame.to_csv(index=False))
    return {"frame": frame, "outputs": {"csv": path}}


# ---------------------------------------------------------------------------
# make-benchmark


def run_make_benchmark(
    out_dir,
    n_samples: int = 1000,
    n_classes: int = 3,
    noise_rate: float = 0.1,
    dim: int = 2,
    seed: int = 0,
) -> Dict[str, Path]:
    out_dir = Path(out_dir).resolve()
    bench = make_planted_noise_benchmark(
        n_samples=n_samples, n_classes=n_classes, noise_rate=noise_rate, dim=dim, seed=seed
    )
    outputs = {
        split: write_lines_atomic(out_dir / f"{split}.jsonl", dataset_to_lines(getattr(bench, split)))
        for split in ("train", "dev", "test", "ood_test")
    }
    outputs["noise"] = write_lines_atomic(
        out_dir / "noise.jsonl",
        (
            json.dumps({"id": sid, "clean": clean, "planted": planted}, sort_keys=True)
            for sid, (clean, planted) in sorted(bench.flips.items(), key=lambda item: id_sort_key(item[0]))
        ),
    )
    outputs["config"] = write_lines_atomic(
        out_dir / "pipeline.env",
        [
            f"TRAIN_PATH={outputs['train']}",
            f"DEV_PATH={outputs['dev']}",
            f"TEST_PATH={outputs['test']}",
            f"OOD_TEST_PATH={outputs['ood_test']}",
            f"N_CLASSES={n_classes}",
            f"SEED={seed}",
        ],
    )
    return outputs
