from __future__ import annotations

from typing import Dict, Iterable, List, Mapping

import pandas as pd

METRICS = ("accuracy", "ece")


def results_frame(rows: Iterable[Mapping]) -> pd.DataFrame:
    frame = pd.DataFrame(list(rows))
    if frame.empty:
        return frame
    sort_keys = [key for key in ("method", "seed", "k", "subset") if key in frame.columns]
    return frame.sort_values(sort_keys, kind="mergesort").reset_index(drop=True)


def seed_table(frame: pd.DataFrame, metric: str, method_order: List[str]) -> pd.DataFrame:
    """One row per method, one column per seed, then mean and std (sample std, as reported over runs)."""
    wide = frame.pivot(index="method", columns="seed", values=metric)
    wide = wide.reindex(method_order)
    wide.columns = [f"seed_{seed}" for seed in wide.columns]
    values = wide.copy()
    wide["mean"] = values.mean(axis=1)
    wide["std"] = values.std(axis=1, ddof=1).fillna(0.0)
    return wide


def build_summary(frame: pd.DataFrame, method_order: List[str]) -> Dict:
    summary: Dict = {"methods": {}}
    for method in method_order:
        part = frame[frame["method"] == method]
        summary["methods"][method] = {
            metric: {
                "mean": float(part[metric].mean()),
                "std": float(part[metric].std(ddof=1)) if len(part) > 1 else 0.0,
                "per_seed": {str(seed): float(value) for seed, value in zip(part["seed"], part[metric])},
            }
            for metric in METRICS
        }
    means = {method: summary["methods"][method]["ece"]["mean"] for method in method_order}
    summary["lowest_ece"] = min(means, key=means.get) if means else None
    return summary


def render_table(frame: pd.DataFrame, percent_columns: Iterable[str] = (), float_digits: int = 2) -> str:
    """Aligned text rendering; ``percent_columns`` are shown x100 like the reported tables."""
    shown = frame.copy()
    for column in percent_columns:
        if column in shown.columns:
            shown[column] = shown[column] * 100.0
    return shown.to_string(float_format=lambda v: f"{v:.{float_digits}f}")
