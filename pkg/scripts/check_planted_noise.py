"""Quick manual check for AUM filtering on the planted-noise benchmark.

Run with:
    python scripts/check_planted_noise.py [workdir]
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import django
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))
load_dotenv(BASE_DIR / ".env")
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "tdmix_site.settings")
django.setup()

from django.core.management import call_command  # noqa: E402
from sklearn.metrics import roc_auc_score  # noqa: E402

from curation.services.aum import ingest_report  # noqa: E402
from curation.services.serializers import read_lines  # noqa: E402

workdir = Path(sys.argv[1] if len(sys.argv) > 1 else BASE_DIR / "work" / "planted-noise")
data_dir = workdir / "data"

call_command("make_benchmark", out=str(data_dir), n_samples=1000, seed=0)
config = workdir / "run.env"
config.write_text((data_dir / "pipeline.env").read_text() + "HIDDEN_WIDTH=0\nEPOCHS=20\n")
call_command("aum_filter", config=str(config), workdir=str(workdir), target="all", k=80.0)

report = ingest_report(read_lines(workdir / "aum_all.jsonl"))
noisy = {json.loads(line)["id"] for line in read_lines(data_dir / "noise.jsonl")}
real_ids = [sid for sid in report.aum_by_sample if sid not in report.threshold_ids]
if not noisy & set(real_ids):
    raise SystemExit("Tidak ada sampel noise di luar threshold samples; cek benchmark.")

auroc = roc_auc_score([sid in noisy for sid in real_ids], [-report.aum_by_sample[sid] for sid in real_ids])
noisy_real = noisy & set(real_ids)
clean = set(real_ids) - noisy
print(f"AUROC noise vs bersih : {auroc:.4f}")
print(f"Noise tersaring       : {len(noisy_real & report.filtered_ids) / len(noisy_real):.2%}")
print(f"Bersih tersaring      : {len(clean & report.filtered_ids) / len(clean):.2%}")
