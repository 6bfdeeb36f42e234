from curation.management.commands._base import CurationCommand
from curation.services.errors import ConfigError
from curation.services.pipeline import AUM_TARGETS, run_aum_filter


def parse_grid(value):
	try:
		grid = [float(part) for part in value.split(",") if part.strip()]
	except ValueError as exc:
		raise ConfigError(f"Grid k tidak valid: {value!r}.") from exc
	if not grid:
		raise ConfigError("Grid k kosong.")
	return grid


class Command(CurationCommand):
	help = "Saring sampel berlabel salah dari set easy/ambiguous dengan AUM dan threshold samples."

	option_keys = {
		"train": "TRAIN_PATH",
		"dev": "DEV_PATH",
		"preset": "AUM_PRESET",
		"threshold_mode": "THRESHOLD_MODE",
	}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--target", choices=AUM_TARGETS, default="easy")
		parser.add_argument("--k", type=float, help="Persentil AUM threshold samples, di (0, 100].")
		parser.add_argument("--preset", choices=["snli", "qqp", "swag"], help="k bawaan per keluarga tugas.")
		parser.add_argument("--threshold-mode", choices=["total", "per_class"])
		parser.add_argument("--sweep", help="Grid k dipisah koma, dievaluasi di dev set (mis. 50,60,70,80,90).")
		parser.add_argument("--train", help="Dataset training (JSONL).")
		parser.add_argument("--dev", help="Dev set untuk --sweep.")

	def run(self, config, options):
		sweep = parse_grid(options["sweep"]) if options.get("sweep") else None
		outputs = run_aum_filter(config, target=options["target"], k=options.get("k"), sweep=sweep)
		self.report_paths(outputs)
		self.stdout.write(self.style.SUCCESS(f"Filter AUM untuk {options['target']} selesai."))
