from curation.management.commands._base import CurationCommand
from curation.services import aggregator
from curation.services.pipeline import RANDOM_POOLS, run_ablation


class Command(CurationCommand):
	help = "Bandingkan MixUp acak dengan TDMixUp pada beberapa seed."

	option_keys = {
		"train": "TRAIN_PATH",
		"test": "TEST_PATH",
		"ood_test": "OOD_TEST_PATH",
		"seeds": "ABLATION_SEEDS",
		"random_pool": "RANDOM_POOL",
	}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--train", help="Dataset training (JSONL).")
		parser.add_argument("--test", help="Test set in-domain (JSONL).")
		parser.add_argument("--ood-test", help="Test set out-of-domain (JSONL).")
		parser.add_argument("--seeds", help="Seed dipisah koma, default 1,2,3,4,5.")
		parser.add_argument("--random-pool", choices=RANDOM_POOLS)

	def run(self, config, options):
		result = run_ablation(config)
		for metric, table in result["tables"].items():
			self.stdout.write(f"\n{metric.upper()} (x100)")
			self.stdout.write(aggregator.render_table(table, table.columns))
		self.stdout.write(f"\nECE terendah: {result['summary']['lowest_ece']}")
		self.report_paths(result["outputs"])
		self.stdout.write(self.style.SUCCESS("Ablation selesai."))
