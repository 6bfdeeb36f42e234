from curation.management.commands._base import CurationCommand
from curation.services import aggregator
from curation.services.pipeline import run_subset_train


class Command(CurationCommand):
	help = "Latih classifier biasa pada subset hasil kurasi dan bandingkan akurasi/ECE."

	option_keys = {
		"train": "TRAIN_PATH",
		"test": "TEST_PATH",
		"ood_test": "OOD_TEST_PATH",
	}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--train", help="Dataset training (JSONL).")
		parser.add_argument("--test", help="Test set in-domain (JSONL).")
		parser.add_argument("--ood-test", help="Test set out-of-domain (JSONL).")

	def run(self, config, options):
		result = run_subset_train(config)
		frame = result["frame"]
		percent = [column for column in frame.columns if column.endswith(("accuracy", "ece")) or column == "fraction"]
		self.stdout.write(aggregator.render_table(frame, percent))
		self.report_paths(result["outputs"])
		self.stdout.write(self.style.SUCCESS("Training subset selesai."))
