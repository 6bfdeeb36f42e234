from curation.management.commands._base import CurationCommand
from curation.services import aggregator
from curation.services.pipeline import run_evaluate


class Command(CurationCommand):
	help = "Hitung akurasi dan ECE checkpoint pada test set (dan OOD bila ada)."

	option_keys = {"n_bins": "N_BINS"}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--checkpoint", help="Default: tdmixup.ckpt di workdir.")
		parser.add_argument("--test", help="Test set in-domain (JSONL).")
		parser.add_argument("--ood-test", help="Test set out-of-domain (JSONL).")
		parser.add_argument("--n-bins", type=int)

	def run(self, config, options):
		reports = run_evaluate(
			config,
			checkpoint=options.get("checkpoint"),
			test_path=options.get("test"),
			ood_test_path=options.get("ood_test"),
		)
		for name, report in reports.items():
			self.stdout.write(
				f"[{name}] accuracy={report.accuracy * 100:.2f} ECE={report.ece * 100:.2f} (n={report.n_samples})"
			)
			table = aggregator.render_table(report.to_frame(), ("mean_confidence", "mean_accuracy"))
			self.stdout.write(table)
		self.stdout.write(self.style.SUCCESS("Evaluasi selesai."))
