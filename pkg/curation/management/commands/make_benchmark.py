from curation.management.commands._base import CurationCommand
from curation.services.pipeline import run_make_benchmark


class Command(CurationCommand):
	help = "Buat benchmark sintetis dengan label noise tertanam (train/dev/test/ood + pipeline.env)."

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--out", help="Direktori keluaran; default workdir.")
		parser.add_argument("--n-samples", type=int, default=1000)
		parser.add_argument("--n-classes", type=int, default=3)
		parser.add_argument("--noise-rate", type=float, default=0.1)
		parser.add_argument("--dim", type=int, default=2)

	def run(self, config, options):
		outputs = run_make_benchmark(
			options.get("out") or config.workdir,
			n_samples=options["n_samples"],
			n_classes=options["n_classes"],
			noise_rate=options["noise_rate"],
			dim=options["dim"],
			seed=config.seed,
		)
		self.report_paths(outputs)
		self.stdout.write(self.style.SUCCESS("Benchmark dibuat."))
