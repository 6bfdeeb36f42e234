from curation.management.commands._base import CurationCommand
from curation.services.pipeline import run_datamap


class Command(CurationCommand):
	help = "Hitung confidence/variability, kategorikan sampel dan gambar data map SVG."

	option_keys = {"fraction": "FRACTION"}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--fraction", type=float, help="Proporsi sampel per region (default 0.33).")

	def run(self, config, options):
		outputs = run_datamap(config)
		self.report_paths(outputs)
		self.stdout.write(self.style.SUCCESS("Data map selesai."))
