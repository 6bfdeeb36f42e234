from curation.management.commands._base import CurationCommand
from curation.services.pipeline import run_train_dynamics


class Command(CurationCommand):
	help = "Latih classifier dasar dan tulis log training dynamics per sampel per epoch."

	option_keys = {
		"train": "TRAIN_PATH",
		"data_format": "DATA_FORMAT",
		"epochs": "EPOCHS",
		"hidden_width": "HIDDEN_WIDTH",
		"learning_rate": "LEARNING_RATE",
		"batch_size": "BATCH_SIZE",
		"optimizer": "OPTIMIZER",
	}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--train", help="Dataset training (JSONL).")
		parser.add_argument("--data-format", choices=["vectors", "text"])
		parser.add_argument("--epochs", type=int)
		parser.add_argument("--hidden-width", type=int, help="0 berarti model linear.")
		parser.add_argument("--learning-rate", type=float)
		parser.add_argument("--batch-size", type=int)
		parser.add_argument("--optimizer", choices=["sgd", "adam"])

	def run(self, config, options):
		outputs = run_train_dynamics(config)
		self.report_paths(outputs)
		self.stdout.write(self.style.SUCCESS("Training dynamics selesai."))
