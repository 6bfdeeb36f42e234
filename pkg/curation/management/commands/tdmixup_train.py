from curation.management.commands._base import CurationCommand
from curation.services.pipeline import run_tdmixup_train


class Command(CurationCommand):
	help = "Latih model akhir dengan sampel asli easy/ambiguous plus MixUp easy x ambiguous."

	option_keys = {
		"train": "TRAIN_PATH",
		"alpha": "MIXUP_ALPHA",
		"mix_space": "MIX_SPACE",
		"mixup_batch_size": "MIXUP_BATCH_SIZE",
		"epochs": "EPOCHS",
	}

	def add_arguments(self, parser):
		super().add_arguments(parser)
		parser.add_argument("--train", help="Dataset training (JSONL).")
		parser.add_argument("--alpha", type=float, help="Parameter Beta(alpha, alpha).")
		parser.add_argument("--mix-space", choices=["input", "hidden"])
		parser.add_argument("--mixup-batch-size", type=int)
		parser.add_argument("--epochs", type=int)
		parser.add_argument("--no-aum", action="store_true", help="Pakai set easy tanpa filter AUM.")

	def run(self, config, options):
		outputs = run_tdmixup_train(config, use_aum=not options["no_aum"])
		self.report_paths(outputs)
		self.stdout.write(self.style.SUCCESS("Training TDMixUp selesai."))
