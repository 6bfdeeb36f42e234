import logging
import sys

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from curation.services.errors import CurationError
from curation.services.pipeline import PipelineConfig, load_pipeline_config


def _usage_error(parser, message):
	# Usage errors share the config exit code instead of argparse's 2.
	if parser.called_from_command_line:
		parser.print_usage(sys.stderr)
		parser.exit(1, f"{parser.prog}: error: {message}\n")
	raise CommandError(f"Error: {message}", returncode=1)


class CurationCommand(BaseCommand):
	"""Shared flags, config loading and exit codes for the pipeline commands."""

	# Maps argparse dest -> config key for flags that override the config file.
	option_keys = {}

	def create_parser(self, prog_name, subcommand, **kwargs):
		parser = super().create_parser(prog_name, subcommand, **kwargs)
		parser.error = lambda message: _usage_error(parser, message)
		return parser

	def add_arguments(self, parser):
		parser.add_argument("--config", help="File konfigurasi KEY=value (format .env).")
		parser.add_argument("--seed", type=int, help="Seed utama; menimpa SEED di konfigurasi.")
		parser.add_argument("--workdir", help="Direktori artefak; menimpa WORKDIR di konfigurasi.")

	def load_config(self, options) -> PipelineConfig:
		overrides = {"SEED": options.get("seed"), "WORKDIR": options.get("workdir")}
		for dest, key in self.option_keys.items():
			overrides[key] = options.get(dest)
		return load_pipeline_config(options.get("config"), overrides)

	def configure_logging(self, verbosity):
		logger = logging.getLogger("curation")
		if verbosity >= 2:
			logger.setLevel(logging.DEBUG)
		elif verbosity == 0:
			logger.setLevel(logging.WARNING)
		else:
			logger.setLevel(settings.CURATION_LOG_LEVEL)

	def handle(self, *args, **options):
		self.configure_logging(options.get("verbosity", 1))
		try:
			config = self.load_config(options)
			self.run(config, options)
		except CurationError as exc:
			raise CommandError(str(exc), returncode=exc.exit_code) from exc
		except OSError as exc:
			raise CommandError(f"Gagal mengakses {exc.filename}: {exc.strerror}", returncode=2) from exc

	def run(self, config, options):
		raise NotImplementedError

	def report_paths(self, outputs):
		for name, path in outputs.items():
			self.stdout.write(f"{name}: {path}")
