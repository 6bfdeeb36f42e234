import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from curation.services.aum import build_report
from curation.services.cartography import CategoryAssignment, Region, assignments_to_lines, ids_in_region, ingest_assignments
from curation.services.datasets import Dataset
from curation.services.errors import ConfigError
from curation.services.pipeline import (
	CATEGORIES,
	CATEGORIES_AUM,
	curated_sets,
	load_pipeline_config,
	read_config_file,
	refresh_filtered_categories,
)
from curation.services.serializers import read_lines, write_lines_atomic


class PipelineConfigTests(SimpleTestCase):
	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.dir = Path(self.tmp.name)

	def tearDown(self):
		self.tmp.cleanup()

	def write_config(self, text):
		path = self.dir / "run.env"
		path.write_text(text)
		return path

	def test_defaults_come_from_settings(self):
		config = load_pipeline_config()

		self.assertEqual(config.trainer.epochs, 6)
		self.assertEqual(config.mixup.alpha, 0.4)
		self.assertEqual(config.aum_k["easy"], 80.0)
		self.assertEqual(config.ablation_seeds, (1, 2, 3, 4, 5))

	def test_file_then_flags(self):
		path = self.write_config("EPOCHS=9\nSEED=4\nTRAIN_PATH=data/train.jsonl\n# comment\nHIDDEN_WIDTH=0\n")

		config = load_pipeline_config(path, {"SEED": 21, "WORKDIR": None})

		self.assertEqual(config.trainer.epochs, 9)
		self.assertEqual(config.trainer.hidden_width, 0)
		self.assertEqual(config.seed, 21)
		self.assertEqual(config.trainer.rng_seed, 21)
		self.assertEqual(config.train_path, self.dir / "data" / "train.jsonl")

	def test_unknown_key_is_rejected(self):
		path = self.write_config("EPOCHZ=3\n")

		with self.assertRaises(ConfigError) as ctx:
			read_config_file(path)

		self.assertIn("EPOCHZ", str(ctx.exception))

	def test_missing_config_file(self):
		with self.assertRaises(ConfigError):
			load_pipeline_config(self.dir / "absent.env")

	def test_presets_and_explicit_k(self):
		self.assertEqual(load_pipeline_config(None, {"AUM_PRESET": "swag"}).aum_k["easy"], 50.0)
		self.assertEqual(load_pipeline_config(None, {"AUM_PRESET": "swag", "AUM_K_EASY": 70}).aum_k["easy"], 70.0)
		with self.assertRaises(ConfigError):
			load_pipeline_config(None, {"AUM_PRESET": "mnli"})

	def test_invalid_values(self):
		for overrides in (
			{"EPOCHS": "many"},
			{"FRACTION": 0.7},
			{"AUM_K_EASY": 0},
			{"MIX_SPACE": "output"},
			{"RANDOM_POOL": "everything"},
			{"ABLATION_SEEDS": "1,x"},
			{"LEARNING_RATE": -1},
		):
			with self.subTest(overrides=overrides):
				with self.assertRaises(ConfigError):
					load_pipeline_config(None, overrides)

	def test_with_seed_reseeds_every_stream(self):
		config = load_pipeline_config().with_seed(3)

		self.assertEqual((config.seed, config.trainer.rng_seed, config.mixup.rng_seed), (3, 3, 3))
		self.assertEqual(config.trainer.mixup, config.mixup)

	def test_settings_override(self):
		with self.settings(CURATION={**settings.CURATION, "EPOCHS": 2}):
			self.assertEqual(load_pipeline_config().trainer.epochs, 2)


class CuratedSetTests(SimpleTestCase):
	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.config = load_pipeline_config(None, {"WORKDIR": self.tmp.name})
		ids = [str(i) for i in range(1, 10)]
		self.dataset = Dataset(ids, np.zeros((9, 2)), [i % 3 for i in range(9)], 3)
		regions = [Region.EASY] * 4 + [Region.AMBIGUOUS] * 2 + [Region.HARD] * 3
		self.assignments = [CategoryAssignment(sid, region) for sid, region in zip(ids, regions)]
		write_lines_atomic(self.config.artifact(CATEGORIES), assignments_to_lines(self.assignments))
		# "3" and "4" are threshold samples; "3" has the lowest AUM of all.
		report = build_report({"1": 2.0, "2": 1.5, "3": -4.0, "4": 0.5}, {"3", "4"}, 80)
		write_lines_atomic(self.config.artifact("aum_easy.jsonl"), report.to_lines())

	def tearDown(self):
		self.tmp.cleanup()

	def test_threshold_samples_stay_out_of_easy_set(self):
		easy_set, ambiguous_set = curated_sets(self.config, self.dataset, self.assignments, use_aum=True)

		self.assertEqual(easy_set.ids, ["1", "2"])
		self.assertEqual(ambiguous_set.ids, ["5", "6"])

	def test_without_aum_keeps_whole_easy_region(self):
		easy_set, _ = curated_sets(self.config, self.dataset, self.assignments, use_aum=False)

		self.assertEqual(easy_set.ids, ["1", "2", "3", "4"])

	def test_filtered_categories_flag_threshold_samples(self):
		path = refresh_filtered_categories(self.config)

		marked = ingest_assignments(read_lines(path))
		self.assertEqual(path.name, CATEGORIES_AUM)
		self.assertEqual(ids_in_region(marked, Region.EASY, include_filtered=False), ["1", "2"])
