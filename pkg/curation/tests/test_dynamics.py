import json
import math

import numpy as np
from django.test import SimpleTestCase

from curation.services.dynamics import (
	DynamicsLog,
	DynamicsRecord,
	aggregate_stats,
	confidence,
	gold_probability,
	id_sort_key,
	ingest_log,
	softmax,
	variability,
)
from curation.services.errors import DataError


def record_line(sample_id, epoch, gold, logits):
	return json.dumps({"id": sample_id, "epoch": epoch, "gold": gold, "logits": logits})


class IngestLogTests(SimpleTestCase):
	def test_groups_records_per_sample(self):
		lines = [record_line("a", e, 0, [0.1 * e, 0.0]) for e in (1, 2, 3)]

		log = ingest_log(lines)

		self.assertEqual(log.sample_ids, ["a"])
		self.assertEqual([r.epoch for r in log.group("a")], [1, 2, 3])
		self.assertEqual(len(log), 3)

	def test_out_of_order_epochs_are_sorted(self):
		lines = [record_line(1, 2, 0, [0.0, 1.0]), record_line(1, 1, 0, [1.0, 0.0])]

		log = ingest_log(lines)

		self.assertEqual([r.epoch for r in log.group("1")], [1, 2])

	def test_duplicate_id_epoch_is_rejected(self):
		lines = [
			record_line(7, 1, 0, [0.0, 0.0]),
			record_line(7, 2, 0, [0.0, 0.0]),
			record_line(7, 2, 0, [1.0, 0.0]),
		]

		with self.assertRaises(DataError) as ctx:
			ingest_log(lines)

		self.assertIn("id=7", str(ctx.exception))
		self.assertIn("epoch=2", str(ctx.exception))

	def test_wrong_arity_names_offending_line(self):
		rng = np.random.default_rng(3)
		lines = []
		for i in range(2500):
			for epoch in range(1, 5):
				lines.append(record_line(i, epoch, 1, rng.normal(size=3).round(4).tolist()))
		lines[6789] = record_line(1697, 2, 1, [0.0, 0.0])

		with self.assertRaises(DataError) as ctx:
			ingest_log(lines)

		self.assertIn("Baris 6790", str(ctx.exception))

	def test_missing_epoch_is_rejected(self):
		lines = [record_line("x", 1, 0, [0.0, 1.0]), record_line("x", 3, 0, [0.0, 1.0])]

		with self.assertRaises(DataError) as ctx:
			ingest_log(lines)

		self.assertIn("[2]", str(ctx.exception))

	def test_gold_change_is_rejected(self):
		lines = [record_line("x", 1, 0, [0.0, 1.0]), record_line("x", 2, 1, [0.0, 1.0])]

		with self.assertRaises(DataError):
			ingest_log(lines)

	def test_gold_out_of_range_and_non_finite_logits(self):
		with self.assertRaises(DataError):
			ingest_log([record_line("x", 1, 2, [0.0, 1.0])])
		with self.assertRaises(DataError):
			ingest_log(['{"id": "x", "epoch": 1, "gold": 0, "logits": [NaN, 1.0]}'])

	def test_round_trip_through_lines(self):
		log = DynamicsLog(
			DynamicsRecord(str(i), e, i % 2, (float(i), float(e))) for e in (1, 2) for i in range(4)
		)

		again = ingest_log(log.to_lines())

		self.assertEqual(list(again.to_lines()), list(log.to_lines()))


class EquationTests(SimpleTestCase):
	def test_gold_probability_closed_forms(self):
		self.assertAlmostEqual(gold_probability(DynamicsRecord("a", 1, 1, (0.0, 0.0, 0.0))), 1 / 3, places=12)
		self.assertAlmostEqual(gold_probability(DynamicsRecord("a", 1, 0, (math.log(2), 0.0))), 2 / 3, places=12)

	def test_gold_probability_large_logits_do_not_overflow(self):
		value = gold_probability(DynamicsRecord("a", 1, 0, (1000.0, 0.0)))

		self.assertTrue(1 - 1e-12 < value <= 1.0)

	def test_gold_probability_ignores_logit_shift(self):
		logits = tuple(np.random.default_rng(6).normal(size=4).tolist())
		shifted = tuple(v + 37.5 for v in logits)

		self.assertAlmostEqual(
			gold_probability(DynamicsRecord("a", 1, 2, logits)),
			gold_probability(DynamicsRecord("a", 1, 2, shifted)),
			delta=1e-12,
		)

	def test_softmax_sums_to_one(self):
		rng = np.random.default_rng(0)
		probs = softmax(rng.normal(scale=20, size=(50, 5)))

		np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
		self.assertTrue(np.all(probs >= 0))

	def test_confidence(self):
		self.assertAlmostEqual(confidence([0.9, 0.8, 1.0]), 0.9, places=12)
		self.assertEqual(confidence([0.37] * 7), 0.37)

		values = np.random.default_rng(1).uniform(size=100)
		self.assertAlmostEqual(confidence(values), math.fsum(values) / 100, delta=1e-12)

	def test_variability(self):
		self.assertEqual(variability([0.4] * 5), 0.0)
		self.assertAlmostEqual(variability([0.5, 1.0]), 0.25, places=12)

		values = np.random.default_rng(2).uniform(size=100)
		mean = math.fsum(values) / 100
		oracle = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / 100)
		self.assertAlmostEqual(variability(values), oracle, delta=1e-12)

	def test_variability_bounded_by_half(self):
		values = np.random.default_rng(4).choice([0.0, 1.0], size=64)

		self.assertLessEqual(variability(values), 0.5)

	def test_epoch_order_does_not_matter(self):
		rng = np.random.default_rng(8)
		values = rng.uniform(size=30)
		shuffled = rng.permutation(values)

		self.assertAlmostEqual(confidence(values), confidence(shuffled), delta=1e-12)
		self.assertAlmostEqual(variability(values), variability(shuffled), delta=1e-12)

	def test_empty_sequences_are_rejected(self):
		with self.assertRaises(DataError):
			confidence([])
		with self.assertRaises(DataError):
			variability([])


class AggregateStatsTests(SimpleTestCase):
	def test_hand_computed_sample(self):
		# Gold probabilities 1/3, 2/3, 1 (numerically) with argmax correct in epochs 2 and 3.
		log = DynamicsLog(
			[
				DynamicsRecord("s", 1, 0, (0.0, math.log(2))),
				DynamicsRecord("s", 2, 0, (math.log(2), 0.0)),
				DynamicsRecord("s", 3, 0, (50.0, 0.0)),
			]
		)

		(stats,) = aggregate_stats(log)

		self.assertAlmostEqual(stats.confidence, 2 / 3, places=9)
		self.assertAlmostEqual(stats.correctness, 2 / 3, places=12)
		self.assertEqual(stats.epochs_observed, 3)
		self.assertIsNone(stats.aum)

	def test_constant_correct_samples(self):
		log = DynamicsLog(DynamicsRecord(str(i), e, 1, (0.0, 5.0)) for e in (1, 2, 3) for i in range(4))

		for stats in aggregate_stats(log):
			self.assertEqual(stats.variability, 0.0)
			self.assertEqual(stats.correctness, 1.0)

	def test_matches_recomputation_oracle(self):
		rng = np.random.default_rng(5)
		records = []
		for i in range(50):
			gold = int(rng.integers(3))
			for e in range(1, 7):
				records.append(DynamicsRecord(str(i), e, gold, tuple(rng.normal(size=3).tolist())))
		log = DynamicsLog(records)
		aums = {str(i): float(i) for i in range(0, 50, 2)}

		for stats in aggregate_stats(log, aums):
			group = log.group(stats.sample_id)
			probs = []
			for record in group:
				exp = [math.exp(v) for v in record.logits]
				probs.append(exp[record.gold_label] / sum(exp))
			mean = sum(probs) / len(probs)
			std = math.sqrt(sum((p - mean) ** 2 for p in probs) / len(probs))
			correct = sum(max(range(3), key=lambda k: r.logits[k]) == r.gold_label for r in group) / len(group)
			self.assertAlmostEqual(stats.confidence, mean, delta=1e-12)
			self.assertAlmostEqual(stats.variability, std, delta=1e-12)
			self.assertAlmostEqual(stats.correctness, correct, delta=1e-12)
			self.assertEqual(stats.aum, aums.get(stats.sample_id))

	def test_ragged_coverage_is_rejected(self):
		log = DynamicsLog(
			[
				DynamicsRecord("a", 1, 0, (0.0, 1.0)),
				DynamicsRecord("a", 2, 0, (0.0, 1.0)),
				DynamicsRecord("b", 1, 0, (0.0, 1.0)),
			]
		)

		with self.assertRaises(DataError):
			aggregate_stats(log)

	def test_results_follow_natural_id_order(self):
		log = DynamicsLog(DynamicsRecord(sid, 1, 0, (0.0, 0.0)) for sid in ("10", "9", "b", "a"))

		self.assertEqual([s.sample_id for s in aggregate_stats(log)], ["9", "10", "a", "b"])
		self.assertLess(id_sort_key("7"), id_sort_key("10"))

	def test_malformed_numeric_ids_sort_as_strings(self):
		for sample_id in ("--5", "²", "+5", "5-", "-"):
			with self.subTest(sample_id=sample_id):
				self.assertEqual(id_sort_key(sample_id), (1, 0, sample_id))
		self.assertEqual(id_sort_key("-5"), (0, -5, "-5"))

	def test_dash_prefixed_ids_aggregate(self):
		lines = [record_line(sid, 1, 0, [1.0, 0.0]) for sid in ("--5", "3", "-2", "²")]

		stats = aggregate_stats(ingest_log(lines))

		self.assertEqual([s.sample_id for s in stats], ["-2", "3", "--5", "²"])
