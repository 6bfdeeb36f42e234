from collections import Counter

import numpy as np
from django.test import SimpleTestCase

from curation.services.errors import ConfigError, DataError
from curation.services.mixup import (
	MixPair,
	MixupConfig,
	batched,
	build_random_schedule,
	build_td_schedule,
	mix_pair,
	n_batches,
	one_hot,
	sample_lambda,
	schedule_to_lines,
)


class SampleLambdaTests(SimpleTestCase):
	def test_support(self):
		rng = np.random.default_rng(0)
		for alpha in (0.05, 0.4, 1.0, 8.0):
			draws = [sample_lambda(alpha, rng) for _ in range(500)]
			self.assertTrue(all(0.0 <= d <= 1.0 for d in draws))

	def test_beta_moments(self):
		rng = np.random.default_rng(2024)
		draws = np.array([sample_lambda(0.4, rng) for _ in range(100_000)])

		self.assertAlmostEqual(draws.mean(), 0.5, delta=0.01)
		# a*b / ((a+b)^2 (a+b+1)) for a = b = 0.4
		self.assertAlmostEqual(draws.var(), 0.4 * 0.4 / (0.8 ** 2 * 1.8), delta=0.01)

	def test_seeded(self):
		first = [sample_lambda(0.4, np.random.default_rng(7)) for _ in range(3)]
		second = [sample_lambda(0.4, np.random.default_rng(7)) for _ in range(3)]

		self.assertEqual(first, second)

	def test_non_positive_alpha(self):
		with self.assertRaises(ConfigError):
			sample_lambda(0.0, np.random.default_rng(0))
		with self.assertRaises(ConfigError):
			MixupConfig(alpha=-1.0)


class MixPairTests(SimpleTestCase):
	def test_lambda_one_returns_first_parent(self):
		mixed = mix_pair(([1.5, -2.0], 1), ([0.3, 0.7], 0), 1.0, 3)

		np.testing.assert_array_equal(mixed.features, [1.5, -2.0])
		np.testing.assert_array_equal(mixed.soft_label, [0.0, 1.0, 0.0])

	def test_half_mix(self):
		mixed = mix_pair(([1.0, 0.0], 0), ([0.0, 1.0], 1), 0.5, 2)

		np.testing.assert_allclose(mixed.features, [0.5, 0.5])
		np.testing.assert_allclose(mixed.soft_label, [0.5, 0.5])

	def test_random_pairs_are_on_the_simplex_and_symmetric(self):
		rng = np.random.default_rng(3)
		for _ in range(1000):
			x_i, x_j = rng.normal(size=(2, 4))
			y_i, y_j = rng.integers(5, size=2)
			lam = float(rng.uniform())

			mixed = mix_pair((x_i, y_i), (x_j, y_j), lam, 5)
			swapped = mix_pair((x_j, y_j), (x_i, y_i), 1.0 - lam, 5)

			self.assertAlmostEqual(mixed.soft_label.sum(), 1.0, places=12)
			self.assertTrue(np.all(mixed.soft_label >= 0))
			np.testing.assert_allclose(mixed.features, lam * x_i + (1 - lam) * x_j, atol=1e-12)
			np.testing.assert_allclose(mixed.features, swapped.features, atol=1e-12)
			np.testing.assert_allclose(mixed.soft_label, swapped.soft_label, atol=1e-12)

	def test_invalid_pairs(self):
		with self.assertRaises(DataError):
			mix_pair(([1.0], 0), ([1.0, 2.0], 0), 0.5, 2)
		with self.assertRaises(DataError):
			mix_pair(([1.0], 0), ([2.0], 2), 0.5, 2)

	def test_one_hot(self):
		np.testing.assert_array_equal(one_hot([2, 0], 3), [[0, 0, 1], [1, 0, 0]])


class ScheduleTests(SimpleTestCase):
	config = MixupConfig(alpha=0.4, batch_size=2)

	def test_equal_pools(self):
		easy = ["e1", "e2", "e3", "e4"]
		schedule = build_td_schedule(easy, ["a1", "a2", "a3", "a4"], self.config, np.random.default_rng(0))

		batches = list(batched(schedule, self.config.batch_size))

		self.assertEqual([len(b) for b in batches], [2, 2])
		self.assertEqual(Counter(p.i for p in schedule), Counter(easy))

	def test_smaller_pool_cycles(self):
		easy = [f"e{i}" for i in range(6)]
		ambiguous = ["a0", "a1", "a2"]

		schedule = build_td_schedule(easy, ambiguous, self.config, np.random.default_rng(1))

		self.assertEqual(len(schedule), 6)
		self.assertTrue(all(p.i in easy and p.j in ambiguous for p in schedule))
		self.assertEqual(Counter(p.j for p in schedule), Counter({"a0": 2, "a1": 2, "a2": 2}))

	def test_td_schedule_is_seeded(self):
		easy, ambiguous = list("abcde"), list("vwxyz")

		first = build_td_schedule(easy, ambiguous, self.config, np.random.default_rng(5))
		second = build_td_schedule(easy, ambiguous, self.config, np.random.default_rng(5))

		self.assertEqual(first, second)

	def test_empty_pools(self):
		with self.assertRaises(DataError):
			build_td_schedule([], ["a"], self.config, np.random.default_rng(0))
		with self.assertRaises(DataError):
			build_random_schedule(["a"], self.config, np.random.default_rng(0))

	def test_random_schedule_pairs(self):
		schedule = build_random_schedule(["a", "b"], self.config, np.random.default_rng(0))

		self.assertTrue(all({p.i, p.j} == {"a", "b"} for p in schedule))

	def test_random_schedule_pair_frequency(self):
		pool = ["p", "q", "r", "s"]
		rng = np.random.default_rng(11)
		counts = Counter()
		for _ in range(10_000):
			counts.update((p.i, p.j) for p in build_random_schedule(pool, self.config, rng))

		self.assertEqual(len(counts), 12)
		self.assertTrue(all(a != b for a, b in counts))
		expected = sum(counts.values()) / 12
		chi_square = sum((observed - expected) ** 2 / expected for observed in counts.values())
		# 11 degrees of freedom; the 0.999 quantile is 31.3.
		self.assertLess(chi_square, 40.0)

	def test_batch_count_and_export(self):
		schedule = [MixPair("1", "2", 0.25)]

		self.assertEqual(n_batches(33, 32), 2)
		self.assertEqual(list(schedule_to_lines(schedule)), ['{"i": "1", "j": "2", "lambda": 0.25}'])
