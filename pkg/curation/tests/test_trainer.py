import math
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase

from curation.services.datasets import Dataset
from curation.services.errors import DataError, NumericalError
from curation.services.mixup import MixupConfig, one_hot
from curation.services.trainer import (
	ModelParams,
	MixedBatch,
	TrainerConfig,
	clip_gradients,
	forward,
	init_params,
	loss_and_gradients,
	soft_cross_entropy,
	td_steps_per_epoch,
	train,
	train_random_mixup,
	train_tdmixup,
)


def blobs(n=200, seed=0, spread=0.5):
	rng = np.random.default_rng(seed)
	labels = rng.integers(2, size=n)
	centers = np.array([[-3.0, 0.0], [3.0, 0.0]])
	features = centers[labels] + spread * rng.standard_normal((n, 2))
	return Dataset([str(i) for i in range(n)], features, labels, 2, "blobs")


class ForwardTests(SimpleTestCase):
	def test_zero_params_give_uniform_probabilities(self):
		params = ModelParams(w2=np.zeros((4, 3)), b2=np.zeros(3))

		np.testing.assert_allclose(forward(params, np.ones(4)).probabilities, [1 / 3] * 3)

	def test_linear_model_selects_weight_row(self):
		w2 = np.arange(12, dtype=float).reshape(4, 3)
		b2 = np.array([0.5, -0.5, 1.0])
		params = ModelParams(w2=w2, b2=b2)

		logits = forward(params, np.array([0.0, 1.0, 0.0, 0.0])).logits

		np.testing.assert_allclose(logits, w2[1] + b2)

	def test_random_probabilities_sum_to_one(self):
		params = init_params(5, 4, 8, seed=1)
		x = np.random.default_rng(2).normal(size=(30, 5))

		np.testing.assert_allclose(forward(params, x).probabilities.sum(axis=1), 1.0, atol=1e-9)

	def test_arity_mismatch(self):
		with self.assertRaises(DataError):
			forward(init_params(3, 2, 0, seed=0), np.ones(4))


class SoftCrossEntropyTests(SimpleTestCase):
	def test_confident_correct_prediction(self):
		self.assertLess(soft_cross_entropy(np.array([1 - 1e-9, 1e-9]), np.array([1.0, 0.0])), 1e-8)

	def test_uniform_prediction(self):
		for c in (2, 3, 7):
			self.assertAlmostEqual(soft_cross_entropy(np.full(c, 1 / c), one_hot([0], c)[0]), math.log(c), places=12)

	def test_linear_in_target(self):
		p = np.array([0.7, 0.2, 0.1])
		expected = 0.5 * -math.log(0.7) + 0.5 * -math.log(0.2)

		self.assertAlmostEqual(soft_cross_entropy(p, np.array([0.5, 0.5, 0.0])), expected, places=12)

	def test_batch_returns_array(self):
		losses = soft_cross_entropy(np.full((3, 2), 0.5), one_hot([0, 1, 0], 2))

		self.assertEqual(losses.shape, (3,))


class GradientCheckTests(SimpleTestCase):
	"""Analytic gradients of the raw + mixed loss against central finite differences."""

	step = 1e-5

	def make_batch(self, rng, arity=6, c=3, size=8):
		raw = (rng.normal(size=(size, arity)), one_hot(rng.integers(c, size=size), c))
		mixed = MixedBatch(
			x_i=rng.normal(size=(size, arity)),
			x_j=rng.normal(size=(size, arity)),
			y_i=one_hot(rng.integers(c, size=size), c),
			y_j=one_hot(rng.integers(c, size=size), c),
			lam=rng.beta(0.4, 0.4, size=size),
		)
		return raw, mixed

	def check(self, hidden_width, mix_space):
		rng = np.random.default_rng(hidden_width * 10 + len(mix_space))
		worst = 0.0
		for batch_no in range(5):
			params = init_params(6, 3, hidden_width, seed=batch_no)
			raw, mixed = self.make_batch(rng)
			_, grads = loss_and_gradients(params, raw, mixed, mix_space, l2=0.01)
			names = list(params.tensors())
			for _ in range(10):
				name = names[rng.integers(len(names))]
				tensor = params.tensors()[name]
				index = tuple(rng.integers(n) for n in tensor.shape)
				original = tensor[index]
				tensor[index] = original + self.step
				plus, _ = loss_and_gradients(params, raw, mixed, mix_space, l2=0.01)
				tensor[index] = original - self.step
				minus, _ = loss_and_gradients(params, raw, mixed, mix_space, l2=0.01)
				tensor[index] = original
				numeric = (plus - minus) / (2 * self.step)
				analytic = grads.tensors()[name][index]
				worst = max(worst, abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-6))
		return worst

	def test_linear_model(self):
		for mix_space in ("input", "hidden"):
			with self.subTest(mix_space=mix_space):
				self.assertLess(self.check(0, mix_space), 1e-4)

	def test_hidden_layer_model(self):
		for mix_space in ("input", "hidden"):
			with self.subTest(mix_space=mix_space):
				self.assertLess(self.check(32, mix_space), 1e-4)

	def test_clip_gradients_rescales_to_max_norm(self):
		params = init_params(4, 2, 3, seed=0)
		raw = (np.ones((2, 4)) * 50, one_hot([0, 1], 2))
		_, grads = loss_and_gradients(params, raw)

		clip_gradients(grads, 1e-3)

		norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.tensors().values()))
		self.assertAlmostEqual(norm, 1e-3, places=12)


class TrainTests(SimpleTestCase):
	def test_separable_blobs(self):
		dataset = blobs(n=400)

		params, _ = train(dataset, TrainerConfig(epochs=6, learning_rate=0.1, hidden_width=32, rng_seed=0))

		predicted = forward(params, dataset.features).probabilities.argmax(axis=1)
		self.assertGreaterEqual(float(np.mean(predicted == dataset.labels)), 0.99)

	def test_adam_also_fits(self):
		dataset = blobs(seed=3)

		params, _ = train(dataset, TrainerConfig(epochs=6, learning_rate=0.05, optimizer="adam", hidden_width=0))

		predicted = forward(params, dataset.features).probabilities.argmax(axis=1)
		self.assertGreaterEqual(float(np.mean(predicted == dataset.labels)), 0.99)

	def test_log_has_one_record_per_sample_per_epoch(self):
		dataset = blobs(n=37)

		_, log = train(dataset, TrainerConfig(epochs=3, batch_size=8))

		self.assertEqual(len(log), 3 * 37)
		self.assertEqual(log.n_epochs, 3)

	def test_zero_learning_rate_keeps_params(self):
		dataset = blobs(n=20)
		config = TrainerConfig(epochs=3, learning_rate=0.0, hidden_width=4, rng_seed=5)

		params, log = train(dataset, config)

		initial = init_params(2, 2, 4, seed=5)
		for name, tensor in params.tensors().items():
			np.testing.assert_array_equal(tensor, initial.tensors()[name])
		for sample_id in log.sample_ids:
			self.assertEqual(len({r.logits for r in log.group(sample_id)}), 1)

	def test_same_seed_same_run(self):
		dataset = blobs(n=50)
		config = TrainerConfig(epochs=2, hidden_width=4, rng_seed=9)

		first_params, first_log = train(dataset, config)
		second_params, second_log = train(dataset, config)

		self.assertEqual(list(first_log.to_lines()), list(second_log.to_lines()))
		np.testing.assert_array_equal(first_params.w1, second_params.w1)

	def test_nan_loss_names_epoch_and_batch(self):
		dataset = blobs(n=20)
		params = init_params(2, 2, 0, seed=0)
		with patch("curation.services.trainer.loss_and_gradients", return_value=(float("nan"), params)):
			with self.assertRaises(NumericalError) as ctx:
				train(dataset, TrainerConfig(epochs=1, hidden_width=0))

		self.assertIn("epoch 1, batch 0", str(ctx.exception))

	def test_empty_dataset(self):
		empty = Dataset([], np.zeros((0, 2)), [], 2)

		with self.assertRaises(DataError):
			train(empty, TrainerConfig())


class MixupTrainingTests(SimpleTestCase):
	def setUp(self):
		dataset = blobs(n=60, seed=1)
		self.easy = dataset.subset(dataset.ids[:40])
		self.ambiguous = dataset.subset(dataset.ids[40:])
		self.config = TrainerConfig(
			epochs=2,
			hidden_width=8,
			rng_seed=3,
			mixup=MixupConfig(alpha=0.4, batch_size=16),
		)

	def test_tdmixup_is_deterministic(self):
		first = train_tdmixup(self.easy, self.ambiguous, self.config)
		second = train_tdmixup(self.easy, self.ambiguous, self.config)

		for name, tensor in first.tensors().items():
			np.testing.assert_array_equal(tensor, second.tensors()[name])

	def test_schedule_pairs_easy_with_ambiguous(self):
		schedule = []

		train_tdmixup(self.easy, self.ambiguous, self.config, schedule_sink=schedule)

		self.assertEqual(len(schedule), 40)
		self.assertTrue(all(p.i in self.easy.ids and p.j in self.ambiguous.ids for p in schedule))

	def test_step_budget_is_honoured(self):
		schedule = []
		steps = td_steps_per_epoch(len(self.easy), len(self.ambiguous), self.config.mixup)

		train_random_mixup(self.easy.concat(self.ambiguous), self.config, steps_per_epoch=steps, schedule_sink=schedule)

		self.assertEqual(steps, 3)
		self.assertEqual(len(schedule), steps * 16)

	def test_empty_pool_is_rejected(self):
		empty = self.easy.subset([])

		with self.assertRaises(DataError):
			train_tdmixup(empty, self.ambiguous, self.config)
