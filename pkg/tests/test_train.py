"""
.. :py:module:: test_train

Tests for backpropagation, the optimizer and the training loop.
"""
import os
import unittest

import numpy as np
from testfixtures import TempDirectory

from autoint.core.gradnet import AutoIntPair
from autoint.core.graph import record_tape
from autoint.domains.fit1d import get_target, fit1d_spec, fit_target, integral_table
from autoint.errors import ConfigError, NumericalAbort
from autoint.nets import NONLINEARITIES, MLPSpec, InputBlock, FeatureBlock, init_params
from autoint.train import (TrainConfig, GradientSet, AdamState, Trainer, backward, mse_loss, adam_step,
                           learning_rate, fit_grad_network)


SLOW = os.environ.get('AUTOINT_SLOW') == '1'


def make_pair(nl, seed=0):
    spec = MLPSpec(inputs=[InputBlock('x', 1, True), InputBlock('c', 2)],
                   features=[FeatureBlock('x', 2), FeatureBlock('c')], hidden=[16, 16], nl=nl)
    return AutoIntPair.from_spec(spec, init_params(spec, seed))


class BackwardTestCase(unittest.TestCase):

    def test_parameter_gradients(self):
        rng = np.random.default_rng(1)
        inputs = {'x': rng.uniform(-1, 1, 6), 'c': rng.normal(size=(6, 2))}
        u = rng.normal(size=(6, 1))
        h = 1e-6
        for nl in NONLINEARITIES:
            pair = make_pair(nl)
            params = pair.params

            def objective():
                return float(np.sum(pair.grad_values(inputs) * u))

            grads = backward(pair.grad, record_tape(pair.grad, inputs, params), u)
            err, scale = 0.0, 0.0
            for pid, p in params.items():
                fd = np.zeros_like(p)
                for idx in np.ndindex(p.shape):
                    old = p[idx]
                    p[idx] = old + h
                    up = objective()
                    p[idx] = old - h
                    down = objective()
                    p[idx] = old
                    fd[idx] = (up - down) / (2 * h)
                err = max(err, float(np.max(np.abs(grads[pid] - fd))))
                scale = max(scale, float(np.max(np.abs(fd))))
            self.assertLess(err / scale, 1e-4, msg=nl)

    def test_input_cotangent_is_grad_network(self):
        # Backpropagating ones through the integral network gives dPhi/dx.
        pair = make_pair('swish')
        inputs = {'x': np.linspace(-1, 1, 7), 'c': np.array([0.2, -0.3])}
        tape = record_tape(pair.integral, inputs, pair.params)
        grads = backward(pair.integral, tape, np.ones((7, 1)))
        np.testing.assert_allclose(grads.inputs['x'], pair.grad_values(inputs), rtol=1e-10, atol=1e-12)
        self.assertEqual(grads.inputs['c'].shape, (7, 2))

    def test_wrong_number_of_cotangents(self):
        pair = make_pair('relu')
        inputs = {'x': np.zeros(2), 'c': np.zeros(2)}
        tape = record_tape(pair.grad, inputs, pair.params)
        with self.assertRaises(ValueError):
            backward(pair.grad, tape, [np.ones((2, 1)), np.ones((2, 1))])

    def test_gradient_set(self):
        a = GradientSet({'w': np.ones(2), 'b': np.full(1, -6.0), 'e': np.zeros(0)})
        self.assertEqual(a.max_abs(), 6.0)
        self.assertEqual(GradientSet().max_abs(), 0.0)
        a['w'][1] = np.nan
        self.assertTrue(np.isnan(a.max_abs()))


class OptimizerTestCase(unittest.TestCase):

    def test_learning_rate(self):
        cfg = TrainConfig(learning_rate=1.0, decay_factor=0.5, decay_every=10)
        self.assertEqual(learning_rate(cfg, 0), 1.0)
        self.assertEqual(learning_rate(cfg, 9), 1.0)
        self.assertEqual(learning_rate(cfg, 10), 0.5)
        self.assertEqual(learning_rate(cfg, 25), 0.25)

    def test_config_errors(self):
        for kwargs in ({'learning_rate': 0.0}, {'decay_factor': 0.0}, {'decay_factor': 1.5},
                       {'decay_every': 0}, {'max_iters': -1}, {'batch_size': 0}):
            with self.assertRaises(ConfigError):
                TrainConfig(**kwargs)

    def test_mse_loss(self):
        pred = np.array([[1.0], [2.0], [4.0]])
        target = np.array([[1.0], [0.0], [3.0]])
        loss, cot = mse_loss(pred, target)
        self.assertAlmostEqual(loss, 5.0 / 3.0)
        np.testing.assert_allclose(cot, 2.0 * (pred - target) / 3.0)
        with self.assertRaises(ValueError):
            mse_loss(pred, target.ravel())

    def test_adam_step(self):
        spec = MLPSpec(hidden=[3])
        params = init_params(spec, 0)
        before = {pid: p.copy() for pid, p in params.items()}
        g = GradientSet({'phi.layer0.W': np.array([[1.0], [-2.0], [0.5]])})
        state = AdamState()
        adam_step(params, g, state, 0.1)
        self.assertEqual(state.step, 1)
        # Bias-corrected first step moves by lr * sign(g).
        np.testing.assert_allclose(params['phi.layer0.W'],
                                   before['phi.layer0.W'] - 0.1 * np.array([[1.0], [-1.0], [1.0]]),
                                   atol=1e-6)
        np.testing.assert_array_equal(params['phi.layer1.W'], before['phi.layer1.W'])
        with self.assertRaises(ValueError):
            adam_step(params, GradientSet({'phi.layer0.W': np.ones(3)}), state, 0.1)


class TrainerTestCase(unittest.TestCase):

    def setUp(self):
        self.d = TempDirectory()
        self.td = self.d.path

    def tearDown(self):
        TempDirectory.cleanup_all()

    def test_progress_file(self):
        params = init_params(MLPSpec(hidden=[2]), 0)
        cfg = TrainConfig(learning_rate=0.5, decay_factor=0.5, decay_every=2, max_iters=3)
        trainer = Trainer(params, cfg, name='dummy', log_folder=self.td)
        losses = iter([3.0, 2.0, 1.0])
        log = trainer.fit(lambda batch: (next(losses), GradientSet()), lambda rng: None)
        self.assertEqual(len(log), 3)
        self.assertEqual(log.final_loss, 1.0)
        with open(os.path.join(self.td, 'progress.csv')) as f:
            text = f.read()
        self.assertEqual(text, 'iteration,loss,lr\n0,3.0,0.5\n1,2.0,0.5\n2,1.0,0.25\n')

    def test_checkpoints(self):
        params = init_params(MLPSpec(hidden=[2]), 0)
        cfg = TrainConfig(max_iters=7, checkpoint_every=3)
        seen = []
        Trainer(params, cfg).fit(lambda batch: (1.0, GradientSet()), lambda rng: None,
                                 on_checkpoint=lambda trainer, it: seen.append(it))
        self.assertEqual(seen, [3, 6])

    def test_numerical_abort(self):
        params = init_params(MLPSpec(hidden=[2]), 0)
        cfg = TrainConfig(max_iters=10)
        trainer = Trainer(params, cfg, name='dummy', log_folder=self.td)
        losses = iter([1.0, 1.0, float('nan')])
        with self.assertRaises(NumericalAbort) as cm:
            trainer.fit(lambda batch: (next(losses), GradientSet()), lambda rng: None)
        self.assertEqual(cm.exception.iteration, 2)
        with open(os.path.join(self.td, 'progress.csv')) as f:
            self.assertEqual(len(f.read().splitlines()), 3)

    def test_non_finite_gradient_aborts(self):
        params = init_params(MLPSpec(hidden=[2]), 0)
        before = {k: v.copy() for k, v in params.items()}
        bad = params.zeros()
        bad[next(iter(bad))].flat[0] = np.inf
        trainer = Trainer(params, TrainConfig(max_iters=5))
        with self.assertRaises(NumericalAbort) as cm:
            trainer.fit(lambda batch: (1.0, GradientSet(bad)), lambda rng: None)
        self.assertEqual(cm.exception.quantity, 'gradient')
        self.assertEqual(cm.exception.iteration, 0)
        for k, v in params.items():
            np.testing.assert_array_equal(v, before[k])

    def test_fit_reduces_loss(self):
        spec = MLPSpec(hidden=[16, 16])
        pair = AutoIntPair.from_spec(spec, init_params(spec, 0))

        def sampler(rng):
            x = rng.uniform(-np.pi, np.pi, 64)
            return {'x': x}, np.cos(x)

        cfg = TrainConfig(learning_rate=1e-2, max_iters=500, batch_size=64)
        log = fit_grad_network(pair, sampler, cfg)
        self.assertEqual(len(log), 500)
        self.assertLess(np.mean(log.losses[-20:]), np.mean(log.losses[:20]) / 5)

    def test_batching_is_seeded(self):
        drawn = []

        def run(seed):
            params = init_params(MLPSpec(hidden=[2]), 0)
            cfg = TrainConfig(max_iters=3, seed=seed)
            Trainer(params, cfg).fit(lambda batch: (1.0, GradientSet()), lambda rng: drawn.append(rng.random()))

        run(0)
        run(0)
        run(1)
        self.assertEqual(drawn[:3], drawn[3:6])
        self.assertNotEqual(drawn[:3], drawn[6:])


@unittest.skipUnless(SLOW, "set AUTOINT_SLOW=1 to run")
class FitIntegralsTestCase(unittest.TestCase):

    def test_cos_integrals(self):
        target = get_target('cos')
        cfg = TrainConfig(learning_rate=1e-3, decay_every=2000, decay_factor=0.5, max_iters=4000,
                          batch_size=256)
        pair, log = fit_target(target, fit1d_spec(hidden=(32, 32, 32)), cfg)
        # Relative error is only meaningful away from the zeros of the exact integral.
        rows = [r for r in integral_table(pair, target, 60, seed=0) if abs(r[3]) >= 0.1]
        self.assertGreaterEqual(len(rows), 20)
        for a, b, est, exact, err in rows:
            self.assertLessEqual(err, 0.02 * abs(exact), msg="[{}, {}]".format(a, b))
