"""
.. :py:module:: test_nets

Tests for nonlinearities, encodings, network specifications and builders.
"""
import unittest

import numpy as np

from autoint.core.graph import NodeKind, evaluate
from autoint.core.params import ParamStore
from autoint.errors import BuildError
from autoint.nets import (NONLINEARITIES, Nonlinearity, Encoding, MLPSpec, InputBlock, FeatureBlock,
                          nl_eval, encode, make_nonlinearity, init_params, build_integral_network)


class NonlinearityTestCase(unittest.TestCase):

    def test_derivatives(self):
        x = np.linspace(-2.3, 2.1, 41)
        h = 1e-6
        for kind in NONLINEARITIES:
            nl = Nonlinearity(kind, omega0=3.0)
            for order in (0, 1):
                fd = (nl.eval(x + h, order) - nl.eval(x - h, order)) / (2 * h)
                if kind == 'relu':
                    # piecewise linear, compare away from the kink only
                    mask = np.abs(x) > 1e-3
                    np.testing.assert_allclose(nl.eval(x, order + 1)[mask], fd[mask], atol=1e-6)
                else:
                    np.testing.assert_allclose(nl.eval(x, order + 1), fd, rtol=1e-5, atol=1e-6)

    def test_values(self):
        self.assertEqual(float(nl_eval('relu', 1, 2.0)), 1.0)
        self.assertEqual(float(nl_eval('relu', 0, -2.0)), 0.0)
        self.assertEqual(float(nl_eval('relu', 2, 2.0)), 0.0)
        self.assertAlmostEqual(float(nl_eval('softplus', 0, 0.0)), np.log(2.0))
        self.assertAlmostEqual(float(nl_eval('swish', 0, 0.0)), 0.0)
        self.assertAlmostEqual(float(nl_eval('swish', 1, 0.0)), 0.5)
        self.assertAlmostEqual(float(Nonlinearity('sine', omega0=30.0).eval(0.0, 1)), 30.0)
        swish2 = Nonlinearity('swish', beta=2.0)
        self.assertAlmostEqual(float(swish2.eval(1.0)), 1.0 / (1.0 + np.exp(-2.0)))

    def test_errors(self):
        with self.assertRaises(ValueError):
            Nonlinearity('tanh')
        with self.assertRaises(ValueError):
            Nonlinearity('relu').eval(1.0, 3)
        self.assertEqual(make_nonlinearity(Nonlinearity('relu')).kind, 'relu')
        self.assertEqual(make_nonlinearity('SWISH').kind, 'swish')


class EncodingTestCase(unittest.TestCase):

    def test_layout(self):
        enc = Encoding(3)
        v = encode(0.25, enc)
        self.assertEqual(v.shape, (6,))
        w = np.pi * np.array([1.0, 2.0, 4.0])
        expected = np.ravel(np.column_stack([np.sin(w * 0.25), np.cos(w * 0.25)]))
        np.testing.assert_allclose(v, expected, atol=1e-15)
        # two features: per frequency a block of sines then a block of cosines
        x = np.array([[0.1, 0.2]])
        e = Encoding(2).eval(x)
        self.assertEqual(e.shape, (1, 8))
        np.testing.assert_allclose(e[0, :2], np.sin(np.pi * x[0]))
        np.testing.assert_allclose(e[0, 2:4], np.cos(np.pi * x[0]))
        np.testing.assert_allclose(e[0, 4:6], np.sin(2 * np.pi * x[0]))
        self.assertEqual(Encoding(0).eval(x).shape, (1, 0))

    def test_derivatives(self):
        x = np.linspace(-1, 1, 11)[:, None]
        h = 1e-6
        for normalized in (False, True):
            enc = Encoding(4, normalized)
            for order in (0, 1):
                fd = (enc.eval(x + h, order) - enc.eval(x - h, order)) / (2 * h)
                np.testing.assert_allclose(enc.eval(x, order + 1), fd, rtol=1e-5, atol=1e-5)

    def test_normalized_bound(self):
        x = np.linspace(-1, 1, 101)[:, None]
        d = Encoding(6, True).eval(x, 1)
        self.assertLessEqual(np.max(np.abs(d)), 1.0 + 1e-12)
        self.assertGreater(np.max(np.abs(Encoding(6).eval(x, 1))), 10.0)


class SpecTestCase(unittest.TestCase):

    def test_shapes(self):
        spec = MLPSpec(inputs=[InputBlock('a', 2), InputBlock('t', 1, True)],
                       features=[FeatureBlock('a', 3), FeatureBlock('t')], hidden=[8, 4], out_width=2)
        self.assertEqual(spec.var, 't')
        self.assertEqual(spec.feature_width, 13)
        self.assertEqual(spec.layer_shapes, [(8, 13), (4, 8), (2, 4)])
        self.assertEqual(spec.layer_names, ['phi.layer0', 'phi.layer1', 'phi.layer2'])
        self.assertEqual(MLPSpec.from_dict(spec.to_dict()), spec)

    def test_validation(self):
        bad = [
            MLPSpec(hidden=[]),
            MLPSpec(hidden=[0]),
            MLPSpec(nl='tanh'),
            MLPSpec(init='xavier'),
            MLPSpec(features=[]),
            MLPSpec(features=[FeatureBlock('y')]),
            MLPSpec(inputs=[InputBlock('x', 1, True), InputBlock('x')]),
            MLPSpec(inputs=[InputBlock('x', 1, True), InputBlock('y', 1, True)]),
            MLPSpec(output_activation='relu'),
            MLPSpec(inputs=[InputBlock('o', 3), InputBlock('t', 1, True), InputBlock('d', 2)],
                    point=('o', 't', 'd'), features=[FeatureBlock('x')]),
        ]
        for spec in bad:
            with self.assertRaises(BuildError):
                spec.validate()

    def test_init(self):
        spec = MLPSpec(hidden=[16, 16], nl='sine')
        p1 = init_params(spec, 3)
        p2 = init_params(spec, 3)
        p3 = init_params(spec, 4)
        for pid in p1.ids():
            np.testing.assert_array_equal(p1[pid], p2[pid])
        self.assertFalse(np.array_equal(p1['phi.layer1.W'], p3['phi.layer1.W']))
        self.assertLessEqual(np.max(np.abs(p1['phi.layer0.W'])), 1.0)
        self.assertLessEqual(np.max(np.abs(p1['phi.layer1.W'])), np.sqrt(6 / 16) / 30)
        p4 = init_params(MLPSpec(hidden=[16, 16]), 3)
        self.assertLessEqual(np.max(np.abs(p4['phi.layer1.W'])), np.sqrt(6 / 16))
        self.assertGreater(np.max(np.abs(p4['phi.layer1.W'])), np.sqrt(6 / 16) / 30)
        self.assertEqual(p4.num_parameters(), 16 * 1 + 16 + 16 * 16 + 16 + 16 + 1)


class BuilderTestCase(unittest.TestCase):

    def test_build(self):
        spec = MLPSpec(inputs=[InputBlock('a', 2), InputBlock('t', 1, True)],
                       features=[FeatureBlock('a', 2), FeatureBlock('t', 1)], hidden=[5, 5])
        params = init_params(spec, 0)
        g = build_integral_network(spec, params)
        kinds = [n.kind for n in g.nodes]
        self.assertEqual(kinds.count(NodeKind.ENCODE), 2)
        self.assertEqual(kinds.count(NodeKind.CONCAT), 1)
        self.assertEqual(kinds.count(NodeKind.AFFINE), 3)
        self.assertEqual(kinds.count(NodeKind.POINTWISE), 2)
        out = evaluate(g, {'a': np.zeros((4, 2)), 't': np.linspace(0, 1, 4)}, params).output
        self.assertEqual(out.shape, (4, 1))

    def test_point_and_bias(self):
        spec = MLPSpec(inputs=[InputBlock('o', 3), InputBlock('t', 1, True), InputBlock('d', 3)],
                       point=('o', 't', 'd'), features=[FeatureBlock('x', 2), FeatureBlock('d')],
                       hidden=[4], out_width=3, final_bias=False)
        params = init_params(spec, 0)
        g = build_integral_network(spec, params)
        self.assertEqual(sum(n.kind == NodeKind.AFFINE_POINT for n in g.nodes), 1)
        self.assertFalse(g.node(g.outputs[0]).attrs['bias'])

    def test_plain_network(self):
        spec = MLPSpec(inputs=[InputBlock('o', 3)], features=[FeatureBlock('o')], hidden=[4],
                       out_width=2, output_activation='softplus')
        params = init_params(spec, 0)
        g = build_integral_network(spec, params)
        self.assertIsNone(g.var)
        out = evaluate(g, {'o': np.ones((2, 3))}, params).output
        self.assertTrue(np.all(out > 0))

    def test_build_errors(self):
        spec = MLPSpec(hidden=[4, 4])
        with self.assertRaises(BuildError):
            build_integral_network(spec, ParamStore())
        params = init_params(MLPSpec(hidden=[4, 5]), 0)
        with self.assertRaises(BuildError):
            build_integral_network(spec, params)
