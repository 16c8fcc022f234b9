"""
.. :py:module:: test_quadrature

Tests for the adaptive quadrature oracle.
"""
import unittest

import numpy as np

from autoint.errors import OracleError
from autoint.quadrature import adaptive_quadrature, adaptive_quadrature_vec


class QuadratureTestCase(unittest.TestCase):

    def test_known_integrals(self):
        self.assertAlmostEqual(adaptive_quadrature(np.sin, 0.0, np.pi), 2.0, places=10)
        self.assertAlmostEqual(adaptive_quadrature(lambda x: x ** 2, -1.0, 2.0), 3.0, places=10)
        self.assertAlmostEqual(adaptive_quadrature(np.exp, 1.0, 0.0), 1.0 - np.e, places=10)
        self.assertEqual(adaptive_quadrature(np.cos, 0.5, 0.5), 0.0)

    def test_breakpoints(self):
        def step(x):
            return 1.0 if x > 0.3 else 0.0
        v = adaptive_quadrature(step, 0.0, 1.0, points=[0.3, 5.0])
        self.assertAlmostEqual(v, 0.7, places=10)
        v = adaptive_quadrature(lambda x: abs(x - 0.25), 0.0, 1.0, points=[0.25])
        self.assertAlmostEqual(v, 0.25 ** 2 / 2 + 0.75 ** 2 / 2, places=10)

    def test_failure(self):
        # Not integrable and oscillating, the subinterval limit is reached.
        with self.assertRaises(OracleError):
            adaptive_quadrature(lambda x: np.sin(1.0 / x) / x ** 2, 1e-6, 1.0, limit=5)

    def test_vector(self):
        v = adaptive_quadrature_vec(lambda x: np.array([x, x ** 3, np.cos(x)]), 0.0, 1.0)
        np.testing.assert_allclose(v, [0.5, 0.25, np.sin(1.0)], rtol=1e-9)
        np.testing.assert_array_equal(adaptive_quadrature_vec(lambda x: np.ones(2), 1.0, 1.0), np.zeros(2))
        with self.assertRaises(OracleError):
            adaptive_quadrature_vec(lambda x: np.array([np.sin(1.0 / x) / x ** 2]), 1e-6, 1.0, limit=3)
