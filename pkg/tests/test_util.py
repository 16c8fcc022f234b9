"""
.. :py:module:: test_util

Tests for util and math modules.
"""
import time
import unittest

import numpy as np

from autoint import util
from autoint.math import softplus, mse, psnr, PSNR_CAP


def square_all(chunk, offset=0):
    return [x * x + offset for x in chunk]


class UtilTestCase(unittest.TestCase):

    def test_sanitize_name(self):
        self.assertEqual(util.sanitize_name('ct run: swish/8'), 'ct_run_swish_8')
        self.assertEqual(util.sanitize_name('plain'), 'plain')

    def test_substream(self):
        a = util.substream(0, 'init').random(5)
        b = util.substream(0, 'init').random(5)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, util.substream(0, 'sampling').random(5)))
        self.assertFalse(np.array_equal(a, util.substream(1, 'init').random(5)))

    def test_chunked(self):
        items = list(range(10))
        chunks = util.chunked(items, 3)
        self.assertEqual(len(chunks), 3)
        self.assertEqual(sum(chunks, []), items)
        self.assertEqual(util.chunked(items[:2], 8), [[0], [1]])
        self.assertEqual(util.chunked([], 4), [])

    def test_create_tasks(self):
        chunks = util.chunked(list(range(20)), 6)
        serial = util.create_tasks(square_all, chunks, offset=1)
        threaded = util.create_tasks(square_all, chunks, threads=4, offset=1)
        self.assertEqual(serial, [x * x + 1 for x in range(20)])
        self.assertEqual(threaded, serial)
        nested = util.create_tasks(square_all, chunks, threads=2, flatten=False)
        self.assertEqual(len(nested), 6)

    def test_phase_timer(self):
        timer = util.PhaseTimer()
        with timer.phase('a'):
            time.sleep(0.01)
        with timer.phase('a'):
            pass
        self.assertGreater(timer.phases['a'], 0.0)
        self.assertGreaterEqual(timer.total, timer.phases['a'])


class MathTestCase(unittest.TestCase):

    def test_softplus(self):
        x = np.array([-800.0, 0.0, 800.0])
        np.testing.assert_allclose(softplus(x), [0.0, np.log(2.0), 800.0])

    def test_mse_psnr(self):
        a = np.zeros((2, 2))
        b = np.full((2, 2), 0.1)
        self.assertAlmostEqual(mse(a, b), 0.01)
        self.assertAlmostEqual(psnr(a, b), 20.0)
        self.assertAlmostEqual(psnr(a, b, peak=10.0), 40.0)
        self.assertEqual(psnr(a, a), PSNR_CAP)
        with self.assertRaises(ValueError):
            mse(a, np.zeros(4))
