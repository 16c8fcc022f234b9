"""
.. :py:module:: test_io

Tests for artifact files.
"""
import os
import unittest

import numpy as np
from testfixtures import TempDirectory

from autoint.errors import MissingArtifactError
from autoint.io import (write_pgm16, read_pgm16, write_ppm, read_ppm, write_raw, read_raw, write_csv,
                        write_json, read_json)


class IOTestCase(unittest.TestCase):

    def setUp(self):
        self.d = TempDirectory()
        self.td = self.d.path

    def tearDown(self):
        TempDirectory.cleanup_all()

    def test_pgm16(self):
        grid = np.array([[0.0, 0.5], [1.0, 2.0], [-1.0, 1.5]])
        path = os.path.join(self.td, 'sino', 'a.pgm')
        self.assertEqual(write_pgm16(path, grid), 2.0)
        back = read_pgm16(path, peak=2.0)
        self.assertEqual(back.shape, (3, 2))
        np.testing.assert_allclose(back, np.clip(grid, 0, None), atol=2.0 / 65535)
        self.assertEqual(write_pgm16(path, grid, peak=1.0), 1.0)
        self.assertEqual(read_pgm16(path)[1, 1], 1.0)
        self.assertEqual(write_pgm16(path, np.zeros((2, 2))), 0.0)
        with self.assertRaises(ValueError):
            write_pgm16(path, np.zeros(3))

    def test_ppm(self):
        rgb = np.zeros((2, 3, 3))
        rgb[0, 0] = [1.0, 0.0, 0.0]
        rgb[1, 2] = [0.2, 1.5, -0.5]
        path = os.path.join(self.td, 'img.ppm')
        write_ppm(path, rgb)
        with open(path, 'rb') as f:
            self.assertEqual(f.read(2), b'P6')
        back = read_ppm(path)
        np.testing.assert_allclose(back[0, 0], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(back[1, 2], [51 / 255, 1.0, 0.0])
        with self.assertRaises(ValueError):
            write_ppm(path, np.zeros((2, 2)))
        with self.assertRaises(MissingArtifactError):
            read_ppm(os.path.join(self.td, 'none.ppm'))

    def test_raw(self):
        img = np.random.default_rng(0).normal(size=(4, 5, 3)).astype(np.float32)
        path = os.path.join(self.td, 'img.raw')
        write_raw(path, img)
        self.assertEqual(os.path.getsize(path), 16 + 4 * 5 * 3 * 4)
        np.testing.assert_array_equal(read_raw(path), img)
        write_raw(path, np.ones((2, 2)))
        self.assertEqual(read_raw(path).shape, (2, 2, 1))
        self.d.write('bad.raw', b'XXXX' + bytes(12))
        with self.assertRaises(ValueError):
            read_raw(os.path.join(self.td, 'bad.raw'))

    def test_csv_json(self):
        path = os.path.join(self.td, 'out', 't.csv')
        write_csv(path, ['n', 'x'], [[1, 0.1], [2, np.float64(1 / 3)]])
        with open(path) as f:
            self.assertEqual(f.read(), 'n,x\n1,0.1\n2,0.3333333333333333\n')
        path = os.path.join(self.td, 'r.json')
        write_json(path, {'b': 1, 'a': [1.5, None]})
        with open(path) as f:
            self.assertEqual(f.read(), '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": 1\n}\n')
        self.assertEqual(read_json(path), {'a': [1.5, None], 'b': 1})
        with self.assertRaises(MissingArtifactError):
            read_json(os.path.join(self.td, 'none.json'))
