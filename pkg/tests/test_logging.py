"""
.. :py:module:: test_logging

Tests for logging module.
"""
import logging
import os
import unittest

from testfixtures import TempDirectory

from autoint.logging import log_after, log_before, ObjectLogger, configure


class DummyTrainer():
    def __init__(self, log_folder, add_name=False, headers=None):
        self.name = 'dummy run'
        self.foo = 'bar'
        self.baz = 'foo'
        self.progress = (0, 1.5, 0.001)
        self.logger = ObjectLogger(self, log_folder, add_name, headers)

    @log_after('foo')
    def test_after(self):
        self.foo = 'baz'
        return self.foo

    @log_before('baz')
    def test_before(self):
        self.baz = 'bar'
        return self.baz

    @log_after('progress')
    def step(self, it):
        self.progress = (it, 1.0 / (it + 1), 0.001)


class LoggingTestCase(unittest.TestCase):

    def setUp(self):
        self.d = TempDirectory()
        self.td = self.d.path

    def tearDown(self):
        TempDirectory.cleanup_all()

    def test_logging(self):
        dum = DummyTrainer(self.td)
        self.assertEqual(dum.test_after(), 'baz')
        with open(dum.logger.get_file('foo')) as f:
            msg = f.read()
        self.assertEqual(msg, 'baz\n')

        dum.test_before()
        with open(dum.logger.get_file('baz')) as f:
            msg = f.read()
        self.assertEqual(msg, 'foo\n')

    def test_rows_and_headers(self):
        dum = DummyTrainer(self.td, add_name=True, headers={'progress': ('iteration', 'loss', 'lr')})
        self.assertEqual(dum.logger.folder, os.path.join(self.td, 'dummy_run'))
        dum.step(0)
        dum.step(1)
        with open(dum.logger.get_file('progress')) as f:
            msg = f.read()
        self.assertEqual(msg, 'iteration,loss,lr\n0,1.0,0.001\n1,0.5,0.001\n')
        # A new logger starts the file over.
        dum.logger = ObjectLogger(dum, self.td, True)
        dum.step(2)
        with open(dum.logger.get_file('progress')) as f:
            self.assertEqual(f.read(), '2,0.3333333333333333,0.001\n')

    def test_no_folder(self):
        dum = DummyTrainer(None)
        self.assertIsNone(dum.logger.folder)
        self.assertEqual(dum.logger.write('progress', prefix='foo'), 'bar,0,1.5,0.001')
        self.assertEqual(dum.test_after(), 'baz')

    def test_configure(self):
        logger = configure('debug')
        self.assertEqual(logger.level, logging.DEBUG)
        n = len(logger.handlers)
        configure('ERROR')
        self.assertEqual(logger.level, logging.ERROR)
        self.assertEqual(len(logger.handlers), n)
        with self.assertRaises(ValueError):
            configure('loud')
        configure('info')
