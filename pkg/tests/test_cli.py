"""
.. :py:module:: test_cli

Tests for the command line interface and experiment configurations.
"""
import contextlib
import csv
import io
import json
import os
import unittest

from testfixtures import TempDirectory

from autoint.cli import main, EXIT_OK, EXIT_CONFIG, EXIT_MISSING, EXIT_ABORT
from autoint.config import ExperimentConfig, load_config
from autoint.errors import ConfigError


FIT1D = {
    'schema': 1, 'task': 'fit1d', 'seed': 0,
    'train': {'learning_rate': 0.01, 'max_iters': 30, 'batch_size': 32},
    'network': {'hidden': [8, 8]},
    'fit1d': {'target': 'poly', 'intervals': 5},
}

CT = {
    'schema': 1, 'task': 'ct', 'seed': 0,
    'train': {'learning_rate': 0.001, 'max_iters': 5, 'batch_size': 16},
    'network': {'hidden': [8], 'L': [1, 1, 1]},
    'ct': {'phantom': 'disk', 'R': 8, 'A': 8, 'factor': 2, 'T': 4},
}

NVR = {
    'schema': 1, 'task': 'nvr', 'seed': 0,
    'train': {'learning_rate': 0.001, 'max_iters': 3, 'batch_size': 8},
    'network': {'hidden': [8]},
    'nvr': {'N': 4, 'L_x': 1, 'L_d': 1, 'sampler_hidden': [4], 'train_poses': 1, 'test_poses': 1,
            'width': 4, 'height': 4, 'tol': 1e-4, 'bench_N': [2, 4], 'bench_rays': 10},
}


def read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()


def read_rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


class ConfigTestCase(unittest.TestCase):

    def test_defaults_and_overrides(self):
        cfg = ExperimentConfig.from_dict({'schema': 1, 'task': 'ct', 'seed': 3}, threads=2, out='x')
        self.assertEqual(cfg.ct['factor'], 8)
        self.assertEqual((cfg.ct['R'], cfg.ct['A'], cfg.ct['T']), (128, 96, 64))
        self.assertEqual(cfg.train.batch_size, 1024)
        self.assertEqual(cfg.train.seed, 3)
        self.assertEqual((cfg.threads, cfg.out), (2, 'x'))
        self.assertEqual(ExperimentConfig.from_dict(cfg.to_dict()), cfg)
        self.assertEqual(ExperimentConfig.from_dict(FIT1D, seed=5).train.seed, 5)

    def test_invalid(self):
        bad = [
            [],
            {'schema': 2, 'task': 'ct', 'seed': 0},
            {'schema': 1, 'task': 'mri', 'seed': 0},
            {'schema': 1, 'task': 'ct'},
            {'schema': 1, 'task': 'ct', 'seed': -1},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'colour': 1},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'ct': {'factr': 2}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'ct': {'factor': 5}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'ct': {'phantom': 'head'}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'ct': {'sweep': ['tanh']}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'train': {'seed': 1}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'train': {'learning_rate': -1}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'network': {'nl': 'tanh'}},
            {'schema': 1, 'task': 'ct', 'seed': 0, 'threads': 0},
            {'schema': 1, 'task': 'nvr', 'seed': 0, 'nvr': {'t_n': 3, 't_f': 2}},
            {'schema': 1, 'task': 'nvr', 'seed': 0, 'nvr': {'scene': 'lego'}},
            {'schema': 1, 'task': 'fit1d', 'seed': 0, 'fit1d': {'target': 'sinc'}},
        ]
        for d in bad:
            with self.assertRaises(ConfigError, msg=str(d)):
                ExperimentConfig.from_dict(d)

    def test_load(self):
        with TempDirectory() as d:
            with self.assertRaises(ConfigError):
                load_config(os.path.join(d.path, 'none.json'))
            d.write('bad.json', b'{"schema": 1,')
            with self.assertRaises(ConfigError):
                load_config(os.path.join(d.path, 'bad.json'))
            d.write('fit.json', json.dumps(FIT1D).encode('utf-8'))
            self.assertEqual(load_config(os.path.join(d.path, 'fit.json')).task, 'fit1d')


class CLITestCase(unittest.TestCase):

    def setUp(self):
        self.d = TempDirectory()
        self.td = self.d.path

    def tearDown(self):
        TempDirectory.cleanup_all()

    def config(self, name, obj, **changes):
        obj = json.loads(json.dumps(obj))
        for section, values in changes.items():
            if isinstance(values, dict):
                obj.setdefault(section, {}).update(values)
            else:
                obj[section] = values
        obj['out'] = os.path.join(self.td, name)
        self.d.write(name + '.json', json.dumps(obj).encode('utf-8'))
        return os.path.join(self.td, name + '.json'), obj['out']

    def test_usage_errors(self):
        self.assertEqual(main(['fit1d', '--config', os.path.join(self.td, 'missing.json')]), EXIT_CONFIG)
        path, _ = self.config('ct_bad', CT, ct={'factor': 3})
        self.assertEqual(main(['ct', 'train', '--config', path]), EXIT_CONFIG)
        path, _ = self.config('fit', FIT1D)
        self.assertEqual(main(['ct', 'train', '--config', path]), EXIT_CONFIG)
        with self.assertRaises(SystemExit) as cm:
            main(['ct'])
        self.assertEqual(cm.exception.code, 2)
        with self.assertRaises(SystemExit) as cm:
            main(['--version'])
        self.assertEqual(cm.exception.code, 0)

    def test_missing_artifacts(self):
        path, _ = self.config('nvr', NVR)
        self.assertEqual(main(['nvr', 'render', '--config', path]), EXIT_MISSING)
        path, _ = self.config('ct', CT)
        self.assertEqual(main(['ct', 'inpaint', '--config', path]), EXIT_MISSING)
        self.assertEqual(main(['graph', 'dump', '--checkpoint', os.path.join(self.td, 'none.json')]),
                         EXIT_MISSING)

    def test_numerical_abort(self):
        path, out = self.config('nan', FIT1D, train={'learning_rate': 1e100, 'max_iters': 20},
                                network={'nl': 'relu'})
        self.assertEqual(main(['fit1d', '--config', path]), EXIT_ABORT)
        self.assertTrue(os.path.exists(os.path.join(out, 'progress.csv')))

    def test_fit1d_reproducible(self):
        path, out1 = self.config('run1', FIT1D)
        self.assertEqual(main(['fit1d', '--config', path]), EXIT_OK)
        path, out2 = self.config('run2', FIT1D)
        self.assertEqual(main(['fit1d', '--config', path, '--threads', '2']), EXIT_OK)
        for name in ('integrals.csv', 'progress.csv', 'report.json', 'checkpoint.json'):
            self.assertEqual(read_bytes(os.path.join(out1, name)), read_bytes(os.path.join(out2, name)),
                             msg=name)
        rows = read_rows(os.path.join(out1, 'integrals.csv'))
        self.assertEqual(len(rows), 5)
        self.assertEqual(len(read_rows(os.path.join(out1, 'progress.csv'))), 30)
        report = json.loads(read_bytes(os.path.join(out1, 'report.json')))
        self.assertEqual(report['integral_evaluations'], 10)
        self.assertLess(report['reuse']['unique_node_evals'], report['reuse']['total_node_refs'])

        out3 = os.path.join(self.td, 'run3')
        self.assertEqual(main(['fit1d', '--config', path, '--seed', '1', '--out', out3]), EXIT_OK)
        self.assertNotEqual(read_bytes(os.path.join(out1, 'integrals.csv')),
                            read_bytes(os.path.join(out3, 'integrals.csv')))

    def test_ct_train_and_inpaint(self):
        path, out = self.config('ct', CT)
        self.assertEqual(main(['ct', 'train', '--config', path]), EXIT_OK)
        for name in ('sinogram_truth.pgm', 'sinogram_masked.pgm', 'sinogram_inpainted.pgm', 'progress.csv',
                     'checkpoint.json', 'scanline.csv', 'report.json'):
            self.assertTrue(os.path.exists(os.path.join(out, name)), msg=name)
        self.assertFalse(os.path.exists(os.path.join(out, 'psnr.csv')))
        self.assertEqual(len(read_rows(os.path.join(out, 'scanline.csv'))), 8)
        self.assertEqual(main(['ct', 'inpaint', '--config', path]), EXIT_OK)
        train = json.loads(read_bytes(os.path.join(out, 'report.json')))
        inpaint = json.loads(read_bytes(os.path.join(out, 'inpaint_report.json')))
        self.assertEqual(train['integral_evaluations'], 2 * 8 * 8)
        self.assertEqual(inpaint['integral_evaluations'], 2 * 8 * 8)
        for key in ('psnr_masked', 'psnr_supervised', 'psnr_all'):
            self.assertAlmostEqual(train[key], inpaint[key], delta=1e-9)

    def test_ct_sweep(self):
        path, out = self.config('sweep', CT, ct={'sweep': ['relu', 'swish'], 'seeds': [0, 1]},
                                train={'max_iters': 2})
        self.assertEqual(main(['ct', 'train', '--config', path]), EXIT_OK)
        rows = read_rows(os.path.join(out, 'psnr.csv'))
        self.assertEqual([(r['nl'], r['seed']) for r in rows],
                         [('relu', '0'), ('relu', '1'), ('swish', '0'), ('swish', '1')])

    def test_nvr_train_and_render(self):
        path, out = self.config('nvr', NVR)
        self.assertEqual(main(['nvr', 'train', '--config', path]), EXIT_OK)
        for name in ('model/sigma.json', 'model/color.json', 'model/sampler.json', 'cameras.json',
                     'test_0.ppm', 'report.json', 'progress.csv'):
            self.assertTrue(os.path.exists(os.path.join(out, name)), msg=name)
        self.assertEqual(main(['nvr', 'render', '--config', path]), EXIT_OK)
        report = json.loads(read_bytes(os.path.join(out, 'render_report.json')))
        self.assertEqual(report['frames'], 1)
        self.assertEqual(report['rays'], 16)
        self.assertEqual(report['integral_evals_per_frame'], (4 + 1) * 16 * 2)
        self.assertTrue(os.path.exists(os.path.join(out, 'render_0.raw')))

    def test_nvr_bench(self):
        path, out = self.config('bench', NVR)
        self.assertEqual(main(['nvr', 'bench', '--config', path]), EXIT_OK)
        rows = read_rows(os.path.join(out, 'bench.csv'))
        self.assertEqual([int(r['N']) for r in rows], [2, 4])
        for r in rows:
            N, rays = int(r['N']), int(r['rays'])
            self.assertEqual(rays, 10)
            self.assertEqual(int(r['integral_evals_per_frame']), (N + 1) * rays * 2)
            self.assertEqual(int(r['interval_refs_per_frame']), 4 * N * rays)
        self.assertLess(int(rows[0]['integral_evals_per_frame']), int(rows[1]['integral_evals_per_frame']))

    def test_graph_dump(self):
        path, out = self.config('fit', FIT1D, train={'max_iters': 1})
        self.assertEqual(main(['fit1d', '--config', path]), EXIT_OK)
        ckpt = os.path.join(out, 'checkpoint.json')
        integral_dot = os.path.join(self.td, 'dots', 'integral.dot')
        self.assertEqual(main(['graph', 'dump', '--checkpoint', ckpt, '--out', integral_dot]), EXIT_OK)
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            self.assertEqual(main(['graph', 'dump', '--checkpoint', ckpt, '--grad']), EXIT_OK)
        with open(integral_dot) as f:
            integral = f.read()
        grad = buf.getvalue()
        for dot in (integral, grad):
            self.assertTrue(dot.startswith('digraph'))
            self.assertTrue(dot.rstrip().endswith('}'))
        self.assertGreater(grad.count('[label='), integral.count('[label='))
