"""
.. py:module:: config
    :platform: Unix

Experiment configurations. A configuration is a JSON object::

    {"schema": 1, "task": "ct", "seed": 0, "out": "runs/ct",
     "train": {"max_iters": 2000}, "network": {"nl": "swish"}, "ct": {"factor": 8}}

Sections left out take their defaults. Unknown keys at any level are
rejected so that a typo never silently falls back to a default.
"""
import copy
import json
import os
from dataclasses import dataclass, field, fields

from autoint.errors import ConfigError
from autoint.nets import NONLINEARITIES
from autoint.train import TrainConfig

__all__ = ['SCHEMA_VERSION', 'TASKS', 'SECTION_DEFAULTS', 'ExperimentConfig', 'load_config']

SCHEMA_VERSION = 1
TASKS = ('fit1d', 'ct', 'nvr')

SECTION_DEFAULTS = {
    'network': {
        'nl': 'swish',
        'hidden': [64, 64, 64],
        'L': None,
        'normalized': True,
    },
    'fit1d': {
        'target': 'cos',
        'domain': None,
        'intervals': 20,
    },
    'ct': {
        'phantom': 'shepp_logan',
        'R': 128,
        'A': 96,
        'factor': 8,
        'T': 64,
        'tol': 1e-9,
        'sweep': [],
        'seeds': [0],
        'scanline_row': None,
    },
    'nvr': {
        'scene': 'single_blob',
        'N': 8,
        'M': None,
        't_n': 2.5,
        't_f': 5.5,
        'use_sampler': True,
        'sampler_hidden': [32, 32],
        'L_x': 6,
        'L_d': 2,
        'train_poses': 12,
        'test_poses': 2,
        'radius': 4.0,
        'width': 24,
        'height': 24,
        'fov_deg': 40.0,
        'tol': 1e-6,
        'bench_N': [2, 4, 8, 16, 32, 64],
        'bench_rays': 256,
    },
}

_TOP_KEYS = ('schema', 'task', 'seed', 'out', 'threads', 'train') + tuple(SECTION_DEFAULTS)
_TRAIN_KEYS = tuple(f.name for f in fields(TrainConfig) if f.name != 'seed')


def _merge(section, given):
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError("Section '{}' must be an object, got {!r}.".format(section, given))
    defaults = SECTION_DEFAULTS[section]
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError("Unknown keys in section '{}': {}.".format(section, unknown))
    merged = copy.deepcopy(defaults)
    merged.update(given)
    return merged


@dataclass
class ExperimentConfig:
    """A validated experiment configuration.

    :ivar str task: one of :data:`TASKS`
    :ivar int seed: run seed, every random stream is derived from it
    :ivar str out: output folder of the artifacts
    :ivar int threads: worker threads for oracle sweeps and reference renders
    :ivar train: :class:`~autoint.train.TrainConfig`
    """
    task: str
    seed: int
    out: str = 'out'
    threads: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)
    network: dict = field(default_factory=lambda: copy.deepcopy(SECTION_DEFAULTS['network']))
    fit1d: dict = field(default_factory=lambda: copy.deepcopy(SECTION_DEFAULTS['fit1d']))
    ct: dict = field(default_factory=lambda: copy.deepcopy(SECTION_DEFAULTS['ct']))
    nvr: dict = field(default_factory=lambda: copy.deepcopy(SECTION_DEFAULTS['nvr']))

    @classmethod
    def from_dict(cls, d, seed=None, threads=None, out=None):
        """Validate *d* and apply the command line overrides.

        :raises ConfigError: on any invalid or unknown entry
        """
        if not isinstance(d, dict):
            raise ConfigError("Configuration must be a JSON object.")
        unknown = sorted(set(d) - set(_TOP_KEYS))
        if unknown:
            raise ConfigError("Unknown top-level keys: {}.".format(unknown))
        if d.get('schema') != SCHEMA_VERSION:
            raise ConfigError("Unsupported schema {!r}, expected {}.".format(d.get('schema'), SCHEMA_VERSION))
        if d.get('task') not in TASKS:
            raise ConfigError("Unknown task {!r}, expected one of {}.".format(d.get('task'), TASKS))
        seed = d.get('seed') if seed is None else seed
        if seed is None:
            raise ConfigError("A seed is required.")
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError("Seed must be a non-negative integer, got {!r}.".format(seed))

        train = d.get('train') or {}
        if not isinstance(train, dict):
            raise ConfigError("Section 'train' must be an object.")
        bad = sorted(set(train) - set(_TRAIN_KEYS))
        if bad:
            raise ConfigError("Unknown keys in section 'train': {}.".format(bad))
        cfg = cls(task=d['task'], seed=seed,
                  out=d.get('out', 'out') if out is None else out,
                  threads=d.get('threads', 1) if threads is None else threads,
                  train=TrainConfig(seed=seed, **train),
                  **{s: _merge(s, d.get(s)) for s in SECTION_DEFAULTS})
        return cfg.validate()

    def validate(self):
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError("threads must be a positive integer, got {!r}.".format(self.threads))
        net = self.network
        if net['nl'] not in NONLINEARITIES:
            raise ConfigError("Unknown nonlinearity '{}'.".format(net['nl']))
        if not net['hidden'] or any(int(h) < 1 for h in net['hidden']):
            raise ConfigError("Hidden widths must be positive, got {}.".format(net['hidden']))
        if self.task == 'fit1d':
            from autoint.domains.fit1d import TARGETS
            if self.fit1d['target'] not in TARGETS:
                raise ConfigError("Unknown fit1d target '{}'.".format(self.fit1d['target']))
            if self.fit1d['intervals'] < 1:
                raise ConfigError("fit1d.intervals must be positive.")
        elif self.task == 'ct':
            ct = self.ct
            from autoint.domains.ct.phantom import Phantom
            if ct['phantom'] not in Phantom.NAMES:
                raise ConfigError("Unknown phantom '{}'.".format(ct['phantom']))
            if ct['R'] < 1 or ct['A'] < 1 or ct['T'] < 1:
                raise ConfigError("ct.R, ct.A and ct.T must be positive.")
            if ct['factor'] < 1 or ct['A'] % ct['factor']:
                raise ConfigError("Subsampling factor {} does not divide A={}.".format(ct['factor'], ct['A']))
            bad = [nl for nl in ct['sweep'] if nl not in NONLINEARITIES]
            if bad:
                raise ConfigError("Unknown nonlinearities in ct.sweep: {}.".format(bad))
            if not ct['seeds']:
                raise ConfigError("ct.seeds must not be empty.")
        elif self.task == 'nvr':
            nvr = self.nvr
            from autoint.domains.nvr.scene import AnalyticScene
            if nvr['scene'] not in AnalyticScene.NAMES:
                raise ConfigError("Unknown scene '{}'.".format(nvr['scene']))
            if nvr['N'] < 1 or (nvr['M'] is not None and nvr['M'] < 1):
                raise ConfigError("nvr.N and nvr.M must be positive.")
            if not nvr['t_n'] < nvr['t_f']:
                raise ConfigError("Need nvr.t_n < nvr.t_f.")
            if nvr['train_poses'] < 1 or nvr['test_poses'] < 1:
                raise ConfigError("nvr.train_poses and nvr.test_poses must be positive.")
            if any(n < 1 for n in nvr['bench_N']):
                raise ConfigError("nvr.bench_N entries must be positive.")
        return self

    def to_dict(self):
        d = {'schema': SCHEMA_VERSION, 'task': self.task, 'seed': self.seed, 'out': self.out,
             'threads': self.threads,
             'train': {k: getattr(self.train, k) for k in _TRAIN_KEYS}}
        for s in SECTION_DEFAULTS:
            d[s] = copy.deepcopy(getattr(self, s))
        return d


def load_config(path, seed=None, threads=None, out=None):
    """Read and validate the configuration at *path*.

    :raises ConfigError: if the file is missing, not JSON or invalid
    """
    if not os.path.isfile(path):
        raise ConfigError("Configuration file '{}' does not exist.".format(path))
    with open(path) as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("Configuration file '{}' is not valid JSON: {}.".format(path, e))
    return ExperimentConfig.from_dict(d, seed=seed, threads=threads, out=out)
