"""
.. py:module:: fit1d
    :platform: Unix

One-dimensional signals with known antiderivatives. A grad network is fit
to the signal and definite integrals are then read off the integral network
and compared with the closed form.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from autoint.core.gradnet import AutoIntPair
from autoint.nets import MLPSpec, InputBlock, FeatureBlock, init_params
from autoint.train import fit_grad_network
from autoint.util import substream

__all__ = ['Target', 'TARGETS', 'get_target', 'fit1d_spec', 'fit_target', 'integral_table']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Target:
    """Signal *f* on *domain* with antiderivative *F*."""
    name: str
    f: object
    F: object
    domain: tuple

    def integral(self, a, b):
        return self.F(np.asarray(b, dtype=float)) - self.F(np.asarray(a, dtype=float))


TARGETS = {
    'poly': Target('poly', lambda x: 3.0 * x ** 2 - 2.0 * x + 1.0,
                   lambda x: x ** 3 - x ** 2 + x, (-1.0, 1.0)),
    'cos': Target('cos', np.cos, np.sin, (-np.pi, np.pi)),
    'gaussian': Target('gaussian', lambda x: np.exp(-0.5 * x ** 2),
                       lambda x: np.sqrt(np.pi / 2.0) * erf(x / np.sqrt(2.0)), (-3.0, 3.0)),
}


def get_target(name):
    if name not in TARGETS:
        raise ValueError("Unknown target '{}', expected one of {}.".format(name, sorted(TARGETS)))
    return TARGETS[name]


def fit1d_spec(nl='swish', hidden=(32, 32, 32), L=0, normalized=True, name='fit1d'):
    """Network over the single input ``x``, integrated along ``x``."""
    return MLPSpec(name=name, inputs=[InputBlock('x', 1, True)], features=[FeatureBlock('x', L)],
                   hidden=list(hidden), nl=nl, normalized=normalized)


def fit_target(target, spec, cfg, domain=None, log_folder=None, on_checkpoint=None):
    """Fit the grad network of *spec* to ``target.f`` on uniform samples.

    :param target: :class:`Target`
    :param cfg: :class:`~autoint.train.TrainConfig`
    :param tuple domain: sampling interval, defaults to ``target.domain``
    :returns: ``(pair, log)``
    """
    lo, hi = target.domain if domain is None else domain
    pair = AutoIntPair.from_spec(spec, init_params(spec, cfg.seed))

    def sampler(rng):
        x = rng.uniform(lo, hi, size=(cfg.batch_size, 1))
        return {spec.var: x}, target.f(x)

    log = fit_grad_network(pair, sampler, cfg, log_folder=log_folder, on_checkpoint=on_checkpoint)
    return pair, log


def integral_table(pair, target, n, seed, domain=None):
    """Integrals over *n* random sub-intervals of the domain.

    :returns: list of rows ``[a, b, autoint, analytic, abs_err]``
    """
    lo, hi = target.domain if domain is None else domain
    rng = substream(seed, 'sampling')
    ab = np.sort(rng.uniform(lo, hi, size=(n, 2)), axis=1)
    a, b = ab[:, :1], ab[:, 1:]
    est = pair.integrate({}, a, b)[:, 0]
    exact = target.integral(a[:, 0], b[:, 0])
    rows = [[float(a[k, 0]), float(b[k, 0]), float(est[k]), float(exact[k]), float(abs(est[k] - exact[k]))]
            for k in range(n)]
    logger.info("%s: mean absolute integral error %.3g over %d intervals.", target.name,
                float(np.mean([r[4] for r in rows])) if rows else 0.0, n)
    return rows
