"""
.. py:module:: sampling
    :platform: Unix

Interval lengths and sample positions along rays.

The predictive sampling network maps a ray ``(o, d)`` to ``N`` interval
lengths that are positive and sum to the ray length ``t_f - t_n``:

.. math::

    \\delta = (t_f - t_n) \\left(\\epsilon + (1 - N \\epsilon)\\, \\mathrm{softmax}(S(o, d))\\right),

where the floor :math:`\\epsilon` keeps every interval from collapsing.
"""
import numpy as np
from scipy.special import softmax

from autoint.core.graph import record_tape
from autoint.nets import MLPSpec, InputBlock, FeatureBlock, init_params, build_integral_network
from autoint.train import backward

__all__ = ['SamplingNet', 'uniform_intervals', 'interval_edges', 'stratified_samples', 'stratified_positions',
           'stratified_backward']

#: Fraction of the ray length every interval gets at least.
DELTA_FLOOR = 1e-4


def uniform_intervals(n_rays, N, t_n, t_f):
    """Equal interval lengths, shape ``(n_rays, N)``."""
    return np.full((n_rays, N), (t_f - t_n) / N)


def interval_edges(delta, t_n):
    """Interval end points ``(n_rays, N + 1)`` starting at *t_n*."""
    edges = np.zeros((delta.shape[0], delta.shape[1] + 1))
    edges[:, 0] = t_n
    edges[:, 1:] = t_n + np.cumsum(delta, axis=1)
    return edges


def stratified_samples(delta, M, rng, t_n):
    """Draw *M* stratified samples per interval.

    Interval ``i`` is split into *M* bins and one point is drawn uniformly in
    each bin, so the positions are sorted.

    :returns: ``(t, u)``: positions ``(n_rays, N * M)`` and the uniform draws
        ``(n_rays, N, M)`` they were made from
    """
    R, N = delta.shape
    u = rng.uniform(size=(R, N, M))
    return stratified_positions(delta, u, t_n), u


def stratified_positions(delta, u, t_n):
    """Sample positions for fixed uniform draws *u* ``(n_rays, N, M)``."""
    R, N, M = u.shape
    start = interval_edges(delta, t_n)[:, :-1]
    frac = (np.arange(M)[None, None, :] + u) / M
    return (start[:, :, None] + frac * delta[:, :, None]).reshape(R, N * M)


def stratified_backward(g_t, u):
    """Gradient of the sample positions with respect to the interval lengths.

    :param g_t: cotangent of the positions ``(n_rays, N * M)``
    :param u: uniform draws used in :func:`stratified_positions`
    :returns: cotangent of the interval lengths ``(n_rays, N)``
    """
    R, N, M = u.shape
    g = g_t.reshape(R, N, M)
    frac = (np.arange(M)[None, None, :] + u) / M
    own = (g * frac).sum(axis=2)
    per_interval = g.sum(axis=2)
    # Interval k shifts every later interval.
    later = np.cumsum(per_interval[:, ::-1], axis=1)[:, ::-1]
    shift = np.zeros_like(own)
    shift[:, :-1] = later[:, 1:]
    return own + shift


class SamplingNet:
    """Small MLP predicting the interval lengths of a ray from its raw
    origin and direction.

    :param int N: number of intervals
    :param tuple hidden: hidden layer widths
    :param str nl: nonlinearity
    :param int seed: run seed for initialization
    """
    def __init__(self, N, hidden=(64, 64), nl='relu', seed=0, floor=DELTA_FLOOR, name='sampler',
                 params=None):
        self.N = N
        self.floor = floor
        self.spec = MLPSpec(name=name, inputs=[InputBlock('o', 3), InputBlock('d', 3)],
                            features=[FeatureBlock('o'), FeatureBlock('d')],
                            hidden=list(hidden), nl=nl, out_width=N, normalized=False)
        self.params = init_params(self.spec, seed) if params is None else params
        self.graph = build_integral_network(self.spec, self.params)

    @classmethod
    def from_spec(cls, spec, params, floor=DELTA_FLOOR):
        net = cls.__new__(cls)
        net.N = spec.out_width
        net.floor = floor
        net.spec = spec
        net.params = params
        net.graph = build_integral_network(spec, params)
        return net

    def forward(self, o, d, t_n, t_f):
        """Interval lengths for rays ``(o, d)``.

        :returns: ``(delta, cache)`` where *cache* is needed by :meth:`backward`
        """
        tape = record_tape(self.graph, {'o': o, 'd': d}, self.params)
        s = softmax(tape.outputs[0], axis=1)
        scale = (t_f - t_n) * (1.0 - self.N * self.floor)
        delta = (t_f - t_n) * self.floor + scale * s
        return delta, (tape, s, scale)

    def intervals(self, o, d, t_n, t_f):
        return self.forward(o, d, t_n, t_f)[0]

    def backward(self, cache, g_delta):
        """Parameter gradients for the cotangent *g_delta* of the intervals."""
        tape, s, scale = cache
        g = scale * g_delta
        g_logits = s * (g - (g * s).sum(axis=1, keepdims=True))
        return backward(self.graph, tape, g_logits)
