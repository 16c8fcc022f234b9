"""
.. py:module:: quadrature
    :platform: Unix

Adaptive quadrature used as an independent oracle for the integrals that
AutoInt reads off integral networks. Thin wrappers around
:func:`scipy.integrate.quad` and :func:`scipy.integrate.quad_vec` that turn
convergence warnings into :class:`~autoint.errors.OracleError`.
"""
import logging
import warnings

import numpy as np
from scipy import integrate

from autoint.core.graph import NodeKind, record_tape
from autoint.errors import OracleError

__all__ = ['adaptive_quadrature', 'adaptive_quadrature_vec', 'relu_breakpoints', 'integrate_grad_network']

logger = logging.getLogger(__name__)


def adaptive_quadrature(f, a, b, tol=1e-9, limit=200, points=None):
    """Integrate the scalar function *f* over ``[a, b]``.

    :param f: callable ``float -> float``
    :param float tol: absolute and relative tolerance
    :param int limit: maximum number of subintervals
    :param points: optional breakpoints inside ``(a, b)`` (e.g. kinks)
    :returns: the integral
    :raises OracleError: if the quadrature does not converge
    """
    if a == b:
        return 0.0
    kwargs = {'epsabs': tol, 'epsrel': tol, 'limit': limit}
    if points is not None:
        lo, hi = min(a, b), max(a, b)
        points = sorted(p for p in points if lo < p < hi)
        if points:
            kwargs['points'] = points
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(f, a, b, **kwargs)
        except integrate.IntegrationWarning as e:
            raise OracleError("Quadrature over [{}, {}] did not converge: {}".format(a, b, e))
    return value


def adaptive_quadrature_vec(f, a, b, tol=1e-9, limit=2000, points=None, norm='2'):
    """Integrate the vector-valued function *f* over ``[a, b]``.

    :param str norm: ``'2'`` or ``'max'``, vector norm used for the error estimate
    :returns: :class:`numpy.ndarray`
    :raises OracleError: if the quadrature does not converge
    """
    if a == b:
        return np.zeros_like(np.asarray(f(a), dtype=float))
    res, _, info = integrate.quad_vec(f, a, b, epsabs=tol, epsrel=tol, limit=limit, norm=norm,
                                      points=points, full_output=True)
    if not info.success:
        raise OracleError("Vector quadrature over [{}, {}] did not converge (status {})."
                          .format(a, b, info.status))
    return np.asarray(res)


def _relu_inputs(graph):
    return [node.inputs[0] for node in graph.nodes
            if node.kind == NodeKind.POINTWISE and node.attrs['nl'].kind == 'relu']


def _pre_activations(pair, fixed, t, nids):
    inputs = dict(fixed)
    inputs[pair.var] = np.asarray(t, dtype=float)
    tape = record_tape(pair.integral, inputs, pair.params)
    cols = [np.broadcast_to(tape.value(n), (len(t), tape.value(n).shape[1])) for n in nids]
    return np.concatenate(cols, axis=1)


def relu_breakpoints(pair, fixed, a, b, grid=1025, max_grid=65537, max_iter=200):
    """Points in ``(a, b)`` where a ReLU pre-activation of *pair* changes sign.

    The grad network of a ReLU net jumps at these points. Sign changes are
    bracketed on a grid that is doubled until the number of changes per unit
    is stable, then every bracket is bisected to machine precision.

    :param pair: :class:`~autoint.core.gradnet.AutoIntPair`
    :param dict fixed: values of the other inputs for a single point
    :returns: sorted :class:`numpy.ndarray` of crossings
    :raises OracleError:
        if the crossings do not settle before *max_grid* points or a bracket
        does not shrink
    """
    nids = _relu_inputs(pair.integral)
    lo, hi = min(a, b), max(a, b)
    if not nids or lo == hi:
        return np.zeros(0)

    t = np.linspace(lo, hi, grid)
    signs = _pre_activations(pair, fixed, t, nids) > 0
    counts = np.sum(signs[1:] != signs[:-1], axis=0)
    while True:
        if len(t) > max_grid:
            raise OracleError("ReLU crossings on [{}, {}] did not settle at {} grid points."
                              .format(lo, hi, max_grid))
        fine = np.linspace(lo, hi, 2 * len(t) - 1)
        fine_signs = np.empty((len(fine), signs.shape[1]), dtype=bool)
        fine_signs[::2] = signs
        fine_signs[1::2] = _pre_activations(pair, fixed, fine[1::2], nids) > 0
        fine_counts = np.sum(fine_signs[1:] != fine_signs[:-1], axis=0)
        t, signs = fine, fine_signs
        if np.array_equal(fine_counts, counts):
            break
        counts = fine_counts

    idx, unit = np.nonzero(signs[1:] != signs[:-1])
    left, right = t[idx], t[idx + 1]
    s_left = signs[idx, unit]
    xtol = 4 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi))
    rows = np.arange(len(idx))
    for _ in range(max_iter):
        if np.all(right - left <= xtol):
            break
        mid = 0.5 * (left + right)
        same = (_pre_activations(pair, fixed, mid, nids)[rows, unit] > 0) == s_left
        left = np.where(same, mid, left)
        right = np.where(same, right, mid)
    else:
        raise OracleError("Could not resolve {} ReLU crossings on [{}, {}]."
                          .format(len(idx), lo, hi))
    logger.debug("Found %d ReLU crossings on [%g, %g].", len(idx), lo, hi)
    return np.unique(0.5 * (left + right))


def integrate_grad_network(pair, fixed, a, b, tol=1e-9, pieces=8):
    """Integrate the grad network of *pair* numerically over ``[a, b]``.

    The interval is cut at :func:`relu_breakpoints` and into *pieces* equal
    parts. The grad network is smooth on every segment; all segments are
    integrated together so each quadrature node is a single batched
    evaluation.

    :param pair: :class:`~autoint.core.gradnet.AutoIntPair`
    :param dict fixed: values of the other inputs for a *single* point
    :returns: vector of output width
    :raises OracleError: if crossings or the quadrature do not converge
    """
    a, b = float(a), float(b)
    if a == b:
        return np.zeros(pair.integral.width(pair.integral.outputs[0]))
    lo, hi = min(a, b), max(a, b)
    edges = np.union1d(np.linspace(lo, hi, pieces + 1), relu_breakpoints(pair, fixed, lo, hi))
    start, h = edges[:-1], np.diff(edges)
    start, h = start[h > 0], h[h > 0]

    def psi(s):
        inputs = dict(fixed)
        inputs[pair.var] = start + s * h
        return (h[:, None] * pair.grad_values(inputs)).ravel()

    res = adaptive_quadrature_vec(psi, 0.0, 1.0, tol=tol, norm='max')
    total = res.reshape(len(h), -1).sum(axis=0)
    return total if b > a else -total
