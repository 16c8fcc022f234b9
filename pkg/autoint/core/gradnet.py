"""
.. py:module:: gradnet
    :platform: Unix

Grad networks and automatic integration.

:func:`derive` turns an integral network :math:`\\Phi` into the graph of its
partial derivative :math:`\\Psi = \\partial \\Phi / \\partial x_i` with respect
to the variable of integration. Both graphs refer to the same parameters, so
once :math:`\\Psi` has been fitted to a signal, definite integrals of the
signal are read off :math:`\\Phi` with two evaluations:

.. math::

    \\int_a^b \\Psi(x) \\, dx = \\Phi(b) - \\Phi(a).

The derivative is built node by node with forward-mode rules. Every
nonlinearity on the path contributes one *leg*, a copy of the primal chain
that feeds its derivative. Copies are structurally identical to each other,
which lets :func:`~autoint.core.graph.evaluate` compute each of them only once.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from autoint.core.graph import ComputeGraph, NodeKind, evaluate
from autoint.errors import DerivativeError

__all__ = ['derive', 'AutoIntPair', 'IntegralBounds', 'eval_antiderivative',
           'definite_integral']

logger = logging.getLogger(__name__)


class _SparseTangent:
    """Tangent of a Concat node: ``(offset, width, tangent)`` parts, parts
    without dependence on the variable have tangent ``None``."""
    def __init__(self, parts):
        self.parts = parts


class _Deriver:
    def __init__(self, integral, var):
        self.src = integral
        self.var = var
        self.g = ComputeGraph("d{}/d{}".format(integral.name, var))
        self._inputs = {}
        self._tangents = {}
        for name, (kind, width) in integral.input_signature.items():
            old = integral.input_node(name)
            if kind == NodeKind.INPUT_VAR:
                self._inputs[old] = self.g.input_var(name)
            else:
                self._inputs[old] = self.g.input_const(name, width)

    def copy(self, nid):
        """Fresh copy of the primal chain ending at *nid*."""
        node = self.src.node(nid)
        if node.kind in (NodeKind.INPUT_VAR, NodeKind.INPUT_CONST):
            return self._inputs[nid]
        inputs = [self.copy(i) for i in node.inputs]
        return self.g._add(node.kind, inputs, node.width, param_ref=node.param_ref,
                           attrs=node.attrs, tags={'role': 'primal'})

    def tangent(self, nid):
        if nid not in self._tangents:
            self._tangents[nid] = self._tangent(self.src.node(nid))
        return self._tangents[nid]

    def _is_seed(self, t):
        return t is not None and self.g.node(t).kind == NodeKind.SEED

    def _dense(self, nid, node):
        t = self.tangent(nid)
        if isinstance(t, _SparseTangent):
            raise DerivativeError("{} node {} cannot consume a concatenated tangent."
                                  .format(node.kind, node.id))
        return t

    def _tangent(self, node):
        g = self.g
        kind = node.kind
        if kind == NodeKind.INPUT_VAR:
            return g.seed()
        if kind in (NodeKind.INPUT_CONST, NodeKind.SEED):
            return None

        if kind == NodeKind.AFFINE:
            t = self.tangent(node.inputs[0])
            if t is None:
                return None
            base = node.attrs['cols'][0] if node.attrs['cols'] is not None else 0
            if not isinstance(t, _SparseTangent):
                return g.affine(t, node.param_ref, node.width, bias=False,
                                cols=node.attrs['cols'], tags={'role': 'tangent'})
            terms = [g.affine(pt, node.param_ref, node.width, bias=False,
                              cols=(base + off, base + off + w), tags={'role': 'tangent'})
                     for off, w, pt in t.parts if pt is not None]
            return g.sum(*terms)

        if kind == NodeKind.POINTWISE:
            order = node.attrs['order']
            if order >= 2:
                raise DerivativeError("Pointwise node {} is already at derivative order 2."
                                      .format(node.id))
            t = self._dense(node.inputs[0], node)
            if t is None:
                return None
            leg = g.pointwise(self.copy(node.inputs[0]), node.attrs['nl'], order + 1,
                              tags={'role': 'leg'})
            return g.hadamard(leg, t, tags={'role': 'tangent'})

        if kind == NodeKind.ENCODE:
            if node.attrs['order'] != 0:
                raise DerivativeError("Encode node {} is already differentiated.".format(node.id))
            t = self._dense(node.inputs[0], node)
            if t is None:
                return None
            leg = g.encode(self.copy(node.inputs[0]), node.attrs['encoding'], 1,
                           tags={'role': 'leg'})
            if self._is_seed(t):
                return leg
            return g.hadamard(leg, t, tags={'role': 'tangent'})

        if kind == NodeKind.AFFINE_POINT:
            o, t, d = node.inputs
            to, tt, td = (self._dense(i, node) for i in (o, t, d))
            terms = []
            if to is not None:
                terms.append(to)
            if tt is not None:
                dcopy = self.copy(d)
                terms.append(dcopy if self._is_seed(tt) else g.hadamard(tt, dcopy))
            if td is not None:
                terms.append(g.hadamard(self.copy(t), td))
            return g.sum(*terms) if terms else None

        if kind == NodeKind.CONCAT:
            parts, off = [], 0
            for i in node.inputs:
                w = self.src.width(i)
                parts.append((off, w, self._dense(i, node)))
                off += w
            if all(p[2] is None for p in parts):
                return None
            return _SparseTangent(parts)

        if kind == NodeKind.SUM:
            terms = [t for t in (self._dense(i, node) for i in node.inputs) if t is not None]
            return g.sum(*terms) if terms else None

        if kind == NodeKind.HADAMARD:
            terms = []
            for j, i in enumerate(node.inputs):
                t = self._dense(i, node)
                if t is None:
                    continue
                others = [self.copy(k) for n, k in enumerate(node.inputs) if n != j]
                terms.append(g.hadamard(t, *others))
            return g.sum(*terms) if terms else None

        if kind == NodeKind.SCALE_CONST:
            t = self._dense(node.inputs[0], node)
            return None if t is None else g.scale(t, node.attrs['value'])

        raise DerivativeError("No derivative rule for {} nodes.".format(kind))

    def output(self, nid):
        t = self.tangent(nid)
        if isinstance(t, _SparseTangent):
            raise DerivativeError("Output node {} is a concatenation.".format(nid))
        if t is None:
            # Output does not depend on the variable.
            return self.g.scale(self.g.seed(), np.zeros(self.src.width(nid)))
        return t


def derive(integral, var=None):
    """Derive the grad network of *integral* with respect to *var*.

    :param integral: :class:`~autoint.core.graph.ComputeGraph`
    :param str var:
        Name of the InputVar. Defaults to the graph's only InputVar.
    :returns:
        :class:`~autoint.core.graph.ComputeGraph` with the same input
        signature, computing the derivative of every output. Parameters are
        shared by reference. Dead nodes are pruned.
    :raises DerivativeError: if *var* is not an InputVar of the graph or a
        node on the path has no derivative rule
    """
    gvar = integral.var
    if var is None:
        var = gvar
    if var is None or var != gvar:
        raise DerivativeError("'{}' is not the InputVar of graph '{}' (InputVar: {})."
                              .format(var, integral.name, gvar))
    d = _Deriver(integral, var)
    outs = [d.output(o) for o in integral.outputs]
    d.g.set_outputs(outs)
    pruned = d.g.prune()
    logger.debug("Derived '%s' from '%s': %d nodes (%d pruned), integral has %d.",
                 d.g.name, integral.name, len(d.g), pruned, len(integral))
    return d.g


@dataclass
class IntegralBounds:
    """Integration domain of a batch of definite integrals.

    :ivar dict fixed: values of every input except the variable of integration
    :ivar a: lower bound(s), scalar or one per batch row
    :ivar b: upper bound(s)
    """
    fixed: dict = field(default_factory=dict)
    a: object = 0.0
    b: object = 1.0


class AutoIntPair:
    """An integral network together with its grad network.

    Both graphs share *params*. The pair counts the points evaluated through
    the integral network in :attr:`integral_evaluations`.

    :param integral: :class:`~autoint.core.graph.ComputeGraph`
    :param params: :class:`~autoint.core.params.ParamStore`
    :param str var: variable of integration, defaults to the InputVar
    :param bool reuse: evaluate the grad network with leg reuse
    """
    def __init__(self, integral, params, var=None, reuse=True, spec=None):
        self.integral = integral
        self.grad = derive(integral, var)
        self.var = integral.var if var is None else var
        self.params = params
        self.reuse = reuse
        self.spec = spec
        self.integral_evaluations = 0

    @classmethod
    def from_spec(cls, spec, params, **kwargs):
        """Build the integral network of :class:`~autoint.nets.MLPSpec`
        *spec* and derive its grad network."""
        from autoint.nets import build_integral_network
        return cls(build_integral_network(spec, params), params, spec=spec, **kwargs)

    @property
    def name(self):
        return self.integral.name

    def antiderivative(self, inputs):
        """Evaluate the integral network, see :func:`eval_antiderivative`."""
        return eval_antiderivative(self, inputs)

    def grad_values(self, inputs, report=False):
        """Evaluate the grad network on *inputs*.

        :returns: output array, or the :class:`~autoint.core.graph.EvalReport`
            if *report* is ``True``
        """
        rep = evaluate(self.grad, inputs, self.params, reuse=self.reuse)
        return rep if report else rep.output

    def integrate(self, fixed, a, b):
        """Shortcut for :func:`definite_integral` with :class:`IntegralBounds`."""
        return definite_integral(self, IntegralBounds(fixed=fixed, a=a, b=b))

    def __repr__(self):
        return "AutoIntPair({}, var={}, integral={} nodes, grad={} nodes)".format(
            self.name, self.var, len(self.integral), len(self.grad))


def eval_antiderivative(pair, inputs):
    """Evaluate the integral network of *pair* with its shared parameters.

    :returns: array ``(batch, out_width)``
    """
    rep = evaluate(pair.integral, inputs, pair.params, reuse=True)
    pair.integral_evaluations += rep.n_points
    return rep.output


def definite_integral(pair, bounds):
    """Integrate the grad network over ``[a, b]`` with two integral-network
    evaluations.

    :param pair: :class:`AutoIntPair`
    :param bounds: :class:`IntegralBounds`
    :returns: array ``(batch, out_width)`` of ``Phi(b) - Phi(a)``
    """
    upper = dict(bounds.fixed)
    upper[pair.var] = bounds.b
    lower = dict(bounds.fixed)
    lower[pair.var] = bounds.a
    return eval_antiderivative(pair, upper) - eval_antiderivative(pair, lower)
