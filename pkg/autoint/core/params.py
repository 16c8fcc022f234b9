"""
.. py:module:: params
    :platform: Unix

Shared parameter storage. Integral and grad networks never own weights;
their Affine nodes refer to layers of a :class:`ParamStore` by name and
the store resolves ``"<layer>.W"`` and ``"<layer>.b"`` to the one tensor
holding each parameter.
"""
from collections import OrderedDict

import numpy as np

from autoint.errors import ParameterError

__all__ = ['ParamStore', 'weight_id', 'bias_id']


def weight_id(layer):
    """Parameter id of the weight matrix of *layer*."""
    return "{}.W".format(layer)


def bias_id(layer):
    """Parameter id of the bias vector of *layer*."""
    return "{}.b".format(layer)


class ParamStore:
    """Owner of all network parameters.

    Weight matrices have shape ``(out, in)`` and biases shape ``(out,)``.
    Updates through :meth:`__setitem__` or :meth:`update` write into the
    existing arrays, so every graph referencing a parameter sees the change
    and array identity is preserved.

    :param dtype: floating point type of the parameters, float64 by default
    """
    def __init__(self, dtype=np.float64):
        self._dtype = np.dtype(dtype)
        self._tensors = OrderedDict()
        self._layers = OrderedDict()

    @property
    def dtype(self):
        """Floating point type of the stored tensors."""
        return self._dtype

    @property
    def layers(self):
        """Names of the layers in insertion order."""
        return list(self._layers)

    def ids(self):
        """Parameter ids in insertion order."""
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    def __contains__(self, pid):
        return pid in self._tensors

    def __len__(self):
        return len(self._tensors)

    def __iter__(self):
        return iter(self._tensors)

    def has_layer(self, layer):
        return layer in self._layers

    def add_layer(self, layer, W, b):
        """Add a new layer with weights *W* ``(out, in)`` and bias *b* ``(out,)``.

        :raises ValueError: if the layer exists or the shapes do not agree
        """
        if layer in self._layers:
            raise ValueError("Layer '{}' already exists.".format(layer))
        W = np.array(W, dtype=self._dtype, ndmin=2)
        b = np.array(b, dtype=self._dtype).reshape(-1)
        if W.ndim != 2 or b.shape[0] != W.shape[0]:
            raise ValueError("Layer '{}': weight shape {} and bias shape {} do not agree."
                             .format(layer, W.shape, b.shape))
        self._tensors[weight_id(layer)] = W
        self._tensors[bias_id(layer)] = b
        self._layers[layer] = W.shape

    def layer_shape(self, layer):
        """``(out, in)`` shape of the weight matrix of *layer*."""
        try:
            return self._layers[layer]
        except KeyError:
            raise ParameterError("Unknown layer '{}'.".format(layer))

    def weight(self, layer):
        """Weight matrix of *layer*."""
        return self[weight_id(layer)]

    def bias(self, layer):
        """Bias vector of *layer*."""
        return self[bias_id(layer)]

    def __getitem__(self, pid):
        try:
            return self._tensors[pid]
        except KeyError:
            raise ParameterError("Parameter '{}' cannot be resolved.".format(pid))

    def __setitem__(self, pid, value):
        """Overwrite the *contents* of parameter *pid*."""
        current = self[pid]
        value = np.asarray(value, dtype=self._dtype)
        if value.shape != current.shape:
            raise ParameterError("Parameter '{}' has shape {}, got {}."
                                 .format(pid, current.shape, value.shape))
        current[...] = value

    def update(self, values):
        """Overwrite several parameters from a mapping of id to array."""
        for pid, value in values.items():
            self[pid] = value

    def zeros(self):
        """Dictionary of zero arrays congruent with the stored parameters."""
        return OrderedDict((pid, np.zeros_like(t)) for pid, t in self._tensors.items())

    def copy(self):
        """Deep copy. The copy shares nothing with this store."""
        other = ParamStore(self._dtype)
        for layer in self._layers:
            other.add_layer(layer, self.weight(layer).copy(), self.bias(layer).copy())
        return other

    def num_parameters(self):
        return int(sum(t.size for t in self._tensors.values()))

    def __repr__(self):
        return "ParamStore({} layers, {} parameters, {})".format(
            len(self._layers), self.num_parameters(), self._dtype.name)
