"""
.. py:module:: serializers
    :platform: Unix

JSON serializers for network specifications and parameters, and the
checkpoint format built on them::

    {"spec": {...}, "seed": 0, "layers": [{"name": ..., "W": [[...]], "b": [...]}, ...]}

Floats are written with Python's shortest round-trip representation, so a
float64 checkpoint loads back bit for bit.
"""
import json
import os

import numpy as np

from autoint.core.params import ParamStore
from autoint.errors import MissingArtifactError
from autoint.nets import MLPSpec

__all__ = ['spec_serializer', 'params_serializer',
           'save_checkpoint', 'load_checkpoint']


def spec_serializer():
    """Serializer for :class:`~autoint.nets.MLPSpec` objects."""
    return MLPSpec, lambda spec: spec.to_dict(), MLPSpec.from_dict


def params_serializer():
    """Serializer for :class:`~autoint.core.params.ParamStore` objects.

    Layers are stored as a list in insertion order.
    """
    def dumps(params):
        return [{'name': layer,
                 'W': params.weight(layer).tolist(),
                 'b': params.bias(layer).tolist()} for layer in params.layers]

    def loads(layers, dtype=np.float64):
        params = ParamStore(dtype)
        for layer in layers:
            params.add_layer(layer['name'], np.array(layer['W'], dtype=np.float64, ndmin=2),
                             np.array(layer['b'], dtype=np.float64))
        return params

    return ParamStore, dumps, loads


def save_checkpoint(path, spec, params, seed, extra=None):
    """Write a checkpoint of one network.

    :param str path: target file
    :param spec: :class:`~autoint.nets.MLPSpec`
    :param params: :class:`~autoint.core.params.ParamStore` with the layers of *spec*
    :param int seed: run seed
    :param dict extra: optional JSON-serializable metadata
    """
    _, dump_spec, _ = spec_serializer()
    _, dump_params, _ = params_serializer()
    layers = [layer for layer in dump_params(params) if layer['name'] in set(spec.layer_names)]
    obj = {'spec': dump_spec(spec), 'seed': int(seed), 'layers': layers}
    if extra:
        obj['extra'] = extra
    folder = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(folder):
        os.makedirs(folder)
    with open(path, 'w') as f:
        json.dump(obj, f)
        f.write('\n')


def load_checkpoint(path, dtype=np.float64):
    """Read a checkpoint written by :func:`save_checkpoint`.

    :returns: ``(spec, params, seed, extra)``
    :raises MissingArtifactError: if *path* does not exist
    """
    if not os.path.exists(path):
        raise MissingArtifactError("Checkpoint '{}' does not exist.".format(path))
    with open(path) as f:
        obj = json.load(f)
    _, _, load_spec = spec_serializer()
    _, _, load_params = params_serializer()
    return load_spec(obj['spec']), load_params(obj['layers'], dtype), obj['seed'], obj.get('extra', {})
