"""
.. py:module:: nets
    :platform: Unix

Integral network construction: nonlinearities with their first and second
derivatives, positional encodings, network specifications, parameter
initialization and the graph builder.

An integral network is a multilayer perceptron

.. math::

    \\Phi(x) = W_n (\\varphi_{n-1} \\circ \\dots \\circ \\varphi_0)(\\gamma(x)) + b_n,
    \\qquad \\varphi_k(y) = \\mathrm{NL}(W_k y + b_k),

where :math:`\\gamma` is an optional positional encoding of the inputs. The
final bias :math:`b_n` is the integration constant.
"""
import logging
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import expit

from autoint.core.graph import ComputeGraph
from autoint.core.params import ParamStore
from autoint.errors import BuildError
from autoint.util import substream

__all__ = ['NONLINEARITIES', 'Nonlinearity', 'nl_eval', 'make_nonlinearity',
           'Encoding', 'encode', 'InputBlock', 'FeatureBlock', 'MLPSpec',
           'init_params', 'build_integral_network']

logger = logging.getLogger(__name__)

#: Supported nonlinearity kinds.
NONLINEARITIES = ('relu', 'softplus', 'swish', 'sine')


@dataclass(frozen=True)
class Nonlinearity:
    """Elementwise activation function with derivatives up to order 2.

    :ivar str kind: one of :data:`NONLINEARITIES`
    :ivar float beta: Swish slope, ``swish(x) = x sigmoid(beta x)``
    :ivar float omega0: Sine frequency, ``sine(x) = sin(omega0 x)``
    """
    kind: str = 'swish'
    beta: float = 1.0
    omega0: float = 30.0

    def __post_init__(self):
        if self.kind not in NONLINEARITIES:
            raise ValueError("Unknown nonlinearity '{}', expected one of {}."
                             .format(self.kind, NONLINEARITIES))

    def eval(self, x, order=0):
        """Evaluate ``NL``, ``NL'`` or ``NL''`` elementwise on *x*."""
        if order not in (0, 1, 2):
            raise ValueError("Nonlinearity order must be 0, 1 or 2, got {}.".format(order))
        return getattr(self, '_' + self.kind)(np.asarray(x), order)

    __call__ = eval

    @staticmethod
    def _relu(x, order):
        if order == 0:
            return np.maximum(x, 0.0)
        if order == 1:
            return (x > 0).astype(x.dtype if x.dtype.kind == 'f' else float)
        # Kink ignored: the second derivative is zero everywhere.
        return np.zeros_like(x, dtype=x.dtype if x.dtype.kind == 'f' else float)

    @staticmethod
    def _softplus(x, order):
        if order == 0:
            return np.logaddexp(0.0, x)
        s = expit(x)
        if order == 1:
            return s
        return s * (1.0 - s)

    def _swish(self, x, order):
        b = self.beta
        s = expit(b * x)
        if order == 0:
            return x * s
        ds = s * (1.0 - s)
        if order == 1:
            return s + b * x * ds
        return b * ds * (2.0 + b * x * (1.0 - 2.0 * s))

    def _sine(self, x, order):
        w = self.omega0
        if order == 0:
            return np.sin(w * x)
        if order == 1:
            return w * np.cos(w * x)
        return -w * w * np.sin(w * x)

    def __str__(self):
        if self.kind == 'swish':
            return 'swish(beta={:g})'.format(self.beta)
        if self.kind == 'sine':
            return 'sine(omega0={:g})'.format(self.omega0)
        return self.kind


def make_nonlinearity(kind, beta=1.0, omega0=30.0):
    """Create a :class:`Nonlinearity` from its name."""
    if isinstance(kind, Nonlinearity):
        return kind
    return Nonlinearity(kind=str(kind).lower(), beta=float(beta), omega0=float(omega0))


def nl_eval(kind, order, x):
    """Evaluate nonlinearity *kind* (name or :class:`Nonlinearity`) or its
    *order*:th derivative at *x*.

    >>> float(nl_eval('relu', 1, 2.0))
    1.0
    """
    return make_nonlinearity(kind).eval(x, order)


@dataclass(frozen=True)
class Encoding:
    """Positional encoding with ``L`` frequencies ``omega_i = 2^i pi``.

    Every input feature ``p`` is mapped to ``2L`` features laid out by
    frequency: ``[sin(omega_0 p), cos(omega_0 p), sin(omega_1 p), ...]``.
    For inputs with ``k`` features each frequency contributes a block of
    ``k`` sines followed by ``k`` cosines, so a tangent of width ``k`` tiles
    onto the encoded vector. The normalized variant divides by ``omega_i``,
    keeping its derivative bounded by one.
    """
    L: int
    normalized: bool = False

    @property
    def frequencies(self):
        return np.pi * 2.0 ** np.arange(self.L)

    def width(self, k=1):
        """Encoded width of *k* input features."""
        return 2 * self.L * k

    def eval(self, x, order=0):
        """Encode the columns of *x* (shape ``(batch, k)``) or take the
        *order*:th derivative with respect to them."""
        if order not in (0, 1, 2):
            raise ValueError("Encoding order must be 0, 1 or 2, got {}.".format(order))
        x = np.asarray(x)
        blocks = []
        for w in self.frequencies:
            s, c = np.sin(w * x), np.cos(w * x)
            a, b = ((s, c), (c, -s), (-s, -c))[order]
            scale = w ** (order - 1) if self.normalized else w ** order
            blocks.extend((scale * a, scale * b))
        if not blocks:
            return np.zeros(x.shape[:-1] + (0,), dtype=x.dtype)
        return np.concatenate(blocks, axis=-1)

    def __str__(self):
        return 'L={}{}'.format(self.L, ', normalized' if self.normalized else '')


def encode(p, cfg, order=0):
    """Encode the scalar *p* with :class:`Encoding` *cfg*.

    :returns: vector of ``2 * cfg.L`` components
    """
    return cfg.eval(np.asarray(p, dtype=float).reshape(1, 1), order)[0]


@dataclass
class InputBlock:
    """An input slot of a network.

    :ivar str name: input name
    :ivar int width: number of features
    :ivar bool var: whether this is the variable of integration
    """
    name: str
    width: int = 1
    var: bool = False


@dataclass
class FeatureBlock:
    """A block of first-layer features: input (or the derived ray point
    ``'x'``) *source*, encoded with *L* frequencies, or raw if ``L == 0``."""
    source: str
    L: int = 0


@dataclass
class MLPSpec:
    """Specification of an integral network or a plain MLP.

    :ivar str name: prefix of the layer names in the parameter store
    :ivar list inputs: :class:`InputBlock` s in signature order
    :ivar list features: :class:`FeatureBlock` s concatenated before layer 0
    :ivar list hidden: hidden layer widths, its length is the depth
    :ivar str nl: nonlinearity kind
    :ivar int out_width: width of the final affine layer
    :ivar bool normalized: use the normalized positional encoding
    :ivar bool final_bias: include the final bias (the integration constant)
    :ivar str init: ``'auto'``, ``'siren'`` or ``'uniform'``
    :ivar tuple point:
        Optional ``(o, t, d)`` input names. When set, the point
        ``x = o + t d`` is available as feature source ``'x'``.
    :ivar str output_activation:
        Nonlinearity applied to the output of a plain network (one without
        a variable of integration).
    """
    name: str = 'phi'
    inputs: list = field(default_factory=lambda: [InputBlock('x', 1, True)])
    features: list = field(default_factory=lambda: [FeatureBlock('x', 0)])
    hidden: list = field(default_factory=lambda: [32, 32])
    nl: str = 'swish'
    out_width: int = 1
    normalized: bool = True
    final_bias: bool = True
    init: str = 'auto'
    point: tuple = None
    output_activation: str = None
    beta: float = 1.0
    omega0: float = 30.0

    def __post_init__(self):
        self.inputs = [i if isinstance(i, InputBlock) else InputBlock(**i) for i in self.inputs]
        self.features = [f if isinstance(f, FeatureBlock) else FeatureBlock(**f) for f in self.features]
        self.hidden = [int(h) for h in self.hidden]
        if self.point is not None:
            self.point = tuple(self.point)

    @property
    def depth(self):
        return len(self.hidden)

    @property
    def nonlinearity(self):
        return make_nonlinearity(self.nl, beta=self.beta, omega0=self.omega0)

    @property
    def var(self):
        """Name of the variable of integration, or ``None``."""
        for i in self.inputs:
            if i.var:
                return i.name
        return None

    def layer_name(self, k):
        return "{}.layer{}".format(self.name, k)

    @property
    def layer_names(self):
        return [self.layer_name(k) for k in range(self.depth + 1)]

    def source_width(self, source):
        if source == 'x' and self.point is not None:
            return self._input(self.point[0]).width
        return self._input(source).width

    def _input(self, name):
        for i in self.inputs:
            if i.name == name:
                return i
        raise BuildError("Network '{}' has no input '{}'.".format(self.name, name))

    @property
    def feature_width(self):
        """Width of the first-layer input vector."""
        return sum(Encoding(f.L).width(self.source_width(f.source)) if f.L else self.source_width(f.source)
                   for f in self.features)

    @property
    def layer_shapes(self):
        """``(out, in)`` weight shape of every layer."""
        widths = [self.feature_width] + self.hidden + [self.out_width]
        return [(widths[k + 1], widths[k]) for k in range(len(widths) - 1)]

    def validate(self):
        """Check the specification.

        :raises BuildError: if the specification is not consistent
        """
        names = [i.name for i in self.inputs]
        if len(set(names)) != len(names):
            raise BuildError("Duplicate input names in {}.".format(names))
        if sum(i.var for i in self.inputs) > 1:
            raise BuildError("At most one input can be the variable of integration.")
        if self.depth < 1 or any(h < 1 for h in self.hidden) or self.out_width < 1:
            raise BuildError("Depth and widths must be at least 1, got hidden={}, out_width={}."
                             .format(self.hidden, self.out_width))
        if not self.features:
            raise BuildError("Network '{}' has no input features.".format(self.name))
        if self.nl not in NONLINEARITIES:
            raise BuildError("Unknown nonlinearity '{}'.".format(self.nl))
        if self.init not in ('auto', 'siren', 'uniform'):
            raise BuildError("Unknown init scheme '{}'.".format(self.init))
        if self.point is not None:
            if len(self.point) != 3:
                raise BuildError("Point must name the (o, t, d) inputs, got {}.".format(self.point))
            o, t, d = (self._input(n) for n in self.point)
            if o.width != d.width or t.width != 1:
                raise BuildError("Point inputs need equal o and d widths and a scalar t.")
        for f in self.features:
            if f.L < 0:
                raise BuildError("Encoding frequencies must be >= 0, got {}.".format(f.L))
            self.source_width(f.source)
        if self.output_activation is not None:
            if self.var is not None:
                raise BuildError("Output activations are only allowed for plain networks.")
            make_nonlinearity(self.output_activation)
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def init_params(spec, seed, params=None):
    """Initialize the layers of *spec* deterministically from *seed*.

    Sine networks follow the SIREN scheme: first-layer weights are uniform
    in ``[-1/fan_in, 1/fan_in]`` and deeper ones in
    ``[-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0]``. Other networks use
    uniform ``[-sqrt(6/fan_in), sqrt(6/fan_in)]``. Biases are uniform in
    ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``.

    :param spec: :class:`MLPSpec`
    :param int seed: run seed
    :param params:
        Optional :class:`~autoint.core.params.ParamStore` to add the layers
        to. A new float64 store is created if ``None``.
    :returns: the parameter store
    """
    spec.validate()
    if params is None:
        params = ParamStore()
    rng = substream(seed, 'init/{}'.format(spec.name))
    scheme = spec.init
    if scheme == 'auto':
        scheme = 'siren' if spec.nl == 'sine' else 'uniform'
    for k, (fan_out, fan_in) in enumerate(spec.layer_shapes):
        if scheme == 'siren':
            bound = 1.0 / fan_in if k == 0 else np.sqrt(6.0 / fan_in) / spec.omega0
        else:
            bound = np.sqrt(6.0 / fan_in)
        W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-1.0, 1.0, size=fan_out) / np.sqrt(fan_in)
        params.add_layer(spec.layer_name(k), W, b)
    logger.debug("Initialized %d layers of '%s' (%s).", spec.depth + 1, spec.name, scheme)
    return params


def build_integral_network(spec, params, name=None):
    """Build the computational graph of the network described by *spec*.

    :param spec: :class:`MLPSpec`
    :param params: :class:`~autoint.core.params.ParamStore` holding its layers
    :param str name: graph name, defaults to ``spec.name``
    :returns: :class:`~autoint.core.graph.ComputeGraph` with one output
    :raises BuildError:
        if the specification is invalid or the stored layers do not chain
    """
    spec.validate()
    for layer, shape in zip(spec.layer_names, spec.layer_shapes):
        if not params.has_layer(layer):
            raise BuildError("Parameter store has no layer '{}'.".format(layer))
        if params.layer_shape(layer) != shape:
            raise BuildError("Layer '{}' has shape {}, network needs {}."
                             .format(layer, params.layer_shape(layer), shape))

    g = ComputeGraph(name or spec.name)
    nodes = {}
    for inp in spec.inputs:
        if inp.var:
            nodes[inp.name] = g.input_var(inp.name)
        else:
            nodes[inp.name] = g.input_const(inp.name, inp.width)
    if spec.point is not None:
        o, t, d = (nodes[n] for n in spec.point)
        nodes['x'] = g.affine_point(o, t, d)

    feats = []
    for f in spec.features:
        src = nodes[f.source]
        feats.append(g.encode(src, Encoding(f.L, spec.normalized)) if f.L else src)
    h = g.concat(*feats)

    nl = spec.nonlinearity
    for k, width in enumerate(spec.hidden):
        h = g.pointwise(g.affine(h, spec.layer_name(k), width), nl)
    out = g.affine(h, spec.layer_name(spec.depth), spec.out_width, bias=spec.final_bias)
    if spec.output_activation is not None:
        out = g.pointwise(out, make_nonlinearity(spec.output_activation))
    g.set_outputs([out])
    return g
