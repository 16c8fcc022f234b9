"""
.. py:module:: graph
    :platform: Unix

Explicit computational graphs. A :class:`ComputeGraph` is a directed acyclic
graph of layer-level operations (affine maps, pointwise nonlinearities,
encodings, ...) whose parameters live in a shared
:class:`~autoint.core.params.ParamStore`. The same machinery holds integral
networks, their grad networks and plain MLPs such as the sampling network.

Graphs are evaluated in batches: every input is an array of shape
``(batch, width)`` and every node produces an array of the same leading
dimension.

Dependencies are kept in a :class:`networkx.DiGraph` whose edges point
from a dependency to the node using it, so that networkx' topological sorts
put leaves first.
"""
import enum
import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from autoint.errors import InputArityError, ParameterError

__all__ = ['NodeKind', 'Node', 'ComputeGraph', 'EvalReport', 'Tape',
           'topo_order', 'lex_topo_order', 'evaluate', 'record_tape']

logger = logging.getLogger(__name__)


class NodeKind(enum.Enum):
    """Kinds of computation nodes."""
    INPUT_VAR = 'InputVar'
    INPUT_CONST = 'InputConst'
    SEED = 'Seed'
    AFFINE = 'Affine'
    POINTWISE = 'Pointwise'
    HADAMARD = 'Hadamard'
    SUM = 'Sum'
    SCALE_CONST = 'ScaleConst'
    ENCODE = 'Encode'
    CONCAT = 'Concat'
    AFFINE_POINT = 'AffinePoint'

    def __str__(self):
        return self.value


#: Kinds without inputs.
LEAF_KINDS = (NodeKind.INPUT_VAR, NodeKind.INPUT_CONST, NodeKind.SEED)


@dataclass(frozen=True)
class Node:
    """A single operation in a :class:`ComputeGraph`.

    :ivar int id: identifier, unique and stable within the graph
    :ivar NodeKind kind: operation
    :ivar tuple inputs: ids of the nodes this node depends on
    :ivar int width: number of output features
    :ivar param_ref: layer name in the parameter store (Affine only)
    :ivar dict attrs: kind specific attributes
    :ivar int creation_index: position in construction order
    :ivar int key: structural key; nodes computing the same value share it
    :ivar dict tags: free-form annotations that do not affect the value
    """
    id: int
    kind: NodeKind
    inputs: tuple
    width: int
    param_ref: object = None
    attrs: dict = field(default_factory=dict)
    creation_index: int = 0
    key: int = 0
    tags: dict = field(default_factory=dict, compare=False)

    @property
    def label(self):
        """Short human readable description used in graph dumps."""
        if self.kind in (NodeKind.INPUT_VAR, NodeKind.INPUT_CONST):
            return "{}({})".format(self.kind, self.attrs['name'])
        if self.kind == NodeKind.AFFINE:
            extra = '' if self.attrs['bias'] else ', no bias'
            if self.attrs['cols'] is not None:
                extra += ', cols {}:{}'.format(*self.attrs['cols'])
            return "Affine({}{})".format(self.param_ref, extra)
        if self.kind == NodeKind.POINTWISE:
            return "Pointwise({}, order {})".format(self.attrs['nl'], self.attrs['order'])
        if self.kind == NodeKind.ENCODE:
            return "Encode({}, order {})".format(self.attrs['encoding'], self.attrs['order'])
        return str(self.kind)


@dataclass
class EvalReport:
    """Outcome of :func:`evaluate`.

    :ivar list outputs: one array ``(batch, width)`` per graph output
    :ivar int unique_node_evals: node computations actually performed
    :ivar int total_node_refs: nodes in the evaluation schedule
    :ivar int n_points: batch size, i.e. number of input points
    """
    outputs: list
    unique_node_evals: int
    total_node_refs: int
    n_points: int

    @property
    def output(self):
        """The first (usually only) output."""
        return self.outputs[0]


class Tape:
    """Forward values of one evaluation, kept for the backward pass.

    Values are stored once per structural key, so the memory held is
    proportional to the number of unique nodes and not to the number of
    node references.
    """
    def __init__(self, graph, order, keys, values, batch, params):
        self.graph = graph
        self.order = order
        self._keys = keys
        self._values = values
        self.batch = batch
        self.params = params

    def __len__(self):
        return len(self._values)

    def __contains__(self, node_id):
        return node_id in self._keys and self._keys[node_id] in self._values

    def value(self, node_id):
        """Forward value of a node.

        :raises KeyError: if the node was not recorded
        """
        return self._values[self._keys[node_id]]

    @property
    def outputs(self):
        """Output values in the order of :attr:`ComputeGraph.outputs`."""
        return [self.value(o) for o in self.graph.outputs]


class ComputeGraph:
    """Directed acyclic graph of computation nodes.

    Nodes are appended through the builder methods (:meth:`input_var`,
    :meth:`affine`, :meth:`pointwise`, ...). A node can only reference nodes
    created before it, which makes cycles impossible by construction.

    .. code-block:: python

        g = ComputeGraph('phi')
        x = g.input_var('x')
        h = g.pointwise(g.affine(x, 'layer0', 16), swish)
        g.set_outputs([g.affine(h, 'layer1', 1)])
    """
    def __init__(self, name='graph'):
        self.name = name
        self._nodes = OrderedDict()
        self._outputs = []
        self._inputs = OrderedDict()
        self._key_ids = {}
        self._seed = None
        self._nx = None

    # Construction -----------------------------------------------------

    def _add(self, kind, inputs, width, param_ref=None, attrs=None, tags=None):
        inputs = tuple(int(i) for i in inputs)
        for i in inputs:
            if i not in self._nodes:
                raise ValueError("Node {} does not exist in graph '{}'."
                                 .format(i, self.name))
        attrs = dict(attrs or {})
        skey = (kind, param_ref, _freeze(attrs), tuple(self._nodes[i].key for i in inputs))
        key = self._key_ids.setdefault(skey, len(self._key_ids))
        nid = len(self._nodes) and max(self._nodes) + 1
        node = Node(id=nid, kind=kind, inputs=inputs, width=int(width), param_ref=param_ref,
                    attrs=attrs, creation_index=nid, key=key, tags=dict(tags or {}))
        self._nodes[nid] = node
        self._nx = None
        return nid

    def input_var(self, name):
        """Add the scalar variable of integration."""
        return self._add_input(NodeKind.INPUT_VAR, name, 1)

    def input_const(self, name, width):
        """Add a non-integrated input of *width* features."""
        return self._add_input(NodeKind.INPUT_CONST, name, width)

    def _add_input(self, kind, name, width):
        if name in self._inputs:
            raise ValueError("Input '{}' already exists.".format(name))
        if kind == NodeKind.INPUT_VAR and self.var is not None:
            raise ValueError("Graph '{}' already has an InputVar ('{}')."
                             .format(self.name, self.var))
        nid = self._add(kind, (), width, attrs={'name': name})
        self._inputs[name] = nid
        return nid

    def seed(self):
        """The tangent of the InputVar, a column of ones. Created once."""
        if self._seed is None:
            self._seed = self._add(NodeKind.SEED, (), 1)
        return self._seed

    def affine(self, x, param_ref, width, bias=True, cols=None, tags=None):
        """Add ``y = W x + b`` with ``W, b`` of layer *param_ref*.

        :param int width: output width, number of rows of ``W``
        :param bool bias: whether ``b`` is added
        :param tuple cols: optional ``(start, stop)`` slice of the columns of ``W``
        """
        cols = None if cols is None else (int(cols[0]), int(cols[1]))
        return self._add(NodeKind.AFFINE, (x,), width, param_ref=param_ref,
                         attrs={'bias': bool(bias), 'cols': cols}, tags=tags)

    def pointwise(self, x, nl, order=0, tags=None):
        """Add ``NL^(order)(x)`` applied elementwise."""
        if not 0 <= order <= 2:
            raise ValueError("Pointwise order must be in [0, 2], got {}.".format(order))
        return self._add(NodeKind.POINTWISE, (x,), self.width(x),
                         attrs={'nl': nl, 'order': int(order)}, tags=tags)

    def hadamard(self, *xs, tags=None):
        """Add the elementwise product of two or more nodes.

        Operands narrower than the widest one are tiled to its width.
        """
        if len(xs) < 2:
            raise ValueError("Hadamard needs at least two operands.")
        return self._add(NodeKind.HADAMARD, xs, _common_width([self.width(x) for x in xs]),
                         tags=tags)

    def sum(self, *xs, tags=None):
        """Add the elementwise sum of nodes."""
        if len(xs) == 1:
            return xs[0]
        return self._add(NodeKind.SUM, xs, _common_width([self.width(x) for x in xs]),
                         tags=tags)

    def scale(self, x, value, tags=None):
        """Add multiplication by a fixed scalar or vector.

        A vector value wider than *x* broadcasts a width 1 node to its width.
        """
        value = np.asarray(value, dtype=float)
        width = self.width(x)
        if value.ndim:
            if width != 1 and value.size != width:
                raise ValueError("Cannot scale width {} by a vector of size {}."
                                 .format(width, value.size))
            width = value.size
        return self._add(NodeKind.SCALE_CONST, (x,), width,
                         attrs={'value': value}, tags=tags)

    def encode(self, x, encoding, order=0, tags=None):
        """Add positional encoding of every feature of *x*."""
        if order not in (0, 1):
            raise ValueError("Encode order must be 0 or 1, got {}.".format(order))
        return self._add(NodeKind.ENCODE, (x,), encoding.width(self.width(x)),
                         attrs={'encoding': encoding, 'order': int(order)}, tags=tags)

    def concat(self, *xs, tags=None):
        """Add feature-wise concatenation."""
        if len(xs) == 1:
            return xs[0]
        return self._add(NodeKind.CONCAT, xs, sum(self.width(x) for x in xs), tags=tags)

    def affine_point(self, o, t, d, tags=None):
        """Add the ray point ``o + t d``."""
        if self.width(o) != self.width(d) or self.width(t) != 1:
            raise ValueError("AffinePoint needs o and d of equal width and scalar t.")
        return self._add(NodeKind.AFFINE_POINT, (o, t, d), self.width(o), tags=tags)

    def set_outputs(self, outputs):
        """Set the output nodes of the graph."""
        outputs = [int(o) for o in outputs]
        for o in outputs:
            if o not in self._nodes:
                raise ValueError("Output node {} does not exist.".format(o))
        self._outputs = outputs
        self._nx = None

    def prune(self):
        """Drop nodes that no output depends on.

        Inputs are always kept so that the input signature does not change.

        :returns: number of removed nodes
        """
        live = set()
        stack = list(self._outputs)
        while stack:
            nid = stack.pop()
            if nid in live:
                continue
            live.add(nid)
            stack.extend(self._nodes[nid].inputs)
        live.update(self._inputs.values())
        dead = [nid for nid in self._nodes if nid not in live]
        for nid in dead:
            del self._nodes[nid]
        if self._seed is not None and self._seed not in self._nodes:
            self._seed = None
        self._nx = None
        return len(dead)

    # Introspection ----------------------------------------------------

    @property
    def nodes(self):
        """Nodes in creation order."""
        return list(self._nodes.values())

    def node(self, nid):
        """Node with id *nid*."""
        return self._nodes[nid]

    def width(self, nid):
        """Output width of node *nid*."""
        return self._nodes[nid].width

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, nid):
        return nid in self._nodes

    @property
    def outputs(self):
        """Output node ids."""
        return list(self._outputs)

    @property
    def var(self):
        """Name of the InputVar, or ``None``."""
        for name, nid in self._inputs.items():
            if self._nodes[nid].kind == NodeKind.INPUT_VAR:
                return name
        return None

    @property
    def input_signature(self):
        """Ordered mapping from input name to ``(kind, width)``."""
        return OrderedDict((name, (self._nodes[nid].kind, self._nodes[nid].width))
                           for name, nid in self._inputs.items())

    def input_node(self, name):
        """Node id of the input called *name*."""
        return self._inputs[name]

    @property
    def param_refs(self):
        """Set of layer names referenced by Affine nodes."""
        return {n.param_ref for n in self._nodes.values() if n.kind == NodeKind.AFFINE}

    @property
    def nx_graph(self):
        """Dependency structure as :class:`networkx.DiGraph`.

        Edges point from a dependency to its user. Node attributes hold the
        :class:`Node` under ``'node'``.
        """
        if self._nx is None:
            G = nx.DiGraph(name=self.name)
            for n in self._nodes.values():
                G.add_node(n.id, node=n)
            for n in self._nodes.values():
                for i in n.inputs:
                    G.add_edge(i, n.id)
            self._nx = G
        return self._nx

    def dependents_count(self):
        """Number of users of each node, i.e. the in-degree with edges
        pointing towards dependencies."""
        return dict(self.nx_graph.out_degree())

    # Evaluation -------------------------------------------------------

    def topo_order(self):
        """See :func:`topo_order`."""
        return topo_order(self)

    def lex_topo_order(self):
        """See :func:`lex_topo_order`."""
        return lex_topo_order(self)

    def evaluate(self, inputs, params, reuse=True):
        """See :func:`evaluate`."""
        return evaluate(self, inputs, params, reuse)

    def record_tape(self, inputs, params, reuse=True):
        """See :func:`record_tape`."""
        return record_tape(self, inputs, params, reuse)

    def to_dot(self):
        """DOT listing of the graph, see :func:`autoint.nx.to_dot`."""
        from autoint.nx import to_dot
        return to_dot(self)

    def __repr__(self):
        return "ComputeGraph({}, {} nodes, outputs={})".format(self.name, len(self), self._outputs)


def topo_order(graph):
    """Topological order with leaves first.

    Nodes are sorted by depth (longest path from a leaf); nodes of equal
    depth are ordered by descending creation index.

    :param graph: :class:`ComputeGraph`
    :returns: list of node ids
    """
    depth = {}
    for nid in nx.topological_sort(graph.nx_graph):
        node = graph.node(nid)
        depth[nid] = 1 + max((depth[i] for i in node.inputs), default=-1)
    return sorted(depth, key=lambda nid: (depth[nid], -graph.node(nid).creation_index))


def lex_topo_order(graph):
    """Lexicographic-topological order.

    Among the nodes that are ready to be computed, the one created last is
    scheduled first. For a grad network built by
    :func:`~autoint.core.gradnet.derive` this runs each leg to completion,
    deepest leg first, so shorter legs find their prefixes already computed.

    :param graph: :class:`ComputeGraph`
    :returns: list of node ids
    """
    nodes = graph.nx_graph.nodes
    return list(nx.lexicographical_topological_sort(
        graph.nx_graph, key=lambda nid: -nodes[nid]['node'].creation_index))


def evaluate(graph, inputs, params, reuse=True):
    """Evaluate *graph* on a batch of inputs.

    :param graph: :class:`ComputeGraph`
    :param dict inputs:
        Values for every input of the graph's :attr:`~ComputeGraph.input_signature`.
        Arrays of shape ``(batch, width)``; scalar inputs may be 1-D and
        arrays of shape ``(width,)`` are broadcast over the batch.
    :param params: :class:`~autoint.core.params.ParamStore`
    :param bool reuse:
        If ``True``, nodes with the same structural key are computed once.
    :returns: :class:`EvalReport`
    :raises InputArityError: if inputs do not match the signature
    :raises ParameterError: if a parameter reference cannot be resolved
    """
    tape, evals = _forward(graph, inputs, params, reuse)
    return EvalReport(outputs=tape.outputs, unique_node_evals=evals,
                      total_node_refs=len(tape.order), n_points=tape.batch)


def record_tape(graph, inputs, params, reuse=True):
    """Evaluate *graph* and keep every unique node value.

    :returns: :class:`Tape`
    """
    tape, _ = _forward(graph, inputs, params, reuse)
    return tape


def _forward(graph, inputs, params, reuse):
    order = lex_topo_order(graph)
    batch, feed = _bind_inputs(graph, inputs, params.dtype)
    keys = {}
    cache = {}
    values = {}
    evals = 0
    for nid in order:
        node = graph.node(nid)
        keys[nid] = node.key
        if reuse and node.key in cache:
            values[nid] = cache[node.key]
            continue
        value = _apply(node, [values[i] for i in node.inputs], feed, params, batch)
        evals += 1
        values[nid] = value
        if reuse or node.key not in cache:
            cache[node.key] = value
    logger.debug("Evaluated '%s': %d of %d nodes computed for %d points.",
                 graph.name, evals, len(order), batch)
    return Tape(graph, order, keys, cache, batch, params), evals


def _bind_inputs(graph, inputs, dtype):
    sig = graph.input_signature
    missing = [k for k in sig if k not in inputs]
    extra = [k for k in inputs if k not in sig]
    if missing or extra:
        raise InputArityError("Inputs do not match the signature of '{}' {}: missing {}, unexpected {}."
                              .format(graph.name, list(sig), missing, extra))
    arrays = {}
    for name, (_, width) in sig.items():
        a = np.asarray(inputs[name], dtype=dtype)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        elif a.ndim == 1:
            a = a.reshape(-1, 1) if width == 1 else a.reshape(1, -1)
        if a.ndim != 2 or a.shape[1] != width:
            raise InputArityError("Input '{}' must have width {}, got shape {}."
                                  .format(name, width, np.shape(inputs[name])))
        arrays[name] = a
    batch = max([a.shape[0] for a in arrays.values()], default=1)
    for name, a in arrays.items():
        if a.shape[0] not in (1, batch):
            raise InputArityError("Input '{}' has batch size {}, expected {}."
                                  .format(name, a.shape[0], batch))
        arrays[name] = np.broadcast_to(a, (batch, a.shape[1]))
    return batch, arrays


def _apply(node, args, feed, params, batch):
    kind = node.kind
    if kind in (NodeKind.INPUT_VAR, NodeKind.INPUT_CONST):
        return feed[node.attrs['name']]
    if kind == NodeKind.SEED:
        return np.ones((batch, 1), dtype=params.dtype)
    if kind == NodeKind.AFFINE:
        W = affine_weight(node, params)
        x = args[0]
        if W.shape[1] != x.shape[1]:
            raise ParameterError("Layer '{}' expects {} inputs, node {} receives {}."
                                 .format(node.param_ref, W.shape[1], node.id, x.shape[1]))
        y = x @ W.T
        if node.attrs['bias']:
            y = y + params.bias(node.param_ref)
        return y
    if kind == NodeKind.POINTWISE:
        return node.attrs['nl'].eval(args[0], node.attrs['order'])
    if kind == NodeKind.HADAMARD:
        out = tile_to(args[0], node.width)
        for a in args[1:]:
            out = out * tile_to(a, node.width)
        return out
    if kind == NodeKind.SUM:
        out = tile_to(args[0], node.width)
        for a in args[1:]:
            out = out + tile_to(a, node.width)
        return out
    if kind == NodeKind.SCALE_CONST:
        return args[0] * node.attrs['value']
    if kind == NodeKind.ENCODE:
        return node.attrs['encoding'].eval(args[0], node.attrs['order'])
    if kind == NodeKind.CONCAT:
        return np.hstack(args)
    if kind == NodeKind.AFFINE_POINT:
        o, t, d = args
        return o + t * d
    raise ValueError("Unknown node kind {}.".format(kind))


def affine_weight(node, params):
    """Weight matrix (or its column slice) used by an Affine node."""
    W = params.weight(node.param_ref)
    cols = node.attrs['cols']
    if cols is not None:
        W = W[:, cols[0]:cols[1]]
    return W


def tile_to(value, width):
    """Tile the columns of *value* to *width* (a multiple of its width)."""
    w = value.shape[1]
    if w == width:
        return value
    return np.tile(value, (1, width // w))


def untile(grad, width):
    """Adjoint of :func:`tile_to`: sum the tiled copies back to *width*."""
    if grad.shape[1] == width:
        return grad
    return grad.reshape(grad.shape[0], -1, width).sum(axis=1)


def _common_width(widths):
    out = max(widths)
    for w in widths:
        if out % w:
            raise ValueError("Width {} does not tile to width {}.".format(w, out))
    return out


def _freeze(attrs):
    items = []
    for k in sorted(attrs):
        v = attrs[k]
        if isinstance(v, np.ndarray):
            v = ('array', v.shape, v.tobytes())
        items.append((k, v))
    return tuple(items)
