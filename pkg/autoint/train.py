"""
.. py:module:: train
    :platform: Unix

Training of grad networks: reverse-mode backpropagation over recorded
tapes, the mean squared error loss, the Adam optimizer with a step decay
learning rate schedule and a generic training loop.

Grad networks contain first derivatives of the nonlinearities, so
backpropagating through them needs the second derivatives as well.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from autoint.core.graph import NodeKind, affine_weight, record_tape, untile, tile_to
from autoint.core.params import weight_id, bias_id
from autoint.errors import ConfigError, DerivativeError, NumericalAbort
from autoint.logging import ObjectLogger, log_after
from autoint.util import substream

__all__ = ['TrainConfig', 'GradientSet', 'AdamState', 'TrainingLog', 'Trainer',
           'backward', 'mse_loss', 'adam_step', 'learning_rate', 'fit_grad_network']

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Optimization settings.

    :ivar float learning_rate: initial Adam step size
    :ivar float decay_factor: learning rate multiplier applied every *decay_every* iterations
    :ivar int decay_every: iterations between learning rate decays
    :ivar int max_iters: number of iterations
    :ivar int batch_size: rays or points per iteration
    :ivar int seed: run seed, the batching substream is derived from it
    :ivar int checkpoint_every: iterations between checkpoints, 0 disables them
    """
    learning_rate: float = 5e-4
    decay_factor: float = 0.2
    decay_every: int = 100000
    max_iters: int = 1000
    batch_size: int = 1024
    seed: int = 0
    checkpoint_every: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive, got {}.".format(self.learning_rate))
        if not 0 < self.decay_factor <= 1:
            raise ConfigError("decay_factor must be in (0, 1], got {}.".format(self.decay_factor))
        if self.decay_every < 1 or self.max_iters < 0 or self.batch_size < 1:
            raise ConfigError("decay_every and batch_size must be positive and max_iters "
                              "non-negative.")


def learning_rate(cfg, iteration):
    """Learning rate at *iteration* (0-based) under step decay."""
    return cfg.learning_rate * cfg.decay_factor ** (iteration // cfg.decay_every)


class GradientSet(OrderedDict):
    """Gradients keyed by parameter id.

    :attr:`inputs` holds the cotangents of the graph inputs after
    :func:`backward`.
    """
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.inputs = {}

    @classmethod
    def zeros(cls, params):
        return cls(params.zeros())

    def max_abs(self):
        """Largest absolute entry, NaN if any entry is NaN."""
        peaks = [np.max(np.abs(g)) for g in self.values() if np.size(g)]
        return float(np.max(peaks)) if peaks else 0.0


def backward(graph, tape, upstream):
    """Backpropagate *upstream* through a recorded evaluation of *graph*.

    :param graph: :class:`~autoint.core.graph.ComputeGraph`
    :param tape: :class:`~autoint.core.graph.Tape` from :func:`record_tape`
    :param upstream:
        Cotangent of the output, or a list of cotangents, one per output.
    :returns:
        :class:`GradientSet` with the gradient of
        ``sum(outputs * upstream)`` for every parameter of the tape's store.
        Cotangents of the inputs are in its :attr:`~GradientSet.inputs`.
    """
    params = tape.params
    grads = GradientSet.zeros(params)
    if not isinstance(upstream, (list, tuple)):
        upstream = [upstream]
    if len(upstream) != len(graph.outputs):
        raise ValueError("Graph has {} outputs, got {} cotangents."
                         .format(len(graph.outputs), len(upstream)))
    adj = {}
    for out, u in zip(graph.outputs, upstream):
        u = np.broadcast_to(np.asarray(u, dtype=params.dtype), (tape.batch, graph.width(out)))
        _acc(adj, out, u)

    for nid in reversed(tape.order):
        g = adj.pop(nid, None)
        if g is None:
            continue
        node = graph.node(nid)
        if node.kind in (NodeKind.INPUT_VAR, NodeKind.INPUT_CONST):
            name = node.attrs['name']
            prev = grads.inputs.get(name)
            grads.inputs[name] = g if prev is None else prev + g
            continue
        for i, gi in _vjp(node, graph, tape, g, grads):
            _acc(adj, i, gi)
    return grads


def _acc(adj, nid, g):
    adj[nid] = g if nid not in adj else adj[nid] + g


def _vjp(node, graph, tape, g, grads):
    kind = node.kind
    xs = [tape.value(i) for i in node.inputs]
    if kind == NodeKind.SEED:
        return []
    if kind == NodeKind.AFFINE:
        W = affine_weight(node, tape.params)
        dW = g.T @ xs[0]
        cols = node.attrs['cols']
        wid = weight_id(node.param_ref)
        if cols is None:
            grads[wid] += dW
        else:
            grads[wid][:, cols[0]:cols[1]] += dW
        if node.attrs['bias']:
            grads[bias_id(node.param_ref)] += g.sum(axis=0)
        return [(node.inputs[0], g @ W)]
    if kind == NodeKind.POINTWISE:
        order = node.attrs['order']
        if order >= 2:
            raise DerivativeError("Cannot backpropagate through Pointwise node {} of order 2."
                                  .format(node.id))
        return [(node.inputs[0], g * node.attrs['nl'].eval(xs[0], order + 1))]
    if kind == NodeKind.HADAMARD:
        tiled = [tile_to(x, node.width) for x in xs]
        out = []
        for j, i in enumerate(node.inputs):
            gj = g
            for k, t in enumerate(tiled):
                if k != j:
                    gj = gj * t
            out.append((i, untile(gj, graph.width(i))))
        return out
    if kind == NodeKind.SUM:
        return [(i, untile(g, graph.width(i))) for i in node.inputs]
    if kind == NodeKind.SCALE_CONST:
        return [(node.inputs[0], untile(g * node.attrs['value'], graph.width(node.inputs[0])))]
    if kind == NodeKind.ENCODE:
        enc = node.attrs['encoding']
        x = xs[0]
        return [(node.inputs[0], untile(g * enc.eval(x, node.attrs['order'] + 1), x.shape[1]))]
    if kind == NodeKind.CONCAT:
        out, off = [], 0
        for i in node.inputs:
            w = graph.width(i)
            out.append((i, g[:, off:off + w]))
            off += w
        return out
    if kind == NodeKind.AFFINE_POINT:
        o, t, d = node.inputs
        _, tv, dv = xs
        return [(o, g), (t, np.sum(g * dv, axis=1, keepdims=True)), (d, g * tv)]
    raise ValueError("Unknown node kind {}.".format(kind))


def mse_loss(pred, target):
    """Mean squared error and its derivative with respect to *pred*.

    :returns: ``(loss, cotangent)``
    :raises ValueError: if the shapes differ
    """
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError("Prediction shape {} does not match target shape {}."
                         .format(pred.shape, target.shape))
    diff = pred - target
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


@dataclass
class AdamState:
    """Moment estimates of the Adam optimizer for one parameter store."""
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params, grads, state, lr):
    """Apply one bias-corrected Adam update in place.

    :param params: :class:`~autoint.core.params.ParamStore`
    :param grads: :class:`GradientSet` (ids missing from it are treated as zero)
    :param state: :class:`AdamState`, updated in place
    :param float lr: step size
    :raises ValueError: if a gradient does not match its parameter's shape
    """
    state.step += 1
    c1 = 1.0 - state.beta1 ** state.step
    c2 = 1.0 - state.beta2 ** state.step
    for pid, p in params.items():
        g = grads.get(pid)
        if g is None:
            g = np.zeros_like(p)
        elif np.shape(g) != p.shape:
            raise ValueError("Gradient of '{}' has shape {}, parameter has {}."
                             .format(pid, np.shape(g), p.shape))
        m = state.m.get(pid, 0.0) * state.beta1 + (1.0 - state.beta1) * g
        v = state.v.get(pid, 0.0) * state.beta2 + (1.0 - state.beta2) * g * g
        state.m[pid] = m
        state.v[pid] = v
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass
class TrainingLog:
    """Per-iteration loss history."""
    iterations: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    lrs: list = field(default_factory=list)

    def append(self, iteration, loss, lr):
        self.iterations.append(iteration)
        self.losses.append(loss)
        self.lrs.append(lr)

    @property
    def final_loss(self):
        return self.losses[-1] if self.losses else float('nan')

    def __len__(self):
        return len(self.losses)


class Trainer:
    """Training loop over one or more parameter stores.

    Each iteration draws a batch, asks *step_fn* for the loss and the
    gradients of every store and applies Adam. Progress ``(iteration, loss,
    lr)`` is written to ``progress.csv`` in *log_folder* by an
    :class:`~autoint.logging.ObjectLogger`.

    :param stores: :class:`~autoint.core.params.ParamStore` or a dict of them
    :param cfg: :class:`TrainConfig`
    :param str name: name used for logging
    :param str log_folder: folder for the training log, ``None`` disables it
    """
    def __init__(self, stores, cfg, name='trainer', log_folder=None):
        if not isinstance(stores, dict):
            stores = {'params': stores}
        self.name = name
        self.stores = stores
        self.cfg = cfg
        self.states = {k: AdamState() for k in stores}
        self.history = TrainingLog()
        self.progress = None
        self.logger = ObjectLogger(self, log_folder, headers={'progress': ('iteration', 'loss', 'lr')})

    def fit(self, step_fn, sampler, on_checkpoint=None):
        """Run ``cfg.max_iters`` iterations.

        :param step_fn:
            Callable mapping a batch to ``(loss, grads)`` where *grads* is a
            :class:`GradientSet` or a dict of them keyed like the stores.
        :param sampler:
            Callable taking a :class:`numpy.random.Generator` (the
            ``'batching'`` substream) and returning a batch.
        :param on_checkpoint:
            Optional callable ``(trainer, iteration)`` called every
            ``cfg.checkpoint_every`` iterations.
        :returns: :class:`TrainingLog`
        :raises NumericalAbort: on a non-finite loss
        """
        rng = substream(self.cfg.seed, 'batching')
        for it in range(self.cfg.max_iters):
            loss, grads = step_fn(sampler(rng))
            self.step(it, loss, grads)
            if on_checkpoint is not None and self.cfg.checkpoint_every \
                    and (it + 1) % self.cfg.checkpoint_every == 0:
                on_checkpoint(self, it + 1)
        logger.info("%s: %d iterations, final loss %.6g.", self.name, len(self.history),
                    self.history.final_loss)
        return self.history

    @log_after('progress')
    def step(self, iteration, loss, grads):
        lr = learning_rate(self.cfg, iteration)
        if not np.isfinite(loss):
            raise NumericalAbort(iteration, lr, loss)
        if isinstance(grads, GradientSet) and len(self.stores) == 1:
            grads = {next(iter(self.stores)): grads}
        for name, store in self.stores.items():
            g = grads.get(name, GradientSet())
            peak = g.max_abs() if isinstance(g, GradientSet) else 0.0
            if not np.isfinite(peak):
                raise NumericalAbort(iteration, lr, loss, quantity='gradient')
            logger.debug("%s: iteration %d, max |grad| of '%s' %.3g.", self.name, iteration, name, peak)
            adam_step(store, g, self.states[name], lr)
        self.progress = (iteration, float(loss), lr)
        self.history.append(iteration, float(loss), lr)


def fit_grad_network(pair, sampler, cfg, log_folder=None, on_checkpoint=None):
    """Fit the grad network of *pair* to target values with the MSE loss.

    :param pair: :class:`~autoint.core.gradnet.AutoIntPair`
    :param sampler:
        Callable taking a random generator and returning ``(inputs, targets)``
        for the grad network.
    :param cfg: :class:`TrainConfig`
    :returns: :class:`TrainingLog`
    """
    def step_fn(batch):
        inputs, targets = batch
        tape = record_tape(pair.grad, inputs, pair.params, reuse=pair.reuse)
        pred = tape.outputs[0]
        loss, cot = mse_loss(pred, np.asarray(targets, dtype=float).reshape(pred.shape))
        return loss, backward(pair.grad, tape, cot)

    trainer = Trainer(pair.params, cfg, name=pair.name, log_folder=log_folder)
    return trainer.fit(step_fn, sampler, on_checkpoint=on_checkpoint)
