"""
.. py:module:: inpaint
    :platform: Unix

Sparse-view sinogram inpainting. A grad network over ``(rho, alpha, t)``
is trained so that Monte-Carlo averages along supervised rays match the
measurements:

.. math::

    \\hat s(\\rho, \\alpha) = \\frac{t_f - t_n}{T} \\sum_{j=1}^{T} \\Psi(\\rho, \\alpha, t_j),
    \\qquad t_j \\sim U[t_n, t_f].

The full sinogram is then read off the integral network with two
evaluations per ray, :math:`s = \\Phi(\\rho, \\alpha, t_f) - \\Phi(\\rho, \\alpha, t_n)`.
"""
import logging

import numpy as np

from autoint.core.gradnet import AutoIntPair, IntegralBounds, definite_integral
from autoint.core.graph import record_tape
from autoint.domains.ct.phantom import T_NEAR, T_FAR
from autoint.domains.ct.sinogram import Sinogram, detector_grid, angle_grid, sample_rays, \
    subsample_angles
from autoint.math import psnr
from autoint.nets import MLPSpec, InputBlock, FeatureBlock, init_params
from autoint.train import Trainer, TrainConfig, backward, mse_loss

__all__ = ['ct_spec', 'mc_estimate', 'train_ct', 'inpaint_sinogram', 'masked_psnr',
           'nonlinearity_sweep']

logger = logging.getLogger(__name__)


def ct_spec(nl='swish', hidden=(128, 128, 128, 128), L=(4, 4, 8), normalized=True, name='ct'):
    """Network over ``(rho, alpha, t)`` integrated along ``t``.

    :param tuple L: encoding frequencies for ``rho``, ``alpha`` and ``t``
    """
    return MLPSpec(name=name,
                   inputs=[InputBlock('rho'), InputBlock('alpha'), InputBlock('t', 1, True)],
                   features=[FeatureBlock('rho', L[0]), FeatureBlock('alpha', L[1]),
                             FeatureBlock('t', L[2])],
                   hidden=list(hidden), nl=nl, normalized=normalized)


def _mc_inputs(rho, alpha, t):
    T = t.shape[1]
    return {'rho': np.repeat(rho, T)[:, None], 'alpha': np.repeat(alpha, T)[:, None],
            't': t.reshape(-1, 1)}


def mc_estimate(pair, rho, alpha, T, rng, t_near=T_NEAR, t_far=T_FAR):
    """Monte-Carlo line integral estimates of the grad network.

    :returns: array ``(len(rho),)``
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), rho.shape)
    t = rng.uniform(t_near, t_far, size=(rho.size, T))
    psi = pair.grad_values(_mc_inputs(rho, alpha, t)).reshape(rho.size, T)
    return (t_far - t_near) / T * psi.sum(axis=1)


def train_ct(sino, spec, cfg, T=64, log_folder=None, on_checkpoint=None):
    """Train a grad network on the supervised columns of *sino*.

    :param sino: :class:`~autoint.domains.ct.sinogram.Sinogram`
    :param spec: :class:`~autoint.nets.MLPSpec`, see :func:`ct_spec`
    :param cfg: :class:`~autoint.train.TrainConfig`
    :param int T: Monte-Carlo samples per ray
    :returns: ``(pair, log)``
    """
    params = init_params(spec, cfg.seed)
    pair = AutoIntPair.from_spec(spec, params)
    scale = (T_FAR - T_NEAR) / T

    def sampler(rng):
        rho, alpha, s = sample_rays(sino, cfg.batch_size, rng)
        t = rng.uniform(T_NEAR, T_FAR, size=(cfg.batch_size, T))
        return _mc_inputs(rho, alpha, t), s

    def step_fn(batch):
        inputs, s = batch
        tape = record_tape(pair.grad, inputs, params, reuse=pair.reuse)
        psi = tape.outputs[0].reshape(-1, T)
        loss, cot = mse_loss(scale * psi.sum(axis=1), s)
        upstream = np.repeat(scale * cot, T)[:, None]
        return loss, backward(pair.grad, tape, upstream)

    trainer = Trainer(params, cfg, name=spec.name, log_folder=log_folder)
    log = trainer.fit(step_fn, sampler, on_checkpoint=on_checkpoint)
    return pair, log


def inpaint_sinogram(pair, R, A):
    """Evaluate the full ``R x A`` sinogram with two integral-network
    evaluations per ray.

    :returns: fully supervised :class:`~autoint.domains.ct.sinogram.Sinogram`
    """
    rho, alpha = detector_grid(R), angle_grid(A)
    P, Q = np.meshgrid(rho, alpha, indexing='ij')
    bounds = IntegralBounds(fixed={'rho': P.reshape(-1, 1), 'alpha': Q.reshape(-1, 1)},
                            a=T_NEAR, b=T_FAR)
    values = definite_integral(pair, bounds)
    return Sinogram(values.reshape(R, A), rho, alpha)


def masked_psnr(truth, estimate, columns=None):
    """PSNR over the given columns (all by default), peak is the maximum of
    the true values in them."""
    t = truth.values if isinstance(truth, Sinogram) else np.asarray(truth)
    e = estimate.values if isinstance(estimate, Sinogram) else np.asarray(estimate)
    if columns is not None:
        t, e = t[:, columns], e[:, columns]
    return psnr(t, e, peak=float(np.max(t)) if t.size and np.max(t) > 0 else 1.0)


def nonlinearity_sweep(sino, factor, nls, cfg, T=64, hidden=(64, 64), L=(4, 4, 8), seeds=(0,)):
    """Train one network per nonlinearity and seed on *sino* subsampled by
    *factor* and measure the inpainting quality.

    :returns: list of row dicts with ``nl``, ``seed``, ``factor``,
        ``psnr_masked``, ``psnr_supervised`` and ``final_loss``
    """
    sub = subsample_angles(sino, factor)
    rows = []
    for nl in nls:
        for seed in seeds:
            run_cfg = TrainConfig(**dict(cfg.__dict__, seed=seed))
            pair, log = train_ct(sub, ct_spec(nl, hidden, L, name='ct_{}'.format(nl)), run_cfg, T)
            est = inpaint_sinogram(pair, sino.R, sino.A)
            masked = sub.masked_columns
            rows.append({
                'nl': nl, 'seed': seed, 'factor': factor,
                'psnr_masked': masked_psnr(sino, est, masked) if len(masked) else float('nan'),
                'psnr_supervised': masked_psnr(sino, est, sub.supervised_columns),
                'final_loss': log.final_loss,
            })
            logger.info("CT sweep %s seed %d factor %d: masked PSNR %.2f dB.", nl, seed, factor,
                        rows[-1]['psnr_masked'])
    return rows
