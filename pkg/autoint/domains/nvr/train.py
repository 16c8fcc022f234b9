"""
.. py:module:: train
    :platform: Unix

Joint training of the density and color grad networks and the sampling
network on images of an analytic scene. Gradients flow through the
compositing rule, the stratified sample positions and the interval lengths
into the sampling network.
"""
import logging
import os

import numpy as np
from scipy.special import expit

from autoint.core.gradnet import AutoIntPair
from autoint.domains.nvr.render import (RadianceModel, max_composite, max_composite_backward,
                                        network_mc_forward, reference_image, render_image)
from autoint.domains.nvr.sampling import SamplingNet, stratified_backward, uniform_intervals
from autoint.math import psnr
from autoint.nets import MLPSpec, InputBlock, FeatureBlock, init_params
from autoint.serializers import save_checkpoint, load_checkpoint
from autoint.train import Trainer, backward, mse_loss

__all__ = ['nvr_specs', 'make_model', 'make_dataset', 'train_nvr', 'evaluate_psnr',
           'save_model', 'load_model']

logger = logging.getLogger(__name__)

_RAY_INPUTS = [InputBlock('o', 3), InputBlock('t', 1, True), InputBlock('d', 3)]


def nvr_specs(hidden_sigma=(256,) * 8, hidden_color=(256,) * 8, L_x=10, L_d=4, nl='swish'):
    """Density and color network specifications over ``(o, t, d)``.

    The density network sees the encoded point ``x = o + t d`` only, the
    color network the encoded point together with the encoded direction.
    """
    sigma = MLPSpec(name='sigma', inputs=list(_RAY_INPUTS), point=('o', 't', 'd'),
                    features=[FeatureBlock('x', L_x)], hidden=list(hidden_sigma), nl=nl,
                    out_width=1, normalized=True)
    color = MLPSpec(name='color', inputs=list(_RAY_INPUTS), point=('o', 't', 'd'),
                    features=[FeatureBlock('x', L_x), FeatureBlock('d', L_d)],
                    hidden=list(hidden_color), nl=nl, out_width=3, normalized=True)
    return sigma, color


def make_model(specs, render_cfg, seed, sampler_hidden=(64, 64)):
    """Initialize a :class:`~autoint.domains.nvr.render.RadianceModel`."""
    spec_s, spec_c = specs
    sigma = AutoIntPair.from_spec(spec_s, init_params(spec_s, seed))
    color = AutoIntPair.from_spec(spec_c, init_params(spec_c, seed))
    sampler = None
    if render_cfg.use_sampler:
        sampler = SamplingNet(render_cfg.N, hidden=sampler_hidden, seed=seed)
    return RadianceModel(sigma, color, sampler, render_cfg)


def make_dataset(scene, cameras, render_cfg, tol=1e-6, threads=1):
    """Reference images of *scene* from *cameras*.

    :returns: ``(origins, directions, colors)`` of all pixels stacked
    """
    os_, ds, cs = [], [], []
    for cam in cameras:
        img = reference_image(scene, cam, render_cfg.t_n, render_cfg.t_f, tol, threads)
        o, d = cam.rays()
        os_.append(o)
        ds.append(d)
        cs.append(img.pixels.reshape(-1, 3))
    return np.concatenate(os_), np.concatenate(ds), np.concatenate(cs)


def loss_and_grads(model, o, d, target, u):
    """Rendering loss of a ray batch and the gradients of every network.

    :param u: uniform draws ``(R, N, M)`` for the stratified positions
    :returns: ``(loss, grads)`` with grads keyed ``'sigma'``, ``'color'``
        and ``'sampler'``
    """
    cfg = model.cfg
    R, N, M = u.shape
    use_sampler = model.sampler is not None and cfg.use_sampler
    if use_sampler:
        delta, s_cache = model.sampler.forward(o, d, cfg.t_n, cfg.t_f)
    else:
        delta = uniform_intervals(R, N, cfg.t_n, cfg.t_f)
    sigma, color, cache = network_mc_forward(model, o, d, delta, u, record=True)
    rgb, _ = max_composite(sigma, color, delta)
    loss, g_rgb = mse_loss(rgb, target)

    g_sigma, g_color, g_delta = max_composite_backward(sigma, color, delta, g_rgb)
    g_ms = g_sigma * expit(cache['m_s'])
    sc = expit(cache['m_c'])
    g_mc = g_color * sc * (1.0 - sc)
    up_s = np.repeat(g_ms[:, :, None] / M, M, axis=2).reshape(-1, 1)
    up_c = np.repeat(g_mc[:, :, None, :] / M, M, axis=2).reshape(-1, 3)
    grads_s = backward(model.sigma.grad, cache['tape_s'], up_s)
    grads_c = backward(model.color.grad, cache['tape_c'], up_c)
    grads = {'sigma': grads_s, 'color': grads_c}
    if use_sampler:
        g_t = np.zeros((R * N * M, 1))
        for g in (grads_s, grads_c):
            g_t = g_t + g.inputs.get('t', 0.0)
        g_t = g_t.reshape(R, N * M)
        g_delta = g_delta + stratified_backward(g_t, u)
        grads['sampler'] = model.sampler.backward(s_cache, g_delta)
    return loss, grads


def train_nvr(model, dataset, cfg, log_folder=None, on_checkpoint=None):
    """Fit *model* to the pixels of *dataset*.

    :param model: :class:`~autoint.domains.nvr.render.RadianceModel`
    :param dataset: ``(origins, directions, colors)`` from :func:`make_dataset`
    :param cfg: :class:`~autoint.train.TrainConfig`, ``batch_size`` counts rays
    :returns: :class:`~autoint.train.TrainingLog`
    """
    o_all, d_all, c_all = dataset
    rcfg = model.cfg
    stores = {'sigma': model.sigma.params, 'color': model.color.params}
    if model.sampler is not None and rcfg.use_sampler:
        stores['sampler'] = model.sampler.params

    def sampler(rng):
        idx = rng.integers(0, len(o_all), size=cfg.batch_size)
        u = rng.uniform(size=(cfg.batch_size, rcfg.N, rcfg.M))
        return o_all[idx], d_all[idx], c_all[idx], u

    def step_fn(batch):
        return loss_and_grads(model, *batch)

    trainer = Trainer(stores, cfg, name='nvr', log_folder=log_folder)
    return trainer.fit(step_fn, sampler, on_checkpoint=on_checkpoint)


def evaluate_psnr(model, scene, cameras, tol=1e-6, threads=1):
    """Mean PSNR of AutoInt renderings against reference images.

    :returns: ``(mean_psnr, per_image_psnrs, images)``
    """
    values, images = [], []
    for cam in cameras:
        ref = reference_image(scene, cam, model.cfg.t_n, model.cfg.t_f, tol, threads)
        img, _ = render_image(model, cam)
        values.append(psnr(ref.pixels, img.clamped()))
        images.append(img)
    return float(np.mean(values)), values, images


def save_model(model, folder, seed):
    """Write one checkpoint per network into *folder*."""
    save_checkpoint(os.path.join(folder, 'sigma.json'), model.sigma.spec, model.sigma.params, seed)
    save_checkpoint(os.path.join(folder, 'color.json'), model.color.spec, model.color.params, seed)
    if model.sampler is not None:
        save_checkpoint(os.path.join(folder, 'sampler.json'), model.sampler.spec,
                        model.sampler.params, seed, extra={'floor': model.sampler.floor})


def load_model(folder, render_cfg):
    """Read a model written by :func:`save_model`.

    :raises MissingArtifactError: if a checkpoint is missing
    """
    spec_s, params_s, _, _ = load_checkpoint(os.path.join(folder, 'sigma.json'))
    spec_c, params_c, _, _ = load_checkpoint(os.path.join(folder, 'color.json'))
    sampler = None
    if render_cfg.use_sampler:
        spec_p, params_p, _, extra = load_checkpoint(os.path.join(folder, 'sampler.json'))
        sampler = SamplingNet.from_spec(spec_p, params_p, floor=extra.get('floor', 1e-4))
    return RadianceModel(AutoIntPair.from_spec(spec_s, params_s),
                         AutoIntPair.from_spec(spec_c, params_c), sampler, render_cfg)
