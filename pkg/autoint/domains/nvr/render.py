"""
.. py:module:: render
    :platform: Unix

Volume rendering of rays through a density ``sigma`` and a color ``c``:

.. math::

    C(r) = \\int_{t_n}^{t_f} T(t)\\, \\sigma(r(t))\\, c(r(t), d)\\, dt,
    \\qquad T(t) = \\exp\\left(-\\int_{t_n}^{t} \\sigma(r(s))\\, ds\\right).

The piecewise approximation splits the ray in ``N`` intervals of lengths
``delta_i`` with average density ``sigma_i`` and color ``c_i`` and composites
them with Max' quadrature rule

.. math::

    \\tilde C = \\sum_i \\bar T_i (1 - e^{-\\sigma_i \\delta_i}) c_i,
    \\qquad \\bar T_i = \\exp\\left(-\\sum_{j<i} \\sigma_j \\delta_j\\right).

Interval averages come either from the analytic scene, from Monte-Carlo
samples of the grad networks (training), or from two integral network
evaluations per interval (AutoInt inference). With networks, the averaged
raw outputs are mapped through softplus (density) and sigmoid (color).
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import expit

from autoint import util
from autoint.core.graph import record_tape
from autoint.core.gradnet import eval_antiderivative
from autoint.domains.nvr.sampling import (interval_edges, stratified_positions, stratified_samples,
                                          uniform_intervals)
from autoint.domains.nvr.scene import AnalyticScene
from autoint.errors import OracleError
from autoint.math import softplus
from autoint.quadrature import adaptive_quadrature_vec

__all__ = ['PiecewiseRenderConfig', 'RadianceModel', 'RenderReport', 'Image', 'max_composite',
           'max_composite_backward', 'reference_render', 'reference_image',
           'scene_interval_means', 'network_mc_forward', 'piecewise_render_quadrature',
           'autoint_interval_means', 'autoint_render',
           'render_image']

logger = logging.getLogger(__name__)


@dataclass
class PiecewiseRenderConfig:
    """Piecewise rendering settings.

    :ivar int N: number of intervals per ray
    :ivar int M: Monte-Carlo samples per interval, ``128 // N`` if ``None``
    :ivar float t_n: near bound
    :ivar float t_f: far bound
    :ivar bool use_sampler: predict interval lengths with the sampling network
    """
    N: int = 8
    M: int = None
    t_n: float = 2.5
    t_f: float = 5.5
    use_sampler: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive, got {}.".format(self.N))
        if self.M is None:
            self.M = max(1, 128 // self.N)
        if not self.t_n < self.t_f:
            raise ValueError("Need t_n < t_f, got {} and {}.".format(self.t_n, self.t_f))

    @property
    def length(self):
        return self.t_f - self.t_n


class RadianceModel:
    """Density and color integral/grad network pairs and an optional
    sampling network.

    :param sigma: :class:`~autoint.core.gradnet.AutoIntPair` with scalar output
    :param color: :class:`~autoint.core.gradnet.AutoIntPair` with 3 outputs
    :param sampler: :class:`~autoint.domains.nvr.sampling.SamplingNet` or ``None``
    :param cfg: :class:`PiecewiseRenderConfig`
    """
    def __init__(self, sigma, color, sampler, cfg):
        self.sigma = sigma
        self.color = color
        self.sampler = sampler
        self.cfg = cfg

    def intervals(self, o, d):
        """Interval lengths for rays ``(o, d)``."""
        if self.sampler is None or not self.cfg.use_sampler:
            return uniform_intervals(len(o), self.cfg.N, self.cfg.t_n, self.cfg.t_f)
        return self.sampler.intervals(o, d, self.cfg.t_n, self.cfg.t_f)


@dataclass
class RenderReport:
    """Integral-network evaluation counts of a rendering.

    :ivar int rays: rendered rays
    :ivar int N: intervals per ray
    :ivar int distinct_points: integral evaluations per network (``(N + 1)`` per ray)
    :ivar int interval_evaluations: endpoint references per network (``2N`` per ray)
    """
    rays: int = 0
    N: int = 0
    distinct_points: int = 0
    interval_evaluations: int = 0

    @property
    def networks_total(self):
        """Distinct integral evaluations summed over density and color."""
        return 2 * self.distinct_points

    def add(self, other):
        self.rays += other.rays
        self.N = other.N
        self.distinct_points += other.distinct_points
        self.interval_evaluations += other.interval_evaluations
        return self


@dataclass
class Image:
    """Rendered image ``(height, width, 3)`` and the camera it was seen from."""
    pixels: np.ndarray
    camera: object = None

    def clamped(self):
        return np.clip(self.pixels, 0.0, 1.0)


def max_composite(sigma, color, delta):
    """Composite interval averages.

    :param sigma: ``(R, N)`` non-negative densities
    :param color: ``(R, N, 3)`` colors
    :param delta: ``(R, N)`` interval lengths
    :returns: ``(rgb, weights)`` with ``rgb`` of shape ``(R, 3)``
    """
    x = sigma * delta
    acc = np.cumsum(x, axis=1)
    trans = np.exp(-(acc - x))
    weights = trans * -np.expm1(-x)
    return (weights[:, :, None] * color).sum(axis=1), weights


def max_composite_backward(sigma, color, delta, g_rgb):
    """Cotangents of :func:`max_composite` inputs for the cotangent *g_rgb*.

    :returns: ``(g_sigma, g_color, g_delta)``
    """
    x = sigma * delta
    acc = np.cumsum(x, axis=1)
    weights = np.exp(-(acc - x)) * -np.expm1(-x)
    g_color = weights[:, :, None] * g_rgb[:, None, :]
    g_w = (color * g_rgb[:, None, :]).sum(axis=2)
    gw_w = g_w * weights
    # Weight i falls with every earlier optical depth x_k, k < i.
    later = np.cumsum(gw_w[:, ::-1], axis=1)[:, ::-1]
    after = np.zeros_like(later)
    after[:, :-1] = later[:, 1:]
    g_x = g_w * np.exp(-acc) - after
    return g_x * delta, g_color, g_x * sigma


def reference_render(scene, o, d, t_n, t_f, tol=1e-6):
    """Render one ray through *scene* by integrating the transmittance and
    the color ODE ``tau' = sigma``, ``C' = exp(-tau) sigma c`` adaptively.

    :returns: RGB array ``(3,)``
    :raises OracleError: if the integrator fails
    """
    o = np.asarray(o, dtype=float)
    d = np.asarray(d, dtype=float)

    def rhs(t, y):
        x = (o + t * d)[None, :]
        s = scene.sigma(x)[0]
        c = scene.color(x, d[None, :])[0]
        return np.concatenate(([s], np.exp(-y[0]) * s * c))

    sol = solve_ivp(rhs, (t_n, t_f), np.zeros(4), method='DOP853', rtol=tol, atol=tol,
                    max_step=(t_f - t_n) / 64)
    if not sol.success:
        raise OracleError("Reference rendering did not converge: {}".format(sol.message))
    return sol.y[1:, -1]


def _reference_rows(rays, scene, t_n, t_f, tol):
    return [reference_render(scene, o, d, t_n, t_f, tol) for o, d in rays]


def reference_image(scene, camera, t_n, t_f, tol=1e-6, threads=1):
    """Render a ground truth :class:`Image` of *scene*."""
    o, d = camera.rays()
    rays = list(zip(o, d))
    rgb = util.create_tasks(_reference_rows, util.chunked(rays, max(1, threads) * 4),
                            scene, t_n, t_f, tol, threads=threads)
    return Image(np.array(rgb).reshape(camera.height, camera.width, 3), camera)


def scene_interval_means(scene, o, d, edges, rng=None, M=16, tol=1e-8):
    """Average density and color of *scene* over every interval.

    Exact (adaptive quadrature) if *rng* is ``None``, stratified Monte-Carlo
    with *M* samples per interval otherwise.

    :returns: ``(sigma, color)`` of shapes ``(R, N)`` and ``(R, N, 3)``
    """
    R, N = edges.shape[0], edges.shape[1] - 1
    delta = np.diff(edges, axis=1)
    if rng is not None:
        t, _ = stratified_samples(delta, M, rng, 0.0)
        t = t + edges[:, :1]
        x = o[:, None, :] + t[:, :, None] * d[:, None, :]
        dd = np.repeat(d, N * M, axis=0)
        s = scene.sigma(x.reshape(-1, 3)).reshape(R, N, M).mean(axis=2)
        c = scene.color(x.reshape(-1, 3), dd).reshape(R, N, M, 3).mean(axis=2)
        return s, c
    sigma = np.zeros((R, N))
    color = np.zeros((R, N, 3))
    for r in range(R):
        def f(t):
            x = (o[r] + t * d[r])[None, :]
            return np.concatenate((scene.sigma(x), scene.color(x, d[r][None, :])[0]))
        for i in range(N):
            v = adaptive_quadrature_vec(f, edges[r, i], edges[r, i + 1], tol=tol)
            sigma[r, i] = v[0] / delta[r, i]
            color[r, i] = v[1:] / delta[r, i]
    return sigma, color


def _ray_inputs(o, d, t):
    k = t.shape[1]
    return {'o': np.repeat(o, k, axis=0), 't': t.reshape(-1, 1), 'd': np.repeat(d, k, axis=0)}


def network_mc_forward(model, o, d, delta, u, record=False):
    """Monte-Carlo interval averages of the grad networks at stratified
    positions drawn from *u*.

    :returns: ``(sigma, color, cache)``; *cache* holds the tapes when
        *record* is ``True``
    """
    R, N, M = u.shape
    t = stratified_positions(delta, u, model.cfg.t_n)
    inputs = _ray_inputs(o, d, t)
    cache = {'t': t}
    if record:
        tape_s = record_tape(model.sigma.grad, inputs, model.sigma.params, reuse=model.sigma.reuse)
        tape_c = record_tape(model.color.grad, inputs, model.color.params, reuse=model.color.reuse)
        psi_s, psi_c = tape_s.outputs[0], tape_c.outputs[0]
        cache.update(tape_s=tape_s, tape_c=tape_c)
    else:
        psi_s = model.sigma.grad_values(inputs)
        psi_c = model.color.grad_values(inputs)
    m_s = psi_s.reshape(R, N, M).mean(axis=2)
    m_c = psi_c.reshape(R, N, M, 3).mean(axis=2)
    cache.update(m_s=m_s, m_c=m_c)
    return softplus(m_s), expit(m_c), cache


def piecewise_render_quadrature(source, o, d, cfg, delta=None, rng=None, M=None):
    """Render rays with per-interval averages from sampling.

    :param source:
        :class:`~autoint.domains.nvr.scene.AnalyticScene` (exact averages if
        *rng* is ``None``) or :class:`RadianceModel` (Monte-Carlo averages of
        the grad networks)
    :param o: origins ``(R, 3)``
    :param d: unit directions ``(R, 3)``
    :param cfg: :class:`PiecewiseRenderConfig`
    :param delta: interval lengths ``(R, N)``, uniform or predicted if ``None``
    :param rng: random generator for the sample positions
    :param int M: samples per interval, ``cfg.M`` if ``None``
    :returns: RGB ``(R, 3)``
    """
    o = np.asarray(o, dtype=float).reshape(-1, 3)
    d = np.asarray(d, dtype=float).reshape(-1, 3)
    M = cfg.M if M is None else M
    if delta is None:
        if isinstance(source, AnalyticScene):
            delta = uniform_intervals(len(o), cfg.N, cfg.t_n, cfg.t_f)
        else:
            delta = source.intervals(o, d)
    if isinstance(source, AnalyticScene):
        sigma, color = scene_interval_means(source, o, d, interval_edges(delta, cfg.t_n), rng, M)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        u = rng.uniform(size=delta.shape + (M,))
        sigma, color, _ = network_mc_forward(source, o, d, delta, u)
    return max_composite(sigma, color, delta)[0]


def autoint_interval_means(model, o, d, delta):
    """Density and color of every interval from antiderivative differences.

    The raw means ``(Phi(t_{i+1}) - Phi(t_i)) / delta_i`` go through softplus
    and sigmoid, like the Monte-Carlo means of :func:`network_mc_forward`.

    :returns: ``(sigma, color)`` of shapes ``(R, N)`` and ``(R, N, 3)``
    """
    R, N = delta.shape
    inputs = _ray_inputs(o, d, interval_edges(delta, model.cfg.t_n))
    phi_s = eval_antiderivative(model.sigma, inputs).reshape(R, N + 1)
    phi_c = eval_antiderivative(model.color, inputs).reshape(R, N + 1, 3)
    return softplus(np.diff(phi_s, axis=1) / delta), expit(np.diff(phi_c, axis=1) / delta[:, :, None])


def autoint_render(model, o, d, delta=None):
    """Render rays with interval averages read off the integral networks.

    Each ray needs the antiderivatives at its ``N + 1`` interval end points,
    shared between adjacent intervals; the ``2N`` endpoint references are
    reported as well.

    :returns: ``(rgb, report)``
    """
    o = np.asarray(o, dtype=float).reshape(-1, 3)
    d = np.asarray(d, dtype=float).reshape(-1, 3)
    if delta is None:
        delta = model.intervals(o, d)
    R, N = delta.shape
    sigma, color = autoint_interval_means(model, o, d, delta)
    rgb, _ = max_composite(sigma, color, delta)
    return rgb, RenderReport(rays=R, N=N, distinct_points=R * (N + 1), interval_evaluations=2 * N * R)


def render_image(model, camera, chunk=4096):
    """Render a full :class:`Image` with :func:`autoint_render`.

    :returns: ``(image, report)``
    """
    o, d = camera.rays()
    report = RenderReport()
    rgb = []
    for start in range(0, len(o), chunk):
        c, rep = autoint_render(model, o[start:start + chunk], d[start:start + chunk])
        rgb.append(c)
        report.add(rep)
    return Image(np.concatenate(rgb).reshape(camera.height, camera.width, 3), camera), report
