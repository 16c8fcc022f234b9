"""
.. py:module:: cli
    :platform: Unix

Command line interface::

    autoint fit1d --config fit.json
    autoint ct train --config ct.json
    autoint ct inpaint --config ct.json
    autoint nvr train|render|bench --config nvr.json
    autoint graph dump --checkpoint out/checkpoint.json [--grad]

Every artifact depends only on the configuration and the seed. Wall-clock
timings are written to the log and never into artifacts.

Exit codes: 0 on success, 2 for configuration and usage errors, 3 if a
required artifact is missing and 4 if training aborted on a non-finite loss.
"""
import argparse
import logging
import os
import sys

import numpy as np

from autoint import __version__
from autoint import logging as ailog
from autoint.config import load_config
from autoint.core.gradnet import AutoIntPair
from autoint.core.graph import evaluate
from autoint.errors import ConfigError, MissingArtifactError, NumericalAbort
from autoint.io import write_csv, write_json, write_pgm16, write_ppm, write_raw
from autoint.nx import graph_summary, to_dot
from autoint.serializers import save_checkpoint, load_checkpoint
from autoint.util import PhaseTimer, substream

__all__ = ['main', 'build_parser', 'EXIT_OK', 'EXIT_CONFIG', 'EXIT_MISSING', 'EXIT_ABORT']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_ABORT = 4


def _path(cfg, *parts):
    return os.path.join(cfg.out, *parts)


def _log_timings(timer):
    for name, secs in timer.phases.items():
        logger.info("phase %s: %.3f s", name, secs)
    logger.info("total: %.3f s", timer.total)


def _reuse_stats(pair, inputs):
    """Node evaluation counts of the grad network with and without reuse."""
    timer = PhaseTimer()
    with timer.phase('cached'):
        cached = evaluate(pair.grad, inputs, pair.params, reuse=True)
    with timer.phase('naive'):
        naive = evaluate(pair.grad, inputs, pair.params, reuse=False)
    speedup = timer.phases['naive'] / max(timer.phases['cached'], 1e-12)
    logger.info("%s grad network: %d unique of %d node evaluations, cached evaluation %.2fx faster.",
                pair.name, cached.unique_node_evals, naive.unique_node_evals, speedup)
    return {'unique_node_evals': cached.unique_node_evals, 'total_node_refs': naive.unique_node_evals}


# fit1d

def cmd_fit1d(cfg):
    from autoint.domains.fit1d import get_target, fit1d_spec, fit_target, integral_table
    net, task = cfg.network, cfg.fit1d
    target = get_target(task['target'])
    domain = tuple(task['domain']) if task['domain'] is not None else None
    spec = fit1d_spec(net['nl'], net['hidden'], net['L'] or 0, net['normalized'])
    timer = PhaseTimer()
    with timer.phase('train'):
        pair, log = fit_target(target, spec, cfg.train, domain=domain, log_folder=cfg.out)
    with timer.phase('integrate'):
        rows = integral_table(pair, target, task['intervals'], cfg.seed, domain=domain)
    write_csv(_path(cfg, 'integrals.csv'), ['a', 'b', 'autoint', 'analytic', 'abs_err'], rows)
    save_checkpoint(_path(cfg, 'checkpoint.json'), spec, pair.params, cfg.seed,
                    extra={'task': 'fit1d', 'target': target.name})
    lo, hi = target.domain if domain is None else domain
    x = np.linspace(lo, hi, 257)[:, None]
    report = {
        'task': 'fit1d',
        'target': target.name,
        'final_loss': log.final_loss,
        'mean_abs_err': float(np.mean([r[4] for r in rows])),
        'integral_evaluations': pair.integral_evaluations,
        'reuse': _reuse_stats(pair, {spec.var: x}),
    }
    write_json(_path(cfg, 'report.json'), report)
    _log_timings(timer)
    return EXIT_OK


# ct

def _ct_spec(cfg):
    from autoint.domains.ct import ct_spec
    net = cfg.network
    L = tuple(net['L']) if net['L'] is not None else (4, 4, 8)
    if len(L) != 3:
        raise ConfigError("CT networks need three encoding sizes (rho, alpha, t), got {}.".format(L))
    return ct_spec(net['nl'], tuple(net['hidden']), L, net['normalized'])


def _ct_truth(cfg):
    from autoint.domains.ct import Phantom, make_sinogram
    ct = cfg.ct
    return make_sinogram(Phantom.by_name(ct['phantom']), ct['R'], ct['A'], tol=ct['tol'],
                         threads=cfg.threads)


def _ct_outputs(cfg, truth, pair, prefix):
    """Inpaint the full sinogram with *pair* and write the inpainting artifacts."""
    from autoint.domains.ct import inpaint_sinogram, masked_psnr, subsample_angles
    ct = cfg.ct
    sub = subsample_angles(truth, ct['factor'])
    before = pair.integral_evaluations
    est = inpaint_sinogram(pair, truth.R, truth.A)
    evals = pair.integral_evaluations - before
    peak = float(truth.values.max())
    write_pgm16(_path(cfg, 'sinogram_inpainted.pgm'), est.values, peak=peak)
    row = truth.R // 2 if ct['scanline_row'] is None else ct['scanline_row']
    write_csv(_path(cfg, 'scanline.csv'), ['alpha', 'truth', 'autoint'],
              zip(truth.alpha, truth.scanline(row), est.scanline(row)))
    masked = sub.masked_columns
    report = {
        'task': 'ct',
        'R': truth.R, 'A': truth.A, 'factor': ct['factor'],
        'psnr_masked': masked_psnr(truth, est, masked) if len(masked) else None,
        'psnr_supervised': masked_psnr(truth, est, sub.supervised_columns),
        'psnr_all': masked_psnr(truth, est),
        'integral_evaluations': evals,
    }
    write_json(_path(cfg, prefix + 'report.json'), report)
    logger.info("Inpainted %dx%d sinogram with %d integral network evaluations, masked PSNR %s dB.",
                truth.R, truth.A, evals, report['psnr_masked'])
    return report


def cmd_ct_train(cfg):
    from autoint.domains.ct import train_ct, subsample_angles, nonlinearity_sweep
    ct = cfg.ct
    spec = _ct_spec(cfg)
    timer = PhaseTimer()
    with timer.phase('oracle'):
        truth = _ct_truth(cfg)
    sub = subsample_angles(truth, ct['factor'])
    peak = write_pgm16(_path(cfg, 'sinogram_truth.pgm'), truth.values)
    write_pgm16(_path(cfg, 'sinogram_masked.pgm'), sub.masked_view(), peak=peak)
    with timer.phase('train'):
        pair, log = train_ct(sub, spec, cfg.train, T=ct['T'], log_folder=cfg.out)
    save_checkpoint(_path(cfg, 'checkpoint.json'), spec, pair.params, cfg.seed,
                    extra={'task': 'ct', 'phantom': ct['phantom'], 'R': ct['R'], 'A': ct['A'],
                           'factor': ct['factor']})
    with timer.phase('inpaint'):
        _ct_outputs(cfg, truth, pair, '')
    if ct['sweep']:
        with timer.phase('sweep'):
            L = tuple(cfg.network['L']) if cfg.network['L'] is not None else (4, 4, 8)
            rows = nonlinearity_sweep(truth, ct['factor'], ct['sweep'], cfg.train, T=ct['T'],
                                      hidden=tuple(cfg.network['hidden']), L=L, seeds=ct['seeds'])
        header = ['nl', 'seed', 'factor', 'psnr_masked', 'psnr_supervised', 'final_loss']
        write_csv(_path(cfg, 'psnr.csv'), header, ([r[k] for k in header] for r in rows))
    _log_timings(timer)
    return EXIT_OK


def cmd_ct_inpaint(cfg):
    spec, params, _, _ = load_checkpoint(_path(cfg, 'checkpoint.json'))
    pair = AutoIntPair.from_spec(spec, params)
    timer = PhaseTimer()
    with timer.phase('oracle'):
        truth = _ct_truth(cfg)
    with timer.phase('inpaint'):
        _ct_outputs(cfg, truth, pair, 'inpaint_')
    _log_timings(timer)
    return EXIT_OK


# nvr

def _render_cfg(cfg, N=None):
    from autoint.domains.nvr import PiecewiseRenderConfig
    nvr = cfg.nvr
    return PiecewiseRenderConfig(N=nvr['N'] if N is None else N, M=nvr['M'] if N is None else None,
                                 t_n=nvr['t_n'], t_f=nvr['t_f'], use_sampler=nvr['use_sampler'])


def _cameras(cfg):
    from autoint.domains.nvr import sphere_poses
    nvr = cfg.nvr
    kwargs = dict(radius=nvr['radius'], width=nvr['width'], height=nvr['height'], fov_deg=nvr['fov_deg'])
    return sphere_poses(nvr['train_poses'], **kwargs), sphere_poses(nvr['test_poses'], offset=0.5, **kwargs)


def _nvr_specs(cfg):
    from autoint.domains.nvr.train import nvr_specs
    net, nvr = cfg.network, cfg.nvr
    return nvr_specs(tuple(net['hidden']), tuple(net['hidden']), nvr['L_x'], nvr['L_d'], net['nl'])


def cmd_nvr_train(cfg):
    from autoint.domains.nvr import AnalyticScene
    from autoint.domains.nvr.train import make_model, make_dataset, train_nvr, evaluate_psnr, save_model
    nvr = cfg.nvr
    scene = AnalyticScene.by_name(nvr['scene'])
    rcfg = _render_cfg(cfg)
    train_cams, test_cams = _cameras(cfg)
    timer = PhaseTimer()
    with timer.phase('reference'):
        dataset = make_dataset(scene, train_cams, rcfg, tol=nvr['tol'], threads=cfg.threads)
    model = make_model(_nvr_specs(cfg), rcfg, cfg.seed, tuple(nvr['sampler_hidden']))
    with timer.phase('train'):
        log = train_nvr(model, dataset, cfg.train, log_folder=cfg.out)
    save_model(model, _path(cfg, 'model'), cfg.seed)
    write_json(_path(cfg, 'cameras.json'), {'train': [c.to_dict() for c in train_cams],
                                            'test': [c.to_dict() for c in test_cams]})
    with timer.phase('evaluate'):
        mean, values, images = evaluate_psnr(model, scene, test_cams, tol=nvr['tol'], threads=cfg.threads)
    for k, img in enumerate(images):
        write_ppm(_path(cfg, 'test_{}.ppm'.format(k)), img.pixels)
    write_json(_path(cfg, 'report.json'), {'task': 'nvr', 'scene': scene.name, 'N': rcfg.N, 'M': rcfg.M,
                                           'final_loss': log.final_loss, 'psnr': mean, 'psnr_per_image': values})
    _log_timings(timer)
    return EXIT_OK


def cmd_nvr_render(cfg):
    from autoint.domains.nvr import AnalyticScene, reference_image, render_image, RenderReport
    from autoint.domains.nvr.train import load_model
    from autoint.math import psnr
    nvr = cfg.nvr
    rcfg = _render_cfg(cfg)
    model = load_model(_path(cfg, 'model'), rcfg)
    scene = AnalyticScene.by_name(nvr['scene'])
    _, test_cams = _cameras(cfg)
    timer = PhaseTimer()
    total = RenderReport()
    psnrs = []
    for k, cam in enumerate(test_cams):
        with timer.phase('render'):
            img, rep = render_image(model, cam)
        total.add(rep)
        write_ppm(_path(cfg, 'render_{}.ppm'.format(k)), img.pixels)
        write_raw(_path(cfg, 'render_{}.raw'.format(k)), img.pixels)
        with timer.phase('reference'):
            ref = reference_image(scene, cam, rcfg.t_n, rcfg.t_f, tol=nvr['tol'], threads=cfg.threads)
        psnrs.append(psnr(ref.pixels, img.clamped()))
    frames = len(test_cams)
    write_json(_path(cfg, 'render_report.json'), {
        'frames': frames, 'rays': total.rays, 'N': rcfg.N,
        'integral_evals_per_frame': total.networks_total // frames,
        'interval_refs_per_frame': 2 * total.interval_evaluations // frames,
        'psnr': float(np.mean(psnrs)), 'psnr_per_image': psnrs,
    })
    logger.info("Rendered %d frames, %.3f s per frame.", frames, timer.phases['render'] / frames)
    _log_timings(timer)
    return EXIT_OK


def cmd_nvr_bench(cfg):
    from autoint.domains.nvr import autoint_render
    from autoint.domains.nvr.train import make_model
    nvr = cfg.nvr
    _, test_cams = _cameras(cfg)
    o, d = test_cams[0].rays()
    rng = substream(cfg.seed, 'sampling')
    idx = np.sort(rng.choice(len(o), size=min(nvr['bench_rays'], len(o)), replace=False))
    o, d = o[idx], d[idx]
    specs = _nvr_specs(cfg)
    rows = []
    timer = PhaseTimer()
    for N in nvr['bench_N']:
        rcfg = _render_cfg(cfg, N)
        model = make_model(specs, rcfg, cfg.seed, tuple(nvr['sampler_hidden']))
        phase = 'N={}'.format(N)
        with timer.phase(phase):
            _, rep = autoint_render(model, o, d)
        t = np.linspace(rcfg.t_n, rcfg.t_f, rcfg.M)
        inputs = {'o': np.repeat(o, rcfg.M, axis=0), 't': np.tile(t, len(o))[:, None],
                  'd': np.repeat(d, rcfg.M, axis=0)}
        reuse = _reuse_stats(model.sigma, inputs)
        rows.append([N, rep.rays, rep.networks_total, 2 * rep.interval_evaluations,
                     2 * rep.rays * N * rcfg.M, reuse['unique_node_evals'], reuse['total_node_refs']])
        logger.info("N=%d: %d integral evaluations for %d rays in %.4f s.", N, rep.networks_total, rep.rays,
                    timer.phases[phase])
    write_csv(_path(cfg, 'bench.csv'),
              ['N', 'rays', 'integral_evals_per_frame', 'interval_refs_per_frame', 'mc_grad_evals_per_frame',
               'grad_unique_node_evals', 'grad_total_node_refs'], rows)
    _log_timings(timer)
    return EXIT_OK


# graph

def cmd_graph_dump(args):
    spec, params, _, _ = load_checkpoint(args.checkpoint)
    pair = AutoIntPair.from_spec(spec, params)
    graph = pair.grad if args.grad else pair.integral
    dot = to_dot(graph)
    summary = graph_summary(graph)
    logger.info("%s: %d nodes, %d unique, %d edges.", graph.name, summary['nodes'],
                summary['unique_nodes'], summary['edges'])
    if args.grad:
        inputs = {i.name: np.zeros((1, i.width)) for i in spec.inputs}
        _reuse_stats(pair, inputs)
    if args.dot is None:
        sys.stdout.write(dot)
    else:
        folder = os.path.dirname(os.path.abspath(args.dot))
        if not os.path.exists(folder):
            os.makedirs(folder)
        with open(args.dot, 'w') as f:
            f.write(dot)
    return EXIT_OK


_TASK_COMMANDS = {
    ('fit1d', None): ('fit1d', cmd_fit1d),
    ('ct', 'train'): ('ct', cmd_ct_train),
    ('ct', 'inpaint'): ('ct', cmd_ct_inpaint),
    ('nvr', 'train'): ('nvr', cmd_nvr_train),
    ('nvr', 'render'): ('nvr', cmd_nvr_render),
    ('nvr', 'bench'): ('nvr', cmd_nvr_bench),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, metavar='PATH', help="experiment configuration (JSON)")
    common.add_argument('--seed', type=int, default=None, help="override the configured seed")
    common.add_argument('--threads', type=int, default=None, help="worker threads (default 1)")
    common.add_argument('--out', default=None, metavar='DIR', help="override the output folder")

    parser = argparse.ArgumentParser(prog='autoint', description="Automatic integration experiments.")
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    sub.add_parser('fit1d', parents=[common], help="fit a 1-D signal and integrate it")
    for task, actions in (('ct', ('train', 'inpaint')), ('nvr', ('train', 'render', 'bench'))):
        p = sub.add_parser(task, help="{} experiments".format(task.upper()))
        ps = p.add_subparsers(dest='action')
        ps.required = True
        for action in actions:
            ps.add_parser(action, parents=[common])

    g = sub.add_parser('graph', help="inspect networks")
    gs = g.add_subparsers(dest='action')
    gs.required = True
    dump = gs.add_parser('dump', help="write a DOT listing of a network")
    dump.add_argument('--checkpoint', required=True, metavar='PATH')
    dump.add_argument('--grad', action='store_true', help="dump the grad network instead of the integral network")
    dump.add_argument('--out', dest='dot', default=None, metavar='FILE', help="DOT file, stdout by default")
    return parser


def run_command(args):
    if args.command == 'graph':
        return cmd_graph_dump(args)
    task, func = _TASK_COMMANDS[(args.command, getattr(args, 'action', None))]
    cfg = load_config(args.config, seed=args.seed, threads=args.threads, out=args.out)
    if cfg.task != task:
        raise ConfigError("Configuration is for task '{}', not '{}'.".format(cfg.task, task))
    os.makedirs(cfg.out, exist_ok=True)
    logger.info("Running %s with seed %d into '%s'.", args.command, cfg.seed, cfg.out)
    return func(cfg)


def main(argv=None):
    """Entry point of the ``autoint`` command.

    :returns: exit code
    """
    try:
        ailog.configure()
    except ValueError as e:
        sys.stderr.write("autoint: {}\n".format(e))
        return EXIT_CONFIG
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except MissingArtifactError as e:
        logger.error("Missing artifact: %s", e)
        return EXIT_MISSING
    except NumericalAbort as e:
        logger.error("%s", e)
        return EXIT_ABORT


if __name__ == '__main__':
    sys.exit(main())
