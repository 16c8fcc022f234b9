"""
.. py:module:: util
    :platform: Unix

Miscellaneous utility functions: random substreams, chunked thread pools
for per-ray work and simple phase timing.
"""
import asyncio
import itertools
import re
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np


def sanitize_name(name):
    """Get sanitized version of a name, used for file and directory creation.
    """
    a = re.split("[:/ ]", name)
    return "_".join([i for i in a if len(i) > 0])


def substream(seed, name):
    """Create an independent random generator for a named purpose.

    All randomness in a run flows from one integer *seed*. Each consumer
    (``'init'``, ``'sampling'``, ``'batching'``, ...) gets its own stream so
    that adding draws to one of them does not shift the others.

    :param int seed: run seed
    :param str name: name of the substream
    :returns: :class:`numpy.random.Generator`
    """
    key = zlib.crc32(name.encode('utf-8'))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def chunked(items, n_chunks):
    """Split a sequence into at most *n_chunks* contiguous slices.

    :returns: list of slices of **items**, empty slices omitted
    """
    n = len(items)
    n_chunks = max(1, min(int(n_chunks), n))
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    return [items[bounds[i]:bounds[i + 1]] for i in range(n_chunks)
            if bounds[i + 1] > bounds[i]]


def create_tasks(task, chunks, *args, threads=1, flatten=True, **kwargs):
    """Run a blocking *task* for every chunk on a thread pool.

    Each call is wrapped in :meth:`asyncio.AbstractEventLoop.run_in_executor`
    and the results are gathered in the order of **chunks**, so the
    outcome does not depend on the number of threads.

    Usage example::

        def render_rows(rows, scene):
            return [render(scene, r) for r in rows]

        colors = util.create_tasks(render_rows, util.chunked(rays, 8), scene, threads=4)

    :param task:
        Callable accepting a chunk as the first parameter.
    :param list chunks:
        A list of first parameters for :func:`task`.
    :param int threads:
        Number of worker threads. ``1`` runs everything in the calling thread.
    :param bool flatten:
        If ``True`` the returned results are flattened into one list.
    :returns:
        The results of tasks as a list or as a flattened list
    """
    if threads <= 1:
        rets = [task(chunk, *args, **kwargs) for chunk in chunks]
        return _flatten(rets) if flatten else rets

    async def gather(loop):
        with ThreadPoolExecutor(max_workers=threads) as executor:
            tasks = [loop.run_in_executor(executor, _call, task, chunk, args, kwargs)
                     for chunk in chunks]
            return await wait_tasks(tasks, flatten)

    loop = asyncio.new_event_loop()
    try:
        return loop.run_until_complete(gather(loop))
    finally:
        loop.close()


def _call(task, chunk, args, kwargs):
    return task(chunk, *args, **kwargs)


def _flatten(rets):
    if all(map(lambda x: hasattr(x, '__iter__'), rets)):
        return list(itertools.chain(*rets))
    return rets


async def wait_tasks(tasks, flatten=True):
    """Gather a list of asynchronous tasks and wait for their completion.

    :param list tasks:
        A list of *asyncio* tasks or futures.
    :param bool flatten:
        If ``True`` the returned results are flattened into one list if the
        tasks return iterable objects. The parameter does nothing if all the
        results are not iterable.
    :returns:
        The results of tasks as a list or as a flattened list
    """
    rets = await asyncio.gather(*tasks)
    return _flatten(rets) if flatten else list(rets)


class PhaseTimer:
    """Wall-clock accounting for named phases of a run.

    .. code-block:: python

        timer = PhaseTimer()
        with timer.phase('train'):
            ...
        timer.phases['train']  # seconds
    """
    def __init__(self):
        self.phases = {}
        self._start = time.perf_counter()

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t0

    @property
    def total(self):
        """Seconds since the timer was created."""
        return time.perf_counter() - self._start
