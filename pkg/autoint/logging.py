'''
.. py:module:: logging
    :platform: Unix

Logging module holds utilities that help with logging and analyzing the
behavior of training runs and renderers.
'''
from functools import wraps
import logging
import os
import sys

import numpy as np

from autoint.util import sanitize_name

__all__ = ['log_before', 'log_after', 'ObjectLogger', 'configure']

#: Accepted values of the ``AUTOINT_LOG`` environment variable.
LEVELS = {'error': logging.ERROR, 'info': logging.INFO, 'debug': logging.DEBUG}


def configure(level=None):
    '''Configure the ``autoint`` root logger.

    :param str level:
        One of ``'error'``, ``'info'`` or ``'debug'``. If ``None``, the value
        of the ``AUTOINT_LOG`` environment variable is used, defaulting to
        ``'info'``.
    :returns: the configured :class:`logging.Logger`
    :raises ValueError: if the level is unknown
    '''
    if level is None:
        level = os.environ.get('AUTOINT_LOG', 'info')
    level = level.lower()
    if level not in LEVELS:
        raise ValueError("Log level must be one of {}, got '{}'."
                         .format(sorted(LEVELS), level))
    logger = logging.getLogger('autoint')
    logger.setLevel(LEVELS[level])
    if not any(getattr(h, '_autoint', False) for h in logger.handlers):
        ch = logging.StreamHandler()
        ch.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
        ch._autoint = True
        logger.addHandler(ch)
    for h in logger.handlers:
        h.setLevel(LEVELS[level])
    return logger


def log_before(attr, level=logging.DEBUG):
    '''Method decorator that records *attr* of the instance before the call.

    Nothing is recorded if the instance has no :attr:`logger`
    (an :class:`ObjectLogger`) or it is ``None``.

    :param str attr: attribute to record
    :param int level: level of the accompanying log message
    '''
    def deco(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger = getattr(args[0], 'logger', None)
            if logger is not None:
                logger.log_attr(level, attr)
            return func(*args, **kwargs)
        return wrapper
    return deco


def log_after(attr, level=logging.DEBUG):
    '''Like :func:`log_before`, but records *attr* once the method returns.

    :class:`~autoint.train.Trainer` uses this to append a progress row after
    every optimization step.
    '''
    def deco(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            ret = func(*args, **kwargs)
            logger = getattr(args[0], 'logger', None)
            if logger is not None:
                logger.log_attr(level, attr)
            return ret
        return wrapper
    return deco


class ObjectLogger():
    '''Base logger for AutoInt objects. *Not* a subclass of
    :class:`logging.Logger`.

    Generates one CSV file for each attribute to be logged. Iterable
    attribute values become one row, e.g. a trainer's
    ``(iteration, loss, lr)`` progress tuple.
    '''
    def __init__(self, obj, folder, add_name=False, headers=None,
                 log_level=logging.DEBUG):
        '''Create new logger instance for *obj* in *folder*. If *add_name*
        is ``True``, creates subfolder carrying :attr:`obj.name` to *folder*.
        *headers* maps attribute names to CSV header rows written when the
        file is created. If *folder* is ``None`` nothing is written to disk.
        '''
        self._obj = obj
        self._folder = folder
        self._headers = dict(headers or {})
        self._started = set()

        if folder is not None:
            if add_name:
                folder = os.path.join(folder, sanitize_name(self._obj.name))
            if not os.path.exists(folder):
                os.makedirs(folder)
            self._folder = folder

        self.logger = logging.getLogger("autoint.{}".format(sanitize_name(self._obj.name)))
        self.logger.setLevel(log_level)

    @property
    def obj(self):
        '''The logged object, which must have a **name**.'''
        return self._obj

    @property
    def folder(self):
        '''Folder receiving the CSV files, or ``None``.'''
        return self._folder

    def get_file(self, attr_name):
        '''Absolute path of the CSV file for *attr_name*.'''
        return os.path.abspath(os.path.join(self.folder, "{}.csv"
                                            .format(attr_name)))

    def log_attr(self, level, attr_name):
        '''Log attribute to file and pass the message to underlying logger.

        :param int level: logging level
        :param str attr_name: attribute's name to be logged
        '''
        msg = self.write(attr_name)
        self.log(level, "{}={}".format(attr_name, msg))

    def log(self, level, msg):
        self.logger.log(level, "{}: {}".format(self.obj.name, msg))
        sys.stdout.flush()

    def write(self, attr_name, prefix=None):
        '''Append the value of *attr_name* as one CSV row.

        The first row written to a file is preceded by the attribute's header,
        if one was given. Floats are written with :func:`repr` so rows are
        reproducible to the last bit.

        :param str attr_name: attribute to write
        :param str prefix: optional attribute whose value starts the row
        :returns: the row without newline
        :rtype: str
        '''
        separator = ","
        attr = getattr(self.obj, attr_name)
        if hasattr(attr, '__iter__') and not isinstance(attr, str):
            msg = separator.join([_fmt(e) for e in attr])
        else:
            msg = _fmt(attr)

        if prefix is not None:
            msg = "{}{}{}".format(getattr(self.obj, prefix), separator, msg)

        if self._folder is None:
            return msg

        path = self.get_file(attr_name)
        mode = 'a' if attr_name in self._started else 'w'
        with open(path, mode) as f:
            if mode == 'w' and attr_name in self._headers:
                f.write("{}\n".format(separator.join(self._headers[attr_name])))
            f.write("{}\n".format(msg))
        self._started.add(attr_name)
        return msg


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)
