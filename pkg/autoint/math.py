"""
.. py:module:: math
    :platform: Unix

Numerical helpers shared by the training loops and reports.
"""
import numpy as np

#: PSNR reported for identical signals.
PSNR_CAP = 99.0


def softplus(x):
    """Numerically stable ``log(1 + exp(x))``."""
    x = np.asarray(x, dtype=float)
    return np.logaddexp(0.0, x)


def mse(a, b):
    """Mean squared error between two arrays of the same shape."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("Shapes differ: {} vs {}.".format(a.shape, b.shape))
    return float(np.mean((a - b)**2))


def psnr(a, b, peak=1.0):
    """Peak signal-to-noise ratio in dB.

    Identical inputs give :data:`PSNR_CAP` instead of infinity.

    :param a: image or grid
    :param b: image or grid of the same shape
    :param float peak: peak signal value
    :rtype: float
    """
    err = mse(a, b)
    if err == 0.0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(peak**2 / err)))
