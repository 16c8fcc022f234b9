"""
.. py:module:: sinogram
    :platform: Unix

Sinograms: grids of line integrals ``s(rho_i, alpha_j)`` with ``R`` rows of
eccentricities and ``A`` columns of angles, and a mask of the angles that
are available for supervision.
"""
import logging
from dataclasses import dataclass

import numpy as np

from autoint import util
from autoint.domains.ct.phantom import radon_oracle

__all__ = ['Sinogram', 'detector_grid', 'angle_grid', 'make_sinogram',
           'subsample_angles', 'sample_rays']

logger = logging.getLogger(__name__)


def detector_grid(R):
    """Eccentricities at the centres of *R* detector cells covering ``[-1, 1]``."""
    return -1.0 + (2.0 * np.arange(R) + 1.0) / R


def angle_grid(A):
    """Angles ``j pi / A`` for ``j = 0, ..., A - 1``."""
    return np.arange(A) * np.pi / A


@dataclass
class Sinogram:
    """Line integral measurements.

    :ivar values: array ``(R, A)``
    :ivar rho: eccentricities ``(R,)``
    :ivar alpha: angles ``(A,)``
    :ivar mask: boolean ``(A,)``, ``True`` for supervised columns
    """
    values: np.ndarray
    rho: np.ndarray
    alpha: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 1:
            raise ValueError("Sinogram values must be a non-empty 2-D grid, got shape {}."
                             .format(self.values.shape))
        if self.mask is None:
            self.mask = np.ones(self.values.shape[1], dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (self.values.shape[1],):
            raise ValueError("Mask must have one entry per column.")

    @property
    def R(self):
        return self.values.shape[0]

    @property
    def A(self):
        return self.values.shape[1]

    @property
    def supervised_columns(self):
        return np.flatnonzero(self.mask)

    @property
    def masked_columns(self):
        """Columns without supervision."""
        return np.flatnonzero(~self.mask)

    def rays(self):
        """All rays of the grid, row-major: ``(rho, alpha)`` arrays of size ``R * A``."""
        P, Q = np.meshgrid(self.rho, self.alpha, indexing='ij')
        return P.ravel(), Q.ravel()

    def scanline(self, row=None):
        """Values of one row, the central one by default."""
        return self.values[self.R // 2 if row is None else row]

    def masked_view(self):
        """Values with unsupervised columns set to zero."""
        return np.where(self.mask[None, :], self.values, 0.0)


def _radon_rows(rays, phantom, tol):
    return [radon_oracle(phantom, rho, alpha, tol) for rho, alpha in rays]


def make_sinogram(phantom, R, A, tol=1e-9, threads=1):
    """Sweep :func:`~autoint.domains.ct.phantom.radon_oracle` over an
    ``R x A`` grid.

    :param int threads: worker threads; the result does not depend on it
    :returns: fully supervised :class:`Sinogram`
    """
    if R < 1 or A < 1:
        raise ValueError("Sinogram dimensions must be positive, got {}x{}.".format(R, A))
    rho, alpha = detector_grid(R), angle_grid(A)
    P, Q = np.meshgrid(rho, alpha, indexing='ij')
    rays = list(zip(P.ravel(), Q.ravel()))
    values = util.create_tasks(_radon_rows, util.chunked(rays, max(1, threads) * 4),
                               phantom, tol, threads=threads)
    logger.debug("Computed %dx%d sinogram of %s.", R, A, phantom)
    return Sinogram(np.array(values).reshape(R, A), rho, alpha)


def subsample_angles(sino, factor):
    """Keep every *factor*:th column for supervision.

    :returns: new :class:`Sinogram` sharing the values
    :raises ValueError: if *factor* does not divide the number of angles
    """
    factor = int(factor)
    if factor < 1 or sino.A % factor:
        raise ValueError("Subsampling factor {} must divide the number of angles {}."
                         .format(factor, sino.A))
    mask = np.zeros(sino.A, dtype=bool)
    mask[::factor] = True
    return Sinogram(sino.values, sino.rho, sino.alpha, mask & sino.mask)


def sample_rays(sino, n, rng):
    """Draw *n* supervised rays uniformly.

    :returns: ``(rho, alpha, values)`` arrays of size *n*
    """
    cols = sino.supervised_columns
    if not len(cols):
        raise ValueError("Sinogram has no supervised columns.")
    i = rng.integers(0, sino.R, size=n)
    j = cols[rng.integers(0, len(cols), size=n)]
    return sino.rho[i], sino.alpha[j], sino.values[i, j]
