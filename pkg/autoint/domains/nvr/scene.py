"""
.. py:module:: scene
    :platform: Unix

Closed-form radiance fields used as ground truth for volume rendering.
"""
from dataclasses import dataclass

import numpy as np

__all__ = ['Blob', 'AnalyticScene', 'ConstantScene']


@dataclass(frozen=True)
class Blob:
    """Isotropic Gaussian density blob with a color."""
    center: tuple
    scale: float
    density: float
    color: tuple


class AnalyticScene:
    """Sum of Gaussian blobs.

    Density is ``sigma(x) = sum_k density_k exp(-|x - c_k|^2 / (2 scale_k^2))``.
    Color is a convex blend of the blob colors weighted by their local
    density, mixed with a direction dependent tint ``(1 + d) / 2``, so that
    it stays in ``[0, 1]^3``.

    :param list blobs: :class:`Blob` objects
    :param float tint: weight of the direction dependent tint in ``[0, 1]``
    """
    NAMES = ('single_blob', 'three_blobs')

    def __init__(self, blobs, tint=0.2, name='blobs'):
        if not 0.0 <= tint <= 1.0:
            raise ValueError("Tint must be in [0, 1], got {}.".format(tint))
        self.blobs = list(blobs)
        self.tint = tint
        self.name = name
        self._centers = np.array([b.center for b in self.blobs], dtype=float).reshape(-1, 3)
        self._scales = np.array([b.scale for b in self.blobs], dtype=float)
        self._densities = np.array([b.density for b in self.blobs], dtype=float)
        self._colors = np.array([b.color for b in self.blobs], dtype=float).reshape(-1, 3)

    @classmethod
    def single_blob(cls):
        return cls([Blob((0.0, 0.0, 0.0), 0.35, 8.0, (0.9, 0.4, 0.1))], name='single_blob')

    @classmethod
    def three_blobs(cls):
        return cls([Blob((0.3, 0.0, 0.0), 0.25, 10.0, (0.9, 0.2, 0.2)),
                    Blob((-0.3, 0.25, 0.1), 0.2, 12.0, (0.2, 0.8, 0.3)),
                    Blob((0.0, -0.3, -0.2), 0.15, 25.0, (0.2, 0.3, 0.9))], name='three_blobs')

    @classmethod
    def by_name(cls, name):
        factories = {'single_blob': cls.single_blob, 'three_blobs': cls.three_blobs}
        if name not in factories:
            raise ValueError("Unknown scene '{}', expected one of {}.".format(name, sorted(factories)))
        return factories[name]()

    def _gauss(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        d2 = ((x[:, None, :] - self._centers[None, :, :]) ** 2).sum(axis=2)
        return self._densities * np.exp(-d2 / (2.0 * self._scales ** 2))

    def sigma(self, x):
        """Density at points ``(n, 3)``, shape ``(n,)``."""
        return self._gauss(x).sum(axis=1)

    def color(self, x, d):
        """Color at points ``(n, 3)`` seen from unit directions ``(n, 3)``."""
        g = self._gauss(x) + 1e-12
        w = g / g.sum(axis=1, keepdims=True)
        base = w @ self._colors
        d = np.broadcast_to(np.asarray(d, dtype=float).reshape(-1, 3), base.shape)
        return (1.0 - self.tint) * base + self.tint * 0.5 * (1.0 + d)

    def __repr__(self):
        return "AnalyticScene({}, {} blobs)".format(self.name, len(self.blobs))


class ConstantScene(AnalyticScene):
    """Constant density *sigma0* and color *color0* everywhere."""
    def __init__(self, sigma0, color0, name='constant'):
        super().__init__([], tint=0.0, name=name)
        self.sigma0 = float(sigma0)
        self.color0 = np.asarray(color0, dtype=float)

    def sigma(self, x):
        return np.full(np.asarray(x).reshape(-1, 3).shape[0], self.sigma0)

    def color(self, x, d):
        n = np.asarray(x).reshape(-1, 3).shape[0]
        return np.tile(self.color0, (n, 1))
