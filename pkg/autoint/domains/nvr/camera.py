"""
.. py:module:: camera
    :platform: Unix

Rays and ideal pinhole cameras. Poses are serialized as
``{position, look_at, up, fov_deg}`` plus the image size.
"""
from dataclasses import dataclass, field, asdict

import numpy as np

__all__ = ['Ray', 'Camera', 'sphere_poses']


@dataclass
class Ray:
    """Ray ``r(t) = o + t d`` for ``t`` in ``[t_n, t_f]``."""
    o: np.ndarray
    d: np.ndarray
    t_n: float
    t_f: float

    def __post_init__(self):
        self.o = np.asarray(self.o, dtype=float).reshape(3)
        self.d = np.asarray(self.d, dtype=float).reshape(3)
        if abs(np.linalg.norm(self.d) - 1.0) > 1e-9:
            raise ValueError("Ray direction must have unit length, got {}.".format(self.d))
        if not self.t_n < self.t_f:
            raise ValueError("Need t_n < t_f, got {} and {}.".format(self.t_n, self.t_f))

    def at(self, t):
        return self.o + np.asarray(t, dtype=float)[..., None] * self.d


@dataclass
class Camera:
    """Pinhole camera looking from *position* at *look_at*."""
    position: list
    look_at: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    up: list = field(default_factory=lambda: [0.0, 0.0, 1.0])
    fov_deg: float = 40.0
    width: int = 32
    height: int = 32

    def basis(self):
        p = np.asarray(self.position, dtype=float)
        forward = np.asarray(self.look_at, dtype=float) - p
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.asarray(self.up, dtype=float))
        if np.linalg.norm(right) < 1e-12:
            # Looking along up, pick any perpendicular axis.
            right = np.cross(forward, [1.0, 0.0, 0.0])
        right /= np.linalg.norm(right)
        return p, forward, right, np.cross(right, forward)

    def rays(self):
        """Origins and unit directions of all pixel rays, row-major from
        the top left corner.

        :returns: ``(origins, directions)``, both ``(height * width, 3)``
        """
        p, forward, right, true_up = self.basis()
        f = 0.5 * self.height / np.tan(0.5 * np.deg2rad(self.fov_deg))
        j, i = np.meshgrid(np.arange(self.width) + 0.5, np.arange(self.height) + 0.5)
        x = (j - 0.5 * self.width) / f
        y = -(i - 0.5 * self.height) / f
        d = forward + x[..., None] * right + y[..., None] * true_up
        d = d.reshape(-1, 3)
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return np.tile(p, (d.shape[0], 1)), d

    @property
    def n_rays(self):
        return self.width * self.height

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def sphere_poses(n, radius=4.0, width=32, height=32, fov_deg=40.0, offset=0.0):
    """*n* cameras on a sphere around the origin along a Fibonacci spiral.

    :param float offset: shift along the spiral in ``[0, 1)``; use a
        different offset for test poses
    """
    cams = []
    golden = np.pi * (3.0 - np.sqrt(5.0))
    for k in range(n):
        z = 1.0 - 2.0 * (k + 0.5 + offset) / n
        z = float(np.clip(z, -0.95, 0.95))
        r = np.sqrt(1.0 - z * z)
        phi = golden * (k + offset)
        pos = [radius * r * np.cos(phi), radius * r * np.sin(phi), radius * z]
        cams.append(Camera([float(v) for v in pos], fov_deg=fov_deg, width=width, height=height))
    return cams
