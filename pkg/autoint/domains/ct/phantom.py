"""
.. py:module:: phantom
    :platform: Unix

Analytic absorption phantoms built from ellipses with additive intensities,
and the parallel-beam ray geometry. A ray is parameterized by its
eccentricity ``rho`` and angle ``alpha``; its points are

.. math::

    (x, y) = (\\rho \\cos\\alpha - t \\sin\\alpha, \\rho \\sin\\alpha + t \\cos\\alpha),

which satisfy :math:`x \\cos\\alpha + y \\sin\\alpha = \\rho` for every ``t``.
"""
from dataclasses import dataclass

import numpy as np

from autoint.quadrature import adaptive_quadrature

__all__ = ['Ellipse', 'Phantom', 'ray_point', 'radon_oracle', 'T_NEAR', 'T_FAR']

#: Ray parameter bounds, the rays span the unit square.
T_NEAR, T_FAR = -1.0, 1.0


def ray_point(rho, alpha, t):
    """Point at parameter *t* on the ray ``(rho, alpha)``.

    :returns: tuple ``(x, y)`` (arrays if the arguments are arrays)
    """
    c, s = np.cos(alpha), np.sin(alpha)
    return rho * c - t * s, rho * s + t * c


@dataclass(frozen=True)
class Ellipse:
    """Ellipse with semi-axes *a*, *b*, center ``(x0, y0)``, rotation
    *theta* (radians) and additive *intensity*."""
    intensity: float
    a: float
    b: float
    x0: float = 0.0
    y0: float = 0.0
    theta: float = 0.0

    def _local(self, x, y):
        c, s = np.cos(self.theta), np.sin(self.theta)
        dx, dy = x - self.x0, y - self.y0
        return dx * c + dy * s, -dx * s + dy * c

    def inside(self, x, y):
        u, v = self._local(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0

    def ray_interval(self, rho, alpha):
        """Parameters ``(t0, t1)`` where the ray enters and leaves the
        ellipse, or ``None`` if it misses it."""
        px, py = ray_point(rho, alpha, 0.0)
        pu, pv = self._local(px, py)
        c, s = np.cos(self.theta), np.sin(self.theta)
        # Ray direction (-sin alpha, cos alpha) in local coordinates.
        dx, dy = -np.sin(alpha), np.cos(alpha)
        du, dv = dx * c + dy * s, -dx * s + dy * c
        qa = (du / self.a) ** 2 + (dv / self.b) ** 2
        qb = pu * du / self.a ** 2 + pv * dv / self.b ** 2
        qc = (pu / self.a) ** 2 + (pv / self.b) ** 2 - 1.0
        disc = qb * qb - qa * qc
        if disc <= 0:
            return None
        root = np.sqrt(disc)
        return (-qb - root) / qa, (-qb + root) / qa

    def chord(self, rho, alpha, t_near=T_NEAR, t_far=T_FAR):
        """Exact line integral of this ellipse's intensity along the ray
        restricted to ``[t_near, t_far]``."""
        span = self.ray_interval(rho, alpha)
        if span is None:
            return 0.0
        t0, t1 = max(span[0], t_near), min(span[1], t_far)
        return self.intensity * max(0.0, t1 - t0)


class Phantom:
    """Absorption field ``f(x, y) = max(0, sum of intensities of the
    ellipses containing (x, y))`` on ``[-1, 1]^2``.

    :param list ellipses: :class:`Ellipse` objects
    :param str name: phantom name
    """
    NAMES = ('shepp_logan', 'disk', 'empty')

    def __init__(self, ellipses, name='phantom'):
        self.ellipses = list(ellipses)
        self.name = name

    @classmethod
    def shepp_logan(cls):
        """The modified Shepp-Logan head phantom (ten ellipses)."""
        intensity = [1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
        a = [.69, .6624, .11, .16, .21, .046, .046, .046, .023, .023]
        b = [.92, .874, .31, .41, .25, .046, .046, .023, .023, .046]
        x0 = [0, 0, .22, -.22, 0, 0, 0, -.08, 0, .06]
        y0 = [0, -.0184, 0, 0, .35, .1, -.1, -.605, -.605, -.605]
        theta = np.deg2rad([0, 0, -18, 18, 0, 0, 0, 0, 0, 0])
        return cls([Ellipse(*p) for p in zip(intensity, a, b, x0, y0, theta)],
                   name='shepp_logan')

    @classmethod
    def disk(cls, radius=0.5, intensity=1.0, center=(0.0, 0.0)):
        """A single disk of constant intensity."""
        return cls([Ellipse(intensity, radius, radius, center[0], center[1])], name='disk')

    @classmethod
    def empty(cls):
        """Phantom with zero absorption everywhere."""
        return cls([], name='empty')

    @classmethod
    def by_name(cls, name):
        """Phantom by its name: ``'shepp_logan'``, ``'disk'`` or ``'empty'``."""
        factories = {'shepp_logan': cls.shepp_logan, 'disk': cls.disk, 'empty': cls.empty}
        if name not in factories:
            raise ValueError("Unknown phantom '{}', expected one of {}."
                             .format(name, sorted(factories)))
        return factories[name]()

    def absorption(self, x, y):
        """Absorption at points ``(x, y)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        f = np.zeros(np.broadcast(x, y).shape)
        for e in self.ellipses:
            f = f + np.where(e.inside(x, y), e.intensity, 0.0)
        return np.maximum(f, 0.0)

    __call__ = absorption

    def breakpoints(self, rho, alpha):
        """Ray parameters where the ray crosses an ellipse boundary."""
        pts = []
        for e in self.ellipses:
            span = e.ray_interval(rho, alpha)
            if span is not None:
                pts.extend(span)
        return sorted(pts)

    def analytic_radon(self, rho, alpha):
        """Sum of exact ellipse chords. Equals the line integral of
        :meth:`absorption` whenever the ellipse sum is non-negative, which
        holds for the built-in phantoms."""
        return float(sum(e.chord(rho, alpha) for e in self.ellipses))

    def image(self, size):
        """Rasterize the phantom on a ``size x size`` grid of cell centres,
        first row at ``y = 1``."""
        c = -1.0 + (2.0 * np.arange(size) + 1.0) / size
        X, Y = np.meshgrid(c, c[::-1])
        return self.absorption(X, Y)

    def __repr__(self):
        return "Phantom({}, {} ellipses)".format(self.name, len(self.ellipses))


def radon_oracle(phantom, rho, alpha, tol=1e-9):
    """Line integral of *phantom* along the ray ``(rho, alpha)`` for
    ``t`` in ``[-1, 1]`` by adaptive quadrature.

    The ellipse boundary crossings are passed to the quadrature as
    breakpoints, so the piecewise constant integrand is resolved exactly.

    :raises OracleError: if the quadrature does not converge
    """
    if tol <= 0:
        raise ValueError("Tolerance must be positive, got {}.".format(tol))

    def f(t):
        x, y = ray_point(rho, alpha, t)
        return float(phantom.absorption(x, y))

    return adaptive_quadrature(f, T_NEAR, T_FAR, tol=tol,
                               points=phantom.breakpoints(rho, alpha))
