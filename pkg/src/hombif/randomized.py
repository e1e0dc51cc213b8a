"""Randomized hyperbolic matrices, loops and jump systems with known structure.

Used by the property tests and the trial scripts. Every generator takes a
``numpy.random.Generator`` so runs are reproducible from a seed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .fredholm import JumpSystem
from .loopbundle import MatrixLoop


def _moduli(rng, k_stable, n, margin):
    inside = rng.uniform(0.2, 1 - margin, k_stable)
    outside = rng.uniform(1 + margin, 3.0, n - k_stable)
    return np.concatenate([inside, outside])


def _near_identity(rng, n, spread=0.3):
    """Well conditioned conjugation: I + small Gaussian, re-drawn until cond < 10."""
    while True:
        s = np.eye(n) + spread * rng.standard_normal((n, n))
        if np.linalg.cond(s) < 10:
            return s


def random_hyperbolic(rng, n, k_stable, margin=0.1, complex_pairs=True):
    """Real n x n matrix with exactly ``k_stable`` eigenvalues inside the unit disk.

    Eigenvalue moduli stay at least ``margin`` away from 1. When allowed, a
    stable or unstable pair may be replaced by a complex-conjugate pair of
    the same modulus (a rotation-scaling block).
    """
    mods = _moduli(rng, k_stable, n, margin)
    d = np.diag(mods * rng.choice([-1.0, 1.0], n))
    if complex_pairs:
        for lo, hi in ((0, k_stable), (k_stable, n)):
            if hi - lo >= 2 and rng.uniform() < 0.5:
                r = mods[lo]
                phi = rng.uniform(0.3, math.pi - 0.3)
                d[lo:lo + 2, lo:lo + 2] = r * np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    s = _near_identity(rng, n)
    return s @ d @ np.linalg.inv(s)


def _rotation(n, i, j, angle):
    r = np.eye(n)
    c, s = math.cos(angle), math.sin(angle)
    r[i, i] = r[j, j] = c
    r[i, j], r[j, i] = -s, s
    return r


@dataclass(frozen=True)
class TwistedLoop:
    """a(theta) = S R(theta) D R(theta)^T S^-1.

    ``D`` is diagonal with ``k_stable`` entries inside the disk. ``R`` turns
    the plane spanned by a stable and an unstable coordinate by
    ``twist * theta / 2`` and a second plane by ``spin * theta``. An odd
    ``twist`` makes both the stable and unstable bundles non-orientable.
    """

    diag: np.ndarray
    conj: np.ndarray
    k_stable: int
    twist: int
    plane: tuple
    spin: int
    spin_plane: tuple

    @property
    def dim(self):
        return self.diag.size

    @property
    def expected_w1(self):
        return -1 if self.twist % 2 else 1

    def __call__(self, theta):
        n = self.dim
        r = _rotation(n, *self.plane, self.twist * theta / 2)
        if self.spin_plane is not None:
            r = _rotation(n, *self.spin_plane, self.spin * theta) @ r
        core = r @ np.diag(self.diag) @ r.T
        return self.conj @ core @ np.linalg.solve(self.conj, np.eye(n))


def random_twisted_loop(rng, n, k_stable, margin=0.1, twist=None, conj_spread=0.2):
    if not 1 <= k_stable <= n - 1:
        raise ValueError("twisted loops need both a stable and an unstable direction")
    diag = _moduli(rng, k_stable, n, margin) * rng.choice([-1.0, 1.0], n)
    if twist is None:
        twist = int(rng.integers(0, 4))
    plane = (int(rng.integers(0, k_stable)), int(rng.integers(k_stable, n)))
    spin_plane = None
    spin = 0
    if n >= 3:
        i, j = sorted(rng.choice(n, 2, replace=False).tolist())
        spin_plane, spin = (i, j), int(rng.integers(-1, 2))
    conj = _near_identity(rng, n, conj_spread)
    return TwistedLoop(diag, conj, k_stable, twist, plane, spin, spin_plane)


def random_jump_system(rng, n, K=64, margin=0.1, min_base=0.1, max_tries=200, theta0=0.0):
    """Jump system from two independent twisted loops with one stable dimension.

    Draws are rejected until the crossing determinant at ``theta0`` has
    modulus at least ``min_base``. Returns ``(jump, plus_loop, minus_loop)``.
    """
    from .fredholm import CrossingTransports

    for _ in range(max_tries):
        k = int(rng.integers(1, n))
        plus = random_twisted_loop(rng, n, k, margin)
        minus = random_twisted_loop(rng, n, k, margin)
        jump = JumpSystem.from_generators(plus, minus, K, theta0)
        d0 = CrossingTransports.compute(jump).grid_values()[0]
        if abs(d0) >= min_base:
            return jump, plus, minus
    raise RuntimeError("could not draw a jump system with an invertible base point")


def random_loop(rng, n, K=64, margin=0.1):
    k = int(rng.integers(1, n))
    gen = random_twisted_loop(rng, n, k, margin)
    return MatrixLoop.from_generator(gen, K), gen
