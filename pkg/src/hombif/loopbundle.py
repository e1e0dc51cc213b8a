"""Orientation invariant w1 of subspace bundles over the circle.

A loop of hyperbolic matrices is sampled on a uniform angle grid. The stable
(or unstable) subspaces form a bundle; an orthonormal frame is carried
around the loop by orthogonal projection onto each next fiber followed by
Gram-Schmidt, and w1 is the sign of the determinant of the matrix expressing
the returning frame in the starting one.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, SamplingError
from .hyperbolic import DEFAULT_MARGIN_TOL, spectral_split
from .linalg import DEFAULT_TOL, SubspaceFrame, as_matrix, det_sign, orthonormalize

TWO_PI = 2 * math.pi
DEFAULT_K = 64
MAX_K = 4096
HOLONOMY_DET_FLOOR = 0.5


@dataclass(frozen=True, eq=False)
class MatrixLoop:
    """Samples ``a(theta_k)`` at ``theta_k = offset + 2*pi*k/K``; index K wraps to 0.

    ``generator`` (a callable of the angle) is optional but required for
    refinement and off-grid evaluation.
    """

    samples: tuple
    generator: Optional[Callable[[float], np.ndarray]] = None
    offset: float = 0.0
    margin_tol: float = DEFAULT_MARGIN_TOL

    def __post_init__(self):
        samples = tuple(as_matrix(s) for s in self.samples)
        if len(samples) < 4:
            raise InvalidInputError(f"a loop needs at least 4 samples, got {len(samples)}")
        shapes = {s.shape for s in samples}
        if len(shapes) != 1 or samples[0].shape[0] != samples[0].shape[1]:
            raise InvalidInputError("loop samples must be square matrices of one size")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_generator(cls, generator, K=DEFAULT_K, offset=0.0, margin_tol=DEFAULT_MARGIN_TOL):
        thetas = offset + TWO_PI * np.arange(K) / K
        return cls(tuple(generator(t) for t in thetas), generator, offset, margin_tol)

    @property
    def K(self):
        return len(self.samples)

    @property
    def dim(self):
        return self.samples[0].shape[0]

    def theta(self, k):
        return self.offset + TWO_PI * k / self.K

    @property
    def thetas(self):
        return self.offset + TWO_PI * np.arange(self.K + 1) / self.K

    def matrix_at(self, theta):
        if self.generator is None:
            raise InvalidInputError("off-grid evaluation needs a loop generator")
        return as_matrix(self.generator(theta))

    @cached_property
    def splittings(self):
        return tuple(spectral_split(s, self.margin_tol) for s in self.samples)

    def split(self, k):
        return self.splittings[k % self.K]

    def stable_dim(self):
        dims = {s.stable_dim for s in self.splittings}
        if len(dims) != 1:
            raise SamplingError(f"stable dimension changes along the loop: {sorted(dims)}")
        return dims.pop()

    def projector_gaps(self, which="stable"):
        proj = np.array([s.projector(which) for s in self.splittings])
        return np.linalg.norm(np.roll(proj, -1, axis=0) - proj, ord=2, axis=(1, 2)).tolist()

    def refined(self):
        return self._refined

    @cached_property
    def _refined(self):
        if self.generator is None:
            raise InvalidInputError("refinement needs a loop generator")
        return MatrixLoop.from_generator(self.generator, 2 * self.K, self.offset, self.margin_tol)

    def rotated(self, theta0):
        """Same loop, grid restarted at ``theta0``."""
        if abs(theta0 - self.offset) < 1e-15:
            return self
        if self.generator is not None:
            return MatrixLoop.from_generator(self.generator, self.K, theta0, self.margin_tol)
        j = (theta0 - self.offset) * self.K / TWO_PI
        if abs(j - round(j)) > 1e-9:
            raise InvalidInputError("tabulated loops can only be rotated to a grid angle")
        j = int(round(j)) % self.K
        return MatrixLoop(
            self.samples[j:] + self.samples[:j], None, self.theta(j), self.margin_tol
        )

    def reversed(self):
        """Loop traversed backwards: sample k becomes sample -k."""
        gen = None
        if self.generator is not None:
            g, off = self.generator, self.offset
            gen = lambda t: g(2 * off - t)  # noqa: E731
        samples = (self.samples[0],) + self.samples[:0:-1]
        return MatrixLoop(samples, gen, self.offset, self.margin_tol)


def block_diagonal_loop(*loops):
    import scipy.linalg

    K = {lp.K for lp in loops}
    if len(K) != 1:
        raise InvalidInputError("block loops need equal sample counts")
    samples = tuple(scipy.linalg.block_diag(*(lp.samples[k] for lp in loops)) for k in range(loops[0].K))
    gen = None
    if all(lp.generator is not None for lp in loops):
        gens = [lp.generator for lp in loops]
        gen = lambda t: scipy.linalg.block_diag(*(g(t) for g in gens))  # noqa: E731
    return MatrixLoop(samples, gen, loops[0].offset, loops[0].margin_tol)


@dataclass(frozen=True, eq=False)
class TransportResult:
    frames: tuple
    holonomy: np.ndarray
    w1: int
    adequacy: float
    which: str
    loop: MatrixLoop = field(repr=False)

    @property
    def K(self):
        return self.loop.K

    def frame_at(self, theta, tol=DEFAULT_TOL):
        """Aligned frame at an arbitrary angle of the first lap.

        Grid angles return the stored frame; between grid points the frame of
        the preceding grid point is projected onto the fiber at ``theta``.
        """
        loop = self.loop
        s = (theta - loop.offset) * loop.K / TWO_PI
        k = int(math.floor(s + 1e-12))
        if abs(s - round(s)) <= 1e-12 and 0 <= round(s) <= loop.K:
            return self.frames[int(round(s))]
        if not 0 <= k < loop.K:
            raise InvalidInputError(f"angle {theta} outside the transported lap")
        target = spectral_split(loop.matrix_at(theta), loop.margin_tol).frame(self.which)
        return _align(self.frames[k], target, tol)


def _align(frame, target, tol=DEFAULT_TOL):
    moved = orthonormalize(target.projector() @ frame.basis, tol=tol, ambient_dim=frame.ambient_dim)
    if moved.k != frame.k:
        raise SamplingError("frame alignment lost rank; the loop is under-sampled")
    return moved


def transport_frames(loop, which="stable", initial_frame=None, tol=DEFAULT_TOL):
    """Carry a frame of the chosen subbundle once around ``loop``."""
    if which not in ("stable", "unstable"):
        raise InvalidInputError(f"which must be 'stable' or 'unstable', got {which!r}")
    dims = {s.frame(which).k for s in loop.splittings}
    if len(dims) != 1:
        raise SamplingError(f"{which} dimension changes along the loop")
    gaps = loop.projector_gaps(which)
    adequacy = max(gaps)
    if adequacy >= 1:
        raise SamplingError(f"projector gap {adequacy:.3f} >= 1 between consecutive samples")

    if initial_frame is None:
        first = loop.split(0).frame(which).canonical()
    else:
        first = orthonormalize(initial_frame, tol=tol, ambient_dim=loop.dim)
        if not first.same_span(loop.split(0).frame(which), tol=1e-8):
            raise InvalidInputError("initial frame does not span the fiber at the base point")
    frames = [first]
    for k in range(loop.K):
        frames.append(_align(frames[-1], loop.split(k + 1).frame(which), tol))

    c = first.basis.T @ frames[-1].basis
    kdim = c.shape[0]
    if kdim and abs(np.linalg.det(c)) < HOLONOMY_DET_FLOOR:
        raise SamplingError(f"holonomy determinant {np.linalg.det(c):.3f} is degenerate")
    if kdim and np.abs(c.T @ c - np.eye(kdim)).max() > 1e-8:
        raise SamplingError("holonomy is not orthogonal; frames drifted off the fiber")
    w1 = det_sign(c, tol) if kdim else 1
    return TransportResult(tuple(frames), c, int(w1), adequacy, which, loop)


def w1_refinement_check(loop, which="stable"):
    return transport_frames(loop, which).w1 == transport_frames(loop.refined(), which).w1


def certified_transport(loop, which="stable", max_K=MAX_K):
    """Transport with automatic doubling of K until w1 is stable under refinement.

    Tabulated loops (no generator) cannot be refined; their single-resolution
    result is returned as is.
    """
    current = loop
    while True:
        try:
            result = transport_frames(current, which)
        except SamplingError:
            if current.generator is None or 2 * current.K > max_K:
                raise
            current = current.refined()
            continue
        if current.generator is None:
            return result
        if 2 * current.K > max_K:
            raise SamplingError(f"w1 not certified before K = {max_K}")
        try:
            finer = transport_frames(current.refined(), which)
        except SamplingError:
            current = current.refined()
            continue
        if finer.w1 == result.w1:
            return result
        current = current.refined()


def w1(loop, which="stable"):
    return certified_transport(loop, which).w1


def w1_virtual(w_e, w_f):
    """w1 of the virtual bundle [E] - [F] in the multiplicative group {1, -1}."""
    if w_e not in (1, -1) or w_f not in (1, -1):
        raise InvalidInputError("w1 values must be +1 or -1")
    return w_e * w_f
