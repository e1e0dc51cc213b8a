"""Stable/unstable splittings of hyperbolic matrices and asymptotic checks."""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NotHyperbolicError, SlowDecayError
from .linalg import SubspaceFrame, as_matrix

DEFAULT_MARGIN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class HyperbolicSplitting:
    matrix: np.ndarray
    stable_frame: SubspaceFrame
    unstable_frame: SubspaceFrame
    stable_projector: np.ndarray
    margin: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def stable_dim(self):
        return self.stable_frame.k

    @property
    def unstable_dim(self):
        return self.unstable_frame.k

    @property
    def unstable_projector(self):
        return np.eye(self.dim) - self.stable_projector

    def frame(self, which):
        if which == "stable":
            return self.stable_frame
        if which == "unstable":
            return self.unstable_frame
        raise InvalidInputError(f"which must be 'stable' or 'unstable', got {which!r}")

    def projector(self, which):
        return self.stable_projector if which == "stable" else self.unstable_projector

    def contraction_steps(self):
        """Iterate count at which ``a^m`` (``a^-m``) has visibly contracted the stable (unstable) frame.

        The gap is clamped at 1: beyond that, ``1 - gap/2`` would undercut
        the inverse rate ``1/|z|`` of the unstable eigenvalues.
        """
        q = 1 - min(self.margin, 1.0) / 2
        return min(500, math.ceil(-30 / math.log(q)))

    @property
    def rate(self):
        """max(largest stable |z|, 1/smallest unstable |z|): the geometric decay rate of orbits."""
        mods = np.abs(self.eigenvalues)
        inside = mods[mods < 1]
        outside = mods[mods > 1]
        r = 0.0
        if inside.size:
            r = max(r, inside.max())
        if outside.size:
            r = max(r, 1 / outside.min())
        return float(r)


def spectral_split(a, margin_tol=DEFAULT_MARGIN_TOL):
    """Split R^N into the stable and unstable invariant subspaces of ``a``.

    Both subspaces come from ordered real Schur forms (inside-the-disk block
    leading, then outside-the-disk block leading). The stable projector is the
    spectral projector along the unstable subspace, generally not orthogonal.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise InvalidInputError(f"matrix must be square, got {a.shape}")
    eig = np.linalg.eigvals(a)
    mods = np.abs(eig)
    scale = max(np.linalg.norm(a), 1.0)
    if mods.min() <= 1e-14 * scale:
        raise InvalidInputError("matrix is singular")
    gaps = np.abs(mods - 1)
    worst = int(np.argmin(gaps))
    if gaps[worst] <= margin_tol:
        raise NotHyperbolicError(mods[worst])

    _, zs, ks = scipy.linalg.schur(a, output="real", sort=lambda re, im: np.hypot(re, im) < 1)
    _, zu, ku = scipy.linalg.schur(a, output="real", sort=lambda re, im: np.hypot(re, im) > 1)
    if ks + ku != n:
        raise NotHyperbolicError(mods[worst], "Schur reordering did not separate the spectrum")
    qs = zs[:, :ks]
    qu = zu[:, :ku]
    basis = np.hstack([qs, qu])
    proj = basis[:, :ks] @ np.linalg.solve(basis, np.eye(n))[:ks, :]
    return HyperbolicSplitting(
        matrix=a,
        stable_frame=SubspaceFrame(qs),
        unstable_frame=SubspaceFrame(qu),
        stable_projector=proj,
        margin=float(gaps.min()),
        eigenvalues=eig,
    )


def is_hyperbolic(a, margin_tol=DEFAULT_MARGIN_TOL):
    try:
        spectral_split(a, margin_tol)
    except NotHyperbolicError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class AsymptoticLimits:
    a_plus: np.ndarray
    a_minus: np.ndarray
    convergence_profile: list
    plus_split: HyperbolicSplitting = field(repr=False)
    minus_split: HyperbolicSplitting = field(repr=False)

    @property
    def tail(self):
        return self.convergence_profile[-1][1] if self.convergence_profile else 0.0


def verify_asymptotics(family, theta, n_max=64, decay_tol=1e-8, margin_tol=DEFAULT_MARGIN_TOL):
    """Measure how fast ``a_n(theta)`` approaches its declared limits.

    ``family`` needs ``coefficient(theta, n)`` and ``limit(theta, sign)``.
    The profile entry for ``m`` is the largest deviation over
    ``m <= |n| <= n_max``.
    """
    a_plus = as_matrix(family.limit(theta, +1))
    a_minus = as_matrix(family.limit(theta, -1))
    plus_split = spectral_split(a_plus, margin_tol)
    minus_split = spectral_split(a_minus, margin_tol)

    plus = np.array([family.coefficient(theta, m) for m in range(n_max + 1)]) - a_plus
    minus = np.array([family.coefficient(theta, -m) for m in range(1, n_max + 1)]) - a_minus
    dev = np.linalg.svd(plus, compute_uv=False)[:, 0]
    dev[1:] = np.maximum(dev[1:], np.linalg.svd(minus, compute_uv=False)[:, 0])
    # suffix maxima give sup over m <= |n| <= n_max
    tail_sup = np.maximum.accumulate(dev[::-1])[::-1]
    profile = [(m, float(tail_sup[m])) for m in range(1, n_max + 1)]
    if profile and profile[-1][1] >= decay_tol:
        raise SlowDecayError(profile[-1][1], decay_tol)
    return AsymptoticLimits(a_plus, a_minus, profile, plus_split, minus_split)


def stable_dimensions_equal(a_plus, a_minus, margin_tol=DEFAULT_MARGIN_TOL):
    return spectral_split(a_plus, margin_tol).stable_dim == spectral_split(a_minus, margin_tol).stable_dim
