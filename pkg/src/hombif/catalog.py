"""Closed-form families used by the CLI, the tests and the scripts."""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import ConfigError
from .homoclinic import NONLINEARITIES, CubicNonlinearity, RadialNonlinearity, SystemFamily
from .loopbundle import TWO_PI


def paper_matrix(theta):
    """Symmetric 2x2 loop with eigenvalues 1/2 and 2; stable line (cos theta/2, sin theta/2)."""
    s2 = math.sin(theta / 2) ** 2
    c2 = math.cos(theta / 2) ** 2
    off = -0.75 * math.sin(theta)
    return np.array([[0.5 + 1.5 * s2, off], [off, 0.5 + 1.5 * c2]])


SADDLE = np.diag([0.5, 2.0])
BASE = paper_matrix(0.0)
TAIL_B = np.array([[0.0, 0.1], [0.1, 0.0]])


def _const(m):
    m = np.array(m, dtype=float)
    return lambda theta: m


def _s7(params):
    return SystemFamily("paper_example_s7", 2, paper_matrix, _const(BASE))


def _s7_cubic(params):
    nl = CubicNonlinearity(params.get("c", 1.0), params.get("rho", 0.5))
    return SystemFamily("paper_example_s7_cubic", 2, paper_matrix, _const(BASE), nonlinearity=nl, decay_rate=nl.rho)


def _s7_doubled(params):
    return SystemFamily("paper_example_s7_doubled", 2, lambda t: paper_matrix(2 * t), _const(BASE))


def _constant(params):
    return SystemFamily("constant", 2, _const(SADDLE), _const(SADDLE))


def _twisted_both(params):
    return SystemFamily("twisted_both", 2, paper_matrix, paper_matrix)


def _s7_block(params):
    third = np.array([[1 / 3]])
    return SystemFamily(
        "s7_block",
        3,
        lambda t: scipy.linalg.block_diag(paper_matrix(t), third),
        _const(scipy.linalg.block_diag(BASE, third)),
        nonlinearity=CubicNonlinearity(params.get("c", 1.0), params.get("rho", 0.5)),
    )


def _s7_tail(params):
    rho = params.get("rho", 0.5)
    scale = params.get("tail", 1.0)
    return SystemFamily(
        "s7_tail",
        2,
        paper_matrix,
        _const(BASE),
        tail=lambda t, n: scale * rho ** abs(n) * TAIL_B,
        nonlinearity=RadialNonlinearity(params.get("c", 1.0), rho),
        decay_rate=rho,
    )


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    dim: int
    build: Callable[[dict], SystemFamily]
    defaults: dict = field(default_factory=dict)
    description: str = ""

    def family(self, params=None):
        merged = dict(self.defaults)
        merged.update(params or {})
        unknown = set(merged) - set(self.defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        return self.build(merged)


CATALOG = {
    e.name: e
    for e in [
        CatalogEntry("paper_example_s7", 2, _s7, {}, "twisted stable bundle at +inf, trivial at -inf"),
        CatalogEntry("paper_example_s7_cubic", 2, _s7_cubic, {"c": 1.0, "rho": 0.5}, "same plus a decaying cubic term"),
        CatalogEntry("paper_example_s7_doubled", 2, _s7_doubled, {}, "+inf loop traversed twice"),
        CatalogEntry("constant", 2, _constant, {}, "diag(1/2, 2) at both ends"),
        CatalogEntry("twisted_both", 2, _twisted_both, {}, "the twisted loop at both ends"),
        CatalogEntry("s7_block", 3, _s7_block, {"c": 1.0, "rho": 0.5}, "example direct sum a fixed stable direction"),
        CatalogEntry(
            "s7_tail", 2, _s7_tail, {"c": 1.0, "rho": 0.5, "tail": 1.0}, "non-jump coefficients, coupled cubic term"
        ),
    ]
}


def get(name, params=None):
    try:
        entry = CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown catalog system {name!r}; known: {sorted(CATALOG)}") from None
    return entry.family(params)


def _interpolated_loop(samples):
    """Piecewise-linear periodic interpolation of K samples at theta_k = 2 pi k / K."""
    samples = np.asarray(samples, dtype=float)
    K = len(samples)

    def gen(theta):
        s = (theta % TWO_PI) * K / TWO_PI
        k = int(math.floor(s)) % K
        w = s - math.floor(s)
        if w < 1e-12:
            return samples[k].copy()
        return (1 - w) * samples[k] + w * samples[(k + 1) % K]

    return gen


def tabulated(name, a_plus, a_minus, nonlinearity=None, closure_tol=1e-12):
    """Family from K+1 matrices per end (the last repeating the first)."""
    plus = np.asarray(a_plus, dtype=float)
    minus = np.asarray(a_minus, dtype=float)
    for label, arr in (("a_plus", plus), ("a_minus", minus)):
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ConfigError(f"{label} must be a list of square matrices")
        if len(arr) < 5:
            raise ConfigError(f"{label} needs K+1 >= 5 samples")
        gap = np.abs(arr[-1] - arr[0]).max()
        if gap > closure_tol:
            raise ConfigError(f"{label}: closure sample differs from the first by {gap:.3e}")
    if plus.shape != minus.shape:
        raise ConfigError("a_plus and a_minus tables must have the same shape")
    nl = None
    if nonlinearity:
        options = dict(nonlinearity)
        kind = options.pop("kind", None)
        if kind not in NONLINEARITIES:
            raise ConfigError(f"unknown nonlinearity kind {kind!r}")
        nl = NONLINEARITIES[kind](**options)
    K = len(plus) - 1
    return SystemFamily(
        name,
        plus.shape[1],
        _interpolated_loop(plus[:-1]),
        _interpolated_loop(minus[:-1]),
        nonlinearity=nl,
        grid=K,
    )
