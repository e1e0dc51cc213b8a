"""Index, kernel, crossing determinant and parity of the linearized family.

The linear operator is ``(L x)_n = x_{n+1} - a_n x_n`` on sequences decaying
at both ends. For jump systems (``a_n = a(+inf)`` for ``n >= 0`` and
``a(-inf)`` for ``n < 0``) its kernel is ``E^s(+inf) ∩ E^u(-inf)``, which is
what the crossing determinant watches along the parameter loop.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentParityError,
    InvalidInputError,
    InvertibilityError,
    NonzeroIndexError,
    SamplingError,
)
from .hyperbolic import DEFAULT_MARGIN_TOL, spectral_split
from .linalg import DEFAULT_TOL, as_matrix, row_basis, subspace_intersection
from .loopbundle import (
    DEFAULT_K,
    MAX_K,
    TWO_PI,
    MatrixLoop,
    certified_transport,
    transport_frames,
    w1_virtual,
)

CROSSING_TOL = 1e-8
BISECTION_WIDTH = TWO_PI / 2**20


def index_of_family(a_plus, a_minus, margin_tol=DEFAULT_MARGIN_TOL):
    return spectral_split(a_plus, margin_tol).stable_dim - spectral_split(a_minus, margin_tol).stable_dim


@dataclass(frozen=True, eq=False)
class JumpSystem:
    a_plus_loop: MatrixLoop
    a_minus_loop: MatrixLoop

    def __post_init__(self):
        p, m = self.a_plus_loop, self.a_minus_loop
        if p.dim != m.dim:
            raise InvalidInputError("loops at +inf and -inf have different dimensions")
        if p.K != m.K or abs(p.offset - m.offset) > 1e-12:
            raise InvalidInputError("loops at +inf and -inf must share one angle grid")

    @classmethod
    def from_generators(cls, plus, minus, K=DEFAULT_K, offset=0.0, margin_tol=DEFAULT_MARGIN_TOL):
        return cls(
            MatrixLoop.from_generator(plus, K, offset, margin_tol),
            MatrixLoop.from_generator(minus, K, offset, margin_tol),
        )

    @property
    def dim(self):
        return self.a_plus_loop.dim

    @property
    def K(self):
        return self.a_plus_loop.K

    @property
    def thetas(self):
        return self.a_plus_loop.thetas

    @property
    def margin_tol(self):
        return self.a_plus_loop.margin_tol

    def _grid_index(self, theta):
        loop = self.a_plus_loop
        s = (theta - loop.offset) * loop.K / TWO_PI
        if abs(s - round(s)) < 1e-9:
            return int(round(s)) % loop.K
        return None

    def limit(self, theta, sign):
        loop = self.a_plus_loop if sign > 0 else self.a_minus_loop
        if loop.generator is not None:
            return as_matrix(loop.generator(theta))
        k = self._grid_index(theta)
        if k is None:
            raise InvalidInputError("tabulated jump system evaluated off its grid")
        return loop.samples[k]

    def coefficient(self, theta, n):
        return self.limit(theta, +1 if n >= 0 else -1)

    def splits(self, theta):
        k = self._grid_index(theta)
        if k is not None:
            return self.a_plus_loop.split(k), self.a_minus_loop.split(k)
        return (
            spectral_split(self.limit(theta, +1), self.margin_tol),
            spectral_split(self.limit(theta, -1), self.margin_tol),
        )

    def with_grid(self, K=None, offset=None):
        p, m = self.a_plus_loop, self.a_minus_loop
        K = p.K if K is None else K
        offset = p.offset if offset is None else offset
        if K == p.K:
            return JumpSystem(p.rotated(offset), m.rotated(offset))
        if p.generator is None or m.generator is None:
            raise InvalidInputError("resampling a tabulated jump system is not possible")
        return JumpSystem.from_generators(p.generator, m.generator, K, offset, p.margin_tol)

    def refined(self):
        return JumpSystem(self.a_plus_loop.refined(), self.a_minus_loop.refined())


def index_bundle_w1(jump):
    """w1 of the index bundle, the product of the w1 values of both stable bundles."""
    plus = certified_transport(jump.a_plus_loop, "stable")
    minus = certified_transport(jump.a_minus_loop, "stable")
    if plus.frames[0].k != minus.frames[0].k:
        raise NonzeroIndexError(
            f"stable dimensions differ ({plus.frames[0].k} vs {minus.frames[0].k}); index is not 0"
        )
    return w1_virtual(plus.w1, minus.w1)


def kernel_jump(jump, theta, tol=DEFAULT_TOL):
    """Frame of initial values x_0 of kernel sequences at ``theta``."""
    sp, sm = jump.splits(theta)
    return subspace_intersection(sp.stable_frame, sm.unstable_frame, tol)


def kernel_orbit(jump, theta, x0, n_minus, n_plus):
    """Kernel sequence x_{-n_minus} .. x_{n_plus} generated from ``x0``; rows are states.

    Iterates are re-projected onto E^s(+inf) going forward and E^u(-inf)
    going backward, so rounding in the complementary directions cannot grow.
    """
    sp, sm = jump.splits(theta)
    a_plus = sp.matrix
    a_minus_inv = np.linalg.inv(sm.matrix)
    x0 = np.asarray(x0, dtype=float)
    states = [x0]
    x = x0
    for _ in range(n_plus):
        x = sp.stable_projector @ (a_plus @ x)
        states.append(x)
    back = []
    x = x0
    for _ in range(n_minus):
        x = sm.unstable_projector @ (a_minus_inv @ x)
        back.append(x)
    return np.array(back[::-1] + states)


@dataclass(frozen=True, eq=False)
class CrossingTransports:
    """Aligned frames of E^s(+inf) and E^u(-inf) around one lap."""

    plus_stable: object
    minus_unstable: object = field(repr=False)

    @classmethod
    def compute(cls, jump):
        return cls(
            transport_frames(jump.a_plus_loop, "stable"),
            transport_frames(jump.a_minus_loop, "unstable"),
        )

    def grid_values(self):
        return np.array(
            [
                crossing_value(self.plus_stable.frames[k], self.minus_unstable.frames[k])
                for k in range(len(self.plus_stable.frames))
            ]
        )


def crossing_value(fs, fu):
    if fs.k + fu.k != fs.ambient_dim:
        raise InvalidInputError(
            f"dim E^s(+inf) + dim E^u(-inf) = {fs.k + fu.k} differs from N = {fs.ambient_dim}"
        )
    return float(np.linalg.det(np.hstack([fs.basis, fu.basis])))


def crossing_determinant(jump, theta, transported=None):
    """d(theta) = det[F^s_+(theta) | F^u_-(theta)] with transported frames."""
    if transported is None:
        transported = CrossingTransports.compute(jump)
    return crossing_value(
        transported.plus_stable.frame_at(theta), transported.minus_unstable.frame_at(theta)
    )


@dataclass(frozen=True)
class Crossing:
    """A sign change of d isolated in ``(lo, hi)``; ``estimate`` is the secant zero."""

    lo: float
    hi: float
    estimate: float

    def contains(self, theta):
        return self.lo <= theta <= self.hi


def _clusters(d, tol):
    """Group runs of near-zero grid values; yield (left, right) indices of the nonzero neighbours."""
    i, n = 0, len(d)
    while i < n - 1:
        if abs(d[i]) < tol:
            i += 1
            continue
        j = i + 1
        while j < n and abs(d[j]) < tol:
            j += 1
        if j == n:
            break
        yield i, j
        i = j


def count_sign_changes(d, tol=CROSSING_TOL):
    """Sign changes along grid values ``d``; near-zero runs are bridged by their neighbours.

    A near-zero run whose neighbours share a sign is a tangential touch and
    is rejected: the count mod 2 would depend on resolution.
    """
    d = np.asarray(d, dtype=float)
    if abs(d[0]) < tol or abs(d[-1]) < tol:
        raise InvertibilityError("crossing determinant vanishes at the base point")
    changes = []
    for i, j in _clusters(d, tol):
        if np.sign(d[i]) != np.sign(d[j]):
            changes.append((i, j))
        elif j > i + 1:
            raise InconsistentParityError(
                f"tangential zero of the crossing determinant between grid points {i} and {j}"
            )
    return changes


def locate_crossings(jump, transported=None, tol=CROSSING_TOL, width=BISECTION_WIDTH):
    """Bisect every grid sign change of d down to ``width``."""
    if transported is None:
        transported = CrossingTransports.compute(jump)
    thetas = jump.thetas
    d = transported.grid_values()
    can_refine = jump.a_plus_loop.generator is not None and jump.a_minus_loop.generator is not None
    found = []
    for i, j in count_sign_changes(d, tol):
        lo, hi, dlo, dhi = thetas[i], thetas[j], d[i], d[j]
        while can_refine and hi - lo > width:
            mid = 0.5 * (lo + hi)
            dm = crossing_determinant(jump, mid, transported)
            if dm == 0:
                lo = hi = mid
                dlo = dhi = 0.0
                break
            if np.sign(dm) == np.sign(dlo):
                lo, dlo = mid, dm
            else:
                hi, dhi = mid, dm
        est = lo if dhi == dlo else lo - dlo * (hi - lo) / (dhi - dlo)
        found.append(Crossing(float(lo), float(hi), float(est)))
    return found


@dataclass(frozen=True)
class ParityResult:
    parity: int
    by_crossings: int
    by_index_bundle: int
    crossings: int
    K: int


def parity_of_loop(jump, theta0=0.0, tol=CROSSING_TOL, kernel_tol=DEFAULT_TOL):
    """Parity of the loop of operators based at ``theta0``, computed two ways.

    Route A counts sign changes of the crossing determinant around the lap
    starting and ending at ``theta0``; route B multiplies the w1 values of
    the two stable bundles. The routes must agree.
    """
    based = jump.with_grid(offset=theta0)
    if kernel_jump(based, theta0, kernel_tol).k:
        raise InvertibilityError(f"operator at base angle {theta0} has a nontrivial kernel")
    route_b = index_bundle_w1(based)

    current = based
    while True:
        try:
            transported = CrossingTransports.compute(current)
            break
        except SamplingError:
            if current.a_plus_loop.generator is None or current.K * 2 > MAX_K:
                raise
            current = current.refined()
    d = transported.grid_values()
    if abs(d[0]) < tol:
        raise InvertibilityError(f"crossing determinant {d[0]:.3e} vanishes at the base angle")
    n_changes = len(count_sign_changes(d, tol))
    route_a = (-1) ** n_changes
    # same bookkeeping from the endpoint values; disagreement means skipped zeros
    if int(np.sign(d[0]) * np.sign(d[-1])) != route_a:
        raise InconsistentParityError("sign-change count disagrees with endpoint signs")
    if route_a != route_b:
        raise InconsistentParityError(
            f"parity by crossings ({route_a}) differs from w1 of the index bundle ({route_b})"
        )
    return ParityResult(route_a, route_a, route_b, n_changes, current.K)


@dataclass(frozen=True, eq=False)
class FiniteSection:
    theta: float
    n_minus: int
    n_plus: int
    matrix: np.ndarray
    boundary: str

    @property
    def sigma_min(self):
        return float(np.linalg.svd(self.matrix, compute_uv=False)[-1])

    def null_dimension(self, cutoff=1e-8):
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(self.matrix.shape[1] - np.sum(s >= cutoff))


def boundary_blocks(system, theta, margin_tol=DEFAULT_MARGIN_TOL, reference=None):
    """Rows imposing P^s(-inf) x = 0 (left end) and P^u(+inf) x = 0 (right end)."""
    sp = spectral_split(system.limit(theta, +1), margin_tol)
    sm = spectral_split(system.limit(theta, -1), margin_tol)
    ref_left, ref_right = (None, None) if reference is None else reference
    left = row_basis(sm.stable_projector, sm.stable_dim, ref_left)
    right = row_basis(sp.unstable_projector, sp.unstable_dim, ref_right)
    return left, right


def assemble_section(system, theta, n_minus, n_plus, jacobians, boundary="both", blocks=None):
    """Square (when index is 0) block matrix: interior rows ``x_{n+1} - J_n x_n`` then boundary rows."""
    N = jacobians[0].shape[0]
    m = n_minus + n_plus
    size = N * (m + 1)
    left, right = blocks if blocks is not None else boundary_blocks(system, theta)
    rows = [np.zeros((N * m, size))]
    interior = rows[0]
    for j in range(m):
        interior[j * N:(j + 1) * N, j * N:(j + 1) * N] = -jacobians[j]
        interior[j * N:(j + 1) * N, (j + 1) * N:(j + 2) * N] = np.eye(N)
    if boundary in ("both", "left"):
        b = np.zeros((left.shape[0], size))
        b[:, :N] = left
        rows.append(b)
    if boundary in ("both", "right"):
        b = np.zeros((right.shape[0], size))
        b[:, size - N:] = right
        rows.append(b)
    return np.vstack(rows)


def finite_section(system, theta, n_minus, n_plus, boundary="both", margin_tol=DEFAULT_MARGIN_TOL):
    """Truncation of L_theta to states x_{-n_minus} .. x_{n_plus}.

    ``boundary`` selects which projection rows are kept: ``"both"``,
    ``"left"``, ``"right"`` or ``"none"``. Dropping the left rows gives the
    one-sided operator on n >= -n_minus whose kernel is the stable subspace.
    """
    if n_minus < 0 or n_plus < 1:
        raise InvalidInputError("need n_minus >= 0 and n_plus >= 1")
    if boundary not in ("both", "left", "right", "none"):
        raise InvalidInputError(f"unknown boundary selection {boundary!r}")
    jac = [as_matrix(system.coefficient(theta, n)) for n in range(-n_minus, n_plus)]
    blocks = boundary_blocks(system, theta, margin_tol)
    matrix = assemble_section(system, theta, n_minus, n_plus, jac, boundary, blocks)
    return FiniteSection(float(theta), n_minus, n_plus, matrix, boundary)


class SingleMatrixSystem:
    """Autonomous system a_n = a for every n."""

    def __init__(self, a):
        self.a = as_matrix(a)

    def coefficient(self, theta, n):
        return self.a

    def limit(self, theta, sign):
        return self.a


def kernel_is_trivial(jump, theta, tol=DEFAULT_TOL):
    return kernel_jump(jump, theta, tol).k == 0


def grid_kernel_dimensions(jump, tol=DEFAULT_TOL):
    return [kernel_jump(jump, jump.a_plus_loop.theta(k), tol).k for k in range(jump.K)]

