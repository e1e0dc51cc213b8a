"""Nonlinear families x_{n+1} = f_n(theta, x_n), bifurcation detection, and orbit solves."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    HombifError,
    InvalidInputError,
    NonConvergenceError,
    OutOfRegimeError,
)
from .fredholm import (
    CROSSING_TOL,
    CrossingTransports,
    JumpSystem,
    assemble_section,
    boundary_blocks,
    finite_section,
    index_of_family,
    kernel_jump,
    kernel_orbit,
    locate_crossings,
    parity_of_loop,
)
from .hyperbolic import DEFAULT_MARGIN_TOL, spectral_split, stable_dimensions_equal, verify_asymptotics
from .linalg import as_matrix, min_singular_value
from .loopbundle import DEFAULT_K, TWO_PI, certified_transport

FD_STEP = 1e-7
EPS_CAP = 0.1
NEWTON_TOL = 1e-10
NEWTON_STEP_TOL = 1e-12
NEWTON_MAX_ITER = 50


class Nonlinearity:
    """h_n(theta, x) with h_n(theta, 0) = 0. ``derivative`` returning None means no analytic Jacobian."""

    def value(self, theta, n, x):
        raise NotImplementedError

    def derivative(self, theta, n, x):
        return None

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class CubicNonlinearity(Nonlinearity):
    """h_n(theta, x) = c * rho^|n| * (x_1^3, ..., x_N^3)."""

    c: float = 1.0
    rho: float = 0.5

    def value(self, theta, n, x):
        return self.c * self.rho ** abs(n) * x**3

    def derivative(self, theta, n, x):
        return np.diag(3 * self.c * self.rho ** abs(n) * x**2)

    def to_dict(self):
        return {"kind": "cubic", "c": self.c, "rho": self.rho}


@dataclass(frozen=True)
class RadialNonlinearity(Nonlinearity):
    """h_n(theta, x) = c * rho^|n| * (1 + cos(theta)/2) * |x|^2 x; couples components."""

    c: float = 1.0
    rho: float = 0.5

    def _scale(self, theta, n):
        return self.c * self.rho ** abs(n) * (1 + 0.5 * math.cos(theta))

    def value(self, theta, n, x):
        return self._scale(theta, n) * (x @ x) * x

    def derivative(self, theta, n, x):
        return self._scale(theta, n) * ((x @ x) * np.eye(x.size) + 2 * np.outer(x, x))

    def to_dict(self):
        return {"kind": "radial", "c": self.c, "rho": self.rho}


@dataclass(frozen=True)
class BlackBox(Nonlinearity):
    """Wraps a bare callable; Jacobians fall back to central differences."""

    func: Callable = None

    def value(self, theta, n, x):
        return np.asarray(self.func(theta, n, x), dtype=float)

    def to_dict(self):
        return {"kind": "callable"}


NONLINEARITIES = {"cubic": CubicNonlinearity, "radial": RadialNonlinearity}


@dataclass(frozen=True, eq=False)
class SystemFamily:
    """f_n(theta, x) = a_n(theta) x + h_n(theta, x).

    ``a_n = a_plus(theta) + tail(theta, n)`` for ``n >= 0`` and
    ``a_minus(theta) + tail(theta, n)`` for ``n < 0``; ``tail`` must decay
    like ``decay_rate^|n|``.
    """

    name: str
    dim: int
    a_plus: Callable[[float], np.ndarray]
    a_minus: Callable[[float], np.ndarray]
    tail: Optional[Callable[[float, int], np.ndarray]] = None
    nonlinearity: Optional[Nonlinearity] = None
    decay_rate: float = 0.5
    bound: float = 1.0
    margin_tol: float = DEFAULT_MARGIN_TOL
    grid: Optional[int] = None  # tabulated families are exact only on this grid

    def limit(self, theta, sign):
        return as_matrix(self.a_plus(theta) if sign > 0 else self.a_minus(theta))

    def coefficient(self, theta, n):
        a = self.limit(theta, +1 if n >= 0 else -1)
        if self.tail is not None:
            a = a + self.tail(theta, n)
        return a

    def f(self, theta, n, x):
        x = np.asarray(x, dtype=float)
        y = self.coefficient(theta, n) @ x
        if self.nonlinearity is not None:
            y = y + self.nonlinearity.value(theta, n, x)
        return y

    def df(self, theta, n, x, method="analytic"):
        """D_x f_n(theta, x); central differences when asked or when no analytic form exists."""
        x = np.asarray(x, dtype=float)
        a = self.coefficient(theta, n)
        if self.nonlinearity is None:
            return a
        dh = None if method == "fd" else self.nonlinearity.derivative(theta, n, x)
        if dh is None:
            dh = np.empty((self.dim, self.dim))
            for j in range(self.dim):
                e = np.zeros(self.dim)
                e[j] = FD_STEP
                dh[:, j] = (self.nonlinearity.value(theta, n, x + e) - self.nonlinearity.value(theta, n, x - e)) / (
                    2 * FD_STEP
                )
        return a + dh

    @property
    def is_linear(self):
        return self.nonlinearity is None

    def jump(self, K=DEFAULT_K, offset=0.0):
        """Jump form with the same limits: a_n replaced by a(theta, sign(n) inf).

        Cached per grid so repeated calls share loop splittings.
        """
        cache = self.__dict__.setdefault("_jumps", {})
        key = (K, offset)
        if key not in cache:
            cache[key] = JumpSystem.from_generators(self.a_plus, self.a_minus, K, offset, self.margin_tol)
        return cache[key]

    def linearization(self):
        return SystemFamily(
            self.name + ":linear",
            self.dim,
            self.a_plus,
            self.a_minus,
            self.tail,
            None,
            self.decay_rate,
            self.bound,
            self.margin_tol,
            self.grid,
        )


# ---------------------------------------------------------------- assumptions


@dataclass(frozen=True)
class Diagnostic:
    name: str
    passed: bool
    witness: float
    message: str

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "witness": self.witness, "message": self.message}


def _grid(family, K):
    if family.grid is not None:
        K = family.grid
    return TWO_PI * np.arange(K) / K


def validate_assumptions(family, theta0=0.0, K=32, n_max=64, decay_tol=1e-8, n_section=None,
                         lipschitz_bound=1e4, derivative_bound=1e6, seed=0):
    """Sampled evidence for the standing hypotheses; one diagnostic per check."""
    rng = np.random.default_rng(seed)
    thetas = _grid(family, K)
    ns = list(range(-n_max, n_max + 1))
    out = []

    # a_n(theta) 0 = 0 identically, so only h_n(theta, 0) can spoil A0
    zero = np.zeros(family.dim)
    a0 = 0.0
    if family.nonlinearity is not None:
        a0 = max(np.abs(family.nonlinearity.value(t, n, zero)).max() for t in thetas for n in ns)
    out.append(Diagnostic("A0", bool(a0 <= 1e-14), float(a0), "f_n(theta, 0) = 0 on the sampled grid"))

    # probe points in the declared ball, small joint perturbations in (theta, x)
    delta = 1e-6
    probe_ns = sorted(set([-n_max, -3, -1, 0, 1, 3, n_max]))
    worst_mod, worst_d = 0.0, 0.0
    for _ in range(8):
        x = rng.uniform(-1, 1, family.dim)
        x *= family.bound * rng.uniform() / max(np.linalg.norm(x), 1e-300)
        dx = rng.standard_normal(family.dim)
        dx *= delta / np.linalg.norm(dx)
        step_theta = delta if family.grid is None else 0.0
        for t in thetas[:: max(1, len(thetas) // 8)]:
            for n in probe_ns:
                j1 = family.df(t, n, x)
                j2 = family.df(t + step_theta, n, x + dx)
                f1 = family.f(t, n, x)
                f2 = family.f(t + step_theta, n, x + dx)
                mod = max(np.linalg.norm(j1 - j2, 2), np.linalg.norm(f1 - f2)) / delta
                worst_mod = max(worst_mod, mod)
                worst_d = max(worst_d, np.linalg.norm(j1, 2))
    out.append(
        Diagnostic("A1", bool(np.isfinite(worst_mod) and worst_mod < lipschitz_bound), float(worst_mod),
                   "sampled modulus of continuity of f and D_x f, uniform over probed n")
    )
    out.append(
        Diagnostic("A2", bool(np.isfinite(worst_d) and worst_d < derivative_bound), float(worst_d),
                   f"sup |D_x f| over the ball of radius {family.bound}")
    )

    try:
        worst_tail, same_dims = 0.0, True
        for t in thetas:
            lim = verify_asymptotics(family, t, n_max, decay_tol, family.margin_tol)
            worst_tail = max(worst_tail, lim.tail)
            same_dims &= stable_dimensions_equal(lim.a_plus, lim.a_minus, family.margin_tol)
        ok = same_dims
        msg = "limits hyperbolic, tails decay" + ("" if same_dims else "; stable dimensions at +inf and -inf differ")
        out.append(Diagnostic("A3", ok, float(worst_tail), msg))
    except HombifError as exc:
        out.append(Diagnostic("A3", False, float(getattr(exc, "tail", getattr(exc, "modulus", math.nan))), str(exc)))

    try:
        n1 = n_section or truncation_lengths(family, 1e-10, K)[0]
        lin = family.linearization()
        s1 = finite_section(lin, theta0, n1, n1, margin_tol=family.margin_tol).sigma_min
        s2 = finite_section(lin, theta0, 2 * n1, 2 * n1, margin_tol=family.margin_tol).sigma_min
        w = min(s1, s2)
        msg = f"finite sections at {n1} and {2 * n1} steps invertible"
        if w <= 1e-6:
            msg = "linearization at the base angle has a kernel; choose a different base angle"
        out.append(Diagnostic("A4", w > 1e-6, float(w), msg))
    except HombifError as exc:
        out.append(Diagnostic("A4", False, math.nan, str(exc)))
    return out


# ------------------------------------------------------------------ detection


@dataclass
class ScanRow:
    theta: float
    d: float
    sigma_min: float


@dataclass
class ScanResult:
    rows: list
    crossings: list
    K: int


@dataclass
class OrbitSegment:
    theta: float
    n_minus: int
    n_plus: int
    states: np.ndarray
    amplitude: float
    residual: float
    eps: float = math.nan
    iterations: int = 0

    @property
    def indices(self):
        return np.arange(-self.n_minus, self.n_plus + 1)


@dataclass
class BifurcationReport:
    system: str
    w1_plus: int
    w1_minus: int
    index: int
    parity: int
    criterion_met: bool
    K: int
    theta0: float
    scan: list = field(default_factory=list)
    located: list = field(default_factory=list)
    branches: list = field(default_factory=list)

    def summary(self):
        lines = [
            f"system: {self.system}",
            f"w1(E^s(+inf)) = {self.w1_plus:+d}",
            f"w1(E^s(-inf)) = {self.w1_minus:+d}",
            f"index = {self.index}",
            f"parity = {self.parity:+d}",
            "criterion met: homoclinic orbits of every small amplitude exist and a bifurcation point lies on the circle"
            if self.criterion_met
            else "criterion not met",
        ]
        for c in self.located:
            lines.append(f"sign change of d in [{c.lo:.12f}, {c.hi:.12f}] (estimate {c.estimate:.12f})")
        for b in self.branches:
            lines.append(f"eps = {b.eps:.3e}: theta = {b.theta:.12f}, sup norm = {b.amplitude:.6e}, residual = {b.residual:.2e}")
        return "\n".join(lines)

    def to_dict(self):
        return {
            "system": self.system,
            "w1_plus": self.w1_plus,
            "w1_minus": self.w1_minus,
            "index": self.index,
            "parity": self.parity,
            "criterion_met": self.criterion_met,
            "K": self.K,
            "theta0": self.theta0,
            "located": [{"lo": c.lo, "hi": c.hi, "estimate": c.estimate} for c in self.located],
            "branches": [
                {"eps": b.eps, "theta": b.theta, "sup_norm": b.amplitude, "residual": b.residual, "iterations": b.iterations}
                for b in self.branches
            ],
        }


def detect(family, K=DEFAULT_K, theta0=0.0):
    jump = family.jump(K)
    plus = certified_transport(jump.a_plus_loop, "stable")
    minus = certified_transport(jump.a_minus_loop, "stable")
    index = index_of_family(family.limit(theta0, +1), family.limit(theta0, -1), family.margin_tol)
    parity = parity_of_loop(jump, theta0).parity if index == 0 else 1
    return BifurcationReport(
        system=family.name,
        w1_plus=plus.w1,
        w1_minus=minus.w1,
        index=index,
        parity=parity,
        criterion_met=plus.w1 != minus.w1,
        K=K,
        theta0=theta0,
    )


def scan(family, K=DEFAULT_K, n_minus=20, n_plus=20, crossing_tol=CROSSING_TOL):
    """Crossing determinant of the jump form and sigma_min of the linearized sections at each grid angle."""
    jump = family.jump(K)
    transported = CrossingTransports.compute(jump)
    d = transported.grid_values()
    lin = family.linearization()
    rows = []
    for k, t in enumerate(jump.thetas):
        s = finite_section(lin, t, n_minus, n_plus, margin_tol=family.margin_tol).sigma_min
        rows.append(ScanRow(float(t), float(d[k]), s))
    crossings = locate_crossings(jump, transported, crossing_tol)
    return ScanResult(rows, crossings, K)


def truncation_lengths(family, tol=1e-10, K=DEFAULT_K):
    """Smallest n with rho_eff^n < tol, rho_eff the slowest decay rate over the grid."""
    rho = 0.0
    for t in _grid(family, K):
        for sign in (1, -1):
            rho = max(rho, spectral_split(family.limit(t, sign), family.margin_tol).rate)
    if rho < tol:
        return 1, 1
    n = max(1, math.floor(math.log(tol) / math.log(rho)))
    # guard the float log ratio on both sides
    while rho**n >= tol:
        n += 1
    while n > 1 and rho ** (n - 1) < tol:
        n -= 1
    return n, n


# ------------------------------------------------------------------ BVP solve


def _states(x, n_minus, n_plus, dim):
    x = np.asarray(x, dtype=float)
    if x.shape != (n_minus + n_plus + 1, dim):
        x = x.reshape(n_minus + n_plus + 1, dim)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("non-finite state in orbit segment")
    return x


def residual(family, theta, states, n_minus, n_plus, blocks=None):
    """Interior equations x_{n+1} - f_n(theta, x_n), then left and right projection rows."""
    x = _states(states, n_minus, n_plus, family.dim)
    left, right = blocks if blocks is not None else boundary_blocks(family, theta, family.margin_tol)
    r = [x[j + 1] - family.f(theta, n, x[j]) for j, n in enumerate(range(-n_minus, n_plus))]
    out = np.concatenate(r + [left @ x[0], right @ x[-1]])
    if not np.all(np.isfinite(out)):
        raise InvalidInputError("residual evaluation produced non-finite values")
    return out


def jacobian(family, theta, states, n_minus, n_plus, method="analytic", blocks=None):
    x = _states(states, n_minus, n_plus, family.dim)
    jac = [family.df(theta, n, x[j], method) for j, n in enumerate(range(-n_minus, n_plus))]
    if blocks is None:
        blocks = boundary_blocks(family, theta, family.margin_tol)
    return assemble_section(family, theta, n_minus, n_plus, jac, "both", blocks)


def _theta_derivative(family, theta, x, n_minus, n_plus, blocks, h=1e-6):
    # boundary rows are carried continuously from the current ones
    bp = boundary_blocks(family, theta + h, family.margin_tol, reference=blocks)
    bm = boundary_blocks(family, theta - h, family.margin_tol, reference=blocks)
    return (residual(family, theta + h, x, n_minus, n_plus, bp) - residual(family, theta - h, x, n_minus, n_plus, bm)) / (2 * h)


def kernel_direction(family, theta, n_minus, n_plus):
    """Unit-sup-norm linear kernel orbit at ``theta``.

    Jump-form families reconstruct it from E^s(+inf) ∩ E^u(-inf); families
    with a coefficient tail use the smallest right singular vector of the
    linearized finite section.
    """
    if family.tail is None:
        jump = family.jump(4)
        frame = kernel_jump(jump, theta, tol=1e-6)
        if frame.k == 0:
            raise OutOfRegimeError(f"no kernel direction at theta = {theta}")
        phi = kernel_orbit(jump, theta, frame.basis[:, 0], n_minus, n_plus)
    else:
        m = finite_section(family.linearization(), theta, n_minus, n_plus, margin_tol=family.margin_tol).matrix
        phi = np.linalg.svd(m)[2][-1].reshape(n_minus + n_plus + 1, family.dim)
    phi = phi / np.abs(phi).max()
    i = np.unravel_index(np.argmax(np.abs(phi)), phi.shape)
    return phi if phi[i] > 0 else -phi


def _newton(family, theta, x, phi, target, n_minus, n_plus, tol, step_tol, max_iter):
    n_state = x.size
    flat_phi = phi.ravel()
    res_norm = math.inf
    for it in range(1, max_iter + 1):
        blocks = boundary_blocks(family, theta, family.margin_tol)
        r = np.append(residual(family, theta, x, n_minus, n_plus, blocks), flat_phi @ x.ravel() - target)
        jx = jacobian(family, theta, x, n_minus, n_plus, blocks=blocks)
        jt = _theta_derivative(family, theta, x, n_minus, n_plus, blocks)
        jac = np.zeros((n_state + 1, n_state + 1))
        jac[:-1, :-1] = jx
        jac[:-1, -1] = jt
        jac[-1, :-1] = flat_phi
        step = np.linalg.solve(jac, -r)
        x = x + step[:-1].reshape(x.shape)
        theta = theta + step[-1]
        res_norm = np.abs(residual(family, theta, x, n_minus, n_plus)).max()
        if not np.isfinite(res_norm):
            break
        if res_norm < tol and np.abs(step).max() < step_tol:
            return theta, x, res_norm, it
    raise NonConvergenceError(
        f"Newton did not converge in {max_iter} iterations (last residual {res_norm:.3e})", res_norm, max_iter
    )


def branch_solve(family, crossing, eps, n_minus=40, n_plus=40, tol=NEWTON_TOL, step_tol=NEWTON_STEP_TOL,
                 max_iter=NEWTON_MAX_ITER, eps_cap=EPS_CAP, amplitude_rtol=1e-10):
    """Homoclinic orbit with sup norm ``eps`` near the isolated crossing.

    Newton runs on (states, theta) with the linear constraint
    <x, phi> = c <phi, phi>, phi the kernel direction at the crossing; c is
    then rescaled until the realized sup norm equals ``eps``.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    if eps > eps_cap:
        raise OutOfRegimeError(f"eps = {eps} exceeds the cap {eps_cap}")
    theta_star = crossing.estimate if hasattr(crossing, "estimate") else float(crossing)
    phi = kernel_direction(family, theta_star, n_minus, n_plus)
    pp = float(phi.ravel() @ phi.ravel())

    theta, x, c = theta_star, eps * phi, eps
    total = 0
    for _ in range(30):
        theta, x, res, its = _newton(family, theta, x, phi, c * pp, n_minus, n_plus, tol, step_tol, max_iter)
        total += its
        sup = float(np.abs(x).max())
        if sup == 0:
            raise NonConvergenceError("Newton collapsed onto the trivial orbit", res, total)
        if abs(sup - eps) <= amplitude_rtol * eps:
            break
        c *= eps / sup
        x = x * (eps / sup)
    else:
        raise NonConvergenceError("amplitude rescaling did not settle", res, total)
    return OrbitSegment(float(theta), n_minus, n_plus, x, sup, float(res), float(eps), total)


def solve_branch(family, crossing, eps_list, n_minus=40, n_plus=40, **kw):
    return [branch_solve(family, crossing, e, n_minus, n_plus, **kw) for e in eps_list]


def orbit_residual(family, segment):
    """Independent pointwise check of the orbit equations."""
    x = segment.states
    return max(
        float(np.abs(x[j + 1] - family.f(segment.theta, n, x[j])).max())
        for j, n in enumerate(range(-segment.n_minus, segment.n_plus))
    )
