"""Acceptance criteria, one test per criterion, at the stated tolerances.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from hombif import catalog, homoclinic
from hombif.cli import GOLDEN, run_verify_example
from hombif.config import RunConfig
from hombif.fredholm import (
    BISECTION_WIDTH,
    SingleMatrixSystem,
    finite_section,
    index_of_family,
    kernel_jump,
    locate_crossings,
    parity_of_loop,
)
from hombif.loopbundle import MatrixLoop, transport_frames
from hombif.randomized import random_hyperbolic, random_jump_system, random_loop


def catalog_loops(K):
    for name in catalog.CATALOG:
        fam = catalog.get(name)
        jump = fam.jump(K)
        yield f"{name}[+inf]", jump.a_plus_loop
        yield f"{name}[-inf]", jump.a_minus_loop


@pytest.mark.criterion(1)
def test_worked_example_golden_run():
    """worked example reproduces w1 values, index, parity and criterion at K=64 in under 1 s"""
    cfg = RunConfig("paper_example_s7", K=64)
    t0 = time.perf_counter()
    report, mismatches = run_verify_example(cfg, None)
    elapsed = time.perf_counter() - t0
    assert mismatches == []
    assert (report.w1_plus, report.w1_minus, report.index, report.parity) == (-1, 1, 0, -1)
    assert report.criterion_met is True
    assert {k: getattr(report, k) for k in GOLDEN} == GOLDEN
    assert report.K == 64
    assert elapsed < 1.0, f"took {elapsed:.3f} s"


@pytest.mark.criterion(2)
def test_example_eigenvalues():
    """example matrix has eigenvalues 1/2 and 2 at 64 sampled angles within 1e-10"""
    for theta in 2 * math.pi * np.arange(64) / 64:
        ev = np.sort(np.linalg.eigvals(catalog.paper_matrix(theta)).real)
        assert np.abs(ev - [0.5, 2.0]).max() < 1e-10


@pytest.mark.criterion(3)
def test_kernel_locus():
    """kernel is one dimensional in the bisected interval around pi and trivial elsewhere, K=1024"""
    jump = catalog.get("paper_example_s7").jump(1024)
    crossings = locate_crossings(jump)
    assert len(crossings) == 1
    c = crossings[0]
    assert c.contains(math.pi)
    assert c.hi - c.lo <= 2 * math.pi / 2**20
    assert BISECTION_WIDTH == 2 * math.pi / 2**20
    for theta in (c.lo, c.estimate, c.hi):
        assert kernel_jump(jump, theta).k == 1
    for k, theta in enumerate(jump.thetas[:-1]):
        if not c.contains(theta):
            assert kernel_jump(jump, theta).k == 0, f"grid point {k}"


@pytest.mark.criterion(4)
def test_crossing_determinant_matches_cosine():
    """scan d column equals cos(theta/2) within 1e-8 at K=256"""
    fam = catalog.get("paper_example_s7")
    result = homoclinic.scan(fam, K=256, n_minus=8, n_plus=8)
    assert len(result.rows) == 257
    for row in result.rows:
        assert abs(row.d - math.cos(row.theta / 2)) < 1e-8


@pytest.mark.criterion(5)
def test_parity_routes_agree_on_random_jump_systems():
    """crossing count and index-bundle w1 agree on 100 random jump systems, N in {2,3,4}"""
    rng = np.random.default_rng(20240501)
    disagreements = []
    for trial in range(100):
        n = (2, 3, 4)[trial % 3]
        jump, plus, minus = random_jump_system(rng, n, K=64, margin=0.1, min_base=0.1)
        res = parity_of_loop(jump, 0.0)
        if res.by_crossings != res.by_index_bundle:
            disagreements.append(trial)
    assert disagreements == []


@pytest.mark.criterion(6)
def test_index_formula_on_random_pairs():
    """index equals the constructed stable-dimension difference on 100 random pairs"""
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        kp, km = int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))
        a_plus = random_hyperbolic(rng, n, kp)
        a_minus = random_hyperbolic(rng, n, km)
        assert index_of_family(a_plus, a_minus) == kp - km


@pytest.mark.criterion(7)
def test_whitney_sum_triviality():
    """w1(stable) * w1(unstable) = +1 for every catalog loop and 30 random loops"""
    loops = list(catalog_loops(64))
    rng = np.random.default_rng(99)
    for i in range(30):
        loop, _ = random_loop(rng, (2, 3, 4)[i % 3], K=64)
        loops.append((f"random{i}", loop))
    for name, loop in loops:
        ws = transport_frames(loop, "stable").w1
        wu = transport_frames(loop, "unstable").w1
        assert ws * wu == 1, name


@pytest.mark.criterion(8)
def test_refinement_stability():
    """w1 at K and 2K agree for all catalog loops, K in {16, 32, 64}"""
    for K in (16, 32, 64):
        for name, loop in catalog_loops(K):
            for which in ("stable", "unstable"):
                coarse = transport_frames(loop, which).w1
                fine = transport_frames(loop.refined(), which).w1
                assert coarse == fine, (name, K, which)


@pytest.mark.criterion(9)
def test_one_sided_section_null_space():
    """one-sided truncated operator has null-space dimension dim E^s for 20 random matrices"""
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(0, n + 1))
        a = random_hyperbolic(rng, n, k)
        section = finite_section(SingleMatrixSystem(a), 0.0, 0, 40, boundary="right")
        assert section.null_dimension(cutoff=1e-8) == k


@pytest.fixture(scope="module")
def cubic_branch():
    fam = catalog.get("paper_example_s7_cubic", {"c": 1.0, "rho": 0.5})
    crossing = homoclinic.scan(fam, K=64, n_minus=40, n_plus=40).crossings[0]
    t0 = time.perf_counter()
    segs = [homoclinic.branch_solve(fam, crossing, eps, 40, 40) for eps in (1e-2, 1e-3, 1e-4)]
    return fam, crossing, segs, time.perf_counter() - t0


@pytest.mark.criterion(10)
def test_bifurcating_branch(cubic_branch):
    """cubic branch: residual < 1e-10, sup norm within 1%, lambda(1e-4) closer to lambda* than lambda(1e-2), < 10 s"""
    fam, crossing, segs, elapsed = cubic_branch
    lam_star = crossing.estimate
    for seg in segs:
        assert seg.residual < 1e-10
        assert homoclinic.orbit_residual(fam, seg) < 1e-10
        assert abs(seg.amplitude - seg.eps) <= 0.01 * seg.eps
    assert elapsed < 10.0
    # strict clause as stated; on this family the branch sits exactly on lambda*
    assert abs(segs[2].theta - lam_star) < abs(segs[0].theta - lam_star), (
        f"|lambda(1e-4) - lambda*| = {abs(segs[2].theta - lam_star):.3e}, "
        f"|lambda(1e-2) - lambda*| = {abs(segs[0].theta - lam_star):.3e}"
    )


@pytest.mark.criterion(11)
def test_truncation_insensitivity(cubic_branch):
    """doubling n from 40 to 80 moves the eps=1e-3 orbit by < 1e-8 in sup norm"""
    fam, crossing, segs, _ = cubic_branch
    short = segs[1]
    long = homoclinic.branch_solve(fam, crossing, 1e-3, 80, 80)
    overlap = long.states[40:121]
    assert overlap.shape == short.states.shape
    assert np.abs(overlap - short.states).max() < 1e-8
    assert np.abs(long.states[:40]).max() < 1e-8 and np.abs(long.states[121:]).max() < 1e-8


def _fd_jacobian(fam, theta, x, n, h=1e-6):
    flat = x.ravel()
    blocks = homoclinic.boundary_blocks(fam, theta, fam.margin_tol)
    cols = []
    for j in range(flat.size):
        e = np.zeros_like(flat)
        e[j] = h
        rp = homoclinic.residual(fam, theta, flat + e, n, n, blocks)
        rm = homoclinic.residual(fam, theta, flat - e, n, n, blocks)
        cols.append((rp - rm) / (2 * h))
    return np.array(cols).T


@pytest.mark.criterion(12)
def test_jacobian_against_finite_differences():
    """analytic and central-difference Jacobians agree to 1e-6 relative on 50 random states per catalog system"""
    rng = np.random.default_rng(11)
    n = 4
    for name in catalog.CATALOG:
        fam = catalog.get(name)
        for _ in range(50):
            theta = rng.uniform(0, 2 * math.pi)
            x = rng.uniform(-0.5, 0.5, (2 * n + 1, fam.dim))
            ja = homoclinic.jacobian(fam, theta, x, n, n)
            jf = _fd_jacobian(fam, theta, x, n)
            rel = np.abs(ja - jf).max() / np.abs(ja).max()
            assert rel < 1e-6, (name, rel)
