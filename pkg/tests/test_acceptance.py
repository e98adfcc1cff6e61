"""Acceptance gate: every release criterion at its stated tolerance.

Each test prints one pass/fail line (also echoed in the terminal summary)
and enforces its runtime budget.  Tolerances are pinned here and nowhere
else; nothing is deferred to calibration.
"""

import math
import time

import numpy as np

from freecalc import (
    MatrixTuple,
    SuiteConfig,
    alpha,
    build_shift_form,
    conjugate,
    derivative,
    derivative_fd,
    direct_sum,
    directsum_derivative_check,
    eval_map,
    hessian,
    implicit_solve,
    injectivity_probe,
    level_index,
    newton_invert,
    parse_map,
    polydisk,
    random_invertible,
    random_tuple,
    random_unitary,
    run_suite,
    sizeshift_check,
    sizeshift_refined_check,
    zero_tuple,
)
from freecalc.expr import EvalStats
from freecalc.shift import _shift_matrix
from freecalc.linalg import op_norm

from conftest import ACCEPTANCE_LINES
from helpers import map_pool, random_poly_map


def _record(num: int, name: str, ok: bool, elapsed: float, budget: float) -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"criterion {num} ({name}): {verdict} [{elapsed:.1f}s of {budget:.0f}s budget]"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_dilation_derivative_exactness():
    budget, start = 30.0, time.perf_counter()
    ok = True
    rng = np.random.default_rng(101)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        r = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        f = random_poly_map(rng, d, r, max_degree=4)
        x = random_tuple(d, n, rng, target_norm=float(rng.uniform(0.4, 0.8)))
        h = random_tuple(d, n, rng, target_norm=1.0)
        stats = EvalStats()
        exact = derivative(f, x, h, stats=stats)
        fd = derivative_fd(f, x, h, t=1e-5, stats=stats)
        scale = 1.0 + stats.max_norm
        if (exact - fd).norm() > 1e-3 * scale:
            ok = False
            break
        d1 = derivative(f, x, h, eps=1.0)
        d8 = derivative(f, x, h, eps=0.125)
        if (d1 - d8).norm() > 1e-10:
            ok = False
            break
    elapsed = time.perf_counter() - start
    _record(1, "dilation derivative exactness", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def test_criterion_2_hessian_formula():
    budget, start = 30.0, time.perf_counter()
    ok = True
    rng = np.random.default_rng(202)
    for _ in range(100):
        d = int(rng.integers(1, 3))
        f = random_poly_map(rng, d, r=int(rng.integers(1, 3)), max_degree=4)
        n = int(rng.integers(1, 4))
        x = random_tuple(d, n, rng, target_norm=float(rng.uniform(0.3, 0.7)))
        h = random_tuple(d, n, rng, target_norm=1.0)
        k = random_tuple(d, n, rng, target_norm=1.0)
        stats = EvalStats()
        exact = hessian(f, x, h, k, stats=stats)
        t = 1e-4
        oracle = (derivative(f, x + t * k, h, stats=stats) - derivative(f, x, h, stats=stats)) * (
            1.0 / t
        )
        scale = 1.0 + stats.max_norm
        if (exact - oracle).norm() > 1e-2 * scale:
            ok = False
            break
    # The square recovers hk + kh to machine precision.
    square = parse_map(["x1^2"], 1)
    for seed in range(20):
        x = random_tuple(1, 3, seed=seed, target_norm=0.8)
        h = random_tuple(1, 3, seed=seed + 100, target_norm=1.0)
        k = random_tuple(1, 3, seed=seed + 200, target_norm=1.0)
        expected = MatrixTuple([h[0] @ k[0] + k[0] @ h[0]])
        if (hessian(square, x, h, k) - expected).norm() > 1e-12:
            ok = False
            break
    elapsed = time.perf_counter() - start
    _record(2, "hessian block formula", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def test_criterion_3_nc_axiom_suites():
    budget, start = 30.0 + 30.0, time.perf_counter()
    pool = map_pool()
    per_map = math.ceil(500 / len(pool))
    ok = True
    for suite in ("directsum", "intertwine"):
        total = 0
        for i, f in enumerate(pool):
            config = SuiteConfig(
                seed=303 + i, trials=per_map, dims=(1, 2, 3), cond_cap=10.0, tol=1e-8
            )
            report = run_suite(suite, f, config)
            total += report.trials
            if report.failures > 0:
                ok = False
        assert total >= 500
    elapsed = time.perf_counter() - start
    _record(3, "direct-sum and intertwining suites", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def test_criterion_4_direct_sum_derivative_identity():
    budget, start = 60.0, time.perf_counter()
    ok = True
    rng = np.random.default_rng(404)
    for _ in range(100):
        d = int(rng.integers(1, 3))
        f = random_poly_map(rng, d, r=d, max_degree=3)
        count = int(rng.integers(2, 4))
        points = [
            random_tuple(d, int(rng.integers(1, 3)), rng, target_norm=0.6)
            for _ in range(count)
        ]
        hs = [random_tuple(d, p.n, rng, target_norm=1.0) for p in points]
        chk = directsum_derivative_check(f, points, hs, tol_identity=1e-9, tol_sigma=1e-7)
        if not (chk.identity_ok and chk.equality_ok and chk.inequality_ok):
            ok = False
            break
    elapsed = time.perf_counter() - start
    _record(4, "direct-sum derivative identity", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def test_criterion_5_injectivity_dichotomy():
    budget, start = 60.0, time.perf_counter()
    square = parse_map(["x1^2"], 1)
    probe_sq = injectivity_probe(square, polydisk(1), trials=60, seed=505, dims=(1, 2))
    found_collision = probe_sq.collision_found
    degenerate_at_2 = any(
        pt.n == 2 and sigma <= 1e-10 for pt, sigma in probe_sq.degenerate_points
    )
    perturbed = parse_map(["x1 + 0.25*x1^2"], 1)
    probe_ok = injectivity_probe(
        perturbed, polydisk(1), trials=500, seed=506, dims=(1, 2, 3)
    )
    clean = not probe_ok.collision_found and probe_ok.min_sigma >= 0.4
    ok = found_collision and degenerate_at_2 and clean
    elapsed = time.perf_counter() - start
    _record(5, "injectivity dichotomy desk check", ok and elapsed <= budget, elapsed, budget)
    assert found_collision
    assert degenerate_at_2
    assert clean
    assert elapsed <= budget


def test_criterion_6_shift_forms():
    budget, start = 120.0, time.perf_counter()
    n = 8
    ok = True
    for trial in range(1000):
        rng = np.random.default_rng([606, trial])
        d = 1 + trial % 2
        X = random_tuple(d, n, rng, target_norm=1.0)
        form = build_shift_form(X)
        flag = form.flag
        if not (form.sh1_ok and form.sh2_ok):
            ok = False
            break
        # (i): leading coordinates lie in each degree's subspace.
        for k, b in enumerate(flag.bases):
            proj = b @ b.conj().T
            for j in range(min(k + 1, n)):
                e = np.zeros(n, dtype=complex)
                e[j] = 1.0
                if np.linalg.norm(proj @ e - e) > 1e-10:
                    ok = False
        # (ii): each component maps degree k into degree k + 1.
        for k in range(flag.K):
            cur, nxt = flag.bases[k], flag.bases[k + 1]
            proj_next = nxt @ nxt.conj().T
            for m in X:
                image = m @ cur
                if op_norm(image - proj_next @ image) > 1e-9 * X.norm():
                    ok = False
        # (iv): dimension bound by the word count.
        for k, dim in enumerate(flag.dims):
            if dim > min(alpha(k, d), n):
                ok = False
        # Compression inequality and its refinement for every admissible k.
        for k in range(1, n):
            if alpha(k, d) > n:
                break
            form_chk = sizeshift_check(X, k, form=form)
            refined = sizeshift_refined_check(X, k, form=form)
            if not (form_chk.holds and refined.holds):
                ok = False
        if not ok:
            break
    # Zero and shift tuples produce the identity unitary exactly.
    for X in (zero_tuple(1, n), MatrixTuple([_shift_matrix(n)])):
        res = build_shift_form(X)
        if not np.array_equal(res.u, np.eye(n, dtype=complex)):
            ok = False
    elapsed = time.perf_counter() - start
    _record(6, "shift forms and compression bounds", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def test_criterion_7_newton_round_trip():
    budget, start = 60.0, time.perf_counter()
    f = parse_map(["x1 + x1^2"], 1)
    ok = True
    recovered = []
    for trial in range(100):
        rng = np.random.default_rng([707, trial])
        n = 1 + trial % 4
        x = random_tuple(1, n, rng, target_norm=float(rng.uniform(0.01, 0.25)))
        trace = newton_invert(f, eval_map(f, x), zero_tuple(1, n), tol=1e-12)
        if not trace.converged or (trace.solution - x).norm() > 1e-8:
            ok = False
            break
        recovered.append(x)
    # Direct-sum preservation of the computed inverse.
    for i in range(0, 20, 2):
        x, xp = recovered[i], recovered[i + 1]
        if x.n != xp.n:
            continue
        y = eval_map(f, direct_sum([x, xp]))
        joint = newton_invert(f, y, zero_tuple(1, 2 * x.n), tol=1e-12)
        if (joint.solution - direct_sum([x, xp])).norm() > 1e-8:
            ok = False
            break
    elapsed = time.perf_counter() - start
    _record(7, "newton inversion round trip", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def test_criterion_8_implicit_parametrization():
    budget, start = 30.0, time.perf_counter()
    ok = True
    graph = parse_map(["x2 - x1^2"], 2)
    for trial in range(50):
        rng = np.random.default_rng([808, trial])
        y = random_tuple(1, 3, rng, target_norm=1.0)
        trace = implicit_solve(graph, y, zero_tuple(1, 3), tol=1e-12)
        if not trace.converged or np.linalg.norm(trace.solution[0] - y[0] @ y[0], 2) > 1e-8:
            ok = False
            break
    inverse = parse_map(["x1*x2 - 1"], 2)
    for trial in range(50):
        rng = np.random.default_rng([809, trial])
        m = random_invertible(3, cond_max=5.0, seed=rng)
        trace = implicit_solve(inverse, MatrixTuple([m]), zero_tuple(1, 3), tol=1e-12)
        if not trace.converged or np.linalg.norm(trace.solution[0] - np.linalg.inv(m), 2) > 1e-8:
            ok = False
            break
    elapsed = time.perf_counter() - start
    _record(8, "implicit parametrization", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget


def _polydisk_level_oracle(t: float):
    if t >= 1.0:
        return None
    k1 = max(1, math.ceil(1.0 / (1.0 - t)))
    while k1 > 1 and t <= 1.0 - 1.0 / (k1 - 1):
        k1 -= 1
    while t > 1.0 - 1.0 / k1:
        k1 += 1
    return max(k1, math.ceil(t))


def test_criterion_9_domain_exhaustion():
    budget, start = 10.0, time.perf_counter()
    ok = True
    spec1 = polydisk(1)
    rng = np.random.default_rng(909)
    # Closed-form agreement on scalar points (the level depends only on the
    # tuple norm there).
    for _ in range(1000):
        t = float(rng.uniform(0.0, 0.999))
        if level_index(spec1, MatrixTuple([[[t]]])) != _polydisk_level_oracle(t):
            ok = False
            break
    # Unitary invariance of the level index, exactly.
    spec = polydisk(2)
    for trial in range(25):
        x = random_tuple(2, 3, rng, target_norm=float(rng.uniform(0.1, 0.95)))
        k = level_index(spec, x)
        for _ in range(20):
            u = random_unitary(3, rng)
            if level_index(spec, conjugate(u, x)) != k:
                ok = False
    # The boundary-approaching sequence climbs strictly through the levels.
    levels = [
        level_index(spec1, MatrixTuple([[[1.0 - 1.0 / m]]])) for m in range(1, 5)
    ]
    if levels != [1, 2, 3, 4]:
        ok = False
    elapsed = time.perf_counter() - start
    _record(9, "domain exhaustion levels", ok and elapsed <= budget, elapsed, budget)
    assert ok
    assert elapsed <= budget
