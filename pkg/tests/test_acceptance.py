"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured numbers
and the runtime budget. All randomness derives from master seed 0.
"""

import time

import numpy as np

from oracles import contract_loops, dense_from_sym, fb, fd_gradient, no_solution_system
from tave import tables
from tave.experiments import NO_SOLUTION_STARTS, TABLE7_STARTS, TABLE8_STARTS, experiment1, experiment2
from tave.generators import START_STREAM, planted_sym_nonneg, rng_for, type1_starts, type2_start
from tave.model import TaveProblem, build_shifted, eval_FG, residual
from tave.ncp import eval_H, eval_Psi, grad_Psi, phi_fb
from tave.solver import SolverConfig, multi_start, solve
from tave.tensor import SignDiagonal, Tensor, apply_mat, apply_vec, random_symmetric, sign_diag_product

SEED = 0


def _verdict(number, title, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    passed = ok and in_time
    print(f"\n{'PASS' if passed else 'FAIL'} criterion {number} ({title}): {detail}; "
          f"{elapsed:.2f}s of {budget:g}s")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.2f}s over {budget}s"


def test_criterion_1_shifted_reconstruction():
    t0 = time.perf_counter()
    A, c = build_shifted(tables.table5_B(), 0.01)
    ref = tables.table6_A()
    delta = float(np.max(np.abs(A.dense - ref.dense)))
    c_ok = abs(c - tables.TABLE6_SHIFT) <= 1e-3
    _verdict(1, "Table 5 -> Table 6", delta <= 1e-4 and c_ok,
             f"max |entry delta| = {delta:.2e} (tol 1e-4), c = {c:.6f} vs {tables.TABLE6_SHIFT} (tol 1e-3)",
             time.perf_counter() - t0, 1)


def test_criterion_2_table7_residuals():
    t0 = time.perf_counter()
    A = tables.table6_A()
    worst = max(float(np.max(np.abs(residual(TaveProblem(A, b), x)))) for x, b in tables.TABLE7)
    _verdict(2, "Table 7 residuals", worst <= 0.05, f"max residual {worst:.2e} (tol 0.05)",
             time.perf_counter() - t0, 1)


def test_criterion_3_table8():
    t0 = time.perf_counter()
    P = TaveProblem(tables.table6_A(), tables.TABLE8_B)
    worst_H = max(float(np.linalg.norm(eval_H(P, x))) for x in tables.TABLE8_X)
    ms = multi_start(P, type1_starts(4, 20, rng_for(SEED, START_STREAM, TABLE8_STARTS)))
    target = np.asarray(tables.TABLE8_POSITIVE)
    dists = [float(np.max(np.abs(cl.representative - target))) for cl in ms.clusters]
    found = bool(dists) and min(dists) <= 1e-3
    _verdict(3, "Table 8", worst_H <= 0.02 and found,
             f"max ||H|| {worst_H:.2e} (tol 0.02); {len(ms.clusters)} clusters from {ms.attempts_label()} "
             f"converged starts, positive solution at distance {min(dists, default=np.inf):.1e}",
             time.perf_counter() - t0, 30)


def test_criterion_4_table7_resolve():
    t0 = time.perf_counter()
    A = tables.table6_A()
    ok = True
    labels = []
    worst = 0.0
    for k, (x_ref, b) in enumerate(tables.TABLE7):
        ms = multi_start(TaveProblem(A, b), type1_starts(4, 20, rng_for(SEED, START_STREAM, TABLE7_STARTS, k)))
        sols = [r.x_final for r in ms.reports if r.converged]
        labels.append(ms.attempts_label())
        for x in sols:
            worst = max(worst, float(np.max(np.abs(x - x_ref))))
            ok &= bool(np.all(x > 0))
        if sols:
            spread = max(float(np.max(np.abs(x - y))) for x in sols for y in sols)
            ok &= spread <= 1e-4
    ok &= worst <= 1e-3
    _verdict(4, "Table 7 re-solve", ok,
             f"attempts {' '.join(labels)}; max distance to printed x {worst:.1e} (tol 1e-3)",
             time.perf_counter() - t0, 120)


def test_criterion_5_worked_example():
    t0 = time.perf_counter()
    A = sign_diag_product(tables.cd_example_C(), tables.CD_EXAMPLE_SIGNS)
    rep = solve(TaveProblem(A, tables.CD_EXAMPLE_B), [1.8, -1.8])
    dist = float(np.max(np.abs(rep.x_final - [2.0, -2.0])))
    _verdict(5, "sign-diagonal example", rep.converged and rep.final_norm_H <= 1e-6 and dist <= 1e-4,
             f"{rep.status} in {rep.iterations} iterations, ||H|| = {rep.final_norm_H:.1e}, distance {dist:.1e}",
             time.perf_counter() - t0, 1)


def _grid_floor():
    # independent brute force over [-3, 3]^2 at step 0.01
    g = np.arange(-300, 301) / 100.0
    x1, x2 = np.meshgrid(g, g, indexing="ij")
    r1, r2 = no_solution_system(x1, x2)
    b1, b2 = tables.NO_SOLUTION_B
    h1 = fb(r1 + x1**3 - b1, r1 - x1**3 - b1)
    h2 = fb(r2 + x2**3 - b2, r2 - x2**3 - b2)
    return float(np.sqrt(h1**2 + h2**2).min())


def test_criterion_6_no_solution_example():
    t0 = time.perf_counter()
    floor = _grid_floor()
    P = TaveProblem(tables.no_solution_A(), tables.NO_SOLUTION_B)
    reports = [solve(P, x0, keep_x=False) for x0 in type1_starts(2, 50, rng_for(SEED, START_STREAM, NO_SOLUTION_STARTS))]
    converged = sum(r.converged for r in reports)
    low = min(r.final_norm_H for r in reports)
    ok = floor >= tables.NO_SOLUTION_H_FLOOR and converged == 0 and low >= tables.NO_SOLUTION_H_FLOOR
    _verdict(6, "no-solution example", ok,
             f"grid min ||H|| = {floor:.4f} (bound {tables.NO_SOLUTION_H_FLOOR}); {converged}/50 converged, "
             f"smallest final ||H|| {low:.4f}",
             time.perf_counter() - t0, 60)


def test_criterion_7_sign_pattern_sweep():
    t0 = time.perf_counter()
    res = experiment2(SEED)
    rows = res.tables["type2_all"]
    worst = max(r["max_residual"] for r in res.tables["sweep"])
    hits = sum(r["status"] == "converged" and r["dist_to_constructed"] <= 1e-3 for r in rows)
    rate = hits / len(rows)
    _verdict(7, "sign-pattern sweep", worst <= 1e-9 and rate >= 0.95,
             f"max constructed residual {worst:.1e} over {len(res.tables['sweep'])} patterns (tol 1e-9); "
             f"type-II recovery {hits}/{len(rows)} = {rate:.1%} (need 95%)",
             time.perf_counter() - t0, 300)


def test_criterion_8_iteration_behaviour():
    t0 = time.perf_counter()
    res = experiment1(SEED)
    runs = res.tables["runs"]
    ok_runs = sum(r["status"] == "converged" and r["final_norm_H"] <= 1e-6 and r["iterations"] <= 300 for r in runs)
    monotone = all(r["psi_monotone"] for r in runs)
    _verdict(8, "planted S(6,8) instances", ok_runs >= 8 and monotone,
             f"{ok_runs}/10 converged (need 8); strictly decreasing merit on {sum(r['psi_monotone'] for r in runs)}/10",
             time.perf_counter() - t0, 300)


def test_criterion_9_property_suite():
    t0 = time.perf_counter()
    rng = rng_for(SEED, 0, 9)
    notes = []

    # (a) finite-difference gradient at non-degenerate points
    worst_a, points = 0.0, 0
    while points < 120:
        m, n = int(rng.choice([2, 3, 4])), int(rng.integers(2, 6))
        P = TaveProblem(random_symmetric(m, n, rng, -1.0, 1.0), rng.standard_normal(n))
        x = rng.uniform(-2, 2, n)
        F, G = eval_FG(P, x)
        if np.min(np.hypot(F, G)) <= 1e-2:
            continue
        h = 1e-6 * (1 + np.linalg.norm(x))
        g_fd = fd_gradient(lambda y: eval_Psi(P, y), x, h)
        worst_a = max(worst_a, np.linalg.norm(grad_Psi(P, x) - g_fd) / max(np.linalg.norm(g_fd), 1e-12))
        points += 1
    ok_a = worst_a <= 1e-5
    notes.append(f"(a) grad rel err {worst_a:.1e} at {points} pts")

    # (b) signed product identity
    worst_b = 0.0
    for _ in range(100):
        C = Tensor.from_dense(rng.standard_normal((3, 3, 3, 3)))
        D = SignDiagonal(tuple(rng.choice([-1, 1], size=3)))
        x = rng.standard_normal(3)
        lhs = apply_vec(sign_diag_product(C, D), x)
        rhs = apply_vec(C, D.as_array() * x)
        worst_b = max(worst_b, float(np.max(np.abs(lhs - rhs))))
    ok_b = worst_b <= 1e-10
    notes.append(f"(b) identity err {worst_b:.1e}")

    # (c) compressed vs dense vs loop oracle
    worst_c = 0.0
    for m in (3, 4, 6):
        for n in range(1, 6):
            T = random_symmetric(m, n, rng, -1.0, 1.0)
            x = rng.standard_normal(n)
            ref = contract_loops(dense_from_sym(T.entries(), m, n), x)
            for route in ("compressed", "dense"):
                v = apply_vec(T, x, route)
                worst_c = max(worst_c, np.linalg.norm(v - ref) / np.linalg.norm(ref))
            Mc, Md = apply_mat(T, x, "compressed"), apply_mat(T, x, "dense")
            worst_c = max(worst_c, np.linalg.norm(Mc - Md) / np.linalg.norm(Md))
    ok_c = worst_c <= 1e-12
    notes.append(f"(c) product rel err {worst_c:.1e}")

    # (d) FB characterization on the grid
    g = np.arange(-300, 301) / 100.0
    a, b = np.meshgrid(g, g, indexing="ij")
    ok_d = bool(np.array_equal(np.abs(phi_fb(a, b)) <= 1e-12, (a >= 0) & (b >= 0) & (a * b == 0)))
    notes.append(f"(d) FB zero set {'exact' if ok_d else 'mismatch'}")

    # (e) inexact residual bound on every iteration
    checked, violations = 0, 0
    for k in range(5):
        P, x_star = planted_sym_nonneg(6, 8, rng_for(SEED, 0, 90 + k))
        rep = solve(P, type2_start(x_star, rng_for(SEED, 2, 90 + k)), SolverConfig(inexact=True), keep_x=False)
        for rec in rep.trace[:-1]:
            checked += 1
            violations += rec.r_norm > rec.alpha * rec.norm_gradPsi
    ok_e = violations == 0 and checked > 0
    notes.append(f"(e) {violations} bound violations in {checked} iterations")

    _verdict(9, "property suite", ok_a and ok_b and ok_c and ok_d and ok_e, "; ".join(notes),
             time.perf_counter() - t0, 120)
