import numpy as np
import pytest

from tave import tables
from tave.generators import planted_sym_nonneg, rng_for, type1_starts, type2_start
from tave.model import TaveProblem, construct_signed_solution
from tave.ncp import linearize
from tave.solver import (
    CONVERGED,
    GRADIENT,
    LM,
    MAX_ITER,
    SolverConfig,
    SolverReport,
    armijo_search,
    cluster_solutions,
    lm_direction,
    multi_start,
    safeguard_direction,
    solve,
)
from tave.tensor import Tensor


@pytest.fixture
def sec3():
    A, _, _ = construct_signed_solution(tables.cd_example_C(), tables.CD_EXAMPLE_SIGNS, tables.CD_EXAMPLE_Z)
    return TaveProblem(A, tables.CD_EXAMPLE_B)


def test_lm_direction_identity():
    I = np.eye(2)
    H = np.array([1.0, 0.0])
    d, r = lm_direction(I, H, I.T @ H, 0.0)
    assert np.allclose(d, [-1.0, 0.0]) and r == 0.0
    d, _ = lm_direction(I, H, I.T @ H, 1.0)
    assert np.allclose(d, [-0.5, 0.0])


def test_lm_direction_diagonal():
    Q = np.diag([1.0, 2.0])
    H = np.ones(2)
    d, _ = lm_direction(Q, H, Q.T @ H, 0.3)
    assert np.allclose(d, [-1 / 1.3, -2 / 4.3], rtol=1e-14)


def test_lm_direction_singular_mu_zero_uses_least_squares():
    Q = np.array([[1.0, 0.0], [0.0, 0.0]])
    H = np.array([1.0, 1.0])
    d, _ = lm_direction(Q, H, Q.T @ H, 0.0)
    assert np.allclose(d, [-1.0, 0.0])


def test_lm_direction_inexact_bound():
    rng = np.random.default_rng(1)
    Q = rng.standard_normal((6, 6))
    H = rng.standard_normal(6)
    g = Q.T @ H
    for alpha in (0.5, 0.1, 0.01):
        d, r = lm_direction(Q, H, g, 0.3, inexact=True, alpha=alpha)
        M = Q.T @ Q + 0.3 * np.eye(6)
        assert np.linalg.norm(M @ d + g) == pytest.approx(r, rel=1e-12, abs=1e-15)
        assert r <= alpha * np.linalg.norm(g)


def test_lm_direction_errors():
    with pytest.raises(ValueError):
        lm_direction(np.eye(2), np.ones(3), np.ones(2), 0.3)
    with pytest.raises(ValueError):
        lm_direction(np.eye(2), np.ones(2), np.ones(2), -1.0)
    with pytest.raises(ValueError):
        lm_direction(np.eye(2), np.ones(2), np.ones(2), 0.3, inexact=True, alpha=1.5)


def test_safeguard():
    g = np.array([1.0, 0.0])
    d, src = safeguard_direction([-1.0, 0.0], g, 1e-10, 2.1)
    assert src == LM and np.array_equal(d, [-1.0, 0.0])
    d, src = safeguard_direction([1.0, 0.0], g, 1e-10, 2.1)
    assert src == GRADIENT and np.array_equal(d, [-1.0, 0.0])
    d, src = safeguard_direction([0.0, 0.0], g, 1e-10, 2.1)
    assert src == GRADIENT


@pytest.fixture
def scalar_problem():
    # 1x1 matrix problem: (F, G) = (3x - b, x - b)
    return TaveProblem(Tensor.from_dense(np.array([[2.0]])), [-4.5])


def test_armijo_full_step(scalar_problem):
    x = np.array([-0.5])
    lin = linearize(scalar_problem, x)
    d, _ = lm_direction(lin.Q, lin.H, lin.grad, 1e-8)
    t, i, psi = armijo_search(scalar_problem, x, d, lin.grad, 1e-4, 50)
    assert (t, i) == (1.0, 0)
    assert psi < lin.psi


def test_armijo_backtracks_on_overshoot(scalar_problem):
    x = np.array([-0.5])
    lin = linearize(scalar_problem, x)
    d, _ = lm_direction(lin.Q, lin.H, lin.grad, 1e-8)
    t, i, psi = armijo_search(scalar_problem, x, 1e6 * d, lin.grad, 1e-4, 60)
    assert i > 0 and t == 2.0**-i
    assert psi <= lin.psi + 1e-4 * t * float(lin.grad @ (1e6 * d))


def test_armijo_rejects_ascent(scalar_problem):
    x = np.array([-0.5])
    g = linearize(scalar_problem, x).grad
    with pytest.raises(ValueError):
        armijo_search(scalar_problem, x, g, g, 1e-4, 10)


def test_armijo_stall_returns_none(scalar_problem):
    x = np.array([-0.5])
    g = linearize(scalar_problem, x).grad
    assert armijo_search(scalar_problem, x, -1e12 * g, g, 1e-4, 0) is None


def test_solve_sec3(sec3):
    rep = solve(sec3, [1.8, -1.8])
    assert rep.status == CONVERGED
    assert rep.final_norm_H <= 1e-6
    assert np.max(np.abs(rep.x_final - [2.0, -2.0])) <= 1e-4
    assert rep.iterations <= 30


def test_solve_from_solution_takes_zero_iterations(sec3):
    rep = solve(sec3, [2.0, -2.0])
    assert rep.status == CONVERGED and rep.iterations == 0
    assert len(rep.trace) == 1


def test_solve_trace_bookkeeping(sec3):
    rep = solve(sec3, [1.8, -1.8])
    assert len(rep.trace) == rep.iterations + 1
    assert [r.k for r in rep.trace] == list(range(rep.iterations + 1))
    for rec in rep.trace[:-1]:
        assert rec.step is not None and 0 < rec.step <= 1
        assert rec.source in (LM, GRADIENT)
    assert rep.trace[-1].step is None
    psi = [r.psi for r in rep.trace]
    assert all(b < a for a, b in zip(psi, psi[1:]))


def test_solve_max_iter_status(sec3):
    rep = solve(sec3, [0.3, 0.7], SolverConfig(max_iter=1))
    assert rep.status == MAX_ITER and rep.iterations == 1


def test_solve_dimension_error(sec3):
    with pytest.raises(ValueError):
        solve(sec3, [1.0, 2.0, 3.0])


def test_solve_table7_row2_type1_starts():
    x_ref, b = tables.TABLE7[1]
    P = TaveProblem(tables.table6_A(), b)
    ms = multi_start(P, type1_starts(4, 20, rng_for(0, 1, 77)))
    assert ms.converged > 0
    for cl in ms.clusters:
        assert np.max(np.abs(cl.representative - x_ref)) <= 1e-3


def test_solve_deterministic():
    P, x_star = planted_sym_nonneg(4, 5, rng_for(3, 0))
    x0 = type2_start(x_star, rng_for(3, 2))
    a = solve(P, x0).to_dict()
    b = solve(P, x0).to_dict()
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_inexact_trace_respects_residual_bound():
    for k in range(4):
        P, x_star = planted_sym_nonneg(6, 8, rng_for(0, 0, k))
        rep = solve(P, type2_start(x_star, rng_for(0, 2, k)), SolverConfig(inexact=True))
        for rec in rep.trace[:-1]:
            assert rec.r_norm <= rec.alpha * rec.norm_gradPsi


def test_literal_jacobian_convention_runs(sec3):
    rep = solve(sec3, [1.8, -1.8], SolverConfig(jacobian="literal"))
    # the literal matrix is a scaled Jacobian; the iteration still descends
    psi = [r.psi for r in rep.trace]
    assert all(b < a for a, b in zip(psi, psi[1:]))


def test_mu_sequence(sec3):
    cfg = SolverConfig(mu=[1.0, 0.5, 0.0])
    assert [cfg.mu_at(k) for k in range(5)] == [1.0, 0.5, 0.0, 0.0, 0.0]
    assert solve(sec3, [1.8, -1.8], cfg).converged


@pytest.mark.parametrize(
    "bad",
    [{"beta": 0.6}, {"p": 2.0}, {"rho_descent": 0.0}, {"mu": -1.0}, {"alpha_schedule": [1.0]}, {"jacobian": "x"}],
)
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SolverConfig(**bad)


def test_config_round_trip():
    cfg = SolverConfig(mu=[0.3, 0.1], alpha_schedule=[0.4], inexact=True)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError, match="unknown"):
        SolverConfig.from_dict({"eps": 1.0})


def test_report_round_trip(sec3):
    rep = solve(sec3, [1.8, -1.8])
    back = SolverReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict()


def test_cluster_solutions():
    pts = [np.array([0.0]), np.array([5e-5]), np.array([1.0]), np.array([-5e-5])]
    assert cluster_solutions(pts, 1e-4) == [[0, 1, 3], [2]]


def test_multi_start_independent_of_workers():
    x_ref, b = tables.TABLE7[0]
    P = TaveProblem(tables.table6_A(), b)
    starts = type1_starts(4, 8, rng_for(0, 1, 5))
    a = multi_start(P, starts)
    c = multi_start(P, starts, workers=4)
    assert a.attempts_label() == c.attempts_label()
    for x, y in zip(a.clusters, c.clusters):
        assert np.array_equal(x.representative, y.representative)
