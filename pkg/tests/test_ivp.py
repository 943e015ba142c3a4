import numpy as np
import pytest

from vsturm import PotentialSpec, char_det, free_solution, make_problem, solve_matrix_ivp
from vsturm.ivp import (DivergenceError, _rk4_batch_fast, _rk4_batch_numpy,
                        _potential_grid, char_det_batch, solve_matrix_ivp_batch,
                        step_count)
from vsturm.trigpoly import cosine, poly
from vsturm.verification import fit_decay
from _problems import coupled_problem, free_problem, generic_problem

PI = np.pi


# -- free solution ------------------------------------------------------

def test_free_solution_at_lambda_one():
    p = free_problem(2)
    c, dc = free_solution(p, PI, 1.0)
    assert np.allclose(c, -np.eye(2), atol=1e-12)
    assert np.allclose(dc, np.zeros((2, 2)), atol=1e-12)


def test_free_solution_with_boundary_matrix():
    h = 0.7
    p = make_problem(PotentialSpec.zero(2), h_left=h * np.eye(2))
    c, dc = free_solution(p, PI, 4.0)
    assert np.allclose(c, np.eye(2), atol=1e-12)
    assert np.allclose(dc, -h * np.eye(2), atol=1e-12)


def test_free_solution_zero_lambda_limit():
    p = free_problem(3)
    c, dc = free_solution(p, PI, 0.0)
    assert np.allclose(c, np.eye(3), atol=1e-14)
    assert np.allclose(dc, np.zeros((3, 3)), atol=1e-14)
    # series branch must join the closed form smoothly
    ca, _ = free_solution(p, PI, 1e-5)
    cb, _ = free_solution(p, PI, 2e-4)
    assert np.allclose(np.diag(ca), np.cos(np.sqrt(1e-5) * PI), atol=1e-14)
    assert np.allclose(np.diag(cb), np.cos(np.sqrt(2e-4) * PI), atol=1e-14)


# -- matrix IVP against closed-form oracles ------------------------------

def constant_potential_oracle(q, lam, x=PI):
    """Diagonalize Q and apply the scalar closed form per eigenchannel."""
    w, u = np.linalg.eigh(q)
    nu = np.sqrt(lam - w.astype(complex))
    y = u @ np.diag(np.cos(nu * x)) @ u.T
    dy = u @ np.diag(-nu * np.sin(nu * x)) @ u.T
    return y, dy


def test_free_problem_matches_free_solution():
    p = free_problem(2)
    sol = solve_matrix_ivp(p, 1.0)
    assert np.abs(sol.y_end + np.eye(2)).max() < 1e-10
    assert np.abs(sol.dy_end).max() < 1e-10


@pytest.mark.parametrize("lam", [3.7, 25.0, 100.5, 9.0 + 4.0j])
def test_constant_potential_against_eigen_oracle(lam):
    q = np.array([[1.0, 0.3], [0.3, 2.0]])
    p = make_problem(PotentialSpec.constant(q))
    sol = solve_matrix_ivp(p, lam)
    y, dy = constant_potential_oracle(q, lam)
    assert np.abs(sol.y_end - y).max() < 1e-8
    assert np.abs(sol.dy_end - dy).max() < 1e-7


def test_diagonal_potential_decouples_into_scalar_channels():
    q1 = poly(1.0) + cosine(1.0)
    q2 = poly(0.0, 0.5)
    p2 = make_problem(PotentialSpec.diagonal([q1, q2]))
    s2 = solve_matrix_ivp(p2, 17.3)
    for i, q in enumerate((q1, q2)):
        p1 = make_problem(PotentialSpec.diagonal([q]))
        s1 = solve_matrix_ivp(p1, 17.3, steps=s2.steps)
        assert abs(s2.y_end[i, i] - s1.y_end[0, 0]) < 1e-13
        assert abs(s2.dy_end[i, i] - s1.dy_end[0, 0]) < 1e-13
    assert abs(s2.y_end[0, 1]) == 0.0


def test_step_rule_floor_and_growth():
    assert step_count(0.0) >= 64
    assert step_count(40.0) > step_count(10.0) > step_count(1.0)


def test_order_of_accuracy_fourth_order():
    q = np.array([[1.0, 0.3], [0.3, 2.0]])
    p = make_problem(PotentialSpec.constant(q))
    for lam in (1.0, 25.0, 100.5):
        errs = []
        for steps in (256, 512):
            sol = solve_matrix_ivp(p, lam, steps=steps)
            y, _ = constant_potential_oracle(q, lam)
            errs.append(np.abs(sol.y_end - y).max())
        assert errs[0] / errs[1] >= 12.0


def test_wronskian_pairing_constant_for_real_lambda():
    p = generic_problem()
    w0 = (-p.h_left).T @ np.eye(2) - np.eye(2) @ (-p.h_left)
    for lam in (2.3, 37.1):
        sol = solve_matrix_ivp(p, lam)
        w_pi = sol.dy_end.conj().T @ sol.y_end - sol.y_end.conj().T @ sol.dy_end
        assert np.abs(w_pi - w0).max() <= 1e-9


def test_divergence_error_reports_step():
    p = free_problem(1)
    lam = (1.0 + 230.0j) ** 2
    with pytest.raises(DivergenceError) as err:
        solve_matrix_ivp(p, lam)
    assert err.value.step >= 1
    assert str(err.value.step) in str(err.value)


def test_jit_and_numpy_kernels_agree():
    p = coupled_problem()
    lams = np.array([1.0 + 0.0j, 10.0 + 2.0j, -3.0 + 0.0j])
    steps = 128
    pg = _potential_grid(p.potential, steps)
    y0 = np.eye(2)
    v0 = -np.asarray(p.h_left)
    ya, da, fa = _rk4_batch_fast(pg, lams, PI / steps, y0, v0)
    yb, db, fb = _rk4_batch_numpy(pg, lams, PI / steps, y0, v0)
    assert np.abs(ya - yb).max() < 1e-12
    assert np.abs(da - db).max() < 1e-12
    assert np.array_equal(fa, fb)


# -- boundary matrix and characteristic determinant ----------------------

def test_boundary_matrix_free_zeros_at_integer_squares():
    from vsturm import boundary_matrix
    p = free_problem(2)
    for n in (1, 3, 5):
        # zero up to the phase accuracy of the fixed-step scheme at mu = n
        assert np.abs(boundary_matrix(p, float(n * n))).max() < 1e-8
    assert np.allclose(boundary_matrix(p, 0.25), -0.5 * np.eye(2), atol=1e-10)
    assert np.abs(boundary_matrix(p, 0.0)).max() < 1e-10


@pytest.mark.parametrize("n", [1, 2, 4])
def test_char_det_free_closed_form(n):
    p = free_problem(n)
    for mu in (0.5, 1.25, 5.25 + 0.4j, 10.3, 15.25 + 0.7j, 19.25):
        mu = complex(mu)
        expect = (-mu * np.sin(mu * PI)) ** n
        got = char_det(p, mu)
        assert abs(got - expect) <= 1e-8 * abs(expect)


def test_char_det_real_for_real_mu():
    p = generic_problem()
    for mu in (2.3, 7.8, 14.1):
        v = char_det(p, mu)
        assert abs(v.imag) <= 1e-10 * max(1.0, abs(v))


def test_char_det_schwarz_reflection():
    p = generic_problem()
    for mu in (3.2 + 0.4j, 9.7 - 0.2j):
        a = char_det(p, mu)
        b = char_det(p, np.conj(mu))
        assert abs(b - np.conj(a)) <= 1e-12 * max(1.0, abs(a))


def test_char_det_over_theta_deviation_decays_like_one_over_mu():
    p = generic_problem()
    pts = []
    for n in range(5, 26):
        mu = n + 0.25
        theta = (-mu * np.sin(mu * PI)) ** p.dimension
        pts.append((n, abs(char_det(p, mu) / theta - 1.0)))
    fit = fit_decay(pts)
    assert 0.7 <= fit.exponent <= 1.3


def test_batch_solver_shares_step_count():
    p = free_problem(1)
    y, dy, steps = solve_matrix_ivp_batch(p, [1.0, 100.0])
    assert steps == step_count(10.0)
    assert y.shape == (2, 1, 1)
    vals = char_det_batch(p, [2.25, 3.25])
    assert vals.shape == (2,)
