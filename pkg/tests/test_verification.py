import math

import numpy as np
import pytest

from vsturm import (build_model, cluster_and_match, fit_decay, make_problem,
                    oracle_decoupled_spectrum, scalar_reference_alpha,
                    scan_low_spectrum, PotentialSpec)
from vsturm.trigpoly import cosine, poly
from _problems import (const_problem, coupled_problem, diag_mixed_problem,
                       free_problem, scalar_problem, two_i_problem)

PI = np.pi


def test_cluster_free_problem_residuals_vanish():
    p = free_problem(2)
    m = build_model(p, order=1)
    for rep in cluster_and_match(p, m, (5, 10)):
        assert rep.multiplicity_sum == 2
        assert rep.rouche_count == 2
        assert max(abs(r) for r in rep.residuals) < 1e-7
        assert max(abs(x) for x in rep.mismatch) < 1e-7


def test_cluster_shifted_identity_matches_exact_expansion():
    p = two_i_problem()
    m = build_model(p, order=1)
    (rep,) = cluster_and_match(p, m, (10, 10))
    exact_res = 10.0 * (math.sqrt(102.0) - 10.0)  # 0.99504938...
    assert rep.residuals == pytest.approx((exact_res, exact_res), abs=1e-6)
    assert rep.matched_alphas == pytest.approx((1.0, 1.0))
    # mismatch is -1/(2 n^2) + O(1/n^4)
    assert rep.mismatch == pytest.approx((exact_res - 1.0,) * 2, abs=1e-6)
    assert rep.mismatch[0] == pytest.approx(-0.00495, abs=1e-4)


def test_cluster_coupled_residuals_straddle_half():
    p = coupled_problem()
    m = build_model(p, order=1)
    (rep,) = cluster_and_match(p, m, (20, 20))
    assert rep.residuals == pytest.approx((-0.5, 0.5), abs=1e-2)
    assert max(abs(x) for x in rep.mismatch) <= 1e-2


def test_cluster_flags_incomplete_windows():
    p = diag_mixed_problem()
    m = build_model(p, order=1)
    reps = cluster_and_match(p, m, (5, 7))
    assert [r.multiplicity_sum for r in reps] == [1, 1, 2]
    assert reps[0].mismatch == ()
    assert reps[2].mismatch != ()


def test_cluster_range_validation():
    p = free_problem(1)
    m = build_model(p, order=1)
    with pytest.raises(ValueError):
        cluster_and_match(p, m, (0, 5))
    with pytest.raises(ValueError):
        cluster_and_match(p, m, (5, 300))


def test_fit_decay_recovers_cubic():
    pts = [(n, 1.0 / n ** 3) for n in (10, 20, 40, 80)]
    fit = fit_decay(pts)
    assert fit.exponent == pytest.approx(3.0, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_decay_constant_is_flat():
    fit = fit_decay([(n, 2.5) for n in (5, 10, 20, 40)])
    assert fit.exponent == pytest.approx(0.0, abs=1e-12)


def test_fit_decay_validation():
    with pytest.raises(ValueError):
        fit_decay([(10, 1.0), (20, 0.5), (40, 0.25)])
    with pytest.raises(ValueError):
        fit_decay([(10, 1.0), (20, -0.5), (40, 0.25), (80, 0.1)])


def test_fit_decay_on_shifted_identity_mismatches():
    p = two_i_problem()
    m = build_model(p, order=1)
    pts = []
    for n in (10, 20, 40, 80):
        (rep,) = cluster_and_match(p, m, (n, n))
        pts.append((n, max(abs(x) for x in rep.mismatch)))
    fit = fit_decay(pts)
    assert fit.exponent >= 1.5  # exact decay is 1/(2 n^2)
    assert fit.exponent == pytest.approx(2.0, abs=0.1)


def test_scalar_reference_values():
    assert scalar_reference_alpha(0.0, 0.0, 0.0) == 0.0
    assert scalar_reference_alpha(1.0, 1.0, 0.0) == pytest.approx(2.0 / PI)
    assert scalar_reference_alpha(0.0, 0.0, 2.0 * PI) == pytest.approx(1.0)


def test_scalar_reference_agrees_with_model_alphas():
    cases = [
        (scalar_problem(h_left=-1.0, h_right=1.0), 1.0, 1.0, 0.0),
        (scalar_problem(q=poly(1.0) + cosine(1.0), h_left=0.0, h_right=1.0),
         0.0, 1.0, PI),
        (scalar_problem(q=poly(4.0), h_left=1.0, h_right=0.0), -1.0, 0.0,
         4.0 * PI),
    ]
    for prob, h, big_h, q_int in cases:
        model = build_model(prob, order=1)
        assert model.alphas[0] == pytest.approx(
            scalar_reference_alpha(h, big_h, q_int), abs=1e-12)


def test_oracle_decoupled_free():
    got = oracle_decoupled_spectrum(free_problem(2), 5.0)
    assert got == pytest.approx([0, 0, 1, 1, 4, 4], abs=1e-8)


def test_oracle_decoupled_diagonal():
    got = oracle_decoupled_spectrum(const_problem(np.diag([1.0, 4.0])), 6.0)
    assert got == pytest.approx([1, 2, 4, 5, 5], abs=1e-8)


def test_oracle_decoupled_constant_coupled():
    # eigenchannels q = -1 and q = +1 give {k^2 - 1} and {k^2 + 1}
    got = oracle_decoupled_spectrum(coupled_problem(), 2.5)
    assert got == pytest.approx([-1, 0, 1, 2], abs=1e-8)


def test_oracle_rejects_nondiagonalizable_data():
    p = make_problem(PotentialSpec.constant([[0.0, 1.0], [1.0, 0.0]]),
                     np.diag([1.0, 2.0]), None)
    with pytest.raises(ValueError):
        oracle_decoupled_spectrum(p, 5.0)


def test_cluster_reports_deterministic():
    p = coupled_problem()
    m = build_model(p, order=1)
    a = cluster_and_match(p, m, (8, 9))
    b = cluster_and_match(p, m, (8, 9))
    assert a == b
