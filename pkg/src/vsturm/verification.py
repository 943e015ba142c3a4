"""Cross-checks of computed spectra against the asymptotic model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import AsymptoticModel, jacobi_eigh
from .locator import EigenvalueRecord, Window, find_eigenvalues_in_window, scan_low_spectrum
from .problem import PI, PotentialSpec, Problem, make_problem
from .trigpoly import TrigPoly


@dataclass(frozen=True)
class ClusterReport:
    """Window census: residuals n(sqrt(lambda) - n) matched to the alphas.

    matched_alphas and mismatch are filled only when the located
    multiplicities sum to the system dimension; incomplete windows keep
    them empty and are recognizable through multiplicity_sum.
    """

    n: int
    records: tuple
    multiplicity_sum: int
    rouche_count: int
    residuals: tuple
    matched_alphas: tuple
    mismatch: tuple


@dataclass(frozen=True)
class DecayFit:
    """Power-law decay fitted on log-log axes."""

    exponent: float
    r_squared: float
    points: tuple


def cluster_and_match(problem: Problem, model: AsymptoticModel, n_range,
                      samples: int = 256, rank_tol: float = 1e-6) -> list:
    """Per-window reports over an inclusive range of window indices."""
    lo, hi = int(n_range[0]), int(n_range[-1])
    if not (1 <= lo <= hi <= 200):
        raise ValueError("window range must lie within [1, 200]")
    dim = problem.dimension
    reports = []
    for n in range(lo, hi + 1):
        records, count = find_eigenvalues_in_window(
            problem, Window(n), samples=samples, rank_tol=rank_tol,
            model=model, with_count=True)
        msum = sum(r.multiplicity for r in records)
        residuals = sorted(
            n * (r.sqrt_lambda - n)
            for r in records for _ in range(r.multiplicity))
        if msum == dim:
            matched = tuple(model.alphas)
            mismatch = tuple(res - a for res, a in zip(residuals, matched))
        else:
            matched = ()
            mismatch = ()
        reports.append(ClusterReport(
            n=n, records=tuple(records), multiplicity_sum=msum,
            rouche_count=count, residuals=tuple(residuals),
            matched_alphas=matched, mismatch=mismatch))
    return reports


def fit_decay(points) -> DecayFit:
    """Least-squares slope of log(value) against log(n); exponent = -slope."""
    pts = [(float(n), float(v)) for n, v in points]
    if len({n for n, _ in pts}) < 4:
        raise ValueError("need at least 4 distinct n values")
    if any(v <= 0.0 for _, v in pts):
        raise ValueError("decay fit requires positive values")
    ln = np.log([n for n, _ in pts])
    lv = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(ln, lv, 1)
    pred = slope * ln + intercept
    ss_res = float(((lv - pred) ** 2).sum())
    ss_tot = float(((lv - lv.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(exponent=float(-slope), r_squared=r2,
                    points=tuple(pts))


def scalar_reference_alpha(h: float, big_h: float, q_integral: float) -> float:
    """First-order coefficient of the scalar problem.

    The scalar convention y'(0) - h y(0) = 0, y'(pi) + H y(pi) = 0
    corresponds to H_L = -h and H_R = H here, which makes this the
    1 x 1 case of the characteristic values of
    (1/pi)(H_R - H_L + (1/2) int q).
    """
    return (h + big_h + 0.5 * q_integral) / PI


def _diag_channels(problem: Problem):
    spec = problem.potential
    n = problem.dimension
    hl = problem.h_left
    hr = problem.h_right
    if spec.is_diagonal() and _is_diag(hl) and _is_diag(hr):
        for i in range(n):
            if spec.n_pieces == 1:
                chan = PotentialSpec.dense(1, [spec.entry(0, i, i)])
            else:
                chan = PotentialSpec.piecewise(
                    1, spec.breaks[1:-1],
                    [[spec.entry(p, i, i)] for p in range(spec.n_pieces)])
            yield chan, hl[i, i], hr[i, i]
        return
    if spec.is_constant():
        q = spec.constant_matrix()
        w, u = jacobi_eigh(q)
        tl = u.T @ hl @ u
        tr = u.T @ hr @ u
        if _is_diag(tl, 1e-10) and _is_diag(tr, 1e-10):
            for i in range(n):
                chan = PotentialSpec.constant([[w[i]]])
                yield chan, tl[i, i], tr[i, i]
            return
    raise ValueError(
        "potential and boundary matrices are not simultaneously diagonalizable")


def _is_diag(m: np.ndarray, tol: float = 0.0) -> bool:
    off = m - np.diag(np.diag(m))
    return bool(np.abs(off).max() <= tol)


def oracle_decoupled_spectrum(problem: Problem, lambda_max: float) -> list:
    """Ground-truth spectrum as the union of independent scalar channels.

    Requires P, H_L, H_R simultaneously diagonal, or a constant P whose
    eigenbasis also diagonalizes both boundary matrices.
    """
    values = []
    for chan, hl, hr in _diag_channels(problem):
        sub = make_problem(chan, [[hl]], [[hr]])
        for rec in scan_low_spectrum(sub, lambda_max):
            values.extend([rec.lam] * rec.multiplicity)
    return sorted(values)
