"""Fixed-step integration of the matrix initial value problem.

Solves -Y'' + P(x) Y = lambda Y on [0, pi] with Y(0) = I, Y'(0) = -H_L
for complex lambda, using the classical four-stage fourth-order
Runge-Kutta method on the first-order system (Y, Y')' = (Y', (P - lambda) Y).

The step count is fixed per solve,

    steps = max(64, ceil((1 + |mu|) * pi / H0)),   mu = sqrt(lambda),

with H0 chosen so the accumulated phase lag of the oscillatory modes
(theta^5 / 120 per step, theta = |mu| h) stays below 1e-9 per unit mu
through |mu| = 40.  Fixed steps keep every solve deterministic and make
the discrete solution polynomial in lambda, so winding numbers of the
characteristic determinant are exact for the computed function.

Batched drivers evaluate many lambda values with one shared potential
grid; a numba kernel carries the hot loop, with a vectorized numpy
fallback when numba is unavailable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .problem import Problem, PotentialSpec

PI = math.pi

# max oscillation phase per step; keeps N*phase-lag effects on det W
# below ~1e-8 relative through |mu| = 20 and per-unit-mu lag < 1e-9 at 40
PHASE_STEP = 0.0085
MIN_STEPS = 64

_OVERFLOW_LIMIT = 1e250


class DivergenceError(ArithmeticError):
    """Integration produced non-finite entries (overflow at large |Im mu|)."""

    def __init__(self, step: int, lam: complex):
        self.step = step
        self.lam = lam
        super().__init__(
            f"matrix IVP diverged at step {step} for lambda = {lam}")


@dataclass(frozen=True)
class IvpSolution:
    """End values Y(pi), Y'(pi) of one matrix IVP solve."""

    y_end: np.ndarray
    dy_end: np.ndarray
    lam: complex
    steps: int


def step_count(mu_abs: float) -> int:
    """Fixed RK4 step count for a solve at |sqrt(lambda)| = mu_abs."""
    return max(MIN_STEPS, math.ceil((1.0 + float(mu_abs)) * PI / PHASE_STEP))


# -- RK4 kernels -------------------------------------------------------


def _rk4_batch_numpy(pgrid, lams, h, y0, v0):
    """Vectorized reference kernel; same contract as the jit version."""
    m_steps = (pgrid.shape[0] - 1) // 2
    nb = lams.shape[0]
    lam = lams.reshape(nb, 1, 1)
    y = np.repeat(y0[None, :, :].astype(np.complex128), nb, axis=0)
    v = np.repeat(v0[None, :, :].astype(np.complex128), nb, axis=0)
    fail = np.full(nb, -1, dtype=np.int64)
    for s in range(m_steps):
        p0 = pgrid[2 * s]
        p1 = pgrid[2 * s + 1]
        p2 = pgrid[2 * s + 2]
        k1y = v
        k1v = p0 @ y - lam * y
        yt = y + (0.5 * h) * k1y
        vt = v + (0.5 * h) * k1v
        k2y = vt
        k2v = p1 @ yt - lam * yt
        yt = y + (0.5 * h) * k2y
        vt = v + (0.5 * h) * k2v
        k3y = vt
        k3v = p1 @ yt - lam * yt
        yt = y + h * k3y
        vt = v + h * k3v
        k4y = vt
        k4v = p2 @ yt - lam * yt
        y = y + (h / 6.0) * (k1y + 2.0 * (k2y + k3y) + k4y)
        v = v + (h / 6.0) * (k1v + 2.0 * (k2v + k3v) + k4v)
        bad = ~(np.isfinite(y).all(axis=(1, 2)) & np.isfinite(v).all(axis=(1, 2)))
        fresh = bad & (fail < 0)
        if fresh.any():
            fail[fresh] = s + 1
            if bad.all():
                break
    return y, v, fail


def _rk4_batch_loops(pgrid, lams, h, y0, v0):
    """Loop form of the same kernel, meant for numba compilation."""
    m_steps = (pgrid.shape[0] - 1) // 2
    nb = lams.shape[0]
    n = y0.shape[0]
    y_out = np.empty((nb, n, n), np.complex128)
    v_out = np.empty((nb, n, n), np.complex128)
    fail = np.empty(nb, np.int64)
    half = 0.5 * h
    sixth = h / 6.0
    lim = _OVERFLOW_LIMIT
    for b in range(nb):
        lam = lams[b]
        y = np.empty((n, n), np.complex128)
        v = np.empty((n, n), np.complex128)
        for i in range(n):
            for j in range(n):
                y[i, j] = complex(y0[i, j], 0.0)
                v[i, j] = complex(v0[i, j], 0.0)
        ay = np.empty((n, n), np.complex128)
        av = np.empty((n, n), np.complex128)
        yt = np.empty((n, n), np.complex128)
        vt = np.empty((n, n), np.complex128)
        kv = np.empty((n, n), np.complex128)
        fb = -1
        for s in range(m_steps):
            p0 = pgrid[2 * s]
            p1 = pgrid[2 * s + 1]
            p2 = pgrid[2 * s + 2]
            # stage 1 (k1y = v, k1v = P0 y - lam y)
            for i in range(n):
                for j in range(n):
                    acc = -lam * y[i, j]
                    for k in range(n):
                        acc += p0[i, k] * y[k, j]
                    ay[i, j] = v[i, j]
                    av[i, j] = acc
                    yt[i, j] = y[i, j] + half * v[i, j]
                    vt[i, j] = v[i, j] + half * acc
            # stage 2
            for i in range(n):
                for j in range(n):
                    acc = -lam * yt[i, j]
                    for k in range(n):
                        acc += p1[i, k] * yt[k, j]
                    kv[i, j] = acc
            for i in range(n):
                for j in range(n):
                    ay[i, j] += 2.0 * vt[i, j]
                    av[i, j] += 2.0 * kv[i, j]
                    new_y = y[i, j] + half * vt[i, j]
                    new_v = v[i, j] + half * kv[i, j]
                    yt[i, j] = new_y
                    vt[i, j] = new_v
            # stage 3
            for i in range(n):
                for j in range(n):
                    acc = -lam * yt[i, j]
                    for k in range(n):
                        acc += p1[i, k] * yt[k, j]
                    kv[i, j] = acc
            for i in range(n):
                for j in range(n):
                    ay[i, j] += 2.0 * vt[i, j]
                    av[i, j] += 2.0 * kv[i, j]
                    new_y = y[i, j] + h * vt[i, j]
                    new_v = v[i, j] + h * kv[i, j]
                    yt[i, j] = new_y
                    vt[i, j] = new_v
            # stage 4 and update
            bad = False
            for i in range(n):
                for j in range(n):
                    acc = -lam * yt[i, j]
                    for k in range(n):
                        acc += p2[i, k] * yt[k, j]
                    ay[i, j] += vt[i, j]
                    av[i, j] += acc
                    y[i, j] += sixth * ay[i, j]
                    v[i, j] += sixth * av[i, j]
                    zr = y[i, j].real
                    zi = y[i, j].imag
                    wr = v[i, j].real
                    wi = v[i, j].imag
                    if (not (-lim < zr < lim)) or (not (-lim < zi < lim)) \
                            or (not (-lim < wr < lim)) or (not (-lim < wi < lim)):
                        bad = True
            if bad:
                fb = s + 1
                break
        fail[b] = fb
        for i in range(n):
            for j in range(n):
                y_out[b, i, j] = y[i, j]
                v_out[b, i, j] = v[i, j]
    return y_out, v_out, fail


try:
    from numba import njit

    _rk4_batch_fast = njit(cache=True)(_rk4_batch_loops)
    _BACKEND = "numba"
except ImportError:  # pragma: no cover - exercised only without numba
    _rk4_batch_fast = _rk4_batch_numpy
    _BACKEND = "numpy"


def kernel_backend() -> str:
    return _BACKEND


def warm_up() -> None:
    """Trigger kernel compilation with a tiny solve."""
    spec = PotentialSpec.zero(1)
    prob = Problem(spec, np.zeros((1, 1)), np.zeros((1, 1)), 1)
    solve_matrix_ivp(prob, 1.0 + 0.0j)


@lru_cache(maxsize=32)
def _potential_grid(spec: PotentialSpec, steps: int) -> np.ndarray:
    """P sampled at all RK4 nodes x_j = j*h/2, shared across solves."""
    xs = np.linspace(0.0, PI, 2 * steps + 1)
    vals = np.ascontiguousarray(spec.eval_grid(xs))
    vals.flags.writeable = False
    return vals


# -- drivers -----------------------------------------------------------


def solve_matrix_ivp_batch(problem: Problem, lams, steps: int | None = None):
    """Solve the matrix IVP for a batch of lambda values.

    Returns (y_end, dy_end, steps) with leading batch axis.  All batch
    entries share one step count (from the largest |mu| by default), so
    the discrete map lambda -> Y(pi) is a single analytic function.
    """
    lams = np.ascontiguousarray(np.atleast_1d(lams), dtype=np.complex128)
    if steps is None:
        mu_abs = float(np.sqrt(np.abs(lams).max())) if lams.size else 0.0
        steps = step_count(mu_abs)
    pgrid = _potential_grid(problem.potential, steps)
    h = PI / steps
    y0 = np.ascontiguousarray(np.eye(problem.dimension))
    v0 = np.ascontiguousarray(-problem.h_left)
    y, dy, fail = _rk4_batch_fast(pgrid, lams, h, y0, v0)
    if (fail >= 0).any():
        b = int(np.argmax(fail >= 0))
        raise DivergenceError(int(fail[b]), complex(lams[b]))
    return y, dy, steps


def solve_matrix_ivp(problem: Problem, lam: complex,
                     steps: int | None = None) -> IvpSolution:
    """End values of Y(x; lambda) for a single lambda."""
    y, dy, used = solve_matrix_ivp_batch(problem, [lam], steps=steps)
    return IvpSolution(y[0], dy[0], complex(lam), used)


def boundary_matrix_batch(problem: Problem, lams, steps: int | None = None):
    """W(lambda) = Y'(pi) + H_R Y(pi) for a batch of lambda values."""
    y, dy, _ = solve_matrix_ivp_batch(problem, lams, steps=steps)
    return dy + problem.h_right @ y


def boundary_matrix(problem: Problem, lam: complex,
                    steps: int | None = None) -> np.ndarray:
    return boundary_matrix_batch(problem, [lam], steps=steps)[0]


def det_w_batch(problem: Problem, lams, steps: int | None = None) -> np.ndarray:
    """det W(lambda) for a batch, via LAPACK's partial-pivoted LU."""
    return np.linalg.det(boundary_matrix_batch(problem, lams, steps=steps))


def char_det_batch(problem: Problem, mus, steps: int | None = None) -> np.ndarray:
    """Characteristic determinant det W(mu^2) for a batch of mu values."""
    mus = np.ascontiguousarray(np.atleast_1d(mus), dtype=np.complex128)
    if steps is None:
        mu_abs = float(np.abs(mus).max()) if mus.size else 0.0
        steps = step_count(mu_abs)
    return det_w_batch(problem, mus * mus, steps=steps)


def char_det(problem: Problem, mu: complex, steps: int | None = None) -> complex:
    return complex(char_det_batch(problem, [mu], steps=steps)[0])


# -- closed-form free solution ----------------------------------------


def _cos_sqrt(lam: complex, x: float) -> complex:
    """cos(sqrt(lam) * x), entire in lam (series near lam = 0)."""
    z = lam * x * x
    if abs(z) < 1e-4:
        return 1.0 - z / 2.0 + z * z / 24.0 - z ** 3 / 720.0
    w = np.sqrt(complex(lam))
    return complex(np.cos(w * x))


def _sinc_sqrt(lam: complex, x: float) -> complex:
    """sin(sqrt(lam) * x) / sqrt(lam), entire in lam."""
    z = lam * x * x
    if abs(z) < 1e-4:
        return x * (1.0 - z / 6.0 + z * z / 120.0 - z ** 3 / 5040.0)
    w = np.sqrt(complex(lam))
    return complex(np.sin(w * x) / w)


def free_solution(problem: Problem, x: float, lam: complex):
    """Closed-form solution pair (C, C') of the free system -C'' = lam C.

    C(x) = cos(sqrt(lam) x) I - sin(sqrt(lam) x)/sqrt(lam) H_L; both
    formulas are even in sqrt(lam), so the branch choice is immaterial,
    and the lam -> 0 limit is taken by series.
    """
    n = problem.dimension
    eye = np.eye(n)
    c = _cos_sqrt(lam, x)
    s = _sinc_sqrt(lam, x)
    cmat = c * eye - s * problem.h_left
    dmat = -lam * s * eye - c * problem.h_left
    return cmat.astype(complex), dmat.astype(complex)
