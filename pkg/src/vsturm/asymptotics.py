"""Large-eigenvalue model for the boundary matrix W.

W(mu^2) splits into an explicitly diagonalizable principal part

    Psi(mu^2) = -mu sin(mu pi) I + cos(mu pi) G1,
    G1 = H_R - H_L + (1/2) int_0^pi P,

plus a remainder that decays in 1/mu whose first corrections involve
the matrices G2 and G3 built from boundary values and exact weighted
integrals of P.  The characteristic values of G1 divided by pi are the
first-order coefficients of sqrt(lambda) near each large integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ivp import boundary_matrix_batch, step_count
from .problem import PI, Problem, PotentialSpec, integrate_potential, sym_matrix
from .trigpoly import TrigPoly


class SingularPsiError(ArithmeticError):
    """Psi is numerically singular on a requested contour."""


# -- accurate sin/cos of pi*z ------------------------------------------


def sinpi(z):
    """sin(pi z) for real or complex arrays, with exact integer reduction."""
    z = np.asarray(z, dtype=complex)
    s = z.real
    t = z.imag
    m = np.round(s)
    r = s - m
    sign = 1.0 - 2.0 * np.mod(m, 2.0)
    pr = PI * r
    pt = PI * t
    out = sign * (np.sin(pr) * np.cosh(pt) + 1j * np.cos(pr) * np.sinh(pt))
    return out if out.ndim else complex(out)


def cospi(z):
    """cos(pi z) for real or complex arrays, with exact integer reduction."""
    z = np.asarray(z, dtype=complex)
    s = z.real
    t = z.imag
    m = np.round(s)
    r = s - m
    sign = 1.0 - 2.0 * np.mod(m, 2.0)
    pr = PI * r
    pt = PI * t
    out = sign * (np.cos(pr) * np.cosh(pt) - 1j * np.sin(pr) * np.sinh(pt))
    return out if out.ndim else complex(out)


# -- small dense symmetric eigensolver ---------------------------------


def jacobi_eigh(matrix, tol: float = 1e-13, max_sweeps: int = 64):
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm drops below
    tol * max(1, ||A||_F).  Eigenvalues return ascending; each
    eigenvector is normalized so its first component of meaningful size
    is positive, which makes the output deterministic.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    limit = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, (a * a).sum() - (np.diag(a) ** 2).sum()))
        if off <= limit:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for k in range(n):
        col = v[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0.0:
            v[:, k] = -col
    return w, v


# -- model types --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AsymptoticModel:
    """G-matrices of the expansion plus the spectral data of G1.

    alphas are the characteristic values of G1 divided by pi, ascending
    with multiplicity; u holds the matching orthonormal eigenvectors as
    columns.  g2 and g3 are kept exactly as the expansion produces them
    (they need not be symmetric for non-commuting data).
    """

    g1: np.ndarray
    g2: np.ndarray | None
    g3: np.ndarray | None
    alphas: tuple
    u: np.ndarray


@dataclass(frozen=True)
class ContourSpec:
    """Circle of radius delta / n^2 about a near-integer center."""

    center: complex
    delta: float
    n: int
    samples: int = 512

    def __post_init__(self):
        if self.delta <= 0.0 or self.n < 1:
            raise ValueError("need delta > 0 and n >= 1")
        if self.samples < 16:
            raise ValueError("need at least 16 contour samples")

    @property
    def radius(self) -> float:
        return self.delta / (self.n * self.n)


@dataclass(frozen=True)
class TransRootResult:
    """One refined root of mu sin(mu pi) = alpha pi cos(mu pi)."""

    alpha: float
    n: int
    root: float
    series_seed: float
    kappa_estimate: float


# -- exact matrix trig-poly helpers for G2 / G3 -------------------------


def _mat_add(a, b):
    return [[a[i][j] + b[i][j] for j in range(len(a))] for i in range(len(a))]


def _mat_scale(a, s):
    return [[a[i][j] * s for j in range(len(a))] for i in range(len(a))]


def _mat_mul(a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = TrigPoly.zero()
            for k in range(n):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def _mat_const(m: np.ndarray):
    n = m.shape[0]
    return [[TrigPoly.const(float(m[i][j])) for j in range(n)] for i in range(n)]


def _mat_integrate(a, lo: float, hi: float) -> np.ndarray:
    n = len(a)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = a[i][j].integrate(lo, hi)
    return out


def _mat_eval(a, x: float) -> np.ndarray:
    n = len(a)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = a[i][j](x)
    return out


def _mat_cumint(a, x0: float):
    """Entrywise antiderivative anchored so the result vanishes at x0."""
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            f = a[i][j].antiderivative()
            row.append(f - f(x0))
        out.append(row)
    return out


def _weighted_integrals(spec: PotentialSpec):
    """Exact int_0^pi P K and int_0^pi P^2 with K(t) = (1/2) int_0^t P."""
    n = spec.order
    ipk = np.zeros((n, n))
    ip2 = np.zeros((n, n))
    prefix = np.zeros((n, n))  # int_0^{piece start} P
    for p in range(spec.n_pieces):
        lo = spec.breaks[p]
        hi = spec.breaks[p + 1]
        pm = spec.piece_matrix(p)
        # K on this piece: (prefix + running integral from lo) / 2
        k_piece = _mat_scale(
            _mat_add(_mat_const(prefix), _mat_cumint(pm, lo)), 0.5)
        ipk += _mat_integrate(_mat_mul(pm, k_piece), lo, hi)
        ip2 += _mat_integrate(_mat_mul(pm, pm), lo, hi)
        prefix = prefix + spec.integral(lo, hi)
    return ipk, ip2


def _boundary_derivatives(spec: PotentialSpec):
    n = spec.order
    first = spec.piece_matrix(0)
    last = spec.piece_matrix(spec.n_pieces - 1)
    dp0 = np.empty((n, n))
    dppi = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            dp0[i, j] = first[i][j].derivative()(0.0)
            dppi[i, j] = last[i][j].derivative()(PI)
    return dp0, dppi


# -- model construction --------------------------------------------------


def build_model(problem: Problem, order: int = 1) -> AsymptoticModel:
    """Assemble G1 (and optionally G2, G3) with the spectral data of G1."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    spec = problem.potential
    hl = problem.h_left
    hr = problem.h_right
    kpp = 0.5 * integrate_potential(spec, 0.0, PI)
    g1 = sym_matrix(hr - hl + kpp)

    g2 = None
    g3 = None
    if order >= 2:
        ipk, ip2 = _weighted_integrals(spec)
        p0 = spec.eval_at(0.0)
        ppi = spec.eval_at(PI)
        # boundary term carries 1/4, not 1/2: both the exact expansion of
        # the constant-potential solution and direct numerical limits of
        # mu * E / sin(mu pi) converge to this combination
        g2 = 0.25 * (ppi + p0) + 0.5 * ipk + hr @ kpp - kpp @ hl - hr @ hl
        if order >= 3:
            dp0, dppi = _boundary_derivatives(spec)
            g3 = (0.25 * (dppi - dp0)
                  + 0.5 * ipk @ hl
                  + 0.25 * hr @ (ppi - p0)
                  + 0.125 * (ip2 - (2.0 * kpp) @ p0)
                  + 0.5 * (ppi @ kpp - hl)
                  + hr @ kpp @ hl)

    w, u = jacobi_eigh(g1)
    alphas = tuple(float(x) / PI for x in w)
    recon = u @ np.diag(w) @ u.T
    if np.abs(recon - g1).max() > 1e-10 * max(1.0, np.abs(g1).max()):
        raise ArithmeticError("eigendecomposition of G1 failed to reconstruct")
    return AsymptoticModel(g1=g1, g2=g2, g3=g3, alphas=alphas, u=u)


# -- evaluations ---------------------------------------------------------


def psi_matrix(model: AsymptoticModel, mu: complex) -> np.ndarray:
    """Principal part -mu sin(mu pi) I + cos(mu pi) G1."""
    n = model.g1.shape[0]
    mu = complex(mu)
    return (-mu * sinpi(mu)) * np.eye(n) + cospi(mu) * model.g1


def rho_values(model: AsymptoticModel, mus) -> np.ndarray:
    """Diagonal entries rho_i(mu) = -mu sin(mu pi) + alpha_i pi cos(mu pi).

    Returns shape (len(mus), N); these are the eigenvalues of Psi in the
    eigenbasis of G1.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    a = np.asarray(model.alphas) * PI
    return (-mus * sinpi(mus))[:, None] + cospi(mus)[:, None] * a[None, :]


def residual_matrix(problem: Problem, model: AsymptoticModel,
                    mu: complex) -> np.ndarray:
    """Remainder E(mu^2) = W(mu^2) - Psi(mu^2)."""
    mu = complex(mu)
    w = boundary_matrix_batch(problem, [mu * mu])[0]
    return w - psi_matrix(model, mu)


def contour_norm(problem: Problem, model: AsymptoticModel,
                 contour: ContourSpec) -> float:
    """Max over contour samples of the inf-norm of U* Psi^-1 E U.

    Psi^-1 is applied through the diagonalization (each row divided by
    its rho_i); the sampled max is a lower bound of the true supremum,
    which is all the decay checks need.
    """
    theta = np.linspace(0.0, 2.0 * PI, contour.samples, endpoint=False)
    if contour.samples % 2 == 0 and abs(complex(contour.center).imag) == 0.0:
        # the norm is conjugation invariant, so for real centers the
        # lower half of the ring repeats the upper half
        theta = theta[:contour.samples // 2 + 1]
    mus = contour.center + contour.radius * np.exp(1j * theta)
    steps = step_count(float(np.abs(mus).max()))
    w = boundary_matrix_batch(problem, mus * mus, steps=steps)
    n = model.g1.shape[0]
    psi = ((-mus * sinpi(mus))[:, None, None] * np.eye(n)[None]
           + cospi(mus)[:, None, None] * model.g1[None])
    e = w - psi
    rho = rho_values(model, mus)
    if np.abs(rho).min() <= 1e-12:
        raise SingularPsiError(
            "Psi nearly singular on the contour; adjust delta")
    q = np.einsum("ij,bjk,kl->bil", model.u.T, e, model.u)
    q = q / rho[:, :, None]
    row_sums = np.abs(q).sum(axis=2)
    return float(row_sums.max())


def transcendental_root(alpha: float, n: int) -> TransRootResult:
    """Root of mu sin(mu pi) - alpha pi cos(mu pi) = 0 near the integer n.

    Newton iteration from the series seed n + alpha/n, which lies in the
    basin whenever n >= 2 + |alpha|.  kappa_estimate = n^3 (root - seed)
    tracks the next series coefficient.
    """
    alpha = float(alpha)
    if n < 2 + abs(alpha):
        raise ValueError(f"need n >= 2 + |alpha|, got n = {n}, alpha = {alpha}")
    seed = n + alpha / n

    def f(mu):
        return mu * sinpi(mu).real - alpha * PI * cospi(mu).real

    def fp(mu):
        return (1.0 + alpha * PI * PI) * sinpi(mu).real + mu * PI * cospi(mu).real

    mu = seed
    trajectory = [mu]
    tol = 1e-13 * n
    converged = False
    for _ in range(50):
        val = f(mu)
        if abs(val) <= tol:
            converged = True
            break
        der = fp(mu)
        if der == 0.0:
            break
        step = val / der
        # keep the iterate inside the window about n
        step = max(-0.25, min(0.25, step))
        mu = mu - step
        trajectory.append(mu)
        if abs(step) < 1e-16 * max(1.0, abs(mu)):
            converged = abs(f(mu)) <= tol
            break
    if not converged and abs(f(mu)) > tol:
        raise ArithmeticError(
            f"transcendental root failed for alpha = {alpha}, n = {n}; "
            f"trajectory = {trajectory}")
    kappa = n ** 3 * ((mu - n) - alpha / n)
    return TransRootResult(alpha=alpha, n=n, root=float(mu),
                           series_seed=float(seed), kappa_estimate=float(kappa))


def predict_sqrt_eigenvalues(model: AsymptoticModel, n: int,
                             order: int = 1) -> list:
    """Predicted sqrt(lambda) values in the window about n, ascending.

    order 1 gives n + alpha/n per characteristic value; order 3 refines
    each through the transcendental root when the seed is in its basin.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    out = []
    for a in model.alphas:
        if order >= 3 and n >= 2 + abs(a):
            out.append(transcendental_root(a, n).root)
        else:
            out.append(n + a / n)
    return sorted(out)


def modulus_identities_check(mu: complex) -> float:
    """Max absolute error across the three modulus identities at mu = s + it."""
    mu = complex(mu)
    s = mu.real
    t = mu.imag
    if abs(t) > 2.0:
        raise ValueError("identity check restricted to |Im mu| <= 2")
    sn = sinpi(mu)
    cs = cospi(mu)
    cosh2t = math.cosh(2.0 * t * PI)
    cos2s = cospi(2.0 * s).real
    sin2s = sinpi(2.0 * s).real
    e1 = abs(abs(sn) ** 2 - 0.5 * (cosh2t - cos2s))
    e2 = abs(abs(cs) ** 2 - 0.5 * (cosh2t + cos2s))
    lhs3 = 2.0 * (mu * sn * np.conj(cs)).real
    # the product-to-sum expansion gives s sin(2 s pi) MINUS t sinh(2 t pi):
    # 2 mu sin(mu pi) conj(cos(mu pi)) = mu (sin 2 s pi + i sinh 2 t pi)
    rhs3 = s * sin2s - t * math.sinh(2.0 * t * PI)
    e3 = abs(lhs3 - rhs3)
    return float(max(e1, e2, e3))
