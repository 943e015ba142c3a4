"""Problem data for -phi'' + P(x) phi = lambda phi on [0, pi].

The potential P is an N x N real symmetric matrix function described
piecewise by exact trig-polynomial entries (see :mod:`vsturm.trigpoly`);
only the upper triangle is stored, so symmetry cannot be violated.  The
Robin boundary matrices H_L, H_R are constant real symmetric matrices,
symmetrized by averaging at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .trigpoly import TrigPoly

PI = math.pi
MAX_DIMENSION = 16

# slack for x-domain checks, absorbs rounding in caller-computed endpoints
_EDGE_TOL = 1e-12


def sym_matrix(entries) -> np.ndarray:
    """Validate and return a read-only real symmetric matrix.

    Symmetry is enforced by averaging with the transpose, so downstream
    code can rely on entries[i, j] == entries[j, i] exactly.
    """
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    a = 0.5 * (a + a.T)
    a.flags.writeable = False
    return a


def _upper_len(n: int) -> int:
    return n * (n + 1) // 2


def _upper_index(n: int, i: int, j: int) -> int:
    # row-major upper triangle, requires i <= j
    return i * n - (i * (i - 1)) // 2 + (j - i)


def _as_entry(e) -> TrigPoly:
    if isinstance(e, TrigPoly):
        return e
    return TrigPoly.const(float(e))


@dataclass(frozen=True)
class PotentialSpec:
    """Piecewise description of the symmetric matrix potential P(x).

    ``breaks`` runs 0 = b0 < b1 < ... < bm = pi and ``pieces[p]`` holds
    the row-major upper triangle of P on [b_p, b_{p+1}].  Continuity
    across breakpoints is not required.
    """

    order: int
    kind: str
    breaks: tuple
    pieces: tuple

    def __post_init__(self):
        n = self.order
        if not (1 <= n <= MAX_DIMENSION):
            raise ValueError(f"order must be in 1..{MAX_DIMENSION}, got {n}")
        b = self.breaks
        if len(b) < 2 or abs(b[0]) > _EDGE_TOL or abs(b[-1] - PI) > _EDGE_TOL:
            raise ValueError("breakpoints must run from 0 to pi")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(b) - 1:
            raise ValueError("need one piece per breakpoint interval")
        for piece in self.pieces:
            if len(piece) != _upper_len(n):
                raise ValueError("each piece needs n*(n+1)/2 upper-triangle entries")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(order: int) -> "PotentialSpec":
        upper = tuple(TrigPoly.zero() for _ in range(_upper_len(order)))
        return PotentialSpec(order, "zero", (0.0, PI), (upper,))

    @staticmethod
    def constant(matrix) -> "PotentialSpec":
        m = sym_matrix(matrix)
        n = m.shape[0]
        upper = tuple(TrigPoly.const(m[i, j])
                      for i in range(n) for j in range(i, n))
        return PotentialSpec(n, "constant", (0.0, PI), (upper,))

    @staticmethod
    def diagonal(entries: Sequence) -> "PotentialSpec":
        n = len(entries)
        diag = [_as_entry(e) for e in entries]
        upper = []
        for i in range(n):
            for j in range(i, n):
                upper.append(diag[i] if i == j else TrigPoly.zero())
        return PotentialSpec(n, "diagonal", (0.0, PI), (tuple(upper),))

    @staticmethod
    def dense(order: int, upper: Sequence) -> "PotentialSpec":
        if len(upper) != _upper_len(order):
            raise ValueError("dense spec needs n*(n+1)/2 upper-triangle entries")
        return PotentialSpec(order, "dense", (0.0, PI),
                             (tuple(_as_entry(e) for e in upper),))

    @staticmethod
    def piecewise(order: int, breakpoints: Sequence[float],
                  pieces: Sequence[Sequence]) -> "PotentialSpec":
        bps = tuple(float(x) for x in breakpoints)
        if any(not (0.0 < x < PI) for x in bps):
            raise ValueError("interior breakpoints must lie strictly inside (0, pi)")
        breaks = (0.0,) + bps + (PI,)
        built = tuple(tuple(_as_entry(e) for e in piece) for piece in pieces)
        return PotentialSpec(order, "piecewise", breaks, built)

    # -- structure queries ---------------------------------------------

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    def entry(self, piece: int, i: int, j: int) -> TrigPoly:
        if i > j:
            i, j = j, i
        return self.pieces[piece][_upper_index(self.order, i, j)]

    def piece_matrix(self, piece: int) -> list:
        """Full N x N nested list of TrigPoly entries for one piece."""
        n = self.order
        return [[self.entry(piece, i, j) for j in range(n)] for i in range(n)]

    def piece_at(self, x: float) -> int:
        b = self.breaks
        for p in range(len(b) - 2):
            if x < b[p + 1]:
                return p
        return len(b) - 2

    def is_diagonal(self) -> bool:
        n = self.order
        return all(self.entry(p, i, j).is_zero()
                   for p in range(self.n_pieces)
                   for i in range(n) for j in range(i + 1, n))

    def is_constant(self) -> bool:
        if self.n_pieces != 1:
            return False
        return all(e.is_constant() for e in self.pieces[0])

    def constant_matrix(self) -> np.ndarray:
        if not self.is_constant():
            raise ValueError("potential is not constant")
        n = self.order
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                out[i, j] = out[j, i] = self.entry(0, i, j).constant_value()
        return out

    # -- evaluation ----------------------------------------------------

    def eval_at(self, x: float) -> np.ndarray:
        p = self.piece_at(x)
        n = self.order
        out = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                v = self.entry(p, i, j)(x)
                out[i, j] = v
                out[j, i] = v
        return out

    def eval_grid(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate P on a sorted grid, returning shape (len(xs), N, N)."""
        xs = np.asarray(xs, dtype=float)
        n = self.order
        out = np.empty((xs.size, n, n))
        edges = np.asarray(self.breaks[1:-1])
        idx = np.searchsorted(edges, xs, side="right")
        for p in range(self.n_pieces):
            mask = idx == p
            if not mask.any():
                continue
            sub = xs[mask]
            for i in range(n):
                for j in range(i, n):
                    v = self.entry(p, i, j)(sub)
                    out[mask, i, j] = v
                    out[mask, j, i] = v
        return out

    def integral(self, a: float, b: float) -> np.ndarray:
        n = self.order
        out = np.zeros((n, n))
        br = self.breaks
        for p in range(self.n_pieces):
            lo = max(a, br[p])
            hi = min(b, br[p + 1])
            if hi <= lo:
                continue
            for i in range(n):
                for j in range(i, n):
                    v = self.entry(p, i, j).integrate(lo, hi)
                    out[i, j] += v
                    if i != j:
                        out[j, i] += v
        return out


@dataclass(frozen=True, eq=False)
class Problem:
    """The eigenvalue problem (P, H_L, H_R) in dimension N."""

    potential: PotentialSpec
    h_left: np.ndarray
    h_right: np.ndarray
    dimension: int

    def __post_init__(self):
        hl = sym_matrix(self.h_left)
        hr = sym_matrix(self.h_right)
        n = self.potential.order
        if hl.shape[0] != n or hr.shape[0] != n or self.dimension != n:
            raise ValueError("potential and boundary matrices must share one order")
        object.__setattr__(self, "h_left", hl)
        object.__setattr__(self, "h_right", hr)


def make_problem(potential: PotentialSpec, h_left=None, h_right=None) -> Problem:
    n = potential.order
    hl = np.zeros((n, n)) if h_left is None else h_left
    hr = np.zeros((n, n)) if h_right is None else h_right
    return Problem(potential, hl, hr, n)


# -- spec-level operations --------------------------------------------


def eval_potential(spec: PotentialSpec, x: float) -> np.ndarray:
    """P(x) as a symmetric matrix; x must lie in [0, pi]."""
    if not (-_EDGE_TOL <= x <= PI + _EDGE_TOL):
        raise ValueError(f"x = {x} outside [0, pi]")
    return spec.eval_at(min(max(x, 0.0), PI))


def integrate_potential(spec: PotentialSpec, a: float, b: float) -> np.ndarray:
    """Entrywise integral of P over [a, b] in closed form."""
    if a > b:
        raise ValueError(f"need a <= b, got a = {a}, b = {b}")
    if not (-_EDGE_TOL <= a and b <= PI + _EDGE_TOL):
        raise ValueError(f"[{a}, {b}] not contained in [0, pi]")
    return spec.integral(max(a, 0.0), min(b, PI))


def kernel_diag(spec: PotentialSpec, x: float) -> np.ndarray:
    """Diagonal transformation-kernel value, half the running integral of P."""
    if not (-_EDGE_TOL <= x <= PI + _EDGE_TOL):
        raise ValueError(f"x = {x} outside [0, pi]")
    return 0.5 * integrate_potential(spec, 0.0, x)
