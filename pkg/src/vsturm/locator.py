"""Eigenvalue location for (P, H_L, H_R).

Zeros of the characteristic determinant are counted with the argument
principle on circles, located by a real-axis scan plus safeguarded
Newton refinement (the problem is self-adjoint, so every root is real),
and weighted by the rank deficiency of W at the refined root.  Counting
certifies completeness: the located multiplicities must reproduce the
winding number, otherwise the disk is subdivided and finally reported
as a mismatch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import AsymptoticModel, build_model, transcendental_root
from .ivp import (boundary_matrix_batch, char_det_batch, det_w_batch,
                  step_count)
from .problem import PI, Problem

# relative floor of |det| on a circle before we declare the boundary
# too close to a zero for reliable phase tracking
_BOUNDARY_MIN_PUBLIC = 1e-6
_BOUNDARY_MIN_INTERNAL = 1e-9

_MAX_BISECT_DEPTH = 30
_MAX_SUBDIVIDE_DEPTH = 5
_SCAN_POINTS = 65
_NEWTON_MAX_ITER = 80


class BoundaryTooCloseError(ArithmeticError):
    """A zero lies too close to a counting circle; nudge the radius."""


class PhaseJumpError(ArithmeticError):
    """Phase tracking along a circle could not be resolved."""


class CountMismatchError(ArithmeticError):
    """Located multiplicities disagree with the winding number."""


@dataclass(frozen=True)
class Window:
    """Disk of radius <= 1/4 about an index on the real mu axis."""

    center: float
    radius: float = 0.25

    def __post_init__(self):
        if not (0.0 < self.radius <= 0.25):
            raise ValueError("window radius must lie in (0, 1/4]")
        if self.center <= 0.0:
            raise ValueError("window center must be positive")


@dataclass(frozen=True)
class EigenvalueRecord:
    """One located eigenvalue with its multiplicity diagnostics.

    sqrt_lambda is None for negative eigenvalues.  sigma_gap is the
    ratio of the smallest retained to the largest discarded singular
    value of W at the root; values below 10 flag an ill-separated rank
    decision.
    """

    lam: float
    sqrt_lambda: float | None
    multiplicity: int
    window: int | None
    residual_det: float
    sigma_gap: float


# -- winding numbers -----------------------------------------------------


def _winding(fn, samples: int, min_ratio: float,
             conj_symmetric: bool = False) -> int:
    """Winding number about 0 of theta -> fn(theta) over one period.

    fn maps an array of angles in [0, 2 pi) to complex values.  Phase
    increments are kept below pi by adaptive bisection of offending
    arcs; the summed increments must close to an integer multiple of
    2 pi.

    With conj_symmetric=True the caller asserts fn(2 pi - t) equals
    conj(fn(t)), which holds for determinants of real-coefficient
    problems on circles centered on the real axis; the lower half of
    the ring is then mirrored instead of evaluated.
    """
    theta = np.linspace(0.0, 2.0 * PI, samples, endpoint=False)
    if conj_symmetric and samples % 2 == 0:
        half = samples // 2
        upper = fn(theta[:half + 1])
        vals = np.empty(samples, dtype=complex)
        vals[:half + 1] = upper
        vals[half + 1:] = np.conj(upper[1:half][::-1])

        base_fn = fn

        def fn(ts):  # mirror any refinement points below the axis
            ts = np.asarray(ts)
            folded = np.where(ts > PI, 2.0 * PI - ts, ts)
            out = base_fn(folded)
            return np.where(ts > PI, np.conj(out), out)
    else:
        vals = fn(theta)
    mags = np.abs(vals)
    scale = mags.max()
    if scale == 0.0 or mags.min() < min_ratio * scale:
        raise BoundaryTooCloseError(
            "determinant nearly vanishes on the counting circle; "
            "nudge the radius")
    t0 = theta
    t1 = np.roll(theta, -1).copy()
    t1[-1] = 2.0 * PI
    v0 = vals
    v1 = np.roll(vals, -1)
    total = 0.0
    depth = 0
    while t0.size:
        d = np.angle(v1 / v0)
        ok = np.abs(d) < 0.9 * PI
        total += d[ok].sum()
        if ok.all():
            break
        depth += 1
        if depth > _MAX_BISECT_DEPTH:
            raise PhaseJumpError("unresolvable phase jump on counting circle")
        t0, t1, v0, v1 = t0[~ok], t1[~ok], v0[~ok], v1[~ok]
        tm = 0.5 * (t0 + t1)
        vm = fn(np.mod(tm, 2.0 * PI))
        if (np.abs(vm) < min_ratio * scale).any():
            raise BoundaryTooCloseError(
                "determinant nearly vanishes on the counting circle; "
                "nudge the radius")
        t0 = np.concatenate([t0, tm])
        t1 = np.concatenate([tm, t1])
        v0 = np.concatenate([v0, vm])
        v1 = np.concatenate([vm, v1])
    w = total / (2.0 * PI)
    k = round(w)
    if abs(w - k) > 1e-3:
        raise PhaseJumpError(f"winding sum {w} is not an integer")
    return int(k)


def count_zeros_in_disk(problem: Problem, window: Window,
                        samples: int = 256) -> int:
    """Zeros of det W(mu^2), with multiplicity, inside the window disk."""
    if samples < 256:
        raise ValueError("need at least 256 boundary samples")
    c = float(window.center)
    r = window.radius
    steps = step_count(c + r)

    def fn(theta):
        mus = c + r * np.exp(1j * theta)
        return char_det_batch(problem, mus, steps=steps)

    return _winding(fn, samples, _BOUNDARY_MIN_PUBLIC, conj_symmetric=True)


# -- multiplicity --------------------------------------------------------


def multiplicity(problem: Problem, lam: float, rank_tol: float = 1e-6,
                 steps: int | None = None):
    """Rank deficiency of W(lam) and the singular-value gap ratio.

    Returns (m, gap) where m counts singular values below
    rank_tol * sigma_max and gap = sigma_(m+1) / sigma_m across the
    cut (inf when W vanishes to working precision, 0.0 when no null
    space is detected).  A matrix whose largest singular value is
    itself negligible against the natural scale of W counts as fully
    rank deficient.
    """
    w = boundary_matrix_batch(problem, [complex(lam)], steps=steps)[0]
    s = np.linalg.svd(w, compute_uv=False)
    n = s.size
    smax = s[0]
    w_scale = max(1.0, math.sqrt(abs(lam)),
                  float(np.abs(problem.h_left).sum(axis=1).max()),
                  float(np.abs(problem.h_right).sum(axis=1).max()))
    if smax <= rank_tol * w_scale:
        return n, math.inf
    m = int((s < rank_tol * smax).sum())
    if m == 0:
        return 0, 0.0
    if m == n:
        return n, math.inf
    largest_zero = s[n - m]
    smallest_kept = s[n - m - 1]
    gap = math.inf if largest_zero == 0.0 else float(smallest_kept / largest_zero)
    return m, gap


# -- refinement ----------------------------------------------------------


def _newton_real(eval_fn, seeds, lo, hi, f_scale, newton_tol):
    """Safeguarded Newton refinement on the real axis.

    eval_fn maps an array of reals to (complex) determinant values; the
    real part drives the iteration.  The step is Newton applied to
    f / f', which stays quadratic at zeros of any order; f' and f''
    come from central differences with step 1e-6 * max(1, |x|).
    Iterates are clamped to [lo, hi], frozen when they stall or stop
    improving at the noise floor, and accepted only if the final |f|
    is small against f_scale.
    """
    if len(seeds) == 0:
        return np.empty(0)
    mus = np.array(sorted(set(float(s) for s in seeds)))
    active = np.ones(mus.size, dtype=bool)
    prev_f = np.full(mus.size, np.inf)
    no_gain = np.zeros(mus.size, dtype=int)
    span = hi - lo
    for it in range(_NEWTON_MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        x = mus[idx]
        d = 1e-6 * np.maximum(1.0, np.abs(x))
        pts = np.concatenate([x - d, x, x + d])
        vals = np.real(eval_fn(pts))
        f_lo = vals[:idx.size]
        f_mid = vals[idx.size:2 * idx.size]
        f_hi = vals[2 * idx.size:]
        at_floor = np.abs(f_mid) <= 3e-14 * f_scale
        stalled = (np.abs(f_mid) > 0.5 * prev_f[idx]) & (it >= 5)
        no_gain[idx] = np.where(stalled, no_gain[idx] + 1, 0)
        prev_f[idx] = np.abs(f_mid)
        d1 = (f_hi - f_lo) / (2.0 * d)
        d2 = (f_hi - 2.0 * f_mid + f_lo) / (d * d)
        den = d1 * d1 - f_mid * d2
        newton = np.where(np.abs(d1) > 1e-300,
                          -f_mid / np.where(d1 == 0, 1, d1), d)
        step = np.where(np.abs(den) > 1e-300,
                        -f_mid * d1 / np.where(den == 0, 1, den), newton)
        step = np.where(np.isfinite(step), step, newton)
        step = np.clip(step, -0.25 * span, 0.25 * span)
        step = np.where(at_floor, 0.0, step)
        new = np.clip(x + step, lo, hi)
        moved = np.abs(new - x)
        mus[idx] = new
        tol = newton_tol * np.maximum(1.0, np.abs(new))
        done = (moved <= tol) | at_floor | (no_gain[idx] >= 2)
        active[idx[done]] = False
    final = np.abs(np.real(eval_fn(mus)))
    keep = (final <= 1e-7 * f_scale) & (mus > lo) & (mus < hi)
    return mus[keep]


def _dedupe(values: np.ndarray, tol: float) -> list:
    out: list = []
    for v in sorted(values):
        if out and abs(v - out[-1]) <= tol:
            continue
        out.append(float(v))
    return out


def _vfit_polish(problem: Problem, lam: float, steps: int,
                 iters: int = 2) -> float:
    """Polish a root of det W through the V profile of sigma_min.

    Every singular value of W vanishes linearly at an eigenvalue, so
    near a root sigma_min(lam) = c |lam - lam0| regardless of the
    multiplicity; fitting that V on a three-point stencil recovers the
    vertex to evaluation noise, far beyond what Newton on the
    determinant can reach at high-order zeros.
    """
    for _ in range(iters):
        d = 1e-6 * max(1.0, abs(lam))
        w3 = boundary_matrix_batch(
            problem, [lam - d, lam, lam + d], steps=steps)
        smin = np.linalg.svd(w3, compute_uv=False)[:, -1]
        denom = smin[0] + smin[2]
        if denom <= 0.0:
            break
        delta = d * (smin[0] - smin[2]) / denom
        delta = max(-d, min(d, delta))
        lam = lam + delta
    return lam


def _merge_overcount(found, expected, problem, rank_tol, steps, in_lambda):
    """Merge near-coincident roots whose multiplicities overcount.

    High-order zeros limit the attainable root resolution, so two
    refined copies of one multiple root can land just outside the
    dedupe spacing and both report the full local rank deficiency.
    While the total exceeds the winding count, the closest pair within
    1e-5 relative spacing is replaced by its midpoint.
    """
    found = sorted(found)
    while sum(m for _x, m, _g in found) > expected and len(found) >= 2:
        gaps = [found[i + 1][0] - found[i][0] for i in range(len(found) - 1)]
        i = int(np.argmin(gaps))
        if gaps[i] > 1e-5 * max(1.0, abs(found[i][0])):
            break
        x = 0.5 * (found[i][0] + found[i + 1][0])
        lam = x if in_lambda else x * x
        m, gap = multiplicity(problem, lam, rank_tol, steps=steps)
        found = found[:i] + [(x, m, gap)] + found[i + 2:]
    return found


def _scan_candidates(grid, vals):
    """Seed points from sign changes and strict local minima of |f|."""
    cands = []
    mags = np.abs(vals)
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            cands.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            cands.append(0.5 * float(grid[i] + grid[i + 1]))
    for i in range(1, len(grid) - 1):
        if mags[i] < mags[i - 1] and mags[i] < mags[i + 1]:
            cands.append(float(grid[i]))
    return cands


# -- window location ------------------------------------------------------


def _seed_predictions(model: AsymptoticModel, n: int, lo: float, hi: float):
    seeds = []
    for a in dict.fromkeys(model.alphas):
        if n >= 2 + abs(a):
            s = transcendental_root(a, n).root
        else:
            s = n + a / n
        if lo < s < hi:
            seeds.append(s)
    return seeds


def _locate_mu_disk(problem, center, radius, expected, steps, model,
                    samples, rank_tol, newton_tol, depth):
    """Find real roots of det W(mu^2) in a disk, verifying the count."""
    lo = center - radius
    hi = center + radius

    def fn(mus):
        return char_det_batch(problem, np.asarray(mus, dtype=complex),
                              steps=steps)

    def refine(seeds, f_scale):
        roots = _newton_real(fn, seeds, lo, hi, f_scale, newton_tol)
        roots = [math.sqrt(max(_vfit_polish(problem, r * r, steps), 0.0))
                 for r in roots]
        roots = [r for r in _dedupe(roots, 1e-8) if abs(r - center) < radius]
        found = []
        for r in roots:
            m, gap = multiplicity(problem, r * r, rank_tol, steps=steps)
            if m == 0:
                continue  # spurious shallow minimum, not a zero
            found.append((r, m, gap))
        found = _merge_overcount(found, expected, problem, rank_tol, steps,
                                 in_lambda=False)
        return found, sum(m for _r, m, _g in found)

    # the prediction seeds usually account for the whole count; the
    # denser scan only runs when they do not
    probe = np.real(fn(np.linspace(lo, hi, 9)))
    f_scale = float(np.abs(probe).max())
    predicted = _seed_predictions(model, int(round(center)), lo, hi)
    found = []
    total = -1
    if predicted and f_scale > 0.0:
        found, total = refine(predicted, f_scale)
    if total != expected:
        grid = np.linspace(lo, hi, _SCAN_POINTS)
        vals = np.real(fn(grid))
        f_scale = max(f_scale, float(np.abs(vals).max()))
        if f_scale == 0.0:
            raise CountMismatchError("determinant vanishes on the whole window")
        found, total = refine(_scan_candidates(grid, vals) + predicted, f_scale)

    if total == expected:
        return found
    if total < expected and depth < _MAX_SUBDIVIDE_DEPTH:
        merged = list(found)
        for sub_center in (center - 0.5 * radius, center + 0.5 * radius):
            sub_r = 0.6 * radius
            cnt = None
            for _ in range(6):
                try:
                    cnt = _winding(
                        lambda th: fn(sub_center + sub_r * np.exp(1j * th)),
                        max(samples, 256), _BOUNDARY_MIN_INTERNAL)
                    break
                except BoundaryTooCloseError:
                    sub_r *= 1.017
            if cnt is None or cnt == 0:
                continue
            sub = _locate_mu_disk(problem, sub_center, sub_r, cnt, steps,
                                  model, samples, rank_tol, newton_tol,
                                  depth + 1)
            merged.extend(sub)
        uniq: dict = {}
        for r, m, gap in sorted(merged):
            close = [k for k in uniq if abs(k - r) <= 1e-8]
            if not close:
                uniq[r] = (m, gap)
        total = sum(m for (m, _g) in uniq.values())
        if total == expected:
            return [(r, m, g) for r, (m, g) in sorted(uniq.items())]
    raise CountMismatchError(
        f"disk about {center} (radius {radius}): winding count {expected} "
        f"but located multiplicities sum to {total}; roots = "
        f"{[(r, m) for r, m, _ in found]}")


def find_eigenvalues_in_window(problem: Problem, window: Window,
                               samples: int = 256, rank_tol: float = 1e-6,
                               newton_tol: float = 1e-12,
                               model: AsymptoticModel | None = None,
                               with_count: bool = False):
    """All eigenvalue roots inside the window, with multiplicities.

    Roots are seeded from the first-order predictions and a uniform
    real-axis scan, refined by safeguarded Newton, merged below 1e-8
    spacing, and certified against the disk winding number.  Set
    with_count=True to also receive that winding number.
    """
    if window.center < 1.0:
        raise ValueError("window center must be at least 1")
    c = float(window.center)
    r = window.radius
    steps = step_count(c + r)
    count = count_zeros_in_disk(problem, window, samples=samples)
    if count == 0:
        return ([], 0) if with_count else []
    if model is None:
        model = build_model(problem, order=1)
    found = _locate_mu_disk(problem, c, r, count, steps, model, samples,
                            rank_tol, newton_tol, depth=0)
    win_index = int(round(c))
    records = []
    for root, m, gap in sorted(found):
        res = abs(complex(char_det_batch(problem, [root], steps=steps)[0]))
        records.append(EigenvalueRecord(
            lam=float(root * root), sqrt_lambda=float(root), multiplicity=m,
            window=win_index, residual_det=res, sigma_gap=gap))
    return (records, count) if with_count else records


# -- low-spectrum scan -----------------------------------------------------


def _lambda_winding(problem, center, radius, samples, steps):
    def fn(theta):
        lams = center + radius * np.exp(1j * theta)
        return det_w_batch(problem, lams, steps=steps)

    return _winding(fn, samples, _BOUNDARY_MIN_INTERNAL, conj_symmetric=True)


def _locate_lambda_disk(problem, center, radius, expected, steps, model,
                        samples, rank_tol, newton_tol, depth):
    """Real roots of det W(lambda) on a disk of the lambda plane."""
    lo = center - radius
    hi = center + radius

    def fn(lams):
        return det_w_batch(problem, np.asarray(lams, dtype=complex),
                           steps=steps)

    grid = np.linspace(lo, hi, 97)
    vals = np.real(fn(grid))
    f_scale = float(np.abs(vals).max())
    if f_scale == 0.0:
        raise CountMismatchError("determinant vanishes on the whole interval")
    seeds = _scan_candidates(grid, vals)
    for a in dict.fromkeys(model.alphas):
        n = 1
        while True:
            pred = (n + a / n) ** 2 if n >= 1 else None
            if pred > hi + 1.0:
                break
            if lo < pred < hi:
                seeds.append(pred)
            n += 1
    roots = _newton_real(fn, seeds, lo, hi, f_scale, newton_tol)
    roots = [_vfit_polish(problem, r, steps) for r in roots]
    roots = _dedupe(roots, 1e-8)
    roots = [r for r in roots if abs(r - center) < radius]

    found = []
    for r in roots:
        m, gap = multiplicity(problem, r, rank_tol, steps=steps)
        if m == 0:
            continue
        found.append((r, m, gap))
    found = _merge_overcount(found, expected, problem, rank_tol, steps,
                             in_lambda=True)
    total = sum(m for _r, m, _g in found)
    if total == expected:
        return found
    if total < expected and depth < _MAX_SUBDIVIDE_DEPTH:
        merged = list(found)
        for k in (0, 1):
            sub_c = center + (k - 0.5) * radius
            sub_r = 0.6 * radius
            cnt = None
            for _ in range(6):
                try:
                    cnt = _lambda_winding(problem, sub_c, sub_r, samples, steps)
                    break
                except BoundaryTooCloseError:
                    sub_r *= 1.017
            if cnt is None or cnt == 0:
                continue
            merged.extend(_locate_lambda_disk(
                problem, sub_c, sub_r, cnt, steps, model, samples, rank_tol,
                newton_tol, depth + 1))
        uniq: dict = {}
        for r, m, gap in sorted(merged):
            if not any(abs(k - r) <= 1e-8 * max(1.0, abs(r)) for k in uniq):
                uniq[r] = (m, gap)
        total = sum(m for (m, _g) in uniq.values())
        if total == expected:
            return [(r, m, g) for r, (m, g) in sorted(uniq.items())]
    raise CountMismatchError(
        f"lambda disk about {center} (radius {radius}): winding count "
        f"{expected} but located multiplicities sum to {total}")


def _crude_lower_bound(problem: Problem) -> float:
    xs = np.linspace(0.0, PI, 512)
    pvals = problem.potential.eval_grid(xs)
    pnorm = float(np.abs(pvals).sum(axis=2).max())
    hnorm = max(float(np.abs(problem.h_left).sum(axis=1).max()),
                float(np.abs(problem.h_right).sum(axis=1).max()))
    return -pnorm - 2.0 * hnorm - 1.0


def scan_low_spectrum(problem: Problem, lambda_max: float,
                      samples: int = 256, rank_tol: float = 1e-6,
                      newton_tol: float = 1e-12) -> list:
    """All eigenvalues up to lambda_max, ascending with multiplicities.

    The real lambda axis from a crude lower bound up to lambda_max is
    covered by abutting disks in the lambda plane; each disk is counted
    by the argument principle, refined, and verified.  Disk endpoints
    are nudged deterministically whenever a zero sits too close to a
    boundary circle.
    """
    if lambda_max < 1.0:
        raise ValueError("need lambda_max >= 1")
    model = build_model(problem, order=1)
    lam_lo = _crude_lower_bound(problem)
    records = []
    a = lam_lo
    while a < lambda_max - 1e-12:
        chunk = max(4.0, 1.6 * math.sqrt(max(abs(a), 4.0)))
        b = a + chunk
        if b > lambda_max:
            b = lambda_max + 0.05 * chunk
        cnt = None
        for _ in range(9):
            center = 0.5 * (a + b)
            radius = 0.5 * (b - a)
            steps = step_count(math.sqrt(max(abs(a), abs(b))))
            try:
                cnt = _lambda_winding(problem, center, radius, samples, steps)
                break
            except BoundaryTooCloseError:
                b += 0.0173 * (b - a)
        if cnt is None:
            raise BoundaryTooCloseError(
                f"could not place a clean counting circle near [{a}, {b}]")
        if cnt > 0:
            found = _locate_lambda_disk(problem, center, radius, cnt, steps,
                                        model, samples, rank_tol, newton_tol,
                                        depth=0)
            for lam, m, gap in found:
                res = abs(complex(det_w_batch(problem, [lam], steps=steps)[0]))
                records.append((lam, m, gap, res))
        a = b
    records.sort()
    out = []
    for lam, m, gap, res in records:
        if lam > lambda_max + 1e-12 * max(1.0, abs(lambda_max)):
            continue
        sqrt_lam = math.sqrt(lam) if lam >= 0.0 else None
        win = None
        if sqrt_lam is not None:
            n = int(round(sqrt_lam))
            if n >= 1 and abs(sqrt_lam - n) < 0.25:
                win = n
        out.append(EigenvalueRecord(
            lam=float(lam), sqrt_lambda=sqrt_lam, multiplicity=m,
            window=win, residual_det=res, sigma_gap=gap))
    return out
