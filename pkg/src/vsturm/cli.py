"""Command-line front end.

    vsturm --config problem.json [--out report.json] [--format json|csv]
           [--canonical] [--delta X] [--order K] [--n-range A:B]

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
Reports are written atomically; without --out (or output_path in the
config) the report goes to stdout.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .asymptotics import ContourSpec, build_model, contour_norm, \
    modulus_identities_check, predict_sqrt_eigenvalues, transcendental_root, \
    SingularPsiError
from .config import ConfigError, RunConfig, parse_config
from .ivp import DivergenceError
from .locator import BoundaryTooCloseError, CountMismatchError, \
    PhaseJumpError, scan_low_spectrum
from .report import ContourNormEntry, NamedFit, VerificationReport, \
    serialize_csv, serialize_json, write_atomic
from .verification import cluster_and_match, fit_decay

_NUMERICAL_ERRORS = (DivergenceError, CountMismatchError,
                     BoundaryTooCloseError, PhaseJumpError, SingularPsiError,
                     ArithmeticError)


def _run_spectrum(cfg: RunConfig, rep: VerificationReport):
    records = scan_low_spectrum(
        cfg.problem, cfg.lambda_max, samples=cfg.samples,
        rank_tol=cfg.rank_tol, newton_tol=cfg.newton_tol)
    rep.eigenvalues = tuple(records)


def _run_predict(cfg: RunConfig, rep: VerificationReport):
    model = build_model(cfg.problem, order=cfg.order)
    rep.alphas = tuple(model.alphas)
    lo, hi = cfg.n_range
    rep.predictions = tuple(
        (n, tuple(predict_sqrt_eigenvalues(model, n, order=cfg.order)))
        for n in range(lo, hi + 1))


def _run_verify(cfg: RunConfig, rep: VerificationReport):
    model = build_model(cfg.problem, order=cfg.order)
    rep.alphas = tuple(model.alphas)
    clusters = cluster_and_match(
        cfg.problem, model, cfg.n_range, samples=cfg.samples,
        rank_tol=cfg.rank_tol)
    rep.clusters = tuple(clusters)
    rep.rouche = tuple((c.n, c.rouche_count) for c in clusters)
    rep.eigenvalues = tuple(r for c in clusters for r in c.records)
    pts = [(c.n, max(abs(m) for m in c.mismatch))
           for c in clusters
           if c.mismatch and max(abs(m) for m in c.mismatch) > 0.0]
    if len({n for n, _ in pts}) >= 4:
        rep.decay_fits = (NamedFit("max_mismatch", fit_decay(pts)),)


def _run_contour(cfg: RunConfig, rep: VerificationReport):
    model = build_model(cfg.problem, order=cfg.order)
    rep.alphas = tuple(model.alphas)
    # track the strongest channel; weaker ones decay at least as fast
    alpha = max(model.alphas, key=abs)
    lo, hi = cfg.n_range
    entries = []
    for n in range(lo, hi + 1):
        center = transcendental_root(alpha, n).root
        spec = ContourSpec(center=complex(center), delta=cfg.delta, n=n,
                           samples=512)
        value = contour_norm(cfg.problem, model, spec)
        entries.append(ContourNormEntry(
            n=n, center_re=float(center), center_im=0.0,
            radius=spec.radius, value=value))
    rep.contour_norms = tuple(entries)
    pts = [(e.n, e.value) for e in entries if e.value > 0.0]
    if len({n for n, _ in pts}) >= 4:
        rep.decay_fits = (NamedFit("contour_norm", fit_decay(pts)),)


def _run_transroot(cfg: RunConfig, rep: VerificationReport):
    lo, hi = cfg.n_range
    rep.transroots = tuple(
        transcendental_root(cfg.alpha, n) for n in range(lo, hi + 1))


def _run_identities(cfg: RunConfig, rep: VerificationReport):
    rows = []
    for s in np.linspace(0.0, 10.0, 20):
        for t in np.linspace(-1.0, 1.0, 20):
            rows.append((float(s), float(t),
                         modulus_identities_check(complex(s, t))))
    rep.identities = tuple(rows)


_RUNNERS = {
    "spectrum": _run_spectrum,
    "predict": _run_predict,
    "verify": _run_verify,
    "contour": _run_contour,
    "transroot": _run_transroot,
    "identities": _run_identities,
}


def run(cfg: RunConfig) -> VerificationReport:
    """Execute one command and write its report if a path is configured."""
    rep = VerificationReport(command=cfg.command, config=cfg.echo)
    t0 = time.perf_counter()
    _RUNNERS[cfg.command](cfg, rep)
    if not cfg.canonical:
        rep.timings = {"total_seconds": time.perf_counter() - t0}
    text = serialize_csv(rep) if cfg.format == "csv" else serialize_json(rep)
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
    return rep


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.out is not None:
        cfg.output_path = args.out
    if args.format is not None:
        cfg.format = args.format
    if args.canonical:
        cfg.canonical = True
    if args.delta is not None:
        if args.delta <= 0:
            raise ConfigError("--delta: must be positive")
        cfg.delta = args.delta
    if args.order is not None:
        if args.order not in (1, 2, 3):
            raise ConfigError("--order: must be 1, 2 or 3")
        cfg.order = args.order
    if args.n_range is not None:
        try:
            lo, hi = (int(x) for x in args.n_range.split(":"))
        except ValueError as exc:
            raise ConfigError("--n-range: expected A:B") from exc
        if not (1 <= lo <= hi):
            raise ConfigError("--n-range: need 1 <= A <= B")
        cfg.n_range = (lo, hi)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vsturm",
        description="Eigenvalue computation and asymptotic verification for "
                    "vectorial Sturm-Liouville systems.")
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--out", default=None, help="report output path")
    parser.add_argument("--format", choices=("json", "csv"), default=None)
    parser.add_argument("--canonical", action="store_true",
                        help="omit timings so identical runs byte-match")
    parser.add_argument("--delta", type=float, default=None,
                        help="contour radius scale")
    parser.add_argument("--order", type=int, default=None,
                        help="expansion order 1..3")
    parser.add_argument("--n-range", default=None, help="window range A:B")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = _apply_overrides(parse_config(text), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        rep = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    if not cfg.output_path:
        text = serialize_csv(rep) if cfg.format == "csv" else serialize_json(rep)
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
