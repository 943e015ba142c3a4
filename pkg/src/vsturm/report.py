"""Report structures and their JSON / CSV serialization.

Floating-point values are emitted with shortest round-trip precision
(repr), so parse(serialize(report)) reproduces the exact report and two
runs with the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field

from .asymptotics import TransRootResult
from .locator import EigenvalueRecord
from .verification import ClusterReport, DecayFit


@dataclass(frozen=True)
class NamedFit:
    name: str
    fit: DecayFit


@dataclass(frozen=True)
class ContourNormEntry:
    n: int
    center_re: float
    center_im: float
    radius: float
    value: float


@dataclass
class VerificationReport:
    command: str
    config: dict
    alphas: tuple = ()
    eigenvalues: tuple = ()
    clusters: tuple = ()
    decay_fits: tuple = ()
    rouche: tuple = ()          # (n, count) pairs
    predictions: tuple = ()     # (n, (values...)) pairs
    transroots: tuple = ()
    contour_norms: tuple = ()
    identities: tuple = ()      # (s, t, error) triples
    timings: dict | None = None


def _record_dict(r: EigenvalueRecord) -> dict:
    return {"lambda": r.lam, "sqrt_lambda": r.sqrt_lambda,
            "multiplicity": r.multiplicity, "window": r.window,
            "residual_det": r.residual_det, "sigma_gap": r.sigma_gap}


def _record_from(d: dict) -> EigenvalueRecord:
    return EigenvalueRecord(
        lam=d["lambda"], sqrt_lambda=d["sqrt_lambda"],
        multiplicity=d["multiplicity"], window=d["window"],
        residual_det=d["residual_det"], sigma_gap=d["sigma_gap"])


def report_to_dict(rep: VerificationReport) -> dict:
    out = {
        "command": rep.command,
        "config": rep.config,
        "alphas": list(rep.alphas),
        "eigenvalues": [_record_dict(r) for r in rep.eigenvalues],
        "clusters": [{
            "n": c.n,
            "eigenvalues": [_record_dict(r) for r in c.records],
            "multiplicity_sum": c.multiplicity_sum,
            "rouche_count": c.rouche_count,
            "residuals": list(c.residuals),
            "matched_alphas": list(c.matched_alphas),
            "mismatch": list(c.mismatch),
        } for c in rep.clusters],
        "decay_fits": [{
            "name": f.name,
            "exponent": f.fit.exponent,
            "r_squared": f.fit.r_squared,
            "points": [list(p) for p in f.fit.points],
        } for f in rep.decay_fits],
        "rouche": [{"n": n, "count": c} for n, c in rep.rouche],
        "predictions": [{"n": n, "values": list(v)} for n, v in rep.predictions],
        "transroots": [{
            "alpha": t.alpha, "n": t.n, "root": t.root,
            "series_seed": t.series_seed, "kappa_estimate": t.kappa_estimate,
        } for t in rep.transroots],
        "contour_norms": [{
            "n": e.n, "center_re": e.center_re, "center_im": e.center_im,
            "radius": e.radius, "value": e.value,
        } for e in rep.contour_norms],
        "identities": [{"s": s, "t": t, "error": e} for s, t, e in rep.identities],
    }
    if rep.timings is not None:
        out["timings"] = rep.timings
    return out


def report_from_dict(d: dict) -> VerificationReport:
    return VerificationReport(
        command=d["command"],
        config=d["config"],
        alphas=tuple(d["alphas"]),
        eigenvalues=tuple(_record_from(r) for r in d["eigenvalues"]),
        clusters=tuple(ClusterReport(
            n=c["n"],
            records=tuple(_record_from(r) for r in c["eigenvalues"]),
            multiplicity_sum=c["multiplicity_sum"],
            rouche_count=c["rouche_count"],
            residuals=tuple(c["residuals"]),
            matched_alphas=tuple(c["matched_alphas"]),
            mismatch=tuple(c["mismatch"]),
        ) for c in d["clusters"]),
        decay_fits=tuple(NamedFit(
            name=f["name"],
            fit=DecayFit(exponent=f["exponent"], r_squared=f["r_squared"],
                         points=tuple(tuple(p) for p in f["points"])),
        ) for f in d["decay_fits"]),
        rouche=tuple((r["n"], r["count"]) for r in d["rouche"]),
        predictions=tuple((p["n"], tuple(p["values"])) for p in d["predictions"]),
        transroots=tuple(TransRootResult(
            alpha=t["alpha"], n=t["n"], root=t["root"],
            series_seed=t["series_seed"], kappa_estimate=t["kappa_estimate"],
        ) for t in d["transroots"]),
        contour_norms=tuple(ContourNormEntry(
            n=e["n"], center_re=e["center_re"], center_im=e["center_im"],
            radius=e["radius"], value=e["value"],
        ) for e in d["contour_norms"]),
        identities=tuple((i["s"], i["t"], i["error"]) for i in d["identities"]),
        timings=d.get("timings"),
    )


def serialize_json(rep: VerificationReport) -> str:
    return json.dumps(report_to_dict(rep), indent=2, sort_keys=True) + "\n"


def parse_json(text: str) -> VerificationReport:
    return report_from_dict(json.loads(text))


# -- CSV: one plot-ready table per command ------------------------------

_CSV_HEADERS = {
    "spectrum": ["lambda", "sqrt_lambda", "multiplicity", "window",
                 "residual_det", "sigma_gap"],
    "predict": ["n", "slot", "predicted_sqrt_lambda"],
    "verify": ["n", "slot", "residual", "matched_alpha", "mismatch",
               "multiplicity_sum", "rouche_count"],
    "contour": ["n", "center_re", "center_im", "radius", "value", "n_times_value"],
    "transroot": ["n", "root", "series_seed", "kappa_estimate"],
    "identities": ["s", "t", "error"],
}


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def serialize_csv(rep: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cmd = rep.command
    w.writerow(_CSV_HEADERS[cmd])
    if cmd == "spectrum":
        for r in rep.eigenvalues:
            w.writerow([_fmt(r.lam), _fmt(r.sqrt_lambda), r.multiplicity,
                        _fmt(r.window), _fmt(r.residual_det), _fmt(r.sigma_gap)])
    elif cmd == "predict":
        for n, values in rep.predictions:
            for slot, v in enumerate(values):
                w.writerow([n, slot, _fmt(v)])
    elif cmd == "verify":
        for c in rep.clusters:
            slots = max(len(c.residuals), 1)
            for slot in range(slots):
                res = c.residuals[slot] if slot < len(c.residuals) else None
                al = c.matched_alphas[slot] if slot < len(c.matched_alphas) else None
                mm = c.mismatch[slot] if slot < len(c.mismatch) else None
                w.writerow([c.n, slot, _fmt(res), _fmt(al), _fmt(mm),
                            c.multiplicity_sum, c.rouche_count])
    elif cmd == "contour":
        for e in rep.contour_norms:
            w.writerow([e.n, _fmt(e.center_re), _fmt(e.center_im),
                        _fmt(e.radius), _fmt(e.value), _fmt(e.n * e.value)])
    elif cmd == "transroot":
        for t in rep.transroots:
            w.writerow([t.n, _fmt(t.root), _fmt(t.series_seed),
                        _fmt(t.kappa_estimate)])
    elif cmd == "identities":
        for s, t, e in rep.identities:
            w.writerow([_fmt(s), _fmt(t), _fmt(e)])
    else:
        raise ValueError(f"no CSV layout for command {cmd!r}")
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file plus rename; partial output never lands."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
