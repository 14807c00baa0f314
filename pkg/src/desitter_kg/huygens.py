"""Tail measurements behind the Huygens and incomplete-Huygens mass thresholds.

After the exit time ``t*`` the backward light cone from ``(0, t)`` no longer
meets the data support, so any nonzero ``Phi(0, t)`` is a tail.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .desitter import CauchyProblem, solve_many
from .errors import DomainError
from .kernels import MassParams

__all__ = [
    "HuygensReport",
    "TAU_HUYGENS",
    "TAU_TAILED",
    "exit_time",
    "default_tail_grid",
    "measure_tail",
    "mass_sweep",
    "fit_tail_rate",
    "massless_n3_tail_limit",
    "reports_to_json",
    "report_to_csv",
]

TAU_HUYGENS = 1e-6
TAU_TAILED = 1e-3
DEFAULT_MARGIN = 0.1


@dataclass
class HuygensReport:
    mp: MassParams
    datum_mode: str
    exit_time: float
    tail_samples: list = field(default_factory=list)  # (t, |Phi(0, t)|)
    tail_sup: float = 0.0
    verdict: str = "indeterminate"
    data_norm: float = 1.0
    tail_values: list = field(default_factory=list)  # signed Phi(0, t)

    def to_dict(self) -> dict:
        return {
            "n": self.mp.n,
            "m": self.mp.m,
            "mu": self.mp.mu,
            "regime": self.mp.regime,
            "is_knot": self.mp.is_knot,
            "datum_mode": self.datum_mode,
            "exit_time": self.exit_time,
            "tail_sup": self.tail_sup,
            "verdict": self.verdict,
            "data_norm": self.data_norm,
            "tail_samples": [[t, a] for t, a in self.tail_samples],
        }


def _support_extent(pb: CauchyProblem) -> float:
    ext = 0.0
    for p in pb.profiles:
        c = getattr(p, "center", None)
        off = 0.0 if c is None else float(np.linalg.norm(c))
        ext = max(ext, off + p.support_radius)
    return ext


def exit_time(support: float, margin: float = DEFAULT_MARGIN) -> float:
    """Solve 1 - e^(-t*) = support + margin."""
    if not 0.0 < support + margin < 1.0:
        raise DomainError("support + margin must lie in (0, 1)")
    return -math.log1p(-(support + margin))


def default_tail_grid(t_star: float, t_end: float = 8.0, count: int = 40):
    return list(np.linspace(t_star + 0.2, t_end, count))


def _datum_mode(pb: CauchyProblem) -> str:
    z0 = pb.phi0 is None or pb.phi0.is_zero
    z1 = pb.phi1 is None or pb.phi1.is_zero
    if z0 and z1:
        raise DomainError("both data vanish; there is nothing to measure")
    if z1:
        return "first_datum_only"
    if z0:
        return "second_datum_only"
    return "full"


def _data_norm(pb: CauchyProblem) -> float:
    """Sup-norm of the data pair: max(|phi0|_inf, |phi1|_inf)."""
    return max(p.sup_norm for p in pb.profiles)


def _classify(tail_sup: float, mode: str) -> str:
    if tail_sup <= TAU_HUYGENS:
        # with phi1 = 0 only the restricted principle has been tested
        return "incomplete_huygens" if mode == "first_datum_only" else "huygens"
    if tail_sup >= TAU_TAILED:
        return "tailed"
    return "indeterminate"


def measure_tail(pb: CauchyProblem, t_grid=None, margin: float = DEFAULT_MARGIN) -> HuygensReport:
    """Evaluate Phi(0, t) on ``t_grid`` (default: 40 points from t* + 0.2 to 8)."""
    mode = _datum_mode(pb)
    t_star = exit_time(_support_extent(pb), margin)
    if t_grid is None:
        t_grid = default_tail_grid(t_star)
    t_grid = [float(t) for t in t_grid]
    if any(t <= t_star for t in t_grid):
        raise DomainError(f"tail times must exceed the exit time {t_star:.6g}")
    origin = np.zeros(pb.n)
    norm = _data_norm(pb)
    vals = np.array([solve_many(pb, [origin], t)[0][0] for t in t_grid])
    rel = np.abs(vals) / norm
    tail_sup = float(np.max(rel)) if len(rel) else 0.0
    return HuygensReport(
        mp=pb.mp,
        datum_mode=mode,
        exit_time=t_star,
        tail_samples=[(t, float(abs(v))) for t, v in zip(t_grid, vals)],
        tail_sup=tail_sup,
        verdict=_classify(tail_sup, mode),
        data_norm=norm,
        tail_values=[float(v) for v in vals],
    )


def mass_sweep(n: int, masses, template: CauchyProblem, t_grid=None,
               margin: float = DEFAULT_MARGIN):
    """One report per mass, reusing the data of ``template``."""
    reports = []
    for m in masses:
        if not 0.0 <= m <= 2 * n:
            raise DomainError("masses must lie in [0, 2n]")
        pb = CauchyProblem(MassParams.from_mass(n, float(m)), template.phi0, template.phi1)
        reports.append(measure_tail(pb, t_grid, margin))
    return reports


def fit_tail_rate(report: HuygensReport, t_min: float | None = None):
    """Least-squares slope and intercept of log|Phi(0, t)| over the tail samples.

    ``t_min`` defaults to the midpoint of the sampled range so the fit sees the
    asymptotic regime rather than the transient just after t*.
    """
    ts = np.array([t for t, _ in report.tail_samples])
    a = np.array([v for _, v in report.tail_samples])
    if t_min is None:
        t_min = 0.5 * (ts[0] + ts[-1])
    keep = (ts >= t_min) & (a > 0)
    if keep.sum() < 3:
        raise DomainError("not enough nonzero tail samples to fit a rate")
    slope, icpt = np.polyfit(ts[keep], np.log(a[keep]), 1)
    return float(slope), float(icpt)


def massless_n3_tail_limit(phi1) -> float:
    """Large-t limit of Phi(0, t) for n = 3, m = 0, zero phi0.

    Equals int_0^1 s V(0, s) ds + V(0, 1) = int_0^R s^2 phi1(s) ds, since
    V(0, s) = s phi1(s) and phi1 vanishes at s = 1.
    """
    R = phi1.support_radius
    s, w = np.polynomial.legendre.leggauss(64)
    r = 0.5 * R * (s + 1.0)
    return float(0.5 * R * np.sum(w * r * r * phi1(r)))


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


def report_to_csv(report: HuygensReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "tail_abs", "tail_rel"])
    for t, a in report.tail_samples:
        w.writerow(["%.17g" % t, "%.17g" % a, "%.17g" % (a / report.data_norm)])
    return buf.getvalue()
