"""Command-line driver: ``desitter-kg {solve,kernel,huygens,asympt,compare}``.

Runs are fully described by a RunConfig, which round-trips through a plain
``key=value`` file (``--config``).  Explicit flags override file values.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .asymptotics import decay_fit, fit_to_csv
from .desitter import CauchyProblem, solve_many
from .errors import CFLError, DomainError, KGError
from .fdref import FDConfig, fd_probe, fd_solve
from .huygens import mass_sweep, reports_to_json
from .kernels import MassParams, dK1_ds, eval_E, eval_K0, eval_K1
from .profiles import PolynomialBump, TruncatedGaussian, ZeroProfile

__all__ = ["RunConfig", "main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SUBCOMMANDS = ("solve", "kernel", "huygens", "asympt", "compare")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str = "solve"
    n: int = 3
    mass: float = math.sqrt(2.0)
    profile: str = "bump"
    radius: float = 0.5
    power: int = 8
    sigma: float = 0.1
    tmin: float = 0.0
    tmax: float = 2.0
    tsteps: int = 20
    rmax: float = 0.9
    rsteps: int = 10
    x: str = ""
    out: str = "-"
    format: str = "csv"
    first_datum_only: bool = False
    second_datum_only: bool = False
    margin: float = 0.1
    order: int = 2
    masses: str = ""
    kernel: str = "K1"
    t0: float = 0.0
    dr: float = 2e-3

    def validate(self) -> "RunConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.n < 1:
            raise ConfigError("n must be a positive integer")
        if self.mass < 0:
            raise ConfigError("mass must be non-negative")
        if not 0.0 < self.radius < 1.0:
            raise ConfigError(f"support radius must lie in (0, 1), got {self.radius}")
        if self.profile not in ("bump", "gaussian_trunc", "zero"):
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.first_datum_only and self.second_datum_only:
            raise ConfigError("--first-datum-only and --second-datum-only exclude each other")
        if self.tsteps < 1 or self.rsteps < 1:
            raise ConfigError("step counts must be positive")
        if self.order < 1:
            raise ConfigError("order must be at least 1")
        if self.kernel not in ("E", "K0", "K1", "dK1"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        return self

    # --- key=value round trip
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**_parse_pairs(text))


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def _parse_pairs(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        k, v = line.split("=", 1)
        k = k.strip()
        out[k] = _coerce(k, v.strip())
    return out


# ------------------------------------------------------------------ helpers

def _profile(cfg: RunConfig):
    if cfg.profile == "zero":
        return ZeroProfile()
    if cfg.profile == "bump":
        return PolynomialBump(radius=cfg.radius, power=cfg.power)
    return TruncatedGaussian(radius=cfg.radius, sigma=cfg.sigma)


def _data(cfg: RunConfig):
    p = _profile(cfg)
    phi0 = None if cfg.second_datum_only else p
    phi1 = None if cfg.first_datum_only else p
    return phi0, phi1


def _problem(cfg: RunConfig, mass: float | None = None) -> CauchyProblem:
    phi0, phi1 = _data(cfg)
    m = cfg.mass if mass is None else mass
    return CauchyProblem(MassParams.from_mass(cfg.n, m), phi0, phi1)


def _point(cfg: RunConfig, r: float):
    x = np.zeros(cfg.n)
    x[0] = r
    return x


def _radii(cfg: RunConfig):
    if cfg.n >= 4:
        return [0.0]  # odd n >= 5 is evaluated at the origin only
    return list(np.linspace(0.0, cfg.rmax, cfg.rsteps + 1))


def _times(cfg: RunConfig):
    return list(np.linspace(cfg.tmin, cfg.tmax, cfg.tsteps + 1))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return "%.17g" % v


def _table(header, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str):
    if cfg.out in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _parse_floats(s: str):
    return [float(eval_expr(v)) for v in s.split(",") if v.strip()]


def eval_expr(s: str) -> float:
    """Numbers or ``sqrt(k)``; keeps configs readable for knot masses."""
    s = s.strip()
    if s.startswith("sqrt(") and s.endswith(")"):
        return math.sqrt(float(s[5:-1]))
    return float(s)


# ------------------------------------------------------------- subcommands

def cmd_solve(cfg: RunConfig) -> int:
    pb = _problem(cfg)
    xs = [_point(cfg, r) for r in _radii(cfg)]
    rows = []
    for t in _times(cfg):
        vals, method, _ = solve_many(pb, xs, t)
        rows += [(float(x[0]), float(t), float(v), method) for x, v in zip(xs, vals)]
    _emit(cfg, _table(["x_or_r", "t", "phi", "method"], rows, cfg.format))
    return EXIT_OK


def cmd_kernel(cfg: RunConfig) -> int:
    mp = MassParams.from_mass(cfg.n, cfg.mass)
    rows = []
    for t in _times(cfg):
        if t <= cfg.t0:
            continue
        gap = math.exp(-cfg.t0) - math.exp(-t)
        zs = np.linspace(0.0, gap, cfg.rsteps + 1)
        if cfg.kernel == "E":
            kv = eval_E(mp, zs, t, cfg.t0)
        elif cfg.kernel == "K0":
            kv = eval_K0(mp, zs, t)
        elif cfg.kernel == "K1":
            kv = eval_K1(mp, zs, t)
        else:
            kv = dK1_ds(mp, zs, t)
        rows += [(float(z), float(t), float(a), float(b)) for z, a, b in zip(zs, kv.re, kv.im)]
    _emit(cfg, _table(["z", "t", "re", "im"], rows, cfg.format))
    return EXIT_OK


def _default_masses(n: int):
    cand = {0.0, 1.0, math.sqrt(n * n - 1) / 2.0, 2.0, 3.0}
    return sorted(m for m in cand if m <= 2 * n)


def cmd_huygens(cfg: RunConfig) -> int:
    masses = _parse_floats(cfg.masses) if cfg.masses else _default_masses(cfg.n)
    reports = mass_sweep(cfg.n, masses, _problem(cfg, 0.0), margin=cfg.margin)
    if cfg.format == "json":
        _emit(cfg, reports_to_json(reports) + "\n")
    else:
        rows = []
        for r in reports:
            rows += [(r.mp.m, t, a, a / r.data_norm, r.verdict) for t, a in r.tail_samples]
        _emit(cfg, _table(["m", "t", "tail_abs", "tail_rel", "verdict"], rows, "csv"))
    return EXIT_OK


def cmd_asympt(cfg: RunConfig) -> int:
    mp = MassParams.from_mu(cfg.n, 0.5)
    phi0, phi1 = _data(cfg)
    pb = CauchyProblem(mp, phi0, phi1)
    if cfg.x:
        x = np.array(_parse_floats(cfg.x))
    else:
        x = _point(cfg, 0.6 if cfg.n <= 3 else 0.0)
    tmin = max(cfg.tmin, 3.0)
    ts = np.linspace(tmin, max(cfg.tmax, tmin + 1.0), cfg.tsteps + 1)
    fit = decay_fit(pb, x, cfg.order, ts)
    expected = -(cfg.order + 0.5 * (cfg.n - 1))
    if cfg.format == "json":
        payload = {"N": cfg.order, "n": cfg.n, "x": [float(v) for v in x],
                   "rate": fit.rate, "expected_rate": expected, "c": fit.c,
                   "excluded": fit.excluded,
                   "samples": [{"t": t, "phi": p, "phi_asympt": a, "residual": r}
                               for t, p, a, r in zip(fit.t, fit.phi, fit.phi_asympt,
                                                     fit.residual)]}
        _emit(cfg, json.dumps(payload, indent=2) + "\n")
    else:
        _emit(cfg, fit_to_csv(fit))
    sys.stderr.write(f"rate={fit.rate:.6g} expected={expected:g}\n")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.n >= 4:
        raise ConfigError("compare supports n <= 3")
    pb = _problem(cfg)
    field = fd_solve(FDConfig(cfg.n, cfg.mass, dr=cfg.dr, t_max=cfg.tmax), pb.phi0, pb.phi1)
    rs = _radii(cfg)
    xs = [_point(cfg, r) for r in rs]
    rows = []
    err, scale = 0.0, 0.0
    for t in _times(cfg):
        vals, _, _ = solve_many(pb, xs, t)
        fd = fd_probe(field, np.array(rs), t)
        for r, a, b in zip(rs, vals, np.atleast_1d(fd)):
            rows.append((float(r), float(t), float(a), float(b), float(abs(a - b))))
            err = max(err, abs(a - b))
            scale = max(scale, abs(b))
    rel = err / scale if scale > 0 else err
    _emit(cfg, _table(["r", "t", "phi_rep", "phi_fd", "abs_err"], rows, cfg.format))
    sys.stderr.write(f"linf_abs={err:.6g} linf_rel={rel:.6g}\n")
    return EXIT_OK


_COMMANDS = {"solve": cmd_solve, "kernel": cmd_kernel, "huygens": cmd_huygens,
             "asympt": cmd_asympt, "compare": cmd_compare}


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="desitter-kg",
                                description="Klein-Gordon equation in de Sitter space")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--n", type=int)
        s.add_argument("--mass", type=eval_expr)
        s.add_argument("--profile", choices=["bump", "gaussian_trunc", "zero"])
        s.add_argument("--radius", type=float)
        s.add_argument("--power", type=int)
        s.add_argument("--sigma", type=float)
        s.add_argument("--tmin", type=float)
        s.add_argument("--tmax", type=float)
        s.add_argument("--tsteps", type=int)
        s.add_argument("--rmax", type=float)
        s.add_argument("--rsteps", type=int)
        s.add_argument("--out")
        s.add_argument("--format", choices=["csv", "json"])
        s.add_argument("--first-datum-only", action="store_const", const=True)
        s.add_argument("--second-datum-only", action="store_const", const=True)
        s.add_argument("--margin", type=float)
        s.add_argument("--order", type=int)
        s.add_argument("--masses", help="comma-separated, e.g. 0,1,sqrt(2)")
        s.add_argument("--x", help="comma-separated sample point")
        s.add_argument("--kernel", choices=["E", "K0", "K1", "dK1"])
        s.add_argument("--t0", type=float)
        s.add_argument("--dr", type=float)
    return p


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(_parse_pairs(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    values["subcommand"] = args.subcommand
    return dataclasses.replace(RunConfig(), **values).validate()


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    try:
        return _COMMANDS[cfg.subcommand](cfg)
    except (ConfigError, CFLError, DomainError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (KGError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
