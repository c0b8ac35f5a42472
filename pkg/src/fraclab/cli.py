"""Command-line experiment driver producing JSON or CSV reports.

Subcommands: ``params``, ``norm``, ``rearrange``, ``approx``, ``verify`` and
``report --all``. Settings come from defaults, then an optional key=value
config file, then the ``FRACLAB_SEED`` / ``FRACLAB_WORKERS`` environment
variables, then command-line flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
import scipy

from . import __version__
from .errors import ConstraintViolation, FraclabError, UnknownName
from .functions import catalog
from .mollify import approximation_sequence
from .norms import gagliardo, homogeneous_norm, seminorm, weighted_lp
from .params import (CknParams, Params, ckn_admissible, gagliardo_scaling_exponent, validate,
                     weighted_scaling_exponent)
from .quadrature import Estimate, McConfig
from .rearrange import (hardy_layercake_identity, layer_cake_check, lorentz_quasinorm,
                        sobolev_layercake_identity)
from .verify import (HOLDS, VIOLATED, INCONCLUSIVE, ckn_first_order_check,
                     elementary_bounds_check, grad_equivalence_check, hardy_check,
                     lorentz_embedding_check, poincare_failure_probe, rellich_check,
                     weak_young_check)

SUITES = ("params", "norms", "rearrange", "mollify-approx", "inequalities", "all")
EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    N: int = 3
    s: float = 1.25
    p: float = 1.6
    a: float = 0.25
    seed: int = 20240601
    samples: int = 200_000
    approx_samples: int = 20_000
    truncation: float = 6.0
    suite: str = "all"
    functions: tuple = ("bump",)
    approx_ns: tuple = (1, 2, 4, 8)
    out: Optional[str] = None
    format: str = "json"
    workers: int = 1

    @property
    def params(self) -> Params:
        return Params(self.N, self.s, self.p, self.a)

    def mc(self, samples: Optional[int] = None) -> McConfig:
        return McConfig(seed=self.seed, sample_count=samples or self.samples,
                        truncation_radius=self.truncation)

    def check(self) -> "RunConfig":
        validate(self.params)
        if self.suite not in SUITES:
            raise ConstraintViolation("suite", self.suite, f"one of {SUITES}")
        if self.format not in ("json", "csv"):
            raise ConstraintViolation("format", self.format, "json or csv")
        if self.workers < 1:
            raise ConstraintViolation("workers", self.workers, ">= 1")
        for name in self.functions:
            catalog(name, self.N)
        self.mc()
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        d["functions"] = list(self.functions)
        d["approx_ns"] = list(self.approx_ns)
        d.pop("out")
        return d


# -- jobs -------------------------------------------------------------------

@dataclass(frozen=True)
class Job:
    key: str
    suite: str
    run: Callable


def _estimate_entry(name, est: Estimate, **extra) -> dict:
    return {"kind": "estimate", "name": name, **est.to_dict(), **extra}


def _params_jobs(cfg: RunConfig):
    P = cfg.params

    def table():
        ckn = ckn_admissible(CknParams.from_params(P))
        N, p, a = P.N, P.p, P.a
        return {
            "kind": "table", "name": "exponents",
            "values": {
                "N": N, "s": P.s, "sigma": P.sigma, "p": p, "a": a,
                "p_star_sigma": P.p_star_sigma, "p_star_s": P.p_star_s,
                "p_lorentz": P.p_lorentz, "homogeneity_kappa": P.homogeneity_kappa,
                "seminorm_scaling_exponent": gagliardo_scaling_exponent(
                    N, P.sigma, p, a, derivatives=1),
                "weighted_norm_scaling_exponent": weighted_scaling_exponent(N, p, a),
                "ckn_admissible": ckn.admissible, "ckn_values": ckn.values,
            },
        }

    return [Job("params/exponents", "params", table)]


def _norm_jobs(cfg: RunConfig):
    P, jobs = cfg.params, []
    for name in cfg.functions:
        u = catalog(name, P.N)
        mc = cfg.mc()
        jobs.append(Job(f"norms/{name}/weighted_lp", "norms", lambda u=u, mc=mc: _estimate_entry(
            "weighted_lp", weighted_lp(u, P.p, P.a, mc), function=u.name, q=P.p, beta=P.a)))
        if u.smooth:
            jobs.append(Job(f"norms/{name}/seminorm", "norms", lambda u=u, mc=mc: _estimate_entry(
                "seminorm", seminorm(u, P, mc), function=u.name)))
            jobs.append(Job(f"norms/{name}/homogeneous", "norms", lambda u=u, mc=mc: {
                **_estimate_entry("homogeneous_norm", (h := homogeneous_norm(u, P, mc)),
                                  function=u.name), "parts": h.diagnostics}))
    return jobs


def _identity_entry(rep) -> dict:
    d = rep.to_dict()
    d["kind"] = "identity"
    d["verdict"] = HOLDS if rep.holds else VIOLATED
    return d


def _rearrange_jobs(cfg: RunConfig):
    P, jobs = cfg.params, []
    for name in cfg.functions:
        u = catalog(name, P.N)
        mc = cfg.mc()
        if u.radial:
            jobs.append(Job(f"rearrange/{name}/layer_cake", "rearrange",
                            lambda u=u, mc=mc: _identity_entry(layer_cake_check(u, mc))))
        if u.smooth:
            jobs.append(Job(f"rearrange/{name}/hardy_layercake", "rearrange",
                            lambda u=u, mc=mc: _identity_entry(hardy_layercake_identity(u, P, mc))))
            jobs.append(Job(f"rearrange/{name}/sobolev_layercake", "rearrange",
                            lambda u=u, mc=mc: _identity_entry(
                                sobolev_layercake_identity(u, P, mc))))
        jobs.append(Job(f"rearrange/{name}/lorentz", "rearrange", lambda u=u, mc=mc: _estimate_entry(
            "lorentz_quasinorm", lorentz_quasinorm(u, P.p_lorentz, P.p, mc), function=u.name,
            p_index=P.p_lorentz, q_index=P.p)))
    return jobs


def _approx_jobs(cfg: RunConfig):
    P, jobs = cfg.params, []
    for name in cfg.functions:
        u = catalog(name, P.N)
        if not u.smooth:
            continue
        mc = cfg.mc(cfg.approx_samples)
        jobs.append(Job(f"mollify-approx/{name}/base", "mollify-approx",
                        lambda u=u, mc=mc: _estimate_entry("seminorm", seminorm(u, P, mc),
                                                           function=u.name)))
        for n in cfg.approx_ns:
            jobs.append(Job(f"mollify-approx/{name}/n={n:03d}", "mollify-approx",
                            lambda u=u, n=n, mc=mc: _estimate_entry(
                                "approximation_residual", approximation_sequence(u, n, P, mc)[1],
                                function=u.name, n=n)))
    return jobs


def _ineq_entry(rep) -> dict:
    d = rep.to_dict()
    d["kind"] = "inequality"
    return d


def _slope_entry(rep) -> dict:
    d = rep.to_dict()
    d["kind"] = "slope"
    return d


def _inequality_jobs(cfg: RunConfig):
    P, jobs = cfg.params, []
    N = P.N
    for q in (0.3, 0.5, 1.0, 2.0, 3.7):
        jobs.append(Job(f"inequalities/elementary/q={q:g}", "inequalities",
                        lambda q=q: _ineq_entry(elementary_bounds_check(N, q, seed=cfg.seed))))
    for name in cfg.functions:
        u = catalog(name, N)
        if not u.smooth and name != "zero":
            continue
        mc = cfg.mc()
        checks = {
            "hardy": lambda u=u, mc=mc: hardy_check(u, N, P.sigma, P.p, P.a, mc),
            "rellich": lambda u=u, mc=mc: rellich_check(u, P, mc),
            "ckn_first_order": lambda u=u, mc=mc: ckn_first_order_check(u, P, mc),
            "grad_equivalence": lambda u=u, mc=mc: grad_equivalence_check(u, P, mc),
            "lorentz_embedding": lambda u=u, mc=mc: lorentz_embedding_check(u, P, mc),
        }
        for check, fn in checks.items():
            jobs.append(Job(f"inequalities/{name}/{check}", "inequalities",
                            lambda fn=fn: _ineq_entry(fn())))
        if name != "zero":
            jobs.append(Job(f"inequalities/{name}/poincare", "inequalities",
                            lambda u=u, mc=mc: _slope_entry(
                                poincare_failure_probe(u, P, cfg=mc))))
        if u.radial:
            # |x|^-d with d = N/3 lies in weak L^3; q = 1.2 then gives r = 6
            jobs.append(Job(f"inequalities/{name}/weak_young", "inequalities",
                            lambda u=u, mc=mc: _ineq_entry(
                                weak_young_check(N / 3.0, u, 3.0, 1.2, mc))))
    return jobs


_BUILDERS = {
    "params": _params_jobs,
    "norms": _norm_jobs,
    "rearrange": _rearrange_jobs,
    "mollify-approx": _approx_jobs,
    "inequalities": _inequality_jobs,
}


def build_jobs(cfg: RunConfig):
    suites = [s for s in SUITES if s != "all"] if cfg.suite == "all" else [cfg.suite]
    jobs = [j for s in suites for j in _BUILDERS[s](cfg)]
    return sorted(jobs, key=lambda j: j.key)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _run_job(job: Job) -> dict:
    try:
        payload = job.run()
    except FraclabError as exc:
        payload = {"kind": "error", "error": type(exc).__name__, "message": str(exc)}
    except (ValueError, ArithmeticError) as exc:
        payload = {"kind": "error", "error": type(exc).__name__, "message": str(exc)}
    return {"key": job.key, "suite": job.suite, **payload}


def run(cfg: RunConfig) -> dict:
    """Execute the selected suites and assemble a deterministic report bundle."""
    cfg.check()
    jobs = build_jobs(cfg)
    start = time.perf_counter()
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    wall = time.perf_counter() - start
    warnings = []
    for r in results:
        if r.get("verdict") == INCONCLUSIVE:
            warnings.append(f"{r['key']}: inconclusive")
        if r.get("kind") == "error":
            warnings.append(f"{r['key']}: {r['error']}: {r['message']}")
    bundle = {
        "config": {**cfg.as_dict(), "provenance": {
            "fraclab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}},
        "results": results,
        "warnings": warnings,
        "timing": {"wall_seconds": wall, "finished_unix": time.time()},
    }
    return _clean(bundle)


def payload(bundle: dict) -> str:
    """Canonical JSON of everything except timing; equal configs give equal payloads."""
    body = {k: v for k, v in bundle.items() if k != "timing"}
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def exit_status(bundle: dict) -> int:
    bad = any(r.get("verdict") == VIOLATED for r in bundle["results"])
    return EXIT_VIOLATED if bad else EXIT_OK


CSV_FIELDS = ("key", "suite", "kind", "name", "verdict", "value", "uncertainty", "lhs",
              "lhs_uncertainty", "rhs", "rhs_uncertainty", "ratio", "ratio_uncertainty", "error")


def to_csv(bundle: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in bundle["results"]:
        row = {k: r.get(k, "") for k in CSV_FIELDS}
        for side in ("lhs", "rhs"):
            if isinstance(r.get(side), dict):
                row[side] = r[side]["value"]
                row[f"{side}_uncertainty"] = r[side]["uncertainty"]
        if r.get("kind") == "slope":
            row["value"] = r["slope"]
            row["uncertainty"] = r["slope_uncertainty"]
        w.writerow(row)
    return buf.getvalue()


# -- argument handling ------------------------------------------------------

_KEY_TYPES = {
    "n": ("N", int), "s": ("s", float), "p": ("p", float), "a": ("a", float),
    "seed": ("seed", int), "samples": ("samples", int), "approx_samples": ("approx_samples", int),
    "truncation": ("truncation", float), "suite": ("suite", str), "out": ("out", str),
    "format": ("format", str), "workers": ("workers", int),
    "functions": ("functions", lambda v: tuple(x.strip() for x in v.split(",") if x.strip())),
    "approx_ns": ("approx_ns", lambda v: tuple(int(x) for x in v.split(",") if x.strip())),
}


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConstraintViolation("config", f"line {lineno}", "key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            key = key.lower().replace("-", "_")
            if key not in _KEY_TYPES:
                raise UnknownName(f"unknown config key {key!r}")
            field_name, conv = _KEY_TYPES[key]
            out[field_name] = conv(value)
    return out


def _common(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("run settings")
    g.add_argument("--n", type=int, help="dimension N")
    g.add_argument("--s", type=float, help="order s in (1, 2)")
    g.add_argument("--p", type=float, help="integrability exponent p")
    g.add_argument("--a", type=float, help="weight exponent a")
    g.add_argument("--seed", type=int)
    g.add_argument("--samples", type=int, help="Monte Carlo samples per integral")
    g.add_argument("--approx-samples", type=int, help="samples for approximation residuals")
    g.add_argument("--truncation", type=float, help="truncation radius in length-scale units")
    g.add_argument("--functions", help="comma-separated catalog names")
    g.add_argument("--suite", choices=SUITES)
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--workers", type=int, help="concurrent jobs")
    g.add_argument("--config", help="key=value settings file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="exponent table for (N, s, p, a)")
    _common(p)

    p = sub.add_parser("norm", help="evaluate one norm of one catalog function")
    p.add_argument("function")
    p.add_argument("spec", help="homogeneous | seminorm | lp:q,beta | gagliardo:t")
    _common(p)

    p = sub.add_parser("rearrange", help="distribution, Lorentz norms and layer-cake identities")
    p.add_argument("function")
    _common(p)

    p = sub.add_parser("approx", help="residuals of the smooth approximation sequence")
    p.add_argument("function")
    p.add_argument("--ns", help="comma-separated indices n (default 1,2,4,8)")
    _common(p)

    p = sub.add_parser("verify", help="run one suite")
    p.add_argument("suite_name", nargs="?", choices=SUITES)
    _common(p)

    p = sub.add_parser("report", help="run suites and write a report")
    p.add_argument("--all", action="store_true", help="run every suite")
    _common(p)
    return parser


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    if environ.get("FRACLAB_SEED"):
        values["seed"] = int(environ["FRACLAB_SEED"])
    if environ.get("FRACLAB_WORKERS"):
        values["workers"] = int(environ["FRACLAB_WORKERS"])
    for key, (field_name, conv) in _KEY_TYPES.items():
        v = getattr(args, key, None)
        if v is not None:
            values[field_name] = conv(v) if isinstance(v, str) and key in (
                "functions", "approx_ns") else v
    if getattr(args, "ns", None):
        values["approx_ns"] = _KEY_TYPES["approx_ns"][1](args.ns)
    cmd = args.command
    if cmd == "params":
        values["suite"] = "params"
    elif cmd == "verify" and args.suite_name:
        values["suite"] = args.suite_name
    elif cmd == "report" and args.all:
        values["suite"] = "all"
    elif cmd == "approx":
        values["suite"] = "mollify-approx"
    elif cmd == "rearrange":
        values["suite"] = "rearrange"
    if cmd in ("norm", "rearrange", "approx"):
        values["functions"] = (args.function,)
    return RunConfig(**values)


def _single_norm(cfg: RunConfig, function: str, spec: str) -> dict:
    P = cfg.params
    u = catalog(function, P.N)
    mc = cfg.mc()
    kind, _, rest = spec.partition(":")
    if kind == "homogeneous":
        est = homogeneous_norm(u, P, mc)
    elif kind == "seminorm":
        est = seminorm(u, P, mc)
    elif kind == "lp":
        q, beta = (float(x) for x in rest.split(","))
        est = weighted_lp(u, q, beta, mc)
    elif kind == "gagliardo":
        est = gagliardo(u, float(rest), P.p, P.a, mc)
    else:
        raise UnknownName(f"unknown norm spec {spec!r}")
    entry = {"key": f"norm/{function}/{spec}", "suite": "norms",
             **_estimate_entry(kind, est, function=u.name)}
    return _clean({"config": cfg.as_dict(), "results": [entry], "warnings": [],
                   "timing": {}})


def _emit(bundle: dict, cfg: RunConfig) -> None:
    if cfg.format == "csv":
        text = to_csv(bundle)
    else:
        text = json.dumps(bundle, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args).check()
        if args.command == "report" and not args.all and args.suite is None:
            raise ConstraintViolation("report", "no suite", "--all or --suite")
        if args.command == "norm":
            bundle = _single_norm(cfg, args.function, args.spec)
        else:
            bundle = run(cfg)
    except (ConstraintViolation, UnknownName, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(bundle, cfg)
    return exit_status(bundle)


if __name__ == "__main__":
    sys.exit(main())
