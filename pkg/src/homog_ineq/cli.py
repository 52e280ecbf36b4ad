"""Command-line front end and the batch runner.

Every subcommand runs through :func:`run_suite` as a one-job suite, so
single invocations and suite runs share the output layout::

    OUT/jobs/NN-command.json    one deterministic JSON document per job
    OUT/jobs/NN-*.csv           field dumps (semigroup)
    OUT/summary.md, summary.csv aggregate report tables
    OUT/manifest.json           tool version, model hash, per-job status,
                                wall times and output paths
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import traceback
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .constructors import build_field
from .errors import ConfigError, InvalidInputError
from .field import lp_norm
from .group_model import GroupModel, RadialGrid
from .inequalities import (BlissExtremizer, check_bliss, check_bliss_quad, check_corollary,
                           check_gn, check_hardy, check_sobolev_type, check_stubbe, COROLLARIES)
from .io import grid_from_dict, load_json, load_model, model_from_dict, model_hash, write_field_csv
from .maximal_hardy import RadialWeightPair, check_max_hardy, a_functional, necessity_probe
from .report import InequalityReport, emit_report, jsonable
from .semigroup import TimeGrid, besov_norm, euler_heat_kernel, euler_heat_spectral
from .sharpness import probe_sharpness
from .weighted_radial import (check_critical_hardy, check_prop63, check_thm61_additive,
                              check_thm61_multiplicative, check_thm62, check_uncertainty_hpw,
                              log_weight, nonlocal_functional, power_weight)

__all__ = ["COMMANDS", "Job", "RunManifest", "parse_suite", "run_suite", "main"]

OUT_ENV = "HOMOG_INEQ_OUT"
STOCHASTIC = {"nonlocal", "sharpness"}


# ------------------------------------------------------------------ helpers

def _field(spec, model, grid):
    """``"gaussian"`` or ``{"ctor": "gaussian", "width": 2}`` -> Field."""
    if isinstance(spec, str):
        return build_field(spec, model, grid)
    if not isinstance(spec, dict) or "ctor" not in spec:
        raise InvalidInputError(f"field spec needs a 'ctor', got {spec!r}")
    params = {k: v for k, v in spec.items() if k != "ctor"}
    return build_field(spec["ctor"], model, grid, **params)


def _weight(spec):
    spec = spec or {"kind": "log"}
    if spec.get("kind") == "log":
        return log_weight()
    if spec.get("kind") == "power":
        return power_weight(float(spec["a"]))
    raise InvalidInputError(f"unknown weight {spec!r}; use kind log or power")


def _grid_for(params, grid):
    return grid_from_dict(params["grid"], "params.grid") if "grid" in params else grid


def _reports(items):
    out = []
    for r in items:
        out.extend(r if isinstance(r, (list, tuple)) else [r])
    return out


# ------------------------------------------------------------ check registry

def _ck_bliss(f, p, seed):
    pp, q = p.get("p", 2.0), p.get("q", 6.0)
    if f is None:
        ext = BlissExtremizer(p.get("c1", 1.0), p.get("c2", 1.0), pp, q)
        if p.get("route", "quad") == "quad":
            return check_bliss_quad(ext, pp, q)
        g = RadialGrid()
        return check_bliss(ext(g.r), pp, q, g)
    return check_bliss(f.profile, pp, q, f.grid)


CHECKS = {
    "sobolev": lambda f, p, seed: check_sobolev_type(f, p.get("p", 2.0)),
    "hardy": lambda f, p, seed: check_hardy(f),
    "gn": lambda f, p, seed: check_gn(f, p.get("p", 2.0), p.get("q", 4.0)),
    "stubbe": lambda f, p, seed: check_stubbe(f, p.get("delta", 0.0)),
    "bliss": _ck_bliss,
    "hpw": lambda f, p, seed: check_uncertainty_hpw(f, p.get("variant", "improved")),
    "critical": lambda f, p, seed: check_critical_hardy(f, p.get("n")),
    "61a": lambda f, p, seed: check_thm61_additive(_weight(p.get("phi")), f, p.get("p", 2.0)),
    "61m": lambda f, p, seed: check_thm61_multiplicative(_weight(p.get("phi")), f,
                                                          p.get("p", 2.0)),
    "62": lambda f, p, seed: check_thm62(_weight(p.get("phi")), f, p.get("p", 2.0),
                                         p.get("q", 2.0)),
    "prop63": lambda f, p, seed: check_prop63(f, p["delta"], p.get("C_Q", 1.0), p.get("lambda_Q"),
                                              samples=int(p.get("samples", 200_000)), seed=seed),
}
for _name in COROLLARIES:
    CHECKS[_name] = (lambda nm: lambda f, p, seed: check_corollary(nm, f, **p))(_name)
STOCHASTIC_CHECKS = {"prop63"}


def _run_check(entry, model, grid, seed):
    name = entry["name"]
    if name not in CHECKS:
        raise InvalidInputError(f"unknown check {name!r}")
    spec = entry.get("field")
    f = _field(spec, model, grid) if spec is not None else None
    if f is None and name != "bliss":
        raise InvalidInputError(f"check {name!r} needs a field")
    return _reports([CHECKS[name](f, dict(entry.get("params", {})), seed)])


# --------------------------------------------------------------- job bodies

def _job_verify(model, grid, params, seed, ctx):
    reports = []
    for entry in params.get("checks", []):
        reports.extend(_run_check(entry, model, _grid_for(entry, grid), seed))
    return {"reports": [r.to_dict() for r in reports]}, reports


def _job_weighted(model, grid, params, seed, ctx):
    thm = params.get("thm")
    if thm not in ("61a", "61m", "62", "hpw", "critical"):
        raise InvalidInputError(f"thm must be one of 61a, 61m, 62, hpw, critical; got {thm!r}")
    g = _grid_for(params, grid)
    reports = _run_check({"name": thm, "field": params.get("field", "gaussian"),
                          "params": params}, model, g, seed)
    return {"thm": thm, "reports": [r.to_dict() for r in reports]}, reports


def _job_sharpness(model, grid, params, seed, ctx):
    fixed = {k: v for k, v in params.items() if k not in ("ineq", "family", "budget", "grid")}
    res = probe_sharpness(params.get("ineq", "stubbe"), params.get("family", "bliss"), model,
                          grid_from_dict(params["grid"]) if "grid" in params else None,
                          int(params.get("budget", 200)), seed, **fixed)
    reports = [res.report] if res.report else []
    return res.to_dict() | {"reports": [r.to_dict() for r in reports]}, reports


def _job_semigroup(model, grid, params, seed, ctx):
    g = _grid_for(params, grid)
    f = _field(params.get("field", "gaussian"), model, g)
    t = float(params.get("t", 0.1))
    route = params.get("route", "both")
    if route not in ("kernel", "spectral", "both"):
        raise InvalidInputError(f"route must be kernel, spectral or both; got {route!r}")
    out = {"t": t, "l2_before": lp_norm(f, 2), "route": route}
    ev = {}
    if route in ("kernel", "both"):
        ev["kernel"] = euler_heat_kernel(f, t)
    if route in ("spectral", "both"):
        ev["spectral"] = euler_heat_spectral(f, t)
    main = ev.get("kernel", ev.get("spectral"))
    out["l2_after"] = lp_norm(main, 2)
    out["max_route_disagreement"] = (
        lp_norm(ev["kernel"] - ev["spectral"], 2) / out["l2_before"] if len(ev) == 2 else None)
    out["fields"] = {}
    for name, fe in ev.items():
        path = ctx.path(f"{name}.csv")
        write_field_csv(fe, path)
        out["fields"][name] = path.name
        out.setdefault("meta", {})[name] = {k: v for k, v in fe.meta.items()
                                             if k in ("lost_mass", "route")}
    return out, []


def _job_besov(model, grid, params, seed, ctx):
    g = _grid_for(params, grid)
    f = _field(params.get("field", "gaussian"), model, g)
    tg = params.get("times", {})
    times = TimeGrid(tg.get("t_min", 1e-4), tg.get("ratio", 10 ** (1 / 20)), tg.get("J", 160))
    res = besov_norm(f, float(params.get("alpha", -0.5)), times)
    return {"value": res.value, "argmax_t": res.argmax_t, "at_endpoint": res.at_endpoint,
            "sup_refinement": res.sup_refinement, "alpha": res.alpha}, []


def _job_maxhardy(model, grid, params, seed, ctx):
    g = _grid_for(params, grid)
    pair = RadialWeightPair(_field(params.get("phi", "constant"), model, g),
                            _field(params.get("psi", "constant"), model, g))
    a = a_functional(pair)
    out = {"A": a.A, "argmaxR": a.argmax_R, "r_independent": a.r_independent,
           "divergent": a.divergent, "C_used": math.e * a.A * model.Q / model.sphere_measure}
    reports = [check_max_hardy(pair, _field(s, model, g)) for s in params.get("f", [])]
    out["reports"] = [r.to_dict() for r in reports]
    if "witness" in params:
        R = params["witness"]
        out["necessity"] = [vars(p) for p in necessity_probe(pair, R if isinstance(R, list) else [R])]
    return out, reports


def _job_nonlocal(model, grid, params, seed, ctx):
    g = _grid_for(params, grid)
    f = _field(params.get("field", "gaussian"), model, g)
    deltas = params.get("delta", 0.1)
    out = []
    for d in deltas if isinstance(deltas, list) else [deltas]:
        est = nonlocal_functional(f, float(d), int(params.get("samples", 100_000)), seed,
                                  int(params.get("batches", 32)))
        out.append(est.to_dict())
    return {"estimates": out}, []


COMMANDS = {
    "verify": _job_verify,
    "sharpness": _job_sharpness,
    "semigroup": _job_semigroup,
    "besov": _job_besov,
    "maxhardy": _job_maxhardy,
    "weighted": _job_weighted,
    "nonlocal": _job_nonlocal,
}


# ------------------------------------------------------------------- suites

@dataclass
class Job:
    index: int
    command: str
    params: dict
    seed: object = None

    @property
    def stem(self):
        return f"{self.index:02d}-{self.command}"


@dataclass
class RunManifest:
    tool_version: str
    model_hash: str
    jobs: list = field(default_factory=list)
    exit_code: int = 0
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return jsonable(vars(self))


def _needs_seed(job):
    if job.command in STOCHASTIC:
        return True
    return job.command == "verify" and any(
        c.get("name") in STOCHASTIC_CHECKS for c in job.params.get("checks", []))


def parse_suite(raw, default_seed=None, where="suite"):
    """Validate a suite document ``{"model": ..., "seed": ..., "jobs": [...]}``.

    Returns ``(model_ref, jobs)``. ``model_ref`` is the ``model`` entry
    (a path or an inline definition) or ``None``.
    """
    if not isinstance(raw, dict):
        raise ConfigError("expected an object with a 'jobs' list", where)
    jobs_raw = raw.get("jobs", [])
    if not isinstance(jobs_raw, list):
        raise ConfigError("expected a list", f"{where}.jobs")
    seed = raw.get("seed", default_seed)
    jobs = []
    for i, j in enumerate(jobs_raw):
        w = f"{where}.jobs[{i}]"
        if not isinstance(j, dict):
            raise ConfigError("expected an object", w)
        cmd = j.get("command")
        if cmd not in COMMANDS:
            raise ConfigError(f"unknown command {cmd!r}; choose from {sorted(COMMANDS)}",
                              f"{w}.command")
        params = j.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("expected an object", f"{w}.params")
        job = Job(i, cmd, params, j.get("seed", seed))
        if job.seed is not None and (isinstance(job.seed, bool) or not isinstance(job.seed, int)):
            raise ConfigError(f"seed must be an integer, got {job.seed!r}", f"{w}.seed")
        if job.seed is None and _needs_seed(job):
            raise ConfigError("required for stochastic jobs", f"{w}.seed")
        jobs.append(job)
    return raw.get("model"), jobs


def _finite(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(obj):
    return json.dumps(_finite(jsonable(obj)), indent=2, sort_keys=True) + "\n"


def _has_violation(obj):
    if isinstance(obj, dict):
        if obj.get("status") == "violated":
            return True
        return any(_has_violation(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_has_violation(v) for v in obj)
    return False


class _Ctx:
    def __init__(self, job_dir, stem):
        self.job_dir, self.stem = job_dir, stem

    def path(self, suffix):
        return self.job_dir / f"{self.stem}-{suffix}"


def _execute(job, model, grid, job_dir):
    t0 = time.perf_counter()
    doc = {"index": job.index, "command": job.command, "params": job.params, "seed": job.seed}
    reports = []
    try:
        result, reports = COMMANDS[job.command](model, grid, job.params, job.seed,
                                                _Ctx(job_dir, job.stem))
        doc.update(status="violated" if _has_violation(result) else "ok", result=result)
    except Exception as e:  # isolate: one failing job must not stop the others
        doc.update(status="error", error={"type": type(e).__name__, "message": str(e)})
        if not isinstance(e, (InvalidInputError, ValueError, ArithmeticError, RuntimeError,
                              NotImplementedError)):
            doc["error"]["traceback"] = traceback.format_exc(limit=3)
    path = job_dir / f"{job.stem}.json"
    path.write_text(dumps(doc))
    return doc, reports, path, time.perf_counter() - t0


def run_suite(jobs, model, grid, out_dir, workers=1):
    """Run validated jobs and write all outputs below ``out_dir``.

    Exit code 0 iff no job errored and no report is ``violated``. Job JSON
    files and the summaries depend only on the inputs; wall times live in
    the manifest alone.
    """
    out_dir = Path(out_dir)
    job_dir = out_dir / "jobs"
    job_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(__version__, model_hash(model, grid))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda j: _execute(j, model, grid, job_dir), jobs))
        else:
            results = [_execute(j, model, grid, job_dir) for j in jobs]
    manifest.warnings = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    all_reports, md = [], ["# Suite summary", ""]
    for job, (doc, reports, path, wall) in zip(jobs, results):
        manifest.jobs.append({"index": job.index, "command": job.command, "status": doc["status"],
                              "wall_time": wall, "output": str(path.relative_to(out_dir))})
        md.append(f"## {job.stem}: {doc['status']}")
        md.append("")
        if doc["status"] == "error":
            md.append(f"error: {doc['error']['type']}: {doc['error']['message']}")
        elif reports:
            md.append(emit_report(reports)[0].rstrip("\n"))
        else:
            md.append("(no inequality reports)")
        md.append("")
        all_reports.extend(reports)
    (out_dir / "summary.md").write_text("\n".join(md))
    (out_dir / "summary.csv").write_text(emit_report(all_reports)[1])
    manifest.exit_code = int(any(j["status"] != "ok" for j in manifest.jobs))
    (out_dir / "manifest.json").write_text(dumps(manifest.to_dict()))
    return manifest


# ---------------------------------------------------------------------- CLI

def _default_model():
    return GroupModel.euclidean(3, 2.0, 16), RadialGrid()


def _resolve_model(arg, suite_ref, suite_dir):
    if arg:
        m, g, _ = load_model(arg)
        return m, g
    if isinstance(suite_ref, str):
        m, g, _ = load_model(Path(suite_dir) / suite_ref)
        return m, g
    if isinstance(suite_ref, dict):
        return model_from_dict(suite_ref, suite_dir, "suite.model")
    return _default_model()


def _json_arg(text, flag):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON ({e.msg})", flag) from None


def _field_arg(text, flag):
    """Constructor name, or a JSON object ``{"ctor": ..., ...}``."""
    return _json_arg(text, flag) if text.lstrip().startswith("{") else text


def _single_job(args):
    """Translate subcommand flags into one job's params."""
    cmd = args.command
    if cmd == "verify":
        if not args.suite:
            raise ConfigError("verify needs --suite", "--suite")
        raw = load_json(args.suite)
        checks = raw.get("checks") if isinstance(raw, dict) else raw
        if not isinstance(checks, list):
            raise ConfigError("expected a list of checks", str(args.suite))
        for i, c in enumerate(checks):
            if not isinstance(c, dict) or "name" not in c:
                raise ConfigError("each check needs a 'name'", f"{args.suite}[{i}]")
            if "field-constructor" in c and "field" not in c:
                c["field"] = c.pop("field-constructor")
        return {"checks": checks}
    if cmd == "sharpness":
        p = {"ineq": args.ineq, "family": args.family, "budget": args.budget}
        if args.delta is not None:
            p["delta"] = args.delta
        return p
    params = _json_arg(args.params, "--params") if args.params else {}
    if getattr(args, "field", None):
        params["field"] = _field_arg(args.field, "--field")
    if cmd == "semigroup":
        params.setdefault("t", args.t)
        params.setdefault("route", args.route)
    elif cmd == "besov":
        params.setdefault("alpha", args.alpha)
    elif cmd == "maxhardy":
        params.setdefault("phi", _field_arg(args.phi, "--phi"))
        params.setdefault("psi", _field_arg(args.psi, "--psi"))
        if args.witness is not None:
            params.setdefault("witness", args.witness)
        if args.f:
            params.setdefault("f", [_field_arg(a, "--f") for a in args.f])
    elif cmd == "weighted":
        params.setdefault("thm", args.thm)
        if args.p is not None:
            params.setdefault("p", args.p)
        if args.q is not None:
            params.setdefault("q", args.q)
    elif cmd == "nonlocal":
        params.setdefault("delta", args.delta)
        params.setdefault("samples", int(args.samples))
    return params


def build_parser():
    ap = argparse.ArgumentParser(prog="homog-ineq",
                                 description="Euler-operator inequalities on homogeneous-group models")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model definition JSON")
    common.add_argument("--out", default="homog_ineq_out",
                        help=f"output directory (env {OUT_ENV} overrides)")
    common.add_argument("--jobs", type=int, default=1, help="parallel job cap")
    common.add_argument("--seed", type=int, default=None, help="default seed for stochastic jobs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run a suite of jobs")
    p.add_argument("--suite", required=True)
    p = sub.add_parser("verify", parents=[common], help="evaluate a list of checks")
    p.add_argument("--suite", help="JSON list of {name, field, params}")
    p = sub.add_parser("sharpness", parents=[common], help="probe a family for sharpness")
    p.add_argument("--ineq", default="stubbe")
    p.add_argument("--family", default="bliss")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--delta", type=float, default=None)
    for name, hlp in (("semigroup", "evolve a field by the heat semigroup"),
                      ("besov", "Besov-type norm of a field"),
                      ("maxhardy", "geometric-mean Hardy inequality"),
                      ("weighted", "radial-weight and uncertainty inequalities"),
                      ("nonlocal", "Monte Carlo nonlocal functional")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--params", help="extra params as a JSON object")
        if name != "maxhardy":
            p.add_argument("--field", default="gaussian",
                           help="constructor name or JSON {\"ctor\": ..., ...}")
        if name == "semigroup":
            p.add_argument("--t", type=float, default=0.1)
            p.add_argument("--route", default="both", choices=["kernel", "spectral", "both"])
        elif name == "besov":
            p.add_argument("--alpha", type=float, default=-0.5)
        elif name == "maxhardy":
            p.add_argument("--phi", default="constant")
            p.add_argument("--psi", default="constant")
            p.add_argument("--witness", type=float, default=None)
            p.add_argument("--f", action="append", help="test field constructor (repeatable)")
        elif name == "weighted":
            p.add_argument("--thm", required=True, choices=["61a", "61m", "62", "hpw", "critical"])
            p.add_argument("--p", type=float, default=None)
            p.add_argument("--q", type=float, default=None)
        elif name == "nonlocal":
            p.add_argument("--delta", type=float, default=0.1)
            p.add_argument("--samples", type=float, default=1e5)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = os.environ.get(OUT_ENV) or args.out
    try:
        if args.command == "run":
            raw = load_json(args.suite)
            ref, jobs = parse_suite(raw, args.seed, str(args.suite))
            model, grid = _resolve_model(args.model, ref, Path(args.suite).parent)
        else:
            raw = {"jobs": [{"command": args.command, "params": _single_job(args)}]}
            if args.seed is not None:
                raw["seed"] = args.seed
            _, jobs = parse_suite(raw, None, args.command)
            model, grid = _resolve_model(args.model, None, ".")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    manifest = run_suite(jobs, model, grid, out, max(1, args.jobs))
    if args.command != "run" and jobs:
        sys.stdout.write((Path(out) / manifest.jobs[0]["output"]).read_text())
    else:
        for j in manifest.jobs:
            print(f"{j['index']:02d} {j['command']:<10} {j['status']}")
    return manifest.exit_code
