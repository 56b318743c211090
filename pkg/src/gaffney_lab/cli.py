"""Command-line entry point: ``gaffney-lab <command> [options]``.

Commands: constant, verify, blowup, rectify, mesh, trace.  Options come from
an optional JSON config (``--config``) overridden by flags.  Exit codes: 0
success, 1 a verification suite failed, 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .boundary import BoundarySpec, Condition, validate_lambda
from .counterexamples import FAMILIES, blowup_ratios
from .errors import GaffneyLabError
from .mesh import generate_domain, refine, validate
from .pushforward import rectification_residual, rectify_flow
from .registry import DEFAULT_CORPUS, lookup_field
from .spectrum import refinement_study, trace_constant
from .verification import SUITES, run_suites

COMMANDS = ("constant", "verify", "blowup", "rectify", "mesh", "trace")
DEFAULT_SEED = 20160601


class UsageError(Exception):
    pass


@dataclass
class JobConfig:
    command: str = ""
    domain: str = "square"
    k: int = 2
    levels: int | None = None  # per-command default: 3, or 1 for mesh
    spec: object = None
    family: str = "intro_family"
    ns: list = field(default_factory=lambda: [1, 2, 4, 8])
    out: str | None = None
    seed: int = DEFAULT_SEED
    eps: float = 1.0
    # the flag is --lambda; "lambda" is a keyword in Python
    lam: str | None = None
    x0: list | None = None
    r: float = 0.5
    grid: int = 5
    corpus: list = field(default_factory=lambda: list(DEFAULT_CORPUS))
    suites: list = field(default_factory=lambda: list(SUITES))

    @classmethod
    def from_dict(cls, data: dict) -> "JobConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        return cls(**data)


def _split(text, conv=str):
    return [conv(s) for s in str(text).split(",") if s.strip()]


def parse_spec(value) -> BoundarySpec | str:
    """Inline JSON, a path to a JSON file, or ``<kind>[=<lambda>]`` applied to every segment.

    The shorthand form is returned as a string and expanded once the segment
    count is known.
    """
    if isinstance(value, dict):
        return BoundarySpec.from_dict(value)
    text = str(value).strip()
    if text.startswith("{"):
        return BoundarySpec.from_json(text)
    if os.path.exists(text):
        with open(text) as fh:
            return BoundarySpec.from_json(fh.read())
    return text


def _uniform_spec(shorthand: str, segments: int) -> BoundarySpec:
    kind, _, lam = shorthand.partition("=")
    if kind in ("cross_lambda", "scalar_lambda"):
        if not lam:
            raise UsageError(f"{kind} needs a lambda, e.g. {kind}=1,0")
        cond = getattr(Condition, kind)(lam)
    else:
        cond = Condition(kind)
    return BoundarySpec.uniform(segments, cond)


def resolve_spec(cfg: JobConfig, segments: int) -> BoundarySpec:
    if cfg.spec is None:
        raise UsageError("a boundary spec is required (--spec)")
    spec = parse_spec(cfg.spec)
    return _uniform_spec(spec, segments) if isinstance(spec, str) else spec


def _levels(cfg: JobConfig, default: int) -> int:
    levels = default if cfg.levels is None else int(cfg.levels)
    if levels < 1:
        raise UsageError(f"levels must be >= 1, got {levels}")
    return levels


def header(cfg: JobConfig) -> str:
    return f"# gaffney-lab v{__version__} seed={cfg.seed}\n"


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def cmd_constant(cfg: JobConfig) -> int:
    base = generate_domain(cfg.domain, cfg.k)
    spec = resolve_spec(cfg, base.segment_count)
    report = validate_lambda(spec, base)
    if not report.ok:
        print(report, file=sys.stderr)
        return 2
    study = refinement_study(base, spec, _levels(cfg, 3))
    with _output(cfg.out) as fh:
        fh.write(header(cfg))
        fh.write(_csv(["level", "h", "F", "lambda_max", "residual"], study.rows()))
    return 0


def cmd_verify(cfg: JobConfig) -> int:
    if not cfg.suites or not cfg.corpus:
        print("nothing to verify: empty suite or corpus selection", file=sys.stderr)
        return 2
    bad = [s for s in cfg.suites if s not in SUITES]
    if bad:
        raise UsageError(f"unknown suites {bad}; known: {list(SUITES)}")
    for name in cfg.corpus:
        lookup_field(name)
    results = run_suites(cfg.seed, cfg.suites, cfg.corpus)
    rows = [(r.suite, r.checks, r.max_residual, r.threshold, "PASS" if r.passed else "FAIL")
            for r in results]
    with _output(cfg.out) as fh:
        fh.write(header(cfg))
        fh.write(_csv(["suite", "checks", "max_residual", "threshold", "status"], rows))
    return 0 if all(r.passed for r in results) else 1


def cmd_blowup(cfg: JobConfig) -> int:
    names = [cfg.family]
    if cfg.family == "two_form_family":
        names = ["two_form_family:+1", "two_form_family:-1"]
    for name in names:
        if name not in FAMILIES:
            raise UsageError(f"unknown family {name!r}; known: {sorted(FAMILIES) + ['two_form_family']}")
    rows = []
    for name in names:
        result = blowup_ratios(name, cfg.domain, cfg.ns)
        rows += result
        if name.startswith("two_form_family"):
            closed = all(r.curl_div_energy <= 1e-12 * r.ratio_grad_mass for r in result)
            print(f"{name}: d=0 and delta=0 {'hold' if closed else 'FAIL'}", file=sys.stderr)
    with _output(cfg.out) as fh:
        fh.write(header(cfg))
        fh.write(_csv(["family", "domain", "n", "ratio_grad_mass", "ratio_gaffney", "quad_err"],
                      [(r.family, r.domain, r.n, r.ratio_grad_mass, r.ratio_gaffney, r.quad_err)
                       for r in rows]))
    return 0


def cmd_rectify(cfg: JobConfig) -> int:
    if not cfg.lam:
        raise UsageError("rectify needs --lambda")
    lam = lookup_field("expr:" + cfg.lam)
    x0 = np.zeros(lam.dim) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    fm = rectify_flow(lam, x0, cfg.r)
    pts = fm.grid(cfg.grid)
    rows = [tuple(p) + (rectification_residual(fm, lam, p),) for p in pts]
    cols = [f"y{i + 1}" for i in range(lam.dim)] + ["residual"]
    with _output(cfg.out) as fh:
        fh.write(header(cfg))
        fh.write(_csv(cols, rows))
    return 0


def cmd_mesh(cfg: JobConfig) -> int:
    m = generate_domain(cfg.domain, cfg.k)
    for _ in range(_levels(cfg, 1) - 1):
        m = refine(m)
    for finding in validate(m):
        print(f"{finding.kind} #{finding.index}: {finding.detail}", file=sys.stderr)
    with _output(cfg.out) as fh:
        fh.write(m.to_json() + "\n")
    return 0


def cmd_trace(cfg: JobConfig) -> int:
    m = generate_domain(cfg.domain, cfg.k)
    rows = []
    for level in range(1, _levels(cfg, 3) + 1):
        if level > 1:
            m = refine(m)
        est = trace_constant(m, cfg.eps)
        rows.append((level, m.h, est.eps, est.c))
    with _output(cfg.out) as fh:
        fh.write(header(cfg))
        fh.write(_csv(["level", "h", "eps", "c"], rows))
    return 0


HANDLERS = {
    "constant": cmd_constant,
    "verify": cmd_verify,
    "blowup": cmd_blowup,
    "rectify": cmd_rectify,
    "mesh": cmd_mesh,
    "trace": cmd_trace,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaffney-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gaffney-lab {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON job config; flags override its values")
    p.add_argument("--domain", help="square | lshape | hexagon | polygon:<sides>")
    p.add_argument("--k", type=int, help="subdivisions of the base mesh")
    p.add_argument("--levels", type=int, help="number of refinement levels")
    p.add_argument("--spec", help="boundary spec: JSON text, JSON file, or <kind>[=<lambda>]")
    p.add_argument("--family", help="counterexample family for blowup")
    p.add_argument("--ns", help="comma separated family indices")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float, help="trace inequality parameter")
    p.add_argument("--lambda", dest="lam", help="vector expression, e.g. '1,x1'")
    p.add_argument("--x0", help="base point, comma separated")
    p.add_argument("--r", type=float, help="box radius for rectify")
    p.add_argument("--grid", type=int, help="sample points per axis for rectify")
    p.add_argument("--corpus", help="comma separated field names for verify")
    p.add_argument("--suites", help="comma separated suite names for verify")
    return p


def load_config(args) -> JobConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise UsageError("the config file must hold a JSON object")
    cfg = JobConfig.from_dict(data)
    cfg.command = args.command
    conv = {"ns": lambda s: _split(s, int), "x0": lambda s: _split(s, float),
            "corpus": _split, "suites": _split}
    for f in fields(JobConfig):
        value = getattr(args, f.name, None)
        if f.name != "command" and value is not None:
            setattr(cfg, f.name, conv.get(f.name, lambda v: v)(value))
    return cfg


def _thread_limit():
    n = os.environ.get("GAFFNEY_LAB_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(int(n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        with _thread_limit():
            return HANDLERS[cfg.command](cfg)
    except (UsageError, GaffneyLabError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"gaffney-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
