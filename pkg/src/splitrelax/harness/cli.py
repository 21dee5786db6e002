"""Command line interface: ``run``, ``eoc`` and ``list-cases``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 I/O error. A JSON file given with ``--config`` supplies defaults for any
flag (keys are the long option names with ``-`` or ``_``); explicit flags
override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..errors import ConfigError, OutputError, SplitRelaxError
from .cases import case_catalog, get_case
from .io import FORMATS, write_eoc, write_output
from .norms import eoc
from .runner import ap_errors, run_case

log = logging.getLogger("splitrelax")

# flags that map onto case parameters of the same name
PARAM_FLAGS = ("mach", "a0", "seed", "rho0")
DEFAULTS = {
    "order": None,
    "cfl": None,
    "tend": None,
    "limiter": None,
    "diffusion": None,
    "out": ".",
    "format": "csv",
    "snapshots": 0,
    "solver": "auto",
    "min_steps": None,
    "param": [],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _resolution(text: str):
    try:
        parts = [int(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"resolution must be N or N,NY, got {text!r}") from None
    if not parts or len(parts) > 2 or min(parts) < 1:
        raise ConfigError(f"resolution must be N or N,NY with positive counts, got {text!r}")
    return parts[0] if len(parts) == 1 else tuple(parts)


def _resolutions(text: str) -> list:
    try:
        vals = [int(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"resolutions must be comma-separated integers, got {text!r}") from None
    if len(vals) < 2:
        raise ConfigError("need at least two resolutions for an EOC table")
    return vals


def _param_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = _param_value(val.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splitrelax", description="Semi-implicit relaxation schemes: benchmark runner.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON file with default values for any flag")
        sp.add_argument("--case", help="case name (see list-cases)")
        sp.add_argument("--order", type=int, choices=(1, 2))
        sp.add_argument("--mach", type=float)
        sp.add_argument("--a0", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--rho0", type=float)
        sp.add_argument("--param", action="append", metavar="KEY=VALUE", help="any case parameter")
        sp.add_argument("--cfl", type=float, help="material CFL number")
        sp.add_argument("--tend", type=float, help="final time")
        sp.add_argument("--limiter", choices=("minmod", "none"))
        sp.add_argument("--diffusion", choices=("local", "global"))
        sp.add_argument("--solver", choices=("auto", "cg", "direct", "spectral"))
        sp.add_argument("--min-steps", dest="min_steps", type=int, help="startup cap t_end/min_steps")
        sp.add_argument("--out", help="output directory")

    run = sub.add_parser("run", help="run one case and write the final state")
    common(run)
    run.add_argument("--n", help="resolution N or N,NY (default: the case's)")
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--snapshots", type=int, help="extra equally spaced output times")

    e = sub.add_parser("eoc", help="convergence table over doubling resolutions")
    common(e)
    e.add_argument("--resolutions", help="comma-separated doubling resolutions, e.g. 32,64,128")

    sub.add_parser("list-cases", help="list the case catalog")
    return p


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults, the JSON config and explicit flags (flags win)."""
    cfg = _load_config(getattr(args, "config", None))
    opts = dict(DEFAULTS)
    known = set(vars(args)) | set(DEFAULTS)
    for key, val in cfg.items():
        if key not in known or key in ("config", "command", "verbose"):
            raise ConfigError(f"unknown config key {key!r}")
        opts[key] = val
    for key, val in vars(args).items():
        if key in ("config", "command"):
            continue
        if val is not None and not (key == "param" and not val):
            opts[key] = val
        else:
            opts.setdefault(key, None)
    if not opts.get("case"):
        raise ConfigError("--case is required")
    return opts


def _overrides(opts: dict) -> dict:
    ov = {}
    for key in PARAM_FLAGS:
        if opts.get(key) is not None:
            ov[key] = opts[key]
    params = opts.get("param") or []
    if isinstance(params, dict):
        ov.update(params)
    else:
        ov.update(_parse_params(params))
    return ov


def _run_kwargs(opts: dict) -> dict:
    return dict(
        order=opts.get("order"),
        nu=opts.get("cfl"),
        t_end=opts.get("tend"),
        limiter=opts.get("limiter"),
        diffusion=opts.get("diffusion"),
        solver=opts.get("solver") or "auto",
        min_steps=opts.get("min_steps"),
    )


def _tag(n) -> str:
    return "x".join(str(k) for k in n)


def cmd_run(opts: dict, stream) -> int:
    spec = get_case(opts["case"])
    n = _resolution(opts["n"]) if opts.get("n") is not None else spec.default_n
    snaps = int(opts.get("snapshots") or 0)
    if snaps < 0:
        raise ConfigError("--snapshots must be >= 0")
    fmt = opts.get("format") or "csv"
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}")
    res = run_case(spec, n, _run_kwargs(opts)["order"], overrides=_overrides(opts), snapshots=snaps,
                   **{k: v for k, v in _run_kwargs(opts).items() if k != "order"})
    out = opts.get("out") or "."
    stem = f"{spec.name}_N{_tag(res.grid.n)}"
    paths = []
    for k, (t, values) in enumerate(res.snapshots):
        paths.append(write_output(values, res.grid, res.model, os.path.join(out, f"{stem}_s{k:03d}.{fmt}"), fmt))
    paths.append(write_output(res.values, res.grid, res.model, os.path.join(out, f"{stem}.{fmt}"), fmt))
    print(f"case {spec.name}  N={_tag(res.grid.n)}  steps={res.steps}  t={res.t:.10g}", file=stream)
    if res.report is not None:
        for var, err in res.report.errors.items():
            print(f"  L1 error {var:>4}: {err:.6e}", file=stream)
    if "mach" in res.params and spec.name.endswith("-ap"):
        for var, err in ap_errors(res).items():
            print(f"  relative L1 {var:>4}: {err:.6e}", file=stream)
    if res.diagnostics:
        last = res.diagnostics[-1]
        print(f"  div B mean {last['div_mean']:.6e}  max {last['div_max']:.6e}", file=stream)
    for path in paths:
        print(f"  wrote {path}", file=stream)
    return 0


def cmd_eoc(opts: dict, stream) -> int:
    spec = get_case(opts["case"])
    if spec.reference is None:
        raise ConfigError(f"case {spec.name!r} has no reference solution for an EOC table")
    if not opts.get("resolutions"):
        raise ConfigError("--resolutions is required")
    ns = _resolutions(opts["resolutions"])
    kw = _run_kwargs(opts)
    reports = [run_case(spec, n, kw["order"], overrides=_overrides(opts),
                        **{k: v for k, v in kw.items() if k != "order"}).report for n in ns]
    table = eoc(reports)
    print(table.format(), file=stream)
    path = write_eoc(table, os.path.join(opts.get("out") or ".", f"{spec.name}_eoc.csv"))
    print(f"wrote {path}", file=stream)
    return 0


def cmd_list(stream) -> int:
    for spec in case_catalog():
        print(f"{spec.name:<18} {spec.model:<5} {spec.dim}D  {spec.description}", file=stream)
    return 0


def main(argv=None, stream=None) -> int:
    """Entry point; returns the process exit code."""
    stream = sys.stdout if stream is None else stream
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
        if args.command is None:
            raise ConfigError("a command is required: run, eoc or list-cases")
        if args.command == "list-cases":
            return cmd_list(stream)
        opts = resolve_options(args)
        return cmd_run(opts, stream) if args.command == "run" else cmd_eoc(opts, stream)
    except SplitRelaxError as exc:
        kind = {1: "configuration error", 2: "numerical failure", 3: "I/O error"}[exc.exit_code]
        print(f"splitrelax: {kind}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
