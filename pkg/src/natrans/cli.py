"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration, 3 numerical non-convergence
(partial results are still written, with flags), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NatransError
from .models import LogisticBarrierParams
from .oscillator import OscillatorSpec, excitation_pipeline
from .sweep import format_csv, parse_grid, run_sweep
from .validation import run_validation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

DEFAULT_ESTIMATORS = {
    "spin-flip": "exact,oracle,adiabatic",
    "reflect": "exact,adiabatic,transformed",
    "sweep": {"rosen-zener": "exact,adiabatic,transformed", "logistic": "exact,adiabatic,transformed"},
}
PARAMS = {"rosen-zener": ("beta0", "beta1", "T"), "logistic": ("alpha", "beta", "k")}


class ConfigError(ValueError):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with option values; flags override it")
    p.add_argument("--output", "-o", help="CSV output path (stdout when omitted)")
    p.add_argument("--manifest", help="JSON manifest path (default: output path with .json)")
    p.add_argument("--rel-tol", type=float, dest="rel_tol")
    p.add_argument("--abs-tol", type=float, dest="abs_tol")
    p.add_argument("--oracle-rel-tol", type=float, dest="oracle_rel_tol")
    p.add_argument("--oracle-abs-tol", type=float, dest="oracle_abs_tol")
    p.add_argument("--threads", type=int, help="worker processes (NATRANS_THREADS wins)")


def _params(p: argparse.ArgumentParser, names):
    for name in names:
        p.add_argument(f"--{name}", dest=name, help="value or grid start:stop:step / comma list")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="natrans", description="Non-adiabatic transition estimators")
    parser.add_argument("--version", action="version", version=f"natrans {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spin-flip", help="spin-flip probability for a Rosen-Zener pulse")
    _common(sp)
    sp.add_argument("--model", choices=["rosen-zener"])
    sp.add_argument("--estimators")
    _params(sp, PARAMS["rosen-zener"])

    rp = sub.add_parser("reflect", help="over-barrier reflection from a logistic step")
    _common(rp)
    rp.add_argument("--model", choices=["logistic"])
    rp.add_argument("--estimators")
    _params(rp, PARAMS["logistic"])

    sw = sub.add_parser("sweep", help="grid sweep of any model")
    _common(sw)
    sw.add_argument("--model", choices=sorted(PARAMS))
    sw.add_argument("--estimators")
    _params(sw, sorted({n for v in PARAMS.values() for n in v}))

    op = sub.add_parser("oscillator", help="level transitions of an oscillator with logistic Omega(t)")
    _common(op)
    _params(op, PARAMS["logistic"])
    op.add_argument("--n-max", dest="n_max", type=int)

    vp = sub.add_parser("validate", help="run the invariant self-test")
    vp.add_argument("--config", help=argparse.SUPPRESS)
    return parser


def load_config(args: argparse.Namespace) -> dict:
    """Merge the JSON config file (if any) with explicit flags."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    return cfg


def _tolerances(cfg: dict) -> dict:
    tols = {}
    for key in ("rel_tol", "abs_tol", "oracle_rel_tol", "oracle_abs_tol"):
        if key in cfg:
            v = float(cfg[key])
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{key} must be positive")
            tols[key] = v
    return tols


def _estimators(cfg: dict, model: str) -> list[str]:
    raw = cfg.get("estimators")
    if raw is None:
        raw = DEFAULT_ESTIMATORS[cfg["command"]]
        if isinstance(raw, dict):
            raw = raw[model]
    items = raw if isinstance(raw, list) else str(raw).split(",")
    items = [e.strip() for e in items if e.strip()]
    if not items:
        raise ConfigError("estimator list is empty")
    return items


def _axes(cfg: dict, model: str) -> dict:
    axes = {}
    for name in PARAMS[model]:
        if name in cfg:
            try:
                axes[name] = parse_grid(cfg[name])
            except ValueError as exc:
                raise ConfigError(f"--{name}: {exc}") from exc
    return axes


def _write_outputs(cfg: dict, text: str, started: float, extra: dict | None = None):
    out = cfg.get("output")
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    manifest = cfg.get("manifest") or str(Path(out).with_suffix(".json"))
    echo = {k: v for k, v in sorted(cfg.items()) if k not in ("manifest",)}
    doc = {"version": __version__, "config": echo, "wall_seconds": time.perf_counter() - started}
    if extra:
        doc.update(extra)
    Path(manifest).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _run_sweep(cfg: dict, started: float) -> int:
    command = cfg["command"]
    model = cfg.get("model") or {"spin-flip": "rosen-zener", "reflect": "logistic"}.get(command)
    if model not in PARAMS:
        raise ConfigError("--model is required for sweep (rosen-zener or logistic)")
    stray = [k for k in ("beta0", "beta1", "T", "alpha", "beta", "k") if k in cfg and k not in PARAMS[model]]
    if stray:
        raise ConfigError(f"parameters {stray} do not belong to model {model}")
    try:
        table, errors = run_sweep(model, _axes(cfg, model), _estimators(cfg, model), _tolerances(cfg),
                                  cfg.get("threads"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = format_csv(table)
    _write_outputs(cfg, text, started, {"failures": errors})
    for msg in errors:
        print(f"natrans: non-converged: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if errors else EXIT_OK


def _logistic_oscillator(alpha: float, beta: float, k: float) -> OscillatorSpec:
    """Omega(t)^2 = k^2 - beta k^2 / (1 + exp(-gamma t)), gamma = k / alpha."""
    LogisticBarrierParams(alpha, beta)
    gamma = k / alpha
    U0 = beta * k * k

    def omega(t):
        s = 0.5 * (1.0 + np.tanh(0.5 * gamma * np.asarray(t, dtype=float)))
        return np.sqrt(k * k - U0 * s)

    def domega(t):
        s = 0.5 * (1.0 + np.tanh(0.5 * gamma * np.asarray(t, dtype=float)))
        return -U0 * gamma * s * (1 - s) / (2.0 * omega(t))

    horizon = (math.log(1e13) + 1.0) / gamma
    return OscillatorSpec(omega, k, k * math.sqrt(1.0 - beta), horizon, 1e-12 * k, scale=1.0 / gamma,
                          domega=domega)


def _run_oscillator(cfg: dict, started: float) -> int:
    try:
        vals = {n: parse_grid(cfg[n]) for n in ("alpha", "beta") if n in cfg}
        if set(vals) != {"alpha", "beta"} or any(len(v) != 1 for v in vals.values()):
            raise ConfigError("oscillator needs single values for --alpha and --beta")
        k = float(parse_grid(cfg.get("k", 1.0))[0])
        n_max = int(cfg.get("n_max", 10))
        spec = _logistic_oscillator(vals["alpha"][0], vals["beta"][0], k)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    ctrl_kw = _tolerances(cfg)
    from .numerics import QuadratureSpec

    ctrl = QuadratureSpec(ctrl_kw.get("rel_tol", 1e-10), ctrl_kw.get("abs_tol", 1e-14),
                          truncation_threshold=1e-13)
    try:
        W = excitation_pipeline(spec, n_max, ctrl)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except NatransError as exc:
        print(f"natrans: non-converged: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    lines = ["m,n,probability,valid"]
    flag = "1" if W.valid else "0"
    for m in range(W.n_max + 1):
        for n in range(W.n_max + 1):
            lines.append(f"{m},{n},{W.entries[m, n]:.17g},{flag}")
    _write_outputs(cfg, "\n".join(lines) + "\n", started,
                   {"theta": W.theta, "valid": W.valid, "row_sums": W.row_sums.tolist()})
    print(f"theta = {W.theta:.17g}", file=sys.stderr)
    return EXIT_OK


def _run_validate() -> int:
    checks = run_validation()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}".rstrip())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    started = time.perf_counter()
    try:
        if args.command == "validate":
            return _run_validate()
        cfg = load_config(args)
        if cfg["command"] == "oscillator":
            return _run_oscillator(cfg, started)
        return _run_sweep(cfg, started)
    except ConfigError as exc:
        print(f"natrans: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"natrans: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
