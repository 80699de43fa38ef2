"""Command-line interface.

``extville cs``        running confidence sequence over ndjson observations (CSV out)
``extville solve``     critical constants (JSON out)
``extville lab``       registered Monte-Carlo experiments (JSON lines out)
``extville simulate``  one path of a multiplicative ENSM (CSV out)

Exit codes: 0 success, 2 malformed input or configuration file, 3 unknown
method / experiment or missing method parameters.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cs_builder import METHOD_IDS, cs_bounds
from .mc_lab import EXPERIMENTS, ConfigError, run_experiment
from .numerics import DomainError, lambert_w_minus1
from .processes import START_KINDS, ProcessSpec, simulate_multiplicative
from .thresholds import optimal_c_squared, solve_constant

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3

CSV_FMT = "%.12g"
CS_HEADER = ("n", "lower", "upper", "process_log_value")

_METHOD_PARAMS = {
    "cs_gaussian_mixture": ("c",),
    "cs_flat_gaussian": (),
    "cs_flat_subgaussian": (),
    "cs_shifted": ("c", "eta"),
    "cs_conditioned": ("nu",),
    "cs_division": ("nu",),
    "cs_one_sided": (),
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    method_id: str
    alpha: float = 0.05
    seed: int = 0
    c: Optional[float] = None
    eta: Optional[float] = None
    nu: Optional[int] = None
    mu0: float = 0.0
    thickness: float = 1.0

    def validate(self) -> None:
        if self.method_id not in _METHOD_PARAMS:
            raise CliError(EXIT_CONFIG, f"unknown method {self.method_id!r}")
        missing = [p for p in _METHOD_PARAMS[self.method_id] if getattr(self, p) is None]
        if missing:
            raise CliError(EXIT_CONFIG, f"{self.method_id} requires --{', --'.join(missing)}")
        if not 0.0 < self.alpha < 1.0:
            raise CliError(EXIT_CONFIG, "--alpha must lie in (0, 1)")
        if self.c is not None and not self.c > 0:
            raise CliError(EXIT_CONFIG, "--c must be positive")
        if self.nu is not None and self.nu < 1:
            raise CliError(EXIT_CONFIG, "--nu must be a positive integer")
        if not self.thickness > 0:
            raise CliError(EXIT_CONFIG, "--thickness must be positive")

    def process_spec(self) -> ProcessSpec:
        m = self.method_id
        if m == "cs_gaussian_mixture":
            return ProcessSpec("GaussianMix", mu0=self.mu0, c=self.c)
        if m == "cs_flat_gaussian":
            return ProcessSpec("FlatMixThick", mu0=self.mu0, thickness=self.thickness)
        if m == "cs_flat_subgaussian":
            return ProcessSpec("FlatMix", mu0=self.mu0)
        if m == "cs_shifted":
            return ProcessSpec("ShiftedMix", mu0=self.mu0, c=self.c, eta=self.eta)
        if m == "cs_conditioned":
            return ProcessSpec("Conditioned", mu0=self.mu0, nu=self.nu)
        if m == "cs_division":
            return ProcessSpec("Division", mu0=self.mu0, nu=self.nu)
        return ProcessSpec("HalfFlat", mu0=self.mu0)


def fmt(x: float) -> str:
    return CSV_FMT % x


def read_observations(stream) -> np.ndarray:
    """Parse ndjson ``{"x": number}`` lines; blank lines are skipped."""
    xs = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_INPUT, f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or "x" not in obj:
            raise CliError(EXIT_INPUT, f"line {lineno}: expected an object with key 'x'")
        x = obj["x"]
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise CliError(EXIT_INPUT, f"line {lineno}: 'x' must be a finite number")
        xs.append(float(x))
    return np.array(xs, dtype=float)


def cs_rows(cfg: RunConfig, xs: np.ndarray) -> list[tuple[int, float, float, float]]:
    """Running CS and process log-value at ``mu0`` after each observation.

    For ``cs_division`` the first ``nu`` rows are the burn-in: the whole line
    with the process at its initial value 1.
    """
    rows: list[tuple[int, float, float, float]] = []
    if xs.size == 0:
        return rows
    spec = cfg.process_spec()
    cs = np.cumsum(xs)
    params = {"c": cfg.c, "eta": cfg.eta, "nu": cfg.nu, "thickness": cfg.thickness}
    if cfg.method_id == "cs_division":
        nu = cfg.nu
        for i in range(min(nu, xs.size)):
            rows.append((i + 1, -math.inf, math.inf, 0.0))
        if xs.size <= nu:
            return rows
        n = np.arange(1, xs.size - nu + 1, dtype=float)
        s_nu = cs[nu - 1]
        lo, hi = cs_bounds(cfg.method_id, n, cs[nu:], cfg.alpha, s_nu=s_nu, **params)
        logv = spec.log_value(n, cs[nu:], s_nu)
        offset = nu
    else:
        n = np.arange(1, xs.size + 1, dtype=float)
        lo, hi = cs_bounds(cfg.method_id, n, cs, cfg.alpha, **params)
        logv = spec.log_value(n, cs)
        offset = 0
    for i in range(n.size):
        rows.append((offset + i + 1, float(lo[i]), float(hi[i]), float(logv[i])))
    return rows


@contextlib.contextmanager
def _output(path):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def cmd_cs(args) -> int:
    cfg = RunConfig(
        method_id=args.method,
        alpha=args.alpha,
        seed=args.seed,
        c=args.c,
        eta=args.eta,
        nu=args.nu,
        mu0=args.mu0,
        thickness=args.thickness,
    )
    cfg.validate()
    if args.input:
        with open(args.input) as fh:
            xs = read_observations(fh)
    else:
        xs = read_observations(sys.stdin)
    rows = cs_rows(cfg, xs)
    with _output(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CS_HEADER)
        for n, lo, hi, lv in rows:
            w.writerow((n, fmt(lo), fmt(hi), fmt(lv)))
    return EXIT_OK


def solve_payload(kind: str, alpha: float, n: Optional[int] = None) -> dict:
    if kind == "optimal_c":
        if n is None:
            raise CliError(EXIT_INPUT, "optimal_c needs --n")
        c2 = optimal_c_squared(n, alpha)
        y = -alpha * alpha / math.e
        w = lambert_w_minus1(y)
        return {
            "kind": kind,
            "alpha": alpha,
            "n": n,
            "constant": c2,
            "residual": abs(w * math.exp(w) - y),
            "equation_id": "lambert_w_minus1",
        }
    sol = solve_constant(kind, alpha)
    return {
        "kind": kind,
        "alpha": alpha,
        "constant": sol.constant,
        "residual": sol.residual,
        "equation_id": sol.equation_id,
    }


def cmd_solve(args) -> int:
    payload = solve_payload(args.kind, args.alpha, args.n)
    with _output(args.output) as out:
        # repr-based float output round-trips exactly
        out.write(json.dumps(payload) + "\n")
    return EXIT_OK


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INPUT, f"$: invalid JSON at line {exc.lineno} ({exc.msg})") from None
    if not isinstance(cfg, dict):
        raise CliError(EXIT_INPUT, "$: config must be a JSON object")
    return cfg


def cmd_lab(args) -> int:
    if args.experiment not in EXPERIMENTS:
        raise CliError(EXIT_CONFIG, f"unknown experiment {args.experiment!r}")
    cfg = load_config(args.config)
    for key in ("seed", "reps", "horizon", "alpha"):
        val = getattr(args, key, None)
        if val is not None:
            if key not in EXPERIMENTS[args.experiment][1]:
                raise CliError(EXIT_INPUT, f"$.{key}: not a parameter of {args.experiment}")
            cfg[key] = val
    try:
        reports = run_experiment(args.experiment, cfg)
    except ConfigError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    with _output(args.output) as out:
        for rep in reports:
            out.write(rep.to_json() + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.start not in START_KINDS:
        raise CliError(EXIT_CONFIG, f"unknown start {args.start!r}")
    path = simulate_multiplicative(args.theta, args.start, args.horizon, args.seed)
    with _output(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("n", "log_value"))
        for i, lv in enumerate(path.log_values):
            w.writerow((i, fmt(lv)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extville", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    cs = sub.add_parser("cs", help="running confidence sequence from ndjson on stdin")
    cs.add_argument("--method", required=True)
    cs.add_argument("--alpha", type=float, default=0.05)
    cs.add_argument("--c", type=float)
    cs.add_argument("--eta", type=float)
    cs.add_argument("--nu", type=int)
    cs.add_argument("--mu0", type=float, default=0.0)
    cs.add_argument("--thickness", type=float, default=1.0)
    cs.add_argument("--seed", type=int, default=0)
    cs.add_argument("--input")
    cs.add_argument("--output")
    cs.set_defaults(func=cmd_cs)

    sv = sub.add_parser("solve", help="critical constants a, b, c or the optimal c^2")
    sv.add_argument("--kind", required=True, choices=("a", "b", "c", "optimal_c"))
    sv.add_argument("--alpha", type=float, required=True)
    sv.add_argument("--n", type=int)
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--output")
    sv.set_defaults(func=cmd_solve)

    lab = sub.add_parser("lab", help="run a registered Monte-Carlo experiment")
    lab.add_argument("experiment")
    lab.add_argument("--config")
    lab.add_argument("--seed", type=int)
    lab.add_argument("--reps", type=int)
    lab.add_argument("--horizon", type=int)
    lab.add_argument("--alpha", type=float)
    lab.add_argument("--output")
    lab.set_defaults(func=cmd_lab)

    sim = sub.add_parser("simulate", help="one path of M_n = M_{n-1}(1/2 + xi_n)")
    sim.add_argument("--theta", type=float, default=0.5)
    sim.add_argument("--start", default="cauchy_abs")
    sim.add_argument("--horizon", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--output")
    sim.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
