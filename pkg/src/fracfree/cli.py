"""Command-line interface: ``fracfree <subcommand> [options]``.

Every subcommand writes CSV to ``--out`` (``-`` for standard output).
Options may also come from a plain ``key = value`` file given with
``--config``; flags on the command line take precedence.  Numeric failures
are reported as ``error[<code>]: message`` on standard error with exit
status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import List, Optional

import numpy as np

from . import catalog, kz, pde, suites
from .diffflow import RESCALE_MODES, FlowParams, bridge_residual, flow, rescale
from .errors import ConfigError
from .freeops import commutator, oplus_power
from .measure import default_grid, write_quantile_csv
from .report import ExperimentReport
from .polylab import PROFILES, SAMPLERS, CoefSampler, derivative_experiment
from .transforms import s_from_quantile

PDE_INITIAL = ("taylor", "stationary", "kac")


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _measure(args, tag_attr="family", params_attr="params"):
    tag = catalog.parse_tag(getattr(args, tag_attr), getattr(args, params_attr, "") or "")
    return catalog.make(tag, default_grid(args.grid))


# subcommands --------------------------------------------------------------------


def cmd_catalog(args) -> int:
    _emit(write_quantile_csv(_measure(args)), args.out)
    return 0


def cmd_transforms(args) -> int:
    s = s_from_quantile(_measure(args))
    zs = _floats(args.eval_s)
    _emit(_csv(["z", "S"], [(z, float(s(np.array([z]))[0])) for z in zs]), args.out)
    return 0


def cmd_oplus(args) -> int:
    _emit(write_quantile_csv(oplus_power(_measure(args), args.k)), args.out)
    return 0


def cmd_commutator(args) -> int:
    x = _measure(args, "x", "x_params")
    y = _measure(args, "y", "y_params")
    _emit(write_quantile_csv(commutator(x, y)), args.out)
    return 0


def cmd_flow(args) -> int:
    params = FlowParams(args.t, args.rescale, args.alpha)
    _emit(write_quantile_csv(rescale(flow(_measure(args), args.t), params)), args.out)
    return 0


def cmd_kz(args) -> int:
    if args.action == "to-profile":
        if not args.family:
            raise ConfigError("kz to-profile needs --family")
        _, logp = kz.measure_to_profile(_measure(args), args.n)
        _emit(_csv(["k", "log_magnitude"], [(k, float(v) + 0.0) for k, v in enumerate(logp)]), args.out)
        return 0
    if not args.profile:
        raise ConfigError("kz to-measure needs --profile")
    k, logp = _read_coeffs(args.profile)
    n = k[-1]
    prof = kz.CoefProfile(k / n, -logp / n)
    _emit(write_quantile_csv(kz.profile_to_measure(prof)), args.out)
    return 0


def _read_coeffs(path: str):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, newline="") as fh:
            text = fh.read()
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
    if not rows or rows[0] != ["k", "log_magnitude"]:
        raise ConfigError("expected a k,log_magnitude header")
    data = np.array(rows[1:], dtype=float)
    order = np.argsort(data[:, 0])
    k, logp = data[order, 0], data[order, 1]
    if k[0] != 0 or np.any(np.diff(k) != 1):
        raise ConfigError("coefficient indices must run 0, 1, ..., n")
    return k, logp


def cmd_polylab(args) -> int:
    rep = derivative_experiment(
        args.profile,
        args.n,
        args.t,
        args.trials,
        CoefSampler(args.sampler, args.seed),
        args.param,
        args.tol,
        args.max_iter,
        args.ks_tol,
        args.allow_partial,
    )
    if not args.timing:
        rep.rows = [row[:-1] + ("",) for row in rep.rows]
    _emit(rep.table_csv(), args.out)
    if args.metrics:
        _emit(rep.metrics_csv(), args.metrics)
    for m in rep.metrics:
        sys.stderr.write(f"{m.name} = {m.value}\n")
    return 0 if rep.passed else 1


def cmd_pde(args) -> int:
    if args.initial == "taylor":
        x = pde.uniform_grid(1.0, args.nodes)
        state = pde.cdf_state(catalog.taylor_disk(), x)
    elif args.initial == "kac":
        x = pde.uniform_grid(1.0, args.nodes)
        state = pde.cdf_state(catalog.kac_derivative(args.t0), x, t0=args.t0)
    else:
        x = pde.uniform_grid(args.x_max, args.nodes)
        state = pde.cdf_state(lambda y: y / (1.0 + y), x)
    every = args.record_every or (args.t_end - state.t) / 10.0
    _, snaps = pde.integrate(state, args.t_end, args.dt, every if every > 0 else None)
    rows = [(s.t, xi, v) for s in snaps for xi, v in zip(s.x, s.values)]
    _emit(_csv(["t", "x", "phi"], rows), args.out)
    return 0


def cmd_verify(args) -> int:
    if args.check == "bridge":
        mu = _measure(args)
        rep = ExperimentReport("verify-bridge", {"family": mu.tag})
        for t in _floats(args.t):
            try:
                rep.add(f"bridge_residual[t={t}]", bridge_residual(mu, t), args.tol)
            except Exception as exc:
                if not hasattr(exc, "code"):
                    raise
                rep.add_error(f"bridge_residual[t={t}]", exc)
        reports = [rep]
    else:
        mc = {"trials": args.trials, "seed": args.seed}
        reports = suites.run_suite(args.suite, args.grid or 4096, mc)
    text = "".join(f"# {r.experiment_id}\n" + r.metrics_csv() for r in reports)
    _emit(text, args.out)
    for r in reports:
        number = int(r.experiment_id.split("-")[1]) if r.experiment_id.startswith("criterion-") else None
        title = suites.TITLES.get(number, r.experiment_id)
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'} {r.experiment_id} {title} ({r.seconds:.2f} s)\n")
    return 0 if all(r.passed for r in reports) else 1


# parser ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    p.add_argument("--config", help="file of 'key = value' lines supplying option defaults")
    p.add_argument("--grid", type=int, default=None, help="probability nodes (default 4096 or $FRACFREE_GRID)")
    return p


def _family(p, required=True):
    p.add_argument("--family", required=required, help="family name, optionally with parameters: haar-sum(k=3)")
    p.add_argument("--params", default="", help="family parameters as k=v,k2=v2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracfree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("catalog", parents=[common], help="tabulate a closed-form family")
    _family(p)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("transforms", parents=[common], help="evaluate the S-transform of a Brown measure")
    _family(p)
    p.add_argument("--eval-s", required=True, help="comma-separated points in (-1, 0)")
    p.set_defaults(func=cmd_transforms)

    p = sub.add_parser("oplus", parents=[common], help="fractional free power of a Brown measure")
    _family(p)
    p.add_argument("--k", type=float, required=True)
    p.set_defaults(func=cmd_oplus)

    p = sub.add_parser("commutator", parents=[common], help="Brown measure of i(xy - yx)")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--x-params", default="")
    p.add_argument("--y-params", default="")
    p.set_defaults(func=cmd_commutator)

    p = sub.add_parser("flow", parents=[common], help="differentiation flow of a root measure")
    _family(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--rescale", choices=RESCALE_MODES, default="none")
    p.add_argument("--alpha", type=float, default=None, help="tail index for --rescale stable")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("kz", parents=[common], help="coefficient profile <-> root measure")
    p.add_argument("action", choices=("to-profile", "to-measure"))
    _family(p, required=False)
    p.add_argument("--n", type=int, default=500, help="degree for to-profile")
    p.add_argument("--profile", help="coefficient CSV (k,log_magnitude) for to-measure")
    p.set_defaults(func=cmd_kz)

    p = sub.add_parser("polylab", parents=[common], help="Monte Carlo roots of derivatives")
    p.add_argument("--profile", choices=PROFILES, default="kac")
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampler", choices=SAMPLERS, default="gaussian")
    p.add_argument("--param", type=float, default=None, help="l for stable, w for elliptic")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--ks-tol", type=float, default=None, help="assert mean KS distances against this")
    p.add_argument("--allow-partial", action="store_true", help="keep trials whose root iteration stalls")
    p.add_argument("--timing", action="store_true", help="fill the seconds column (breaks byte-identity)")
    p.add_argument("--metrics", help="also write metric rows to this CSV")
    p.set_defaults(func=cmd_polylab)

    p = sub.add_parser("pde", parents=[common], help="finite-difference CDF evolution")
    p.add_argument("--initial", choices=PDE_INITIAL, default="taylor")
    p.add_argument("--t-end", type=float, default=0.5)
    p.add_argument("--t0", type=float, default=0.1, help="start time for kac data")
    p.add_argument("--nodes", type=int, default=2000)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--x-max", type=float, default=4.0, help="domain for stationary data")
    p.add_argument("--record-every", type=float, default=None)
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    p.add_argument("check", nargs="?", choices=("bridge",), help="single check instead of a suite")
    p.add_argument("--suite", choices=tuple(suites.SUITES), default="all")
    _family(p, required=False)
    p.add_argument("--t", default="0.25,0.5,0.75", help="times for the bridge check")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_verify)
    return parser


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _config_path(argv: List[str]) -> Optional[str]:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _apply_config(parser, argv: List[str]) -> None:
    """Install config-file values as defaults of the chosen subcommand."""
    path = _config_path(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if path is None or command is None:
        return
    try:
        cfg = read_config(path)
    except (OSError, ConfigError) as exc:
        parser.error(str(exc))
    sub = choices[command]
    actions = {a.dest: a for a in sub._actions}
    for key, val in cfg.items():
        action = actions.get(key)
        if action is None or key in ("config", "help") or not action.option_strings:
            parser.error(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            low = val.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                parser.error(f"config key {key!r} needs a boolean")
            cfg[key] = low in ("true", "1", "yes")
        action.required = False
    sub.set_defaults(**cfg)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        code = getattr(exc, "code", None)
        if code is None:
            raise
        sys.stderr.write(f"error[{code}]: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
