"""Command-line front-end: certify, analyze, spectral, simulate, sweep,
lyapunov.

Exit codes: 0 success/pass, 1 usage error, 2 analysis fail (certificate or
hypothesis failure, undetermined verdict), 3 solver failure, 4 integration
failure.  The environment variable COOP2_SEED, when set, overrides --seed.
All JSON output is emitted with sorted keys so equal configurations produce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import coop, lyapunov, models, orbit, spectral
from .modeldsl import load_model_config
from .ode import LeftDomain, StepUnderflow, integrate, write_trajectory_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2
EXIT_SOLVER = 3
EXIT_INTEGRATION = 4

PRESET_INITIAL = {
    "example2": np.array([0.1, 0.1, 0.1, 0.1]),
    "example3": np.zeros(4),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _emit(obj, out_path=None):
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_floats(s):
    try:
        return [float(v) for v in s.split(",")]
    except ValueError:
        raise UsageError(f"expected a comma-separated float list, got {s!r}")


def _parse_params(s):
    out = {}
    for part in s.split(","):
        if "=" not in part:
            raise UsageError(f"expected name=value, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise UsageError(f"bad value for parameter {k!r}: {v!r}")
    return out


def build_model(args) -> models.Model:
    """Resolve --preset / --model / --config into a Model."""
    preset = getattr(args, "preset", None)
    if preset == "example2":
        return models.goodwin(4, [0.5] * 4, 10)
    if preset == "example3":
        return models.rna_oscillator()
    if preset is not None:
        raise UsageError(f"unknown preset {preset!r}")
    if getattr(args, "config", None):
        return load_model_config(args.config)
    name = getattr(args, "model", None)
    if name == "goodwin":
        if args.n is None or args.alpha is None or args.m is None:
            raise UsageError("goodwin requires --n, --alpha and --m")
        return models.goodwin(args.n, _parse_floats(args.alpha), args.m)
    if name == "rna":
        overrides = _parse_params(args.params) if getattr(args, "params", None) else {}
        return models.rna_oscillator(**overrides)
    raise UsageError("specify --preset, --config, or --model goodwin|rna")


def _equilibrium(model, seed):
    if model.name == "goodwin":
        return models.goodwin_equilibrium(model)
    return models.find_equilibrium(model, seed=seed)


def _add_model_flags(p):
    p.add_argument("--model", choices=["goodwin", "rna"])
    p.add_argument("--preset", choices=["example2", "example3"])
    p.add_argument("--config", help="JSON model description (DSL field)")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", help="comma-separated decay rates")
    p.add_argument("--m", type=int, help="Hill exponent")
    p.add_argument("--params", help="rna overrides, name=value[,name=value...]")


def _add_common_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write JSON here instead of stdout")


def _seed(args):
    env = os.environ.get("COOP2_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"COOP2_SEED must be an integer, got {env!r}")
    return args.seed


def cmd_certify(args) -> int:
    model = build_model(args)
    cert = coop.certify(model, k=args.k, strong=args.strong,
                        n_samples=args.samples, seed=_seed(args))
    _emit(cert.to_dict(), args.out)
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_analyze(args) -> int:
    model = build_model(args)
    try:
        chk = orbit.theorem2_check(model, certify_samples=args.samples,
                                   seed=_seed(args))
    except (models.NoConvergence, models.NotInterior, spectral.NoConvergence) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    eigs = [complex(re, im) for re, im in chk["equilibrium"]["eigenvalues"]]
    char_poly = [float(c) for c in np.poly(eigs).real]
    report = {
        "model": model.name,
        "equilibrium": chk["equilibrium"],
        "char_poly": char_poly,
        "hypotheses": chk["hypotheses"],
        "all_pass": chk["all_pass"],
        "prediction": chk["prediction"],
        "certificate": chk["certificate"],
    }
    _emit(report, args.out)
    return EXIT_OK if chk["all_pass"] else EXIT_FAIL


def _split_for(args):
    model = build_model(args)
    eq = _equilibrium(model, _seed(args))
    return model, eq, spectral.spectral_split(model.jacobian(eq.e))


def cmd_spectral(args) -> int:
    try:
        model, eq, split = _split_for(args)
    except (models.NoConvergence, models.NotInterior, spectral.NoConvergence,
            spectral.GapTooSmall, spectral.NotUnstable) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _emit({
        "model": model.name,
        "eigenvalues": [[l.real, l.imag] for l in split.spectrum.eigenvalues],
        "W1": split.W1,
        "W2": split.W2,
        "gap": split.gap,
        "delta": split.delta,
        "block_case": split.block_case.value,
        "dominant_block": split.dominant_block,
        "Psi": split.Psi,
        "diagnostics": split.diagnostics,
    }, args.out)
    return EXIT_OK


def cmd_lyapunov(args) -> int:
    try:
        model, eq, split = _split_for(args)
    except (models.NoConvergence, models.NotInterior, spectral.NoConvergence,
            spectral.GapTooSmall, spectral.NotUnstable) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    try:
        cert = lyapunov.build_certificate(
            model, eq, split,
            lyapunov.SamplingSettings(seed=_seed(args)))
    except (lyapunov.SeparationFailure, lyapunov.NotPositiveDefinite) as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = cert.to_dict()
    out["model"] = model.name
    _emit(out, args.out)
    return EXIT_OK if cert.verification["all_positive"] else EXIT_FAIL


def cmd_simulate(args) -> int:
    model = build_model(args)
    if args.a is not None:
        a = np.array(_parse_floats(args.a))
    elif args.preset in PRESET_INITIAL:
        a = PRESET_INITIAL[args.preset]
    else:
        raise UsageError("simulate needs --a or --preset example2|example3")
    if a.size != model.n:
        raise UsageError(f"initial condition has {a.size} entries, model "
                         f"dimension is {model.n}")
    try:
        eq = _equilibrium(model, _seed(args))
    except (models.NoConvergence, models.NotInterior) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    settings = orbit.OrbitSettings(horizon=args.horizon, rtol=args.rtol,
                                   atol=args.atol)
    try:
        report = orbit.classify(model, eq, a, settings)
        if args.csv:
            traj = integrate(model, a, settings.horizon, rtol=settings.rtol,
                             atol=settings.atol, equilibrium=eq)
            write_trajectory_csv(traj, args.csv)
    except (StepUnderflow, LeftDomain) as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    out = report.to_dict()
    out["settings"] = {
        "horizon": settings.horizon, "rtol": settings.rtol,
        "atol": settings.atol, "warmup_fraction": settings.warmup_fraction,
        "seed": _seed(args),
    }
    _emit(out, args.out)
    return EXIT_OK if report.verdict != "Undetermined" else EXIT_FAIL


def _parse_sweep(spec):
    if "=" not in spec:
        raise UsageError(f"sweep spec must be name=values, got {spec!r}")
    name, vals = spec.split("=", 1)
    if ":" in vals:
        parts = vals.split(":")
        if len(parts) != 3:
            raise UsageError(f"range spec must be start:stop:count, got {vals!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        values = np.linspace(start, stop, count).tolist()
    else:
        values = [float(v) for v in vals.split(",")]
    return name.strip(), values


def _sweep_model(args, overrides):
    base = dict(overrides)
    if args.model == "goodwin" or args.preset == "example2":
        n = args.n if args.n is not None else 4
        alpha = _parse_floats(args.alpha) if args.alpha else [0.5] * n
        m = args.m if args.m is not None else 10
        if "m" in base:
            m = int(round(base.pop("m")))
        if "alpha" in base:
            alpha = [base.pop("alpha")] * n
        if base:
            raise UsageError(f"unknown goodwin sweep parameters {sorted(base)}")
        return models.goodwin(n, alpha, m)
    params = _parse_params(args.params) if args.params else {}
    params.update(base)
    return models.rna_oscillator(**params)


def _sweep_point(args, names, values, seed):
    row = {n: v for n, v in zip(names, values)}
    try:
        model = _sweep_model(args, row)
        eq = _equilibrium(model, seed)
        row["unstable_count"] = eq.unstable_count
        # one representative start in the low-variation basin: a positive
        # offset from e has no sign variation
        a = eq.e + 0.05 * (model.box_upper - eq.e)
        settings = orbit.OrbitSettings(horizon=args.horizon, rtol=args.rtol,
                                       atol=args.atol)
        rep = orbit.classify(model, eq, a, settings)
        row["verdict"] = rep.verdict
        row["period"] = rep.period
        row["error"] = ""
    except Exception as exc:
        row.setdefault("unstable_count", "")
        row["verdict"] = ""
        row["period"] = None
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args) -> int:
    specs = [_parse_sweep(s) for s in args.sweep]
    if not 1 <= len(specs) <= 2:
        raise UsageError("sweep takes one or two --sweep specs")
    names = [s[0] for s in specs]
    grids = [s[1] for s in specs]
    points = [(v,) for v in grids[0]] if len(grids) == 1 else [
        (u, v) for u in grids[0] for v in grids[1]]
    seed = _seed(args)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(
            lambda vals: _sweep_point(args, names, vals, seed), points))

    header = names + ["unstable_count", "verdict", "period", "error"]
    dest = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv_mod.writer(dest)
        w.writerow(header)
        for row in rows:
            rec = []
            for h in header:
                v = row[h]
                rec.append(f"{v:.12e}" if isinstance(v, float) else
                           ("" if v is None else v))
            w.writerow(rec)
    finally:
        if args.out:
            dest.close()
    return EXIT_OK


def make_parser() -> _Parser:
    p = _Parser(prog="coop2",
                description="Certify 2-cooperativity and classify convergence "
                            "to periodic orbits")
    sub = p.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("certify", help="sampled sign-pattern certificate")
    _add_model_flags(c)
    _add_common_flags(c)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--strong", action=argparse.BooleanOptionalAction,
                   default=True)
    c.add_argument("--samples", type=int, default=4096)
    c.set_defaults(func=cmd_certify)

    a = sub.add_parser("analyze", help="equilibrium, spectrum, hypothesis table")
    _add_model_flags(a)
    _add_common_flags(a)
    a.add_argument("--samples", type=int, default=4096)
    a.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("spectral", help="dominant-plane spectral split at e")
    _add_model_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=cmd_spectral)

    ly = sub.add_parser("lyapunov", help="sampled instability certificate")
    _add_model_flags(ly)
    _add_common_flags(ly)
    ly.set_defaults(func=cmd_lyapunov)

    s = sub.add_parser("simulate", help="integrate and classify one trajectory")
    _add_model_flags(s)
    _add_common_flags(s)
    s.add_argument("--a", help="comma-separated initial condition")
    s.add_argument("--horizon", type=float, default=400.0)
    s.add_argument("--rtol", type=float, default=1e-9)
    s.add_argument("--atol", type=float, default=1e-12)
    s.add_argument("--csv", help="write the trajectory CSV here")
    s.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="grid sweep over one or two parameters")
    _add_model_flags(sw)
    _add_common_flags(sw)
    sw.add_argument("--sweep", action="append", required=True,
                    metavar="NAME=V1,V2,... | NAME=START:STOP:COUNT")
    sw.add_argument("--horizon", type=float, default=400.0)
    sw.add_argument("--rtol", type=float, default=1e-9)
    sw.add_argument("--atol", type=float, default=1e-12)
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"coop2: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (models.BadParams, ValueError) as exc:
        print(f"coop2: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
