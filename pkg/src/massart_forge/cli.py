"""Command-line front end: planning, generation, verification, experiments.

Every command is a pure function of its flags and the seed, writes exactly
one JSON run manifest, and exits 0 on success, 1 on internal error or a
failed verification, 2 on invalid or infeasible input.  The environment
variable MASSART_FORGE_THREADS caps internal parallelism (experiment seeds
fan out onto a thread pool; results stay ordered by seed either way).
"""

from __future__ import annotations

import argparse
import datetime
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, serialize
from .errors import MassartForgeError
from .hardpair import build_hard_pair, density_curve
from .instance import make_instance, opt_error, random_unit_vector, sample_labeled
from .planner import Constants, desk_config, plan
from .sqlab import OracleConfig, distinguishing_experiment
from .verification import build_verification_report

RNG_NAME = "numpy default_rng (PCG64)"


def thread_cap() -> int:
    raw = os.environ.get("MASSART_FORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_manifest(path: Path, command: str, config: dict, seed, outputs, passed) -> None:
    payload = {
        "command": command,
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "rng": RNG_NAME,
        "threads": thread_cap(),
        "timestamp_utc": _utc_now(),
        "outputs": [str(p) for p in outputs],
        "pass": passed,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    serialize.dump(payload, path)


def _manifest_path(args, default_stem: str) -> Path:
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    out = getattr(args, "out", None) or getattr(args, "report", None)
    if out:
        return Path(str(out) + ".manifest.json")
    return Path(f"{default_stem}.manifest.json")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="massart-forge",
        description=(
            "Construct, verify, and experiment with moment-matched "
            "piecewise-Gaussian hard instances for Massart halfspace learning."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="Evaluate the asymptotic parameter schedule.")
    p.add_argument("--log-M", type=float, required=True, help="natural log of the target dimension scale")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--zeta", type=float, help="target optimal error directly")
    group.add_argument("--zeta-exp", type=float, help="use zeta = exp(-(log M)^zeta_exp)")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--C-tau", type=float, default=Constants.C_tau)
    p.add_argument("--C-m", type=float, default=Constants.C_m)
    p.add_argument("--C-d", type=float, default=Constants.C_d)
    p.add_argument("--C-zeta", type=float, default=Constants.C_zeta)
    p.add_argument("--out", type=Path, default=None, help="write the plan JSON here (default stdout)")
    p.add_argument("--manifest", type=Path, default=None)

    g = sub.add_parser("gen", help="Generate a labeled dataset with a hidden direction.")
    g.add_argument("--zeta", type=float, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--epsilon", type=float, required=True)
    g.add_argument("--eta", type=float, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", type=Path, required=True, help="CSV output path")
    g.add_argument("--redact", action="store_true", help="omit the hidden direction from the sidecar")
    g.add_argument("--manifest", type=Path, default=None)

    v = sub.add_parser("verify", help="Run the full verification battery.")
    v.add_argument("--zeta", type=float, default=0.05)
    v.add_argument("--d", type=int, default=10)
    v.add_argument("--epsilon", type=float, default=0.05)
    v.add_argument("--eta", type=float, default=0.3)
    v.add_argument("--m", type=int, default=8)
    v.add_argument("--k", type=int, default=12)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", type=Path, default=None, help="write the report JSON here")
    v.add_argument("--manifest", type=Path, default=None)

    e = sub.add_parser("experiment", help="Run the distinguishing experiment over seeds.")
    e.add_argument("--zeta", type=float, default=0.05)
    e.add_argument("--d", type=int, default=10)
    e.add_argument("--epsilon", type=float, default=0.05)
    e.add_argument("--eta", type=float, default=0.3)
    e.add_argument("--m", type=int, default=20)
    e.add_argument("--tau", type=float, default=0.01)
    e.add_argument("--seeds", type=int, default=10, help="number of seeds, base --seed upward")
    e.add_argument("--seed", type=int, default=1)
    e.add_argument("--learners", type=str, default="constant,chow")
    e.add_argument("--oracle-mode", choices=["honest", "adversarial"], default="honest")
    e.add_argument("--out", type=Path, default=None, help="write the report JSON here (default stdout)")
    e.add_argument("--manifest", type=Path, default=None)

    d = sub.add_parser("emit-density", help="Emit the density curves on a uniform grid.")
    d.add_argument("--zeta", type=float, default=0.05)
    d.add_argument("--d", type=int, default=10)
    d.add_argument("--epsilon", type=float, default=0.05)
    d.add_argument("--grid", type=int, default=10000)
    d.add_argument("--lo", type=float, default=None)
    d.add_argument("--hi", type=float, default=None)
    d.add_argument("--out", type=Path, required=True)
    d.add_argument("--manifest", type=Path, default=None)

    r = sub.add_parser("replay", help="Re-run the command recorded in a manifest.")
    r.add_argument("manifest_file", type=Path)

    return parser


def _cmd_plan(args) -> int:
    if args.zeta_exp is not None:
        zeta = math.exp(-(args.log_M**args.zeta_exp))
    else:
        zeta = args.zeta
    constants = Constants(
        C_tau=args.C_tau, C_m=args.C_m, C_d=args.C_d, C_zeta=args.C_zeta
    )
    result = plan(args.log_M, args.eta, zeta, constants)
    text = serialize.dumps(result.to_dict())
    outputs = []
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        outputs.append(args.out)
    else:
        sys.stdout.write(text)
    _write_manifest(
        _manifest_path(args, "plan"),
        "plan",
        {
            "log_M": args.log_M,
            "zeta": zeta,
            "eta": args.eta,
            "constants": {
                "C_tau": constants.C_tau,
                "C_m": constants.C_m,
                "C_d": constants.C_d,
                "C_zeta": constants.C_zeta,
            },
        },
        None,
        outputs,
        True,
    )
    return 0


def _cmd_gen(args) -> int:
    config = desk_config(args.zeta, args.d, args.epsilon)
    pair = build_hard_pair(config)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    v = random_unit_vector(args.m, rng)
    instance = make_instance(pair, v, args.eta)
    x, y = sample_labeled(instance, rng, args.n)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(",".join([f"x_{i+1}" for i in range(args.m)] + ["y"]) + "\n")
        for row, label in zip(x, y):
            handle.write(
                ",".join(format(val, ".17g") for val in row) + f",{label:d}\n"
            )

    sidecar = {
        "m": args.m,
        "eta": args.eta,
        "zeta": args.zeta,
        "d": args.d,
        "delta": config.delta,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "opt": opt_error(instance),
    }
    if not args.redact:
        sidecar["v"] = [float(val) for val in v]
    sidecar_path = Path(str(args.out) + ".json")
    serialize.dump(sidecar, sidecar_path)

    _write_manifest(
        _manifest_path(args, "gen"),
        "gen",
        {
            "zeta": args.zeta,
            "d": args.d,
            "epsilon": args.epsilon,
            "eta": args.eta,
            "m": args.m,
            "n": args.n,
            "redact": bool(args.redact),
            "out": str(args.out),
        },
        args.seed,
        [args.out, sidecar_path],
        True,
    )
    return 0


def _cmd_verify(args) -> int:
    report = build_verification_report(
        zeta=args.zeta, d=args.d, epsilon=args.epsilon, eta=args.eta,
        m=args.m, k=args.k, seed=args.seed,
    )
    text = serialize.dumps(report)
    outputs = []
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(text, encoding="utf-8")
        outputs.append(args.report)
    else:
        sys.stdout.write(text)
    for name in ("construction", "moments", "fourier", "chi_square", "massart", "tsybakov", "lift"):
        status = "pass" if report[name]["pass"] else "FAIL"
        print(f"verify {name}: {status}", file=sys.stderr)
    _write_manifest(
        _manifest_path(args, "verify"),
        "verify",
        {
            "zeta": args.zeta,
            "d": args.d,
            "epsilon": args.epsilon,
            "eta": args.eta,
            "m": args.m,
            "k": args.k,
        },
        args.seed,
        outputs,
        report["pass"],
    )
    return 0 if report["pass"] else 1


def _cmd_experiment(args) -> int:
    config = desk_config(args.zeta, args.d, args.epsilon)
    oracle_config = OracleConfig(tau=args.tau, mode=args.oracle_mode)
    learners = tuple(s.strip() for s in args.learners.split(",") if s.strip())
    seeds = list(range(args.seed, args.seed + args.seeds))

    def run_one(seed: int):
        return distinguishing_experiment(
            config, args.eta, args.m, oracle_config, seed, learners=learners
        )

    workers = min(thread_cap(), len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_one, seeds))
    else:
        reports = [run_one(s) for s in seeds]

    first = reports[0]
    aggregate = {
        "tau": args.tau,
        "seeds": seeds,
        "queries_used": sum(r.queries_used for r in reports),
        "gaps": {
            "planted": [r.planted_gap for r in reports],
            "moment_max": [r.max_moment_gap for r in reports],
        },
        "learner_errors": {
            name: [r.learner_errors[name] for r in reports] for name in learners
        },
        "nu": first.nu,
        "rho": first.rho,
        "alpha_chi": first.alpha_chi,
        "N_bound": first.N_bound,
        "c": first.c,
        "n_bound_caveat": first.N_BOUND_CAVEAT,
        "per_seed": [r.to_dict() for r in reports],
    }
    text = serialize.dumps(aggregate)
    outputs = []
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        outputs.append(args.out)
    else:
        sys.stdout.write(text)
    _write_manifest(
        _manifest_path(args, "experiment"),
        "experiment",
        {
            "zeta": args.zeta,
            "d": args.d,
            "epsilon": args.epsilon,
            "eta": args.eta,
            "m": args.m,
            "tau": args.tau,
            "seeds": args.seeds,
            "learners": list(learners),
            "oracle_mode": args.oracle_mode,
        },
        args.seed,
        outputs,
        True,
    )
    return 0


def _cmd_emit_density(args) -> int:
    config = desk_config(args.zeta, args.d, args.epsilon)
    pair = build_hard_pair(config)
    lo = args.lo if args.lo is not None else -args.d * config.delta - 1.0
    hi = args.hi if args.hi is not None else args.d * config.delta + 1.0
    x, da, db, j1, j2 = density_curve(pair, args.grid, lo, hi)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write("x,density_A,density_B,in_J1,in_J2\n")
        for row in zip(x, da, db, j1, j2):
            handle.write(
                f"{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},{row[3]:d},{row[4]:d}\n"
            )
    _write_manifest(
        _manifest_path(args, "emit-density"),
        "emit-density",
        {
            "zeta": args.zeta,
            "d": args.d,
            "epsilon": args.epsilon,
            "grid": args.grid,
            "lo": lo,
            "hi": hi,
            "out": str(args.out),
        },
        None,
        [args.out],
        True,
    )
    return 0


def _cmd_replay(args) -> int:
    import json

    manifest = json.loads(args.manifest_file.read_text(encoding="utf-8"))
    command = manifest["command"]
    config = manifest["config"]
    argv = [command]
    for key, value in config.items():
        if key == "constants":
            for name, val in value.items():
                argv += [f"--{name.replace('_', '-')}", repr(float(val))]
            continue
        if key == "learners":
            argv += ["--learners", ",".join(value)]
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv += [flag, str(value)]
    if manifest.get("seed") is not None and command in ("gen", "verify", "experiment"):
        argv += ["--seed", str(manifest["seed"])]
    # recover the output path for commands that do not echo it in config
    if manifest["outputs"] and "--out" not in argv and "--report" not in argv:
        flag = "--report" if command == "verify" else "--out"
        argv += [flag, manifest["outputs"][0]]
    return main(argv)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plan":
            return _cmd_plan(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "emit-density":
            return _cmd_emit_density(args)
        if args.command == "replay":
            return _cmd_replay(args)
        return 2
    except MassartForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal fault, not an input problem
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
