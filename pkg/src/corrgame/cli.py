"""Command-line experiment driver.

Subcommands::

    corrgame train  --config PATH [--seed N] [--out DIR] [--steps N]
    corrgame eval   --checkpoint PATH --config PATH [--out DIR]
    corrgame solve  --c-file PATH --form {topk,analog} [--rho R] [--omega W]
                    [--gamma G] [--kappa K] [--out FILE]
    corrgame verify [--seed N] [--instances N] [--topk-cases N]
                    [--grad-draws N] [--duality-instances N]

Exit status: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import parse_config, with_overrides
from .core import CorrGameError
from .data_io import checkpoint_load
from .objective import conjugate_analog_kkt, conjugate_topk
from .training import run_eval, run_training
from .verify import run_all

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrgame",
        description="correlation-game unsupervised learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run online training from a config file")
    train.add_argument("--config", required=True, help="run configuration file")
    train.add_argument("--seed", type=int, default=None, help="override run.seed")
    train.add_argument("--out", default=None, help="override run.out")
    train.add_argument("--steps", type=int, default=None, help="override run.steps")

    ev = sub.add_parser("eval", help="frozen-weights metrics pass over a dataset")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--config", required=True,
                    help="config file providing the dataset section")
    ev.add_argument("--out", default=None, help="output directory (default: <config out>/eval)")
    ev.add_argument("--seed", type=int, default=None,
                    help="override run.seed (synthetic dataset derivation)")

    solve = sub.add_parser("solve", help="solve one conjugate row standalone")
    solve.add_argument("--c-file", required=True,
                       help="text file of correlation values (whitespace separated)")
    solve.add_argument("--form", choices=("topk", "analog"), required=True)
    solve.add_argument("--rho", type=float, default=1.0)
    solve.add_argument("--omega", type=float, default=0.1)
    solve.add_argument("--gamma", type=float, default=0.1)
    solve.add_argument("--kappa", type=float, default=1.0)
    solve.add_argument("--out", default=None, help="also write the solution to this file")

    verify = sub.add_parser("verify", help="run the oracle equivalence suites")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--instances", type=int, default=1000,
                        help="cases per randomized suite")
    verify.add_argument("--topk-cases", type=int, default=500)
    verify.add_argument("--grad-draws", type=int, default=100)
    verify.add_argument("--duality-instances", type=int, default=12)
    return parser


def cmd_train(args) -> int:
    config = with_overrides(parse_config(args.config), seed=args.seed,
                            out=args.out, steps=args.steps)
    result = run_training(config)
    final = result.checkpoint_paths[-1]
    print(f"trained {config.n_steps} steps "
          f"({result.log.nonconvergence_count} non-convergent solves)")
    if result.log.density_series:
        print(f"final window density: {result.log.density_series[-1][1]:.4f}")
    print(f"artifacts in {Path(config.out_dir).resolve()}, checkpoint {final.name}")
    return EXIT_OK


def cmd_eval(args) -> int:
    config = parse_config(args.config)
    if args.seed is not None:
        config = with_overrides(config, seed=args.seed)
    cp = checkpoint_load(args.checkpoint)
    dataset = config.dataset.load(seed=config.seed)
    out_dir = args.out if args.out else str(Path(config.out_dir) / "eval")
    log = run_eval(cp, dataset, density_window=config.density_window,
                   out_dir=out_dir)
    mean_density = (float(np.mean([d for _, d in log.density_series]))
                    if log.density_series else float("nan"))
    print(f"evaluated {dataset.n_steps} stimuli, mean density {mean_density:.4f}, "
          f"{log.nonconvergence_count} non-convergent solves")
    print(f"metrics in {Path(out_dir).resolve()}")
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        c = np.loadtxt(args.c_file, ndmin=1)
    except (OSError, ValueError) as exc:
        raise CorrGameError(f"cannot read c vector from {args.c_file}: {exc}") from exc
    if args.form == "topk":
        sol = conjugate_topk(c, rho=args.rho, omega=args.omega)
    else:
        sol = conjugate_analog_kkt(c, gamma=args.gamma, kappa=args.kappa,
                                   rho=args.rho)
    theta = "n/a" if sol.theta is None else repr(sol.theta)
    print(f"w = {np.array2string(sol.w, precision=10)}")
    print(f"k = {sol.k}")
    print(f"theta = {theta}")
    print(f"value = {sol.value!r}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(f"k = {sol.k}\ntheta = {theta}\nvalue = {sol.value!r}\n")
            fh.write("w = " + " ".join(repr(v) for v in sol.w) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed, n_instances=args.instances,
                      n_topk_cases=args.topk_cases,
                      n_grad_draws=args.grad_draws,
                      n_duality=args.duality_instances)
    for result in results:
        print(result.line())
    if all(r.passed for r in results):
        print("all suites passed")
        return EXIT_OK
    return EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else 0
    handlers = {
        "train": cmd_train,
        "eval": cmd_eval,
        "solve": cmd_solve,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (CorrGameError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
