"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 solver non-convergence,
3 failed verification check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import tables
from .experiments import EXPERIMENTS, verify_tables, write_result
from .generators import INSTANCE_STREAM, START_STREAM, cd_construct, planted_sym_nonneg, rng_for, shifted_m
from .model import TaveProblem, build_shifted, certify_strong_m_shift
from .serialization import InstanceFile, RunReport, dumps, load_instance, load_tensor, read_json, trace_rows, write_csv
from .solver import SolverConfig, solve
from .tensor import sign_diag_product

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGED = 2
EXIT_VERIFY = 3

EPSILON_FLOOR = 1e-12
SEC3_START = (1.8, -1.8)

log = logging.getLogger("tave")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(None), help="master RNG seed")
    p.add_argument("--config", default=d(None), help="solver config JSON (SolverConfig field names)")
    p.add_argument("--out", default=d(None), help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"))
    p.add_argument("--jacobian", choices=("true", "paper"), default=d("true"),
                   help="'paper' uses the literal tensor-times-x^{m-2} matrix")
    p.add_argument("--inexact", action="store_true", default=d(False), help="conjugate-gradient LM steps")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tave", description="Tensor absolute value equation solver.")
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance")
    _add_global_flags(p, suppress=True)
    p.add_argument("instance", nargs="?", help="instance JSON file")
    p.add_argument("--tensor", help="tensor JSON file (instead of an instance file)")
    p.add_argument("--b", help="right-hand side: comma-separated list or JSON file")
    p.add_argument("--paper-example", choices=("sec3", "eg21"), help="built-in example instance")
    p.add_argument("--x0", help="known | zeros | random | comma list | JSON file")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iter", type=int)

    p = sub.add_parser("gen", help="generate a random instance")
    _add_global_flags(p, suppress=True)
    p.add_argument("kind", choices=("sym-nonneg", "shifted-m", "cd-construct"))
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--margin", type=float, default=0.01)
    p.add_argument("--output", help="write the instance here instead of stdout")

    p = sub.add_parser("exp", help="run a numerical experiment")
    _add_global_flags(p, suppress=True)
    p.add_argument("which", type=int, choices=sorted(EXPERIMENTS))

    p = sub.add_parser("verify-paper", help="check the built-in tabulated instances")
    _add_global_flags(p, suppress=True)

    p = sub.add_parser("check-structure", help="M-tensor certificate of a tensor")
    _add_global_flags(p, suppress=True)
    p.add_argument("tensor", nargs="?", help="tensor or instance JSON file")
    p.add_argument("--builtin", choices=("table6", "table5-shifted", "sec3", "eg21"))
    return parser


# -- helpers ----------------------------------------------------------------


def _config(args) -> SolverConfig:
    data = {}
    if args.config:
        raw = read_json(args.config)
        if not isinstance(raw, dict):
            raise InputError("config JSON must be an object")
        data.update(raw)
    if args.inexact:
        data["inexact"] = True
    if args.jacobian == "paper":
        data["jacobian"] = "literal"
    if getattr(args, "epsilon", None) is not None:
        data["epsilon"] = args.epsilon
    if getattr(args, "max_iter", None) is not None:
        data["max_iter"] = args.max_iter
    cfg = SolverConfig.from_dict(data)
    if cfg.epsilon < EPSILON_FLOOR:
        raise InputError(f"epsilon must be at least {EPSILON_FLOOR:g}")
    return cfg


def _vector(text: str, what: str) -> np.ndarray:
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        data = read_json(path)
        if isinstance(data, dict):
            data = data.get("b", data.get("x", data))
        return np.asarray(data, dtype=float)
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise InputError(f"cannot parse {what} {text!r}") from exc


def _load_problem(args) -> tuple[InstanceFile, str]:
    if args.paper_example == "sec3":
        A = sign_diag_product(tables.cd_example_C(), tables.CD_EXAMPLE_SIGNS)
        return InstanceFile(TaveProblem(A, tables.CD_EXAMPLE_B), tables.CD_EXAMPLE_X), "builtin:sec3"
    if args.paper_example == "eg21":
        return InstanceFile(TaveProblem(tables.no_solution_A(), tables.NO_SOLUTION_B)), "builtin:eg21"
    if args.instance:
        inst = load_instance(args.instance)
        if args.b:
            inst = InstanceFile(TaveProblem(inst.problem.A, _vector(args.b, "b")))
        return inst, str(args.instance)
    if args.tensor and args.b:
        return InstanceFile(TaveProblem(load_tensor(args.tensor), _vector(args.b, "b"))), str(args.tensor)
    raise InputError("give an instance file, --tensor with --b, or --paper-example")


def _start(args, inst: InstanceFile) -> tuple[np.ndarray, dict]:
    n = inst.problem.n
    spec = args.x0
    if spec is None:
        spec = ",".join(map(str, SEC3_START)) if args.paper_example == "sec3" else "zeros"
    if spec == "known":
        if inst.known_solution is None:
            raise InputError("--x0 known needs an instance with known_solution")
        return inst.known_solution.copy(), {"x0": "known"}
    if spec == "zeros":
        return np.zeros(n), {"x0": "zeros"}
    if spec == "random":
        if args.seed is None:
            raise InputError("--x0 random needs --seed")
        return rng_for(args.seed, START_STREAM).standard_normal(n), {"x0": "random", "seed": args.seed, "stream": START_STREAM}
    x0 = _vector(spec, "x0")
    if x0.shape != (n,):
        raise InputError(f"x0 has length {x0.size}, expected {n}")
    return x0, {"x0": "explicit"}


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


# -- commands ---------------------------------------------------------------


def cmd_solve(args) -> int:
    cfg = _config(args)
    inst, source = _load_problem(args)
    x0, seed_info = _start(args, inst)
    rep = solve(inst.problem, x0, cfg)
    run = RunReport(cfg, rep, seed_info, source)
    if args.format == "csv":
        csv_text = write_csv(trace_rows(rep))
        if args.out is None:
            sys.stdout.write(csv_text)
        else:
            _emit(csv_text, args.out, "trace.csv")
            _emit(dumps(run.to_dict()), args.out, "report.json")
    else:
        _emit(dumps(run.to_dict()), args.out, "report.json")
    log.info("%s after %d iterations, ||H|| = %.3e", rep.status, rep.iterations, rep.final_norm_H)
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


def cmd_gen(args) -> int:
    if args.seed is None:
        raise InputError("gen needs --seed")
    if args.m < 2 or args.n < 1:
        raise InputError("need m >= 2 and n >= 1")
    rng = rng_for(args.seed, INSTANCE_STREAM)
    meta = {"kind": args.kind, "m": args.m, "n": args.n, "seed": args.seed, "stream": INSTANCE_STREAM}
    if args.kind == "sym-nonneg":
        P, x_star = planted_sym_nonneg(args.m, args.n, rng)
        inst = InstanceFile(P, x_star, meta=meta)
    elif args.kind == "shifted-m":
        A, c = shifted_m(args.m, args.n, rng, args.margin)
        b = rng.uniform(0.0, 1.0, size=args.n)
        inst = InstanceFile(TaveProblem(A, b), meta={**meta, "margin": args.margin, "shift_c": c})
    else:
        if args.m % 2:
            raise InputError("cd-construct needs an even order m")
        P, x_star, _, D, _ = cd_construct(args.m, args.n, rng)
        inst = InstanceFile(P, x_star, meta={**meta, "signs": list(D.signs)})
    text = inst.dumps()
    if args.output:
        Path(args.output).write_text(text)
    else:
        _emit(text, args.out, "instance.json")
    return EXIT_OK


def cmd_exp(args) -> int:
    if args.seed is None:
        raise InputError("exp needs --seed")
    result = EXPERIMENTS[args.which](args.seed, cfg=_config(args))
    return _report(result, args.out or f"exp{args.which}_out")


def cmd_verify(args) -> int:
    result = verify_tables(0 if args.seed is None else args.seed, _config(args))
    return _report(result, args.out)


def _report(result, out_dir) -> int:
    for check in result.checks:
        print(check.line())
    if out_dir is not None:
        for path in write_result(result, out_dir):
            log.info("wrote %s", path)
    return EXIT_OK if result.passed else EXIT_VERIFY


def cmd_check_structure(args) -> int:
    if args.builtin == "table6":
        A = tables.table6_A()
    elif args.builtin == "table5-shifted":
        A, _ = build_shifted(tables.table5_B())
    elif args.builtin == "sec3":
        A = sign_diag_product(tables.cd_example_C(), tables.CD_EXAMPLE_SIGNS)
    elif args.builtin == "eg21":
        A = tables.no_solution_A()
    elif args.tensor:
        A = load_tensor(args.tensor)
    else:
        raise InputError("give a tensor file or --builtin")
    _emit(dumps(certify_strong_m_shift(A).to_dict()), args.out, "structure.json")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "gen": cmd_gen,
    "exp": cmd_exp,
    "verify-paper": cmd_verify,
    "check-structure": cmd_check_structure,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"tave: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
