"""Command-line entry point.

Exit codes: 0 success, 1 parse or validation error, 2 solver failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import qpsolve
from .graphcore import KINDS, InstanceError, dumps, instance_from_dict, save_solution
from .inv_matroid import StructureError
from .matroid import MatroidError
from .oracle import OracleGuardError

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="invopt", description="Least-squares inverse optimization with a margin.")
    p.add_argument("--qp-tol", type=float, default=None, help="absolute and relative QP tolerance")
    p.add_argument("--qp-max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="seed for randomized generators")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    inv = sub.add_parser("inverse", help="solve an inverse problem")
    inv.add_argument("kind", choices=KINDS)
    inv.add_argument("--input", required=True)
    inv.add_argument("--delta", type=float)
    inv.add_argument("--sense", choices=("max", "min"))
    inv.add_argument("--output")

    ver = sub.add_parser("verify", help="check optimality with margin by enumeration")
    ver.add_argument("--input", required=True)
    ver.add_argument("--weights", required=True,
                     help="solution document or JSON list of weights")
    ver.add_argument("--tol", type=float, default=1e-6)
    ver.add_argument("--delta", type=float)

    orc = sub.add_parser("oracle", help="reference objective by enumeration")
    orc.add_argument("--input", required=True)
    orc.add_argument("--delta", type=float)
    orc.add_argument("--method", choices=("definition", "cycles"), default="definition")

    tr = sub.add_parser("train", help="online learning over a JSON-lines stream")
    tr.add_argument("--stream", required=True)
    tr.add_argument("--loss", choices=("hamming", "zeroone"), default="hamming")
    tr.add_argument("--log")
    tr.add_argument("--passes", type=int, default=1)

    sub.add_parser("selftest", help="run the closed-form golden cases")

    gen = sub.add_parser("generate", help="write a random instance for a kind")
    gen.add_argument("kind", choices=KINDS)
    gen.add_argument("--output")
    return p


def _settings(args) -> qpsolve.SolverSettings:
    s = qpsolve.SolverSettings()
    if args.qp_tol is not None:
        s.eps_abs = s.eps_rel = args.qp_tol
    if args.qp_max_iters is not None:
        s.max_iter = args.qp_max_iters
    return s


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: malformed JSON: {exc}") from None


def _load(path: str, kind: str | None = None, delta=None, sense=None):
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    if kind is not None:
        doc.setdefault("kind", kind)
        if doc["kind"] != kind:
            raise InstanceError(f"input holds a {doc['kind']!r} instance, not {kind!r}")
    if delta is not None:
        doc["delta"] = delta
    if sense is not None:
        doc["sense"] = sense
    return instance_from_dict(doc)


def _emit(data: bytes, path: str | None, out) -> None:
    if path:
        Path(path).write_bytes(data)
    else:
        out.write(data.decode())


def cmd_inverse(args, out) -> int:
    from .solvers import solve_instance

    inst = _load(args.input, args.kind, args.delta, args.sense)
    sol = solve_instance(inst, _settings(args))
    _emit(save_solution(inst, sol), args.output, out)
    return EXIT_OK if sol.ok else EXIT_SOLVER


def cmd_verify(args, out) -> int:
    from .oracle import verify_delta_optimal

    wdoc = _read_json(args.weights)
    delta = args.delta
    if isinstance(wdoc, dict):
        if "weights" not in wdoc:
            raise InstanceError("weights document has no 'weights' (solve did not succeed?)")
        if delta is None and "delta" in wdoc:
            delta = wdoc["delta"]
        weights = wdoc["weights"]
    else:
        weights = wdoc
    inst = _load(args.input, delta=delta)
    try:
        w = np.asarray(weights, dtype=float)
    except (TypeError, ValueError):
        raise InstanceError("weights must be numbers") from None
    ok, worst, margin = verify_delta_optimal(inst, w, args.tol)
    worst_doc = sorted(worst) if isinstance(worst, frozenset) else worst
    _emit(dumps({"ok": ok, "delta": inst.delta, "margin": margin,
                 "worst_competitor": _jsonable(worst_doc)}), None, out)
    return EXIT_OK if ok else EXIT_VERIFY


def _jsonable(obj):
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, frozenset):
        return sorted(obj)
    return obj


def cmd_oracle(args, out) -> int:
    from .oracle import oracle_objective

    inst = _load(args.input, delta=args.delta)
    obj = oracle_objective(inst, args.method)
    _emit(dumps({"kind": inst.kind, "delta": inst.delta, "method": args.method,
                 "objective": obj}), None, out)
    return EXIT_OK if np.isfinite(obj) else EXIT_SOLVER


def cmd_train(args, out) -> int:
    from .learn import read_stream, train_online, write_log

    try:
        text = Path(args.stream).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {args.stream}: {exc.strerror}") from None
    examples = read_stream(text)
    model, records = train_online(examples, args.loss, passes=args.passes,
                                  settings=_settings(args))
    if args.log:
        Path(args.log).write_bytes(write_log(records))
    _emit(dumps({"theta": list(model.theta), "rounds": len(records),
                 "updates": sum(1 for r in records if r.loss > 0),
                 "flagged": sum(1 for r in records if r.flagged),
                 "cumulative_hinge": sum(r.hinge for r in records)}), None, out)
    return EXIT_SOLVER if any(r.flagged for r in records) else EXIT_OK


def cmd_selftest(args, out) -> int:
    from .selftest import run_golden

    results = run_golden(_settings(args))
    for name, ok, detail in results:
        out.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VERIFY


def cmd_generate(args, out) -> int:
    from .generators import random_instance
    from .graphcore import save_instance

    inst = random_instance(args.kind, np.random.default_rng(args.seed))
    _emit(save_instance(inst), args.output, out)
    return EXIT_OK


COMMANDS = {"inverse": cmd_inverse, "verify": cmd_verify, "oracle": cmd_oracle,
            "train": cmd_train, "selftest": cmd_selftest, "generate": cmd_generate}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except (InstanceError, StructureError, MatroidError) as exc:
        err.write(f"invalid input: {exc}\n")
        return EXIT_INPUT
    except OracleGuardError as exc:
        err.write(f"instance too large for enumeration: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # anything else is a solver-side failure
        err.write(f"solver failure: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())
