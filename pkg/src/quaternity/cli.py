"""Command-line front end.

Exit status: 0 on success, 1 when a check verdict is false, a system is
infeasible, an oracle disagrees or a campaign records failures, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Callable

from . import canon, harness, sylvester
from .errors import Infeasible, QuaternityError
from .matrix import Matrix
from .scalar import QQ, RingDescriptor

EXIT_OK, EXIT_FALSE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc


def _matrices(obj: Any, names: str, where: str) -> list[Matrix]:
    if isinstance(obj, dict) and isinstance(obj.get("matrices"), dict):
        obj = obj["matrices"]
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object with matrices {', '.join(names)}")
    missing = [n for n in names if n not in obj]
    if missing:
        raise InputError(f"{where}: missing field(s) {', '.join(missing)}")
    return [Matrix.from_json(obj[n], where=n) for n in names]


def _ring(args) -> RingDescriptor:
    if args.ring is None:
        return QQ
    return RingDescriptor.from_label(args.ring, args.p)


class Output:
    def __init__(self, args) -> None:
        self.fmt = args.format
        self.path = args.out

    def emit(self, payload: dict, text: Callable[[dict], str]) -> None:
        body = json.dumps(payload, sort_keys=True, indent=1) if self.fmt == "json" else text(payload)
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(body + "\n")
        else:
            sys.stdout.write(body + "\n")


def _text_kv(d: dict) -> str:
    return "\n".join(f"{k} = {v}" for k, v in d.items())


def _text_matrices(d: dict) -> str:
    lines = []
    for name, m in d.items():
        if isinstance(m, dict) and "data" in m:
            lines.append(f"{name} ({m['rows']}x{m['cols']}):")
            lines.extend("  " + " ".join(str(x) for x in row) for row in m["data"])
    return "\n".join(lines)


# -- verbs ------------------------------------------------------------------------

def cmd_rank(args, out: Output) -> int:
    m = Matrix.from_json(_read_json(args.inp), where="matrix")
    out.emit({"rank": m.rank(), "rows": m.rows, "cols": m.cols, "ring": m.ring.label},
             lambda d: str(d["rank"]))
    return EXIT_OK


def cmd_invariants(args, out: Output) -> int:
    A, B, C, D = _matrices(_read_json(args.inp), "ABCD", args.inp)
    inv = canon.quaternity_invariants(A, B, C, D)
    rep = canon.verify_consistency(A, B, C, D, inv)
    payload = {"invariants": inv.to_json(), "consistency": rep.to_json()}

    def text(d):
        lines = [_text_kv(inv.values()), f"dims = {inv.dims}",
                 "identities: " + ("all hold" if rep.passed else "FAILED")]
        lines += [f"  {c.name}: {c.lhs} = {c.rhs} {'ok' if c.holds else 'FAIL'}" for c in rep.checks]
        return "\n".join(lines)

    out.emit(payload, text)
    return EXIT_OK if rep.passed else EXIT_FALSE


def cmd_dual_invariants(args, out: Output) -> int:
    E, F, G, H = _matrices(_read_json(args.inp), "EFGH", args.inp)
    inv = canon.dual_invariants(E, F, G, H)
    out.emit({"dual_invariants": inv.to_json()}, lambda d: _text_kv(inv.values()) + f"\ndims = {inv.dims}")
    return EXIT_OK


def cmd_canon_build(args, out: Output) -> int:
    obj = _read_json(args.inp)
    ring = _ring(args)
    if isinstance(obj, dict) and all(k in obj for k in "ABCD"):
        A, B, C, D = _matrices(obj, "ABCD", args.inp)
        inv, ring = canon.quaternity_invariants(A, B, C, D), A.ring
    elif isinstance(obj, dict) and all(k in obj for k in "EFGH"):
        E, F, G, H = _matrices(obj, "EFGH", args.inp)
        dual = canon.build_canonical_dual(canon.dual_invariants(E, F, G, H), E.ring)
        mats = {k: v.to_json() for k, v in dual.matrices().items()}
        out.emit({"canonical": mats, "row_partition_p1": list(dual.row_partition_p1)}, _text_matrices_of)
        return EXIT_OK
    elif isinstance(obj, dict) and "v1" in obj:
        try:
            inv_d = canon.DualInvariants.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.inp}: bad dual invariants ({exc})") from exc
        dual = canon.build_canonical_dual(inv_d, ring)
        mats = {k: v.to_json() for k, v in dual.matrices().items()}
        out.emit({"canonical": mats, "row_partition_p1": list(dual.row_partition_p1)}, _text_matrices_of)
        return EXIT_OK
    else:
        if isinstance(obj, dict) and isinstance(obj.get("invariants"), dict):
            obj = obj["invariants"]
        try:
            inv = canon.QuaternityInvariants.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.inp}: bad invariants, missing or invalid field {exc}") from exc
    cq = canon.build_canonical_quaternity(inv, ring)
    mats = {k: v.to_json() for k, v in cq.matrices().items()}
    out.emit({"canonical": mats, "column_partition_p": list(cq.column_partition_p)}, _text_matrices_of)
    return EXIT_OK


def _text_matrices_of(d: dict) -> str:
    return _text_matrices(d["canonical"])


def cmd_decompose(args, out: Output) -> int:
    obj = _read_json(args.inp)
    if isinstance(obj, dict) and all(k in obj for k in "EFGH"):
        E, F, G, H = _matrices(obj, "EFGH", args.inp)
        cert = canon.decompose_dual(E, F, G, H)
    else:
        A, B, C, D = _matrices(obj, "ABCD", args.inp)
        cert = canon.decompose_quaternity(A, B, C, D)
    payload = cert.to_json()
    payload["verified"] = True

    def text(d):
        body = {k: v for k, v in d.items() if isinstance(v, dict) and "data" in v}
        return _text_matrices(body) + "\n" + _text_matrices(d["targets"]) + "\nverified: yes"

    out.emit(payload, text)
    return EXIT_OK


def _instance(args) -> sylvester.SystemInstance:
    inst = sylvester.SystemInstance.from_json(_read_json(args.inp))
    if args.kind and inst.kind.value != args.kind:
        raise InputError(f"field 'kind': file holds {inst.kind.value}, --kind asked for {args.kind}")
    return inst


def _report_text(d: dict) -> str:
    lines = [f"kind: {d['kind']}", f"verdict: {'solvable' if d['verdict'] else 'not solvable'}"]
    for c in d["conditions"]:
        mark = "ok  " if c["holds"] else "FAIL"
        lines.append(f"  {mark} {c['label']}: r({c['lhs_matrix_recipe']}) = {c['lhs_rank']}, "
                     f"{c['rhs_rank_expression']} = {c['rhs_rank']}")
    return "\n".join(lines)


def cmd_check(args, out: Output) -> int:
    rep = sylvester.check(_instance(args))
    out.emit(rep.to_json(), _report_text)
    return EXIT_OK if rep.verdict else EXIT_FALSE


def cmd_solve(args, out: Output) -> int:
    inst = _instance(args)
    try:
        sol = sylvester.solve_linearized(inst)
    except Infeasible as exc:
        out.emit({"kind": inst.kind.value, "feasible": False, "reason": str(exc)},
                 lambda d: "infeasible")
        return EXIT_FALSE
    payload = {"kind": inst.kind.value, "feasible": True, **sol.to_json()}
    out.emit(payload, lambda d: _text_matrices(d["unknowns"]))
    return EXIT_OK


def cmd_cross_check(args, out: Output) -> int:
    rec = sylvester.cross_check(_instance(args))

    def text(d):
        return (f"checker: {'solvable' if d['checker_verdict'] else 'not solvable'}\n"
                f"oracle:  {'feasible' if d['oracle_feasible'] else 'infeasible'}\n"
                f"agree:   {'yes' if d['agree'] else 'NO'}")

    out.emit(rec.to_json(), text)
    return EXIT_OK if rec.agree else EXIT_FALSE


def cmd_campaign(args, out: Output) -> int:
    obj = _read_json(args.inp) if args.inp else {}
    if not isinstance(obj, dict):
        raise InputError(f"{args.inp}: campaign config must be a JSON object")
    obj = dict(obj)
    obj["seed"] = args.seed
    if args.ring:
        obj["rings"] = [RingDescriptor.from_label(args.ring, args.p).label]
    if args.kind:
        obj["checks"] = [args.kind]
    for flag, key in (("count", "instance_count"), ("max_dim", "max_dim"), ("out_dir", "out_dir"),
                      ("workers", "workers")):
        v = getattr(args, flag)
        if v is not None:
            obj[key] = v
    if args.checks:
        obj["checks"] = args.checks.split(",")
    try:
        cfg = harness.CampaignConfig.from_json(obj)
    except (TypeError, ValueError) as exc:
        raise InputError(f"campaign config: {exc}") from exc
    report = harness.run_campaign(cfg)

    def text(d):
        lines = [f"seed {cfg.seed}: {'all passed' if d['passed'] else str(d['failures']) + ' failures'}"]
        for check_name, per in d["tallies"].items():
            for ring_label, t in per.items():
                lines.append(f"  {check_name:28s} {ring_label:6s} pass {t['pass']:4d} fail {t['fail']:4d}")
        lines += [f"  counterexample: {p}" for p in d["counterexamples"]]
        return "\n".join(lines)

    out.emit(report.to_json(include_timing=args.timing), text)
    return EXIT_OK if report.passed else EXIT_FALSE


VERBS: dict[str, Callable] = {
    "rank": cmd_rank,
    "invariants": cmd_invariants,
    "dual-invariants": cmd_dual_invariants,
    "canon-build": cmd_canon_build,
    "decompose": cmd_decompose,
    "check": cmd_check,
    "solve": cmd_solve,
    "cross-check": cmd_cross_check,
    "campaign": cmd_campaign,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quaternity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")
    kinds = [k.value for k in sylvester.SystemKind]
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--in", dest="inp", required=verb != "campaign", help="input JSON file ('-' for stdin)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--ring", help="QQ, HQ or GF(p)")
        p.add_argument("--p", type=int, help="prime modulus, with --ring GF")
        if verb in ("check", "solve", "cross-check"):
            p.add_argument("--kind", choices=kinds)
        if verb == "campaign":
            p.add_argument("--seed", type=int, required=True)
            p.add_argument("--kind", choices=list(harness.ALL_CHECKS), help="run a single check")
            p.add_argument("--checks", help="comma-separated checks")
            p.add_argument("--count", type=int)
            p.add_argument("--max-dim", type=int)
            p.add_argument("--out-dir")
            p.add_argument("--workers", type=int)
            p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return VERBS[args.verb](args, Output(args))
    except (InputError, QuaternityError, ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"quaternity {args.verb}: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
