"""Command-line surface: build, verify, decompose, twist, lift.

Exit code 0 means every surfaced residual passed the tolerance; 1 means some
check failed; parameter errors exit 2 (argparse convention).  Reports are
deterministic: identical flags and seed give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, fields

from . import approx, cgtwist, liftalg, repcore
from .qnum import format_rational, parse_rational


@dataclass
class RunConfig:
    q: str = "1/2"
    tol: float = 1e-8
    max_spin: int = 4
    max_triple: int = 3
    seed: int = 0
    output_format: str = "json"


def _load_config(args) -> RunConfig:
    """Flags > config file > defaults."""
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        for f in fields(RunConfig):
            if f.name in data:
                setattr(cfg, f.name, data[f.name])
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
    if parse_rational(str(cfg.q)) <= 0:
        raise SystemExit("q must be positive")
    if cfg.tol <= 0:
        raise SystemExit("tol must be positive")
    if cfg.max_spin < 0 or cfg.max_triple < 0:
        raise SystemExit("cutoffs must be >= 0")
    return cfg


def _emit(report: dict, cfg: RunConfig, out_path=None) -> None:
    if cfg.output_format == "csv":
        text = _to_csv(report)
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in sorted(_flatten(report).items()):
        writer.writerow([key, value])
    return buf.getvalue()


def _flatten(obj, prefix="") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            out.update(_flatten(v, f"{prefix}{i}."))
    else:
        out[prefix.rstrip(".")] = obj if not isinstance(obj, list) else json.dumps(obj)
    return out


def _relation_summary(report) -> None:
    fails = report.failing
    print(f"relations: {len(report.entries)} checked, {len(fails)} failing "
          f"({'exact' if report.exact else 'approx'} mode)")
    for e in fails:
        where = f" i={e.i}" if e.i is not None else ""
        where += f" j={e.j}" if e.j is not None else ""
        print(f"  FAIL {e.relation}{where} residual={float(abs(e.residual)):.3e}")


def cmd_irrep(args) -> int:
    cfg = _load_config(args)
    q = parse_rational(str(cfg.q))
    rep = repcore.irrep_su2(args.n, q)
    report = repcore.verify_relations(rep, tol=cfg.tol)
    _relation_summary(report)
    if args.out:
        rep.save(args.out)
        print(f"wrote {args.out}")
    return 0 if report.passed else 1


def cmd_vector_rep(args) -> int:
    cfg = _load_config(args)
    q = parse_rational(str(cfg.q))
    rep = repcore.vector_rep_sln(args.n, q)
    report = repcore.verify_relations(rep, tol=cfg.tol)
    _relation_summary(report)
    if args.out:
        rep.save(args.out)
        print(f"wrote {args.out}")
    return 0 if report.passed else 1


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    rep = repcore.Rep.load(args.rep)
    report = repcore.verify_relations(rep, tol=cfg.tol)
    _relation_summary(report)
    _emit(report.to_json(), cfg, args.out)
    return 0 if report.passed else 1


def cmd_tensor(args) -> int:
    cfg = _load_config(args)
    r1 = repcore.Rep.load(args.rep1)
    r2 = repcore.Rep.load(args.rep2)
    rep = repcore.tensor(r1, r2)
    report = repcore.verify_relations(rep, tol=cfg.tol)
    _relation_summary(report)
    if args.out:
        rep.save(args.out)
        print(f"wrote {args.out}")
    return 0 if report.passed else 1


def cmd_cg(args) -> int:
    cfg = _load_config(args)
    q = parse_rational(str(cfg.q))
    decomp = cgtwist.cg_decompose(args.a, args.b, q)
    report = {
        "a": args.a,
        "b": args.b,
        "q": format_rational(q),
        "labels": decomp.labels,
        "completeness_residual": format_rational(decomp.completeness_residual),
    }
    _emit(report, cfg, args.out)
    return 0 if decomp.completeness_residual == 0 else 1


def _twist_row(a, b, q, tol):
    block = cgtwist.solve_twist_block(a, b, q)
    ok = block.unitarity_residual <= tol and block.intertwine_residual <= tol
    return {
        "a": a,
        "b": b,
        "unitarity_residual": f"{block.unitarity_residual:.3e}",
        "intertwine_residual": f"{block.intertwine_residual:.3e}",
        "pass": ok,
    }


def _associator_row(a, b, c, q, tol):
    blk = cgtwist.associator_block(a, b, c, q)
    ok = blk.commutation_residual <= tol and blk.unitarity_residual <= tol
    return {
        "a": a,
        "b": b,
        "c": c,
        "commutation_residual": f"{blk.commutation_residual:.3e}",
        "unitarity_residual": f"{blk.unitarity_residual:.3e}",
        "pass": ok,
    }


def cmd_twist(args) -> int:
    cfg = _load_config(args)
    q = parse_rational(str(cfg.q))
    if args.save_block is not None:
        if args.a is None or args.b is None:
            raise SystemExit("--save-block needs --a and --b")
        block = (
            cgtwist.associator_block(args.a, args.b, args.c, q)
            if args.c is not None
            else cgtwist.solve_twist_block(args.a, args.b, q)
        )
        cgtwist.save_block(block, args.save_block)
        print(f"wrote {args.save_block}")
    rows = []
    if args.sweep:
        for a in range(cfg.max_spin + 1):
            for b in range(cfg.max_spin + 1):
                rows.append(_twist_row(a, b, q, cfg.tol))
        if args.associators:
            for a in range(cfg.max_triple + 1):
                for b in range(cfg.max_triple + 1):
                    for c in range(cfg.max_triple + 1):
                        rows.append(_associator_row(a, b, c, q, cfg.tol))
    elif args.c is not None:
        rows.append(_associator_row(args.a, args.b, args.c, q, cfg.tol))
    else:
        rows.append(_twist_row(args.a, args.b, q, cfg.tol))
    for row in rows:
        tag = "PASS" if row["pass"] else "FAIL"
        block = f"({row['a']},{row['b']}" + (f",{row['c']})" if "c" in row else ")")
        resid = row.get("intertwine_residual", row.get("commutation_residual"))
        print(f"  {tag} block {block} residual {resid}")
    report = {"q": format_rational(q), "blocks": rows}
    _emit(report, cfg, args.out)
    return 0 if all(r["pass"] for r in rows) else 1


def _lift_report(result) -> dict:
    return {
        "q": format_rational(result.q),
        "blocks": list(result.blocks),
        "residuals": {k: f"{v:.3e}" for k, v in sorted(result.residuals.items())},
        "passed": result.passed,
    }


def cmd_lift(args) -> int:
    cfg = _load_config(args)
    try:
        if args.roundtrip:
            ns = [int(x) for x in args.roundtrip.split(",")]
            q = parse_rational(str(cfg.q))
            action = liftalg.roundtrip_action(ns, q, seed=cfg.seed)
        else:
            if not args.action:
                raise SystemExit("lift needs an action file or --roundtrip")
            action = liftalg.ModuleAlgebraAction.load(args.action)
        result = liftalg.lift_action(action, tol=cfg.tol)
    except liftalg.LiftError as exc:
        print(f"  FAIL stage={exc.stage}: {exc}")
        _emit({"passed": False, "stage": exc.stage, "error": str(exc)}, cfg, args.out)
        return 1
    for name, val in sorted(result.residuals.items()):
        tag = "PASS" if val <= cfg.tol else "FAIL"
        print(f"  {tag} {name} {val:.3e}")
    if args.save_lift:
        result.save(args.save_lift)
        print(f"wrote {args.save_lift}")
    _emit(_lift_report(result), cfg, args.out)
    return 0 if result.passed else 1


def cmd_harness(args) -> int:
    """Seeded randomized round-trip suite over direct sums of irreps."""
    cfg = _load_config(args)
    q = parse_rational(str(cfg.q))
    rng = random.Random(cfg.seed)
    rows = []
    ok_all = True
    for case in range(args.count):
        ns = [rng.randint(0, args.max_n) for _ in range(rng.randint(1, args.max_irreps))]
        inst_seed = rng.randint(0, 2**63 - 1)
        action = liftalg.roundtrip_action(ns, q, seed=inst_seed)
        try:
            result = liftalg.lift_action(action, tol=cfg.tol)
            worst = max(result.residuals.values())
            ok = result.passed
            rows.append({"case": case, "ns": ns, "worst_residual": f"{worst:.3e}", "pass": ok})
        except liftalg.LiftError as exc:
            ok = False
            rows.append({"case": case, "ns": ns, "error": f"{exc.stage}: {exc}", "pass": False})
        ok_all &= ok
        print(f"  {'PASS' if ok else 'FAIL'} case {case} ns={ns}")
    report = {"q": format_rational(q), "count": args.count, "cases": rows, "passed": ok_all}
    _emit(report, cfg, args.out)
    return 0 if ok_all else 1


def _add_common(p) -> None:
    p.add_argument("--q", help="deformation parameter, a positive rational like 1/2")
    p.add_argument("--tol", type=float, help="pass/fail tolerance for surfaced residuals")
    p.add_argument("--seed", type=int, help="seed for randomized pieces")
    p.add_argument("--out", help="write the report/object to this path")
    p.add_argument("--format", dest="output_format", choices=["json", "csv"], help="report format")
    p.add_argument("--config", help="JSON file with RunConfig defaults")
    p.add_argument("--precision", type=int, help="MPFR significand bits (default 128)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="djtwist",
        description="quantized enveloping algebra representations, twist blocks, torsion lifts",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("irrep", help="build and verify a ladder irrep")
    p.add_argument("--n", type=int, required=True, help="spin label (dimension n+1)")
    _add_common(p)
    p.set_defaults(func=cmd_irrep)

    p = sub.add_parser("vector-rep", help="build and verify the defining sl_n module")
    p.add_argument("--n", type=int, required=True, help="matrix size n (rank n-1)")
    _add_common(p)
    p.set_defaults(func=cmd_vector_rep)

    p = sub.add_parser("verify", help="verify a representation file")
    p.add_argument("rep", help="path to a representation JSON file")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tensor", help="tensor two representation files")
    p.add_argument("rep1")
    p.add_argument("rep2")
    _add_common(p)
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("cg", help="Clebsch-Gordan decomposition of V_a (x) V_b")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_cg)

    p = sub.add_parser("twist", help="twist blocks and associator blocks")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--c", type=int, help="with --c, compute the associator block")
    p.add_argument("--sweep", action="store_true", help="all blocks up to the cutoffs")
    p.add_argument("--associators", action="store_true", help="include triples in --sweep")
    p.add_argument("--max-spin", dest="max_spin", type=int)
    p.add_argument("--max-triple", dest="max_triple", type=int)
    p.add_argument("--save-block", dest="save_block", help="write the full block (matrix included) here")
    _add_common(p)
    p.set_defaults(func=cmd_twist)

    p = sub.add_parser("lift", help="lift an action file or a round-trip instance")
    p.add_argument("action", nargs="?", help="path to an action JSON file")
    p.add_argument("--roundtrip", help="comma-separated spin labels, e.g. 1,1")
    p.add_argument("--save-lift", dest="save_lift", help="write the lifted matrices here")
    _add_common(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("harness", help="seeded randomized round-trip suite")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--max-irreps", dest="max_irreps", type=int, default=3)
    p.add_argument("--max-n", dest="max_n", type=int, default=4)
    _add_common(p)
    p.set_defaults(func=cmd_harness)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "precision", None):
        approx.set_precision(args.precision)
    if args.command == "twist" and not args.sweep and (args.a is None or args.b is None):
        raise SystemExit("twist needs --a and --b (or --sweep)")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
