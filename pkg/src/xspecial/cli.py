"""Command-line front end.

Global flags go before the command::

    xspecial --prime 3 -n 1 group-check --family M
    xspecial --table hall9.qtable -n 1 spectral --json out.json

Exit codes: 0 pass, 1 verification failure, 2 usage or guard error,
3 eigensolver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bricks, extraspecial, spgraph
from .errors import NoConvergence, NotMFamily, XSpecialError
from .quasifield import QTable, qf_verify, resolve_table

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3
MIXING_TOL = 1e-6
DEMO_EXHAUSTIVE_LIMIT = 5000


class UsageError(Exception):
    pass


def _table(args, required: bool = True) -> QTable | None:
    if args.prime is None and args.table is None:
        if required:
            raise UsageError("give a quasifield with --prime P or --table PATH")
        return None
    return resolve_table(prime=args.prime, table=args.table)


def _group(args, Q: QTable) -> extraspecial.ExtraSpecial:
    try:
        return extraspecial.ExtraSpecial(Q, args.n, args.family)
    except NotMFamily as exc:
        raise UsageError(f"--family M needs a prime field: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_verify_quasifield(args) -> tuple[int, dict]:
    rep = qf_verify(_table(args))
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep.to_dict()


def cmd_group_check(args) -> tuple[int, dict]:
    G = _group(args, _table(args))
    rel = extraspecial.check_relations(G)
    exhaustive = G.order**3 <= extraspecial.ASSOC_EXHAUSTIVE_LIMIT
    assoc = extraspecial.check_associativity(G, None if exhaustive else args.samples, seed=args.seed)
    out = {
        "group": G.name,
        "order": G.order,
        "relations": rel.to_dict(),
        "associativity": {"mode": "exhaustive" if exhaustive else f"sampled({args.samples})", **assoc.to_dict()},
    }
    ok = rel.ok and assoc.ok
    out["ok"] = ok
    return (EXIT_OK if ok else EXIT_FAIL), out


def _brick_from_args(args) -> bricks.Brick:
    path = Path(args.brick)
    if not path.exists():
        raise UsageError(f"brick file {path} not found")
    spec = bricks.load_brick_spec(path)
    if args.n_given and args.n != spec.n:
        raise UsageError(f"-n {args.n} conflicts with n {spec.n} in {path}")
    spec_Q = resolve_table(prime=spec.prime, table=spec.table, base_dir=path.parent)
    Q = _table(args, required=False)
    if Q is not None and Q != spec_Q:
        raise UsageError(f"quasifield from the command line differs from the one in {path}")
    family = args.family or spec.family or "H"
    try:
        return spec.build(spec_Q, family)
    except NotMFamily as exc:
        raise UsageError(f"family M needs a prime field: {exc}") from None


def cmd_coverage(args) -> tuple[int, dict]:
    B = _brick_from_args(args)
    rep = bricks.coverage(B)
    out = {"brick": B.to_dict(), **rep.to_dict()}
    ok = rep.sound and rep.bound_status != "violated"
    if 2 * len(B.Z) > B.group.q:
        lz = bricks.large_z_branch(B)
        out["largeZ"] = {"applies": True, "productIsDoubledBrick": lz, "meetsThreshold": rep.meets_threshold}
        ok = ok and lz and rep.meets_threshold
    else:
        out["largeZ"] = {"applies": False}
    out["ok"] = ok
    return (EXIT_OK if ok else EXIT_FAIL), out


def _spectral_parts(args):
    G = spgraph.build(_table(args), args.n)
    return G, spgraph.spectrum(G, tol=args.tol)


def cmd_spectral(args) -> tuple[int, dict]:
    G, sp = _spectral_parts(args)
    st = spgraph.structure(G)
    sq_rel = G.q - 1 - sp.lambda2**2 / G.q ** (G.n - 1)
    out = {
        "quasifield": G.Q.name,
        "n": G.n,
        "sideSize": G.side_size,
        "degree": G.degree,
        "structure": st.to_dict(),
        "spectrum": sp.to_dict(),
        "hEigenvalueFromLambda2": sq_rel,
        "hEigenvalueInRange": abs(sq_rel) <= G.q - 1 + MIXING_TOL,
    }
    if args.edges:
        Path(args.edges).write_text(G.edge_list_text(), encoding="utf-8")
    ok = sp.passed and st.ok and out["hEigenvalueInRange"]
    out["ok"] = ok
    return (EXIT_OK if ok else EXIT_FAIL), out


def cmd_mixing(args) -> tuple[int, dict]:
    G, sp = _spectral_parts(args)
    results = spgraph.random_mixing(G, sp.lambda2, count=args.samples, seed=args.seed, tol=MIXING_TOL)
    ok = all(r.passed for r in results)
    out = {
        "quasifield": G.Q.name,
        "n": G.n,
        "seed": args.seed,
        "lambda2": sp.lambda2,
        "samples": len(results),
        "passed": sum(r.passed for r in results),
        "maxRatio": max((r.deviation / r.bound for r in results if r.bound > 0), default=0.0),
        "results": [r.to_dict() for r in results],
        "ok": ok,
    }
    return (EXIT_OK if ok else EXIT_FAIL), out


def cmd_theorem_demo(args) -> tuple[int, dict]:
    G = _group(args, _table(args))
    q = G.q
    total = (2**q - 1) ** (2 * G.n + 1)
    exponent = G.order**0.75
    if total <= DEMO_EXHAUSTIVE_LIMIT:
        mode = "exhaustive"
        family = list(bricks.all_bricks(G))
    else:
        mode = f"sampled({args.samples})"
        rng = np.random.default_rng(args.seed)
        family = []
        # at least half of each factor keeps |B| > |G|^(3/4) reachable by rejection
        attempts = 0
        while len(family) < args.samples:
            attempts += 1
            if attempts > 1000 * args.samples:
                raise UsageError("could not sample enough bricks above |G|^(3/4)")
            B = bricks.random_brick(G, rng, min_size=max(1, q // 2))
            if B.size > exponent:
                family.append(B)

    rows = []
    failures = 0
    for B in family:
        rep = bricks.coverage(B)
        large_z = 2 * len(B.Z) > q
        provable_ok = rep.sound and rep.bound_status != "violated" and (rep.meets_threshold or not large_z)
        failures += not provable_ok
        rows.append(
            {
                "brick": B.to_dict(),
                "size": B.size,
                "aboveThreeQuarters": B.size > exponent,
                "N": rep.N,
                "certified": rep.certified,
                "threshold": str(Fraction(B.size, q)),
                "meetsThreshold": rep.meets_threshold,
                "largeZ": large_z,
                "boundStatus": rep.bound_status,
            }
        )

    def frac(sel):
        chosen = [r for r in rows if sel(r)]
        return {"count": len(chosen), "meeting": sum(r["meetsThreshold"] for r in chosen)}

    out = {
        "group": G.name,
        "order": G.order,
        "orderToThreeQuarters": exponent,
        "mode": mode,
        "seed": args.seed,
        "summary": {
            "all": frac(lambda r: True),
            "aboveThreeQuarters": frac(lambda r: r["aboveThreeQuarters"]),
            "largeZ": frac(lambda r: r["largeZ"]),
            "zAtLeastTwo": frac(lambda r: len(r["brick"]["Z"]) >= 2),
        },
        "provableFailures": failures,
        "bricks": rows,
    }
    out["ok"] = failures == 0
    return (EXIT_OK if failures == 0 else EXIT_FAIL), out


COMMANDS = {
    "verify-quasifield": cmd_verify_quasifield,
    "group-check": cmd_group_check,
    "coverage": cmd_coverage,
    "spectral": cmd_spectral,
    "mixing": cmd_mixing,
    "theorem-demo": cmd_theorem_demo,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", dest="json_path", default=argparse.SUPPRESS, help="also write the report here")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="xspecial", description=__doc__.split("\n\n")[0], parents=[common])
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--prime", type=int, help="use the prime field F_P")
    src.add_argument("--table", help="quasifield table file (or bundled name, e.g. hall9.qtable)")
    ap.add_argument("-n", type=int, default=None, help="dimension (default 1)")
    ap.add_argument("--tol", type=float, default=1e-9, help="eigensolver off-diagonal tolerance")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("verify-quasifield", parents=[common], help="check the quasifield axioms")
    p = sub.add_parser("group-check", parents=[common], help="presentation relations and associativity")
    p.add_argument("--family", choices=["H", "M"], default="H")
    p.add_argument("--samples", type=int, default=100_000, help="triples when exhaustive is too large")
    p = sub.add_parser("coverage", parents=[common], help="centre-coset coverage of B.B")
    p.add_argument("--brick", required=True, help="brick spec file")
    p.add_argument("--family", choices=["H", "M"], default=None)
    p = sub.add_parser("spectral", parents=[common], help="SP graph structure and second eigenvalue")
    p.add_argument("--edges", help="write the edge list here")
    p = sub.add_parser("mixing", parents=[common], help="expander mixing on random vertex sets")
    p.add_argument("--samples", type=int, default=200)
    p = sub.add_parser("theorem-demo", parents=[common], help="coverage of many bricks against |B|/q")
    p.add_argument("--family", choices=["H", "M"], default="M")
    p.add_argument("--samples", type=int, default=200)
    return ap


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.n_given = args.n is not None
    if args.n is None:
        args.n = 1
    args.seed = getattr(args, "seed", 0)
    args.json_path = getattr(args, "json_path", None)
    for attr in ("family", "edges", "samples"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        code, report = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"xspecial: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoConvergence as exc:
        print(f"xspecial: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (XSpecialError, FileNotFoundError, ValueError) as exc:
        print(f"xspecial: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dumps({"command": args.command, "exitCode": code, **report})
    sys.stdout.write(text)
    if args.json_path:
        Path(args.json_path).write_text(text, encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
