"""Command-line front end.

    couniv reduce --word "3 5' 5 2"
    couniv phi --n 1 --word "2 4' 2" --explain
    couniv member --word "15 7" --k 1 --max-factors 2 --max-conj 2
    couniv quotient build --group symfin --depth 16 --out map.json
    couniv quotient verify --map map.json --suite offset_chain
    couniv pw demo --group zp2 --sample-size 3 --coords 2 --conjugators 2 --u 2 --seed 1
    couniv verify --suite all --group symfin --seed 7 --json report.json

Every command prints JSON (``phi --explain`` prints the recursion tree first).
``verify`` and ``quotient verify`` exit with status 1 when any record FAILs.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import List, Optional

from . import harness
from .harness import DEFAULT_BOUNDS, DEFAULT_GROUPS, SUITE_ALIASES, SUITES, RunConfig, canonical, dumps, run_suite
from .neighborhoods import SubbasicSpec, cert_verify, sym_member_bounded
from .pw_construction import random_scenario, run_scenario, BNotInV
from .quotient import FAIL, QuotientMap
from .scale import PhiContext, chain_from_id, explain
from .target_groups import oracle_from_id
from .words import format_word, parse_word

QUOTIENT_SUITES = ("offset_chain", "word_scale", "continuity", "openness", "greedy_offsets")


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--group", default=default(None), help="zp<p> | symfin | dyadic | finite:<file> (comma list for verify)")
    parser.add_argument("--chain", default=default("dyadic"), help="dyadic | triadic | padic:<p>")
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument("--json", dest="json_path", default=default(None), help="also write the JSON output here")
    parser.add_argument("--max-factors", type=int, default=default(3))
    parser.add_argument("--max-conj", type=int, default=default(2))


def _parse_bounds(items: Optional[List[str]]) -> dict:
    bounds = {}
    for item in items or []:
        for part in item.split(","):
            if not part:
                continue
            key, _, value = part.partition("=")
            if key not in DEFAULT_BOUNDS:
                raise SystemExit(f"unknown bound {key!r}; known: {', '.join(sorted(DEFAULT_BOUNDS))}")
            bounds[key] = int(value)
    return bounds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="couniv", description=__doc__.split("\n\n")[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        _global_options(p, suppress=True)
        return p

    p = add("reduce", help="freely reduce a word")
    p.add_argument("--word", required=True)

    p = add("phi", help="evaluate phi_n on a word")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--explain", action="store_true")

    p = add("member", help="bounded membership search in a subbasic neighborhood")
    p.add_argument("--word", required=True)
    p.add_argument("--h", default="")
    p.add_argument("--k", type=int, default=1)

    p = add("quotient", help="build or verify a quotient map")
    qsub = p.add_subparsers(dest="action", required=True)
    qb = qsub.add_parser("build")
    _global_options(qb, suppress=True)
    qb.add_argument("--depth", type=int, default=16)
    qb.add_argument("--kmax", type=int, default=256, help="log f(k) for k <= kmax")
    qb.add_argument("--out", required=True)
    qv = qsub.add_parser("verify")
    _global_options(qv, suppress=True)
    qv.add_argument("--map", required=True)
    qv.add_argument("--suite", required=True, choices=QUOTIENT_SUITES + tuple(SUITE_ALIASES))
    qv.add_argument("--bounds", action="append", help="key=value[,key=value]")

    p = add("pw", help="piecewise-projection group demos")
    psub = p.add_subparsers(dest="action", required=True)
    pd = psub.add_parser("demo")
    _global_options(pd, suppress=True)
    pd.add_argument("--sample-size", type=int, default=3)
    pd.add_argument("--coords", type=int, default=2)
    pd.add_argument("--conjugators", type=int, default=2)
    pd.add_argument("--u", type=int, default=2)

    p = add("verify", help="run the verification suites")
    p.add_argument("--suite", default="all", help=f"all or comma list of {', '.join(SUITES)}")
    p.add_argument("--bounds", action="append", help="key=value[,key=value]")
    return parser


def _emit(args, payload, text: Optional[str] = None) -> None:
    out = text if text is not None else json.dumps(payload, indent=2, sort_keys=True, default=str)
    print(out)
    if args.json_path:
        Path(args.json_path).write_text(out + "\n")


def cmd_reduce(args) -> int:
    w = parse_word(args.word)
    _emit(args, {"word": format_word(w), "length": len(w)})
    return 0


def cmd_phi(args) -> int:
    ctx = PhiContext(chain_from_id(args.chain))
    w = parse_word(args.word)
    if args.explain:
        print("\n".join(explain(args.n, w)))
    _emit(args, {"n": args.n, "word": format_word(w), "phi": ctx.phi(args.n, w)})
    return 0


def cmd_member(args) -> int:
    ctx = PhiContext(chain_from_id(args.chain))
    w = parse_word(args.word)
    spec = SubbasicSpec(parse_word(args.h), args.k)
    res = sym_member_bounded(ctx, w, spec, args.max_factors, args.max_conj)
    payload = {"status": res.status, "word": format_word(w), "h": format_word(spec.h), "k": spec.k,
               "bounds": {"max_factors": args.max_factors, "max_conj": args.max_conj}}
    if res.is_member:
        payload["certificate"] = res.certificate.to_json()
        payload["verified"] = cert_verify(ctx, res.certificate, w)
    _emit(args, payload)
    return 0


def _map_payload(q: QuotientMap, group: str, chain: str, kmax: int) -> dict:
    f_log = []
    for k in range(kmax + 1):
        n, i = q.f_index(k)
        f_log.append({"k": k, "fiber": n, "index": i, "value": q.oracle.to_json(q.basis.enumerate(n, i))})
    return {
        "schema": harness.SCHEMA,
        "kind": "quotient_map",
        "group": group,
        "chain": chain,
        "depth": q.basis.depth,
        "indices": list(q.basis.indices),
        "kmax": kmax,
        "choice_log": {str(n): c for n, c in q.choice_log().items()},
        "f": f_log,
    }


def cmd_quotient(args) -> int:
    if args.action == "build":
        group = args.group or "symfin"
        q = QuotientMap(oracle_from_id(group), chain_from_id(args.chain), depth=args.depth)
        payload = _map_payload(q, group, args.chain, args.kmax)
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
        print(json.dumps({"written": args.out, "group": group, "depth": q.basis.depth, "indices": q.basis.indices}))
        return 0

    data = json.loads(Path(args.map).read_text())
    if data.get("schema") != harness.SCHEMA or data.get("kind") != "quotient_map":
        raise SystemExit(f"{args.map}: not a schema-{harness.SCHEMA} quotient map")
    q = QuotientMap(oracle_from_id(data["group"]), chain_from_id(data["chain"]), depth=data["depth"])
    replay = _map_payload(q, data["group"], data["chain"], data["kmax"])
    replay_ok = replay["indices"][: len(data["indices"])] == data["indices"] and replay["f"] == data["f"]
    bounds = _parse_bounds(args.bounds)
    bounds.setdefault("depth", data["depth"])
    config = RunConfig(suites=[SUITE_ALIASES.get(args.suite, args.suite)], groups=[data["group"]], chain=data["chain"], seed=args.seed, bounds=bounds)
    report = run_suite(config, maps_cache={data["group"]: q})
    report["records"].insert(0, harness.record("map.replay", {"map": str(args.map)}, "PASS" if replay_ok else FAIL,
                                               {"kmax": data["kmax"]}))
    _emit(args, report, dumps(report))
    return 1 if any(r["verdict"] == FAIL for r in report["records"]) else 0


def cmd_pw(args) -> int:
    oracle = oracle_from_id(args.group or "zp2")
    rng = random.Random(f"pw-demo:{args.seed}")
    fixed = {"points": args.sample_size, "d": args.coords, "conjugators": args.conjugators, "u": args.u}
    scenario = random_scenario(oracle, rng, fixed=fixed)
    payload = {
        "group": oracle.name,
        "sample": [[oracle.to_json(c) for c in p.coords] for p in scenario.sample],
        "conjugators": [
            {"partition": list(g.partition), "cell_words": [format_word(w) for w in g.cell_words]}
            for g in scenario.conjugators
        ],
        "u": scenario.u_index,
        "b_word": format_word(scenario.b_word),
    }
    try:
        payload["proof"] = run_scenario(scenario).to_json(oracle)
        status = 0
    except BNotInV as exc:
        payload["error"] = str(exc)
        status = 1
    _emit(args, payload)
    return status


def cmd_verify(args) -> int:
    if args.suite == "all":
        suites = list(SUITES)
    else:
        suites = [SUITE_ALIASES.get(s, s) for s in args.suite.split(",") if s]
    groups = list(DEFAULT_GROUPS) if not args.group or args.group == "all" else args.group.split(",")
    config = RunConfig(
        suites=suites,
        groups=groups,
        chain=args.chain,
        seed=args.seed,
        max_factors=args.max_factors,
        max_conj_len=args.max_conj,
        bounds=_parse_bounds(args.bounds),
    )
    report = run_suite(config)
    _emit(args, report, dumps(report))
    return 1 if report["summary"][FAIL] else 0


COMMANDS = {
    "reduce": cmd_reduce,
    "phi": cmd_phi,
    "member": cmd_member,
    "quotient": cmd_quotient,
    "pw": cmd_pw,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
