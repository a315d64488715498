"""Verification harness: runs the named check suites and builds a JSON report.

Every record is ``{check, anchor, instance, verdict, witness, slack,
elapsed}``.  Records are sorted canonically, and all randomness is drawn
from ``random.Random`` streams keyed by the run seed, so two runs with the
same config differ only in ``elapsed``.
"""
from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

from .neighborhoods import (
    SUPPORT_AUDIT,
    CertEntry,
    SearchResult,
    HypothesisViolation,
    SubbasicSpec,
    SymCertificate,
    assign_slots,
    bk_check_finite,
    cert_conjugate,
    cert_invert,
    cert_square,
    cert_verify,
    cyclic_table,
    slot_cap,
    sym_member_bounded,
    symmetric_group_table,
)
from .pw_construction import random_scenario, run_scenario
from .quotient import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    QuotientMap,
    continuity_check,
    openness_check,
    greedy_offset_check,
    verify_offset_chain,
    verify_word_scale,
)
from .scale import PhiContext, chain_from_id, phi_closed
from .target_groups import oracle_from_id
from .words import IDENTITY, Letter, Word, format_word, index_sum, invert, multiply, reduced_words

SCHEMA = 1
UNKNOWN = "UNKNOWN"
DEFAULT_GROUPS = ("zp2", "zp3", "dyadic", "symfin", "finite:s3")
SUITES = ("phi", "certs", "bk", "greedy_offsets", "openness", "offset_chain", "word_scale", "continuity", "pw")
# short ids accepted on the command line
SUITE_ALIASES = {"eq1": "offset_chain", "mainlemma": "word_scale", "sur": "greedy_offsets"}

DEFAULT_BOUNDS = {
    "phi_max_len": 4,
    "phi_max_letter": 8,
    "phi_n_max": 5,
    "cert_members": 10_000,
    "cert_transforms": 1_000,
    "bk_max_factors": 4,
    "bk_k_max": 2,
    "greedy_k_max": 10_000,
    "open_n_max": 4,
    "open_prefix": 50,
    "chain_k_max": 1_000,
    "chain_n_max": 5,
    "word_max_len": 3,
    "word_max_letter": 20,
    "word_n_max": 4,
    "cont_n_max": 6,
    "cont_samples": 500,
    "pw_scenarios": 100,
    "depth": 16,
}

ANCHORS = {
    "phi.closed_form": "scale recursion vs n + index_sum",
    "phi.symmetry": "scale of inverse word",
    "phi.monotone": "pointwise monotone family",
    "certs.soundness": "symmetric product membership",
    "certs.inversion": "symmetric product is symmetric",
    "certs.square": "squaring lemma for monotone families",
    "certs.conjugate": "right-translate lemma",
    "certs.support": "neighborhoods inside normal closure of U_k",
    "bk.products": "Birkhoff-Kakutani product bound",
    "bk.reject": "chain hypothesis validator",
    "greedy_offsets": "greedy surjection constraint m(f(k)) <= k",
    "openness": "f maps U_n onto V_n",
    "offset_chain": "phi_n(k) = n+k >= n+m(f(k)) >= theta_f(k)(n)",
    "word_scale": "theta_fbar(x)(n) <= phi_n(x)",
    "continuity": "fbar(V_Phi_n) inside V_n",
    "pw.openness": "evaluation maps are open",
}


@dataclass
class RunConfig:
    suites: List[str] = field(default_factory=lambda: list(SUITES))
    groups: List[str] = field(default_factory=lambda: list(DEFAULT_GROUPS))
    chain: str = "dyadic"
    seed: int = 0
    max_factors: int = 3
    max_conj_len: int = 1
    bounds: Dict[str, int] = field(default_factory=dict)

    def bound(self, key: str) -> int:
        return int(self.bounds.get(key, DEFAULT_BOUNDS[key]))

    def __post_init__(self):
        if self.max_factors < 1 or self.max_conj_len < 1:
            raise ValueError("search bounds must be >= 1")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
        bad = [k for k in self.bounds if k not in DEFAULT_BOUNDS]
        if bad:
            raise ValueError(f"unknown bounds {bad}")


def record(check: str, instance, verdict: str, witness=None, slack=None, elapsed: float = 0.0, anchor=None) -> dict:
    return {
        "check": check,
        "anchor": anchor or ANCHORS.get(check, ANCHORS.get(check.split(".")[0], "")),
        "instance": instance,
        "verdict": verdict,
        "witness": witness,
        "slack": slack,
        "elapsed": round(elapsed, 6),
    }


def _timed(fn: Callable[[], dict]) -> dict:
    t0 = time.perf_counter()
    rec = fn()
    rec["elapsed"] = round(time.perf_counter() - t0, 6)
    return rec


def _rng(config: RunConfig, stream: str) -> random.Random:
    return random.Random(f"{stream}:{config.seed}")


# -- phi ----------------------------------------------------------------------


def suite_phi(config: RunConfig, ctx: PhiContext) -> List[dict]:
    max_len, max_letter, n_max = config.bound("phi_max_len"), config.bound("phi_max_letter"), config.bound("phi_n_max")
    words = list(reduced_words(max_len, max_letter))
    out = []
    for n in range(n_max + 1):
        t0 = time.perf_counter()
        mism, asym, nonmono = [], [], []
        for w in words:
            v = ctx.phi(n, w)
            if v != phi_closed(ctx, n, w):
                mism.append(format_word(w))
            if v != ctx.phi(n, invert(w)):
                asym.append(format_word(w))
            if ctx.phi(n + 1, w) < v:
                nonmono.append(format_word(w))
        dt = time.perf_counter() - t0
        inst = {"n": n, "max_len": max_len, "max_letter": max_letter, "words": len(words)}
        out.append(record("phi.closed_form", inst, PASS if not mism else FAIL, {"mismatches": mism[:5]}, len(mism), dt))
        out.append(record("phi.symmetry", inst, PASS if not asym else FAIL, {"violations": asym[:5]}, len(asym), 0.0))
        out.append(record("phi.monotone", inst, PASS if not nonmono else FAIL, {"violations": nonmono[:5]}, len(nonmono), 0.0))
    return out


# -- certificates -------------------------------------------------------------

CERT_LETTERS = (1, 3, 5, 7, 11, 15, 23, 31)
CONJ_GENS = (0, 1, 2)


def random_certificate(
    ctx: PhiContext, spec: SubbasicSpec, rng: random.Random, max_factors: int = 3, conj_len: int = 1
) -> Optional[SymCertificate]:
    """A valid certificate assembled from random admissible pieces (None if none turn up)."""
    for _round in range(20):
        pieces = []
        for _ in range(rng.randint(1, max_factors)):
            for _attempt in range(50):
                g = Word.of(*[(rng.choice(CONJ_GENS), rng.choice((1, -1))) for _ in range(rng.randint(0, conj_len))])
                letter = Letter(rng.choice(CERT_LETTERS), rng.choice((1, -1)))
                cap = slot_cap(ctx, spec, g, letter)
                if cap >= 1:
                    pieces.append((g, letter, cap))
                    break
        slots = assign_slots([p[2] for p in pieces])
        if pieces and slots is not None:
            return SymCertificate(tuple(CertEntry(s, g, l) for s, (g, l, _) in zip(slots, pieces)), spec)
    return None


def random_spec(rng: random.Random, k_choices=(1, 2), with_h: bool = True) -> SubbasicSpec:
    h = IDENTITY
    if with_h and rng.random() < 0.5:
        h = Word.of(*[(rng.choice(CONJ_GENS), rng.choice((1, -1))) for _ in range(rng.randint(1, 2))])
    return SubbasicSpec(h, rng.choice(k_choices))


def searched_certificate(config: RunConfig, ctx: PhiContext, spec: SubbasicSpec, rng: random.Random):
    """Certificate found by bounded search for the product of a random certificate."""
    planted = random_certificate(ctx, spec, rng, config.max_factors, config.max_conj_len)
    if planted is None:
        return IDENTITY, SearchResult("Unknown")
    w = planted.product()
    alphabet = set(CERT_LETTERS) & {c >> 1 for c in w.codes} | set(CONJ_GENS) & {c >> 1 for c in w.codes}
    alphabet |= {c >> 1 for c in spec.h.codes}
    res = sym_member_bounded(ctx, w, spec, config.max_factors, config.max_conj_len, alphabet=alphabet or {0})
    return w, res


def suite_certs(config: RunConfig, ctx: PhiContext) -> List[dict]:
    out = []
    rng = _rng(config, "certs")
    members = config.bound("cert_members")
    transforms = config.bound("cert_transforms")

    t0 = time.perf_counter()
    found = unknown = bad = 0
    failures = []
    member_pool = []
    attempts = 0
    while found < members and attempts < 4 * members:
        attempts += 1
        spec = random_spec(rng)
        w, res = searched_certificate(config, ctx, spec, rng)
        if not res.is_member:
            unknown += 1
            continue
        found += 1
        if not cert_verify(ctx, res.certificate, w):
            bad += 1
            failures.append({"word": format_word(w), "certificate": res.certificate.to_json()})
        elif len(member_pool) < transforms:
            member_pool.append((w, res.certificate))
    verdict = PASS if bad == 0 and found >= members else FAIL
    out.append(
        record(
            "certs.soundness",
            {"members": members, "max_factors": config.max_factors, "max_conj_len": config.max_conj_len},
            verdict,
            {"found": found, "unknown": unknown, "failures": failures[:3]},
            bad,
            time.perf_counter() - t0,
        )
    )

    # inversion: reversed certificate with inverted letters certifies w^-1
    t0 = time.perf_counter()
    inv_bad = []
    for w, c in member_pool[:transforms]:
        ci = cert_invert(ctx, c)
        if not cert_verify(ctx, ci, invert(w)):
            inv_bad.append(format_word(w))
    out.append(record("certs.inversion", {"inputs": transforms},
                      PASS if not inv_bad and len(member_pool) >= transforms else FAIL,
                      {"failures": inv_bad[:3]}, len(inv_bad), time.perf_counter() - t0))

    # squaring: two searched certificates for the doubled family
    t0 = time.perf_counter()
    sq_bad, sq_done = [], 0
    rng_sq = _rng(config, "certs.square")
    for _attempt in range(20 * transforms):
        if sq_done >= transforms:
            break
        base = random_spec(rng_sq, k_choices=(1, 2))
        doubled = SubbasicSpec(base.h, 2 * base.k)
        u, ru = searched_certificate(config, ctx, doubled, rng_sq)
        v, rv = searched_certificate(config, ctx, doubled, rng_sq)
        if not (ru.is_member and rv.is_member):
            continue
        sq_done += 1
        c = cert_square(ctx, ru.certificate, rv.certificate)
        if c.spec != base or not cert_verify(ctx, c, multiply(u, v)):
            sq_bad.append({"u": format_word(u), "v": format_word(v)})
    out.append(record("certs.square", {"inputs": transforms}, PASS if not sq_bad and sq_done >= transforms else FAIL,
                      {"failures": sq_bad[:3]}, len(sq_bad), time.perf_counter() - t0))

    # translate: certificate against h becomes one against e for h^-1 w h
    t0 = time.perf_counter()
    cj_bad, cj_done = [], 0
    rng_cj = _rng(config, "certs.conjugate")
    for _attempt in range(20 * transforms):
        if cj_done >= transforms:
            break
        h = Word.of(*[(rng_cj.choice(CONJ_GENS), rng_cj.choice((1, -1))) for _ in range(rng_cj.randint(1, 2))])
        spec = SubbasicSpec(h, rng_cj.choice((1, 2)))
        w, res = searched_certificate(config, ctx, spec, rng_cj)
        if not res.is_member:
            continue
        cj_done += 1
        c = cert_conjugate(ctx, res.certificate, h)
        if not cert_verify(ctx, c, multiply(multiply(invert(h), w), h)):
            cj_bad.append({"word": format_word(w), "h": format_word(h)})
    out.append(record("certs.conjugate", {"inputs": transforms}, PASS if not cj_bad and cj_done >= transforms else FAIL,
                      {"failures": cj_bad[:3]}, len(cj_bad), time.perf_counter() - t0))
    return out


def support_record() -> dict:
    violations = len(SUPPORT_AUDIT.violations)
    return record(
        "certs.support",
        {"scope": "every certificate emitted in this run"},
        PASS if violations == 0 and SUPPORT_AUDIT.checked > 0 else FAIL,
        {"checked": SUPPORT_AUDIT.checked},
        violations,
    )


# -- Birkhoff-Kakutani --------------------------------------------------------


def cyclic_power_chain(bits: int = 8) -> List[set]:
    order = 2**bits
    return [set(range(0, order, 2**n)) for n in range(bits + 1)]


def s5_chain():
    """A chain of symmetric, mostly non-subgroup sets in S_5 with ``V_{n+1}^2 ⊆ V_n``.

    From the subgroup chain ``S5 > A5 > A4 > V4 > C2 > 1`` take
    ``V_n = H_n ∪ {t, t^-1}`` with ``t`` in ``H_{n-1} \\ H_n``; then
    ``V_n^2 ⊆ H_{n-1} ⊆ V_{n-1}``.
    """
    table, elements = symmetric_group_table(5)
    index = {p: i for i, p in enumerate(elements)}

    def sign(p):
        s, seen = 1, set()
        for i in range(5):
            if i in seen:
                continue
            j, length = i, 0
            while j not in seen:
                seen.add(j)
                j = p[j]
                length += 1
            s *= (-1) ** (length - 1)
        return s

    s5 = set(range(len(elements)))
    a5 = {index[p] for p in elements if sign(p) == 1}
    a4 = {index[p] for p in elements if sign(p) == 1 and p[4] == 4}
    v4 = {index[p] for p in [(0, 1, 2, 3, 4), (1, 0, 3, 2, 4), (2, 3, 0, 1, 4), (3, 2, 1, 0, 4)]}
    c2 = {index[(0, 1, 2, 3, 4)], index[(1, 0, 3, 2, 4)]}
    trivial = {index[(0, 1, 2, 3, 4)]}
    subgroups = [s5, a5, a4, v4, c2, trivial]
    inverse = [row.index(index[(0, 1, 2, 3, 4)]) for row in table]
    chain = [s5]
    for n in range(1, len(subgroups)):
        t = min(subgroups[n - 1] - subgroups[n])
        chain.append(subgroups[n] | {t, inverse[t]})
    chain.append(trivial)
    return table, chain


def suite_bk(config: RunConfig) -> List[dict]:
    out = []
    max_factors = config.bound("bk_max_factors")
    cases = [("Z/2^8", cyclic_table(256), cyclic_power_chain(8))]
    table, chain = s5_chain()
    cases.append(("S5", table, chain))
    for name, tab, ch in cases:
        for k in range(config.bound("bk_k_max") + 1):
            t0 = time.perf_counter()
            rep = bk_check_finite(tab, ch, k, max_factors)
            out.append(record("bk.products", {"group": name, "k": k, "max_factors": max_factors},
                              PASS if rep.ok else FAIL, {"states": rep.states, "violations": rep.violations[:3]},
                              len(rep.violations), time.perf_counter() - t0))
    bad_chain = [set(range(256)), {0, 2, 254}, {0, 2, 254}, {0}]
    try:
        bk_check_finite(cyclic_table(256), bad_chain, 0, 2)
        verdict, msg = FAIL, "accepted"
    except HypothesisViolation as exc:
        verdict, msg = PASS, str(exc)
    out.append(record("bk.reject", {"group": "Z/2^8", "chain": "V_2^2 not in V_1"}, verdict, {"message": msg}))
    return out


# -- quotient suites ----------------------------------------------------------


def _maps(config: RunConfig, ctx_cache: Dict[str, QuotientMap]) -> Dict[str, QuotientMap]:
    for g in config.groups:
        if g not in ctx_cache:
            chain = chain_from_id(config.chain)
            ctx_cache[g] = QuotientMap(oracle_from_id(g), chain, depth=config.bound("depth"))
    return {g: ctx_cache[g] for g in config.groups}


def _aggregate(check: str, instance: dict, reports: Iterable[dict], elapsed: float) -> dict:
    reports = list(reports)
    verdicts = [r["verdict"] for r in reports]
    if FAIL in verdicts:
        verdict = FAIL
    elif INCONCLUSIVE in verdicts:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS
    first_bad = next((r for r in reports if r["verdict"] != PASS), None)
    numeric = [r["slack"] for r in reports if isinstance(r["slack"], (int, float))]
    counts = {v: verdicts.count(v) for v in sorted(set(verdicts))}
    return record(check, instance, verdict, {"counts": counts, "first_non_pass": first_bad},
                  min(numeric) if numeric else None, elapsed)


def suite_greedy_offsets(config: RunConfig, maps) -> List[dict]:
    out = []
    for g, q in maps.items():
        rec = _timed(lambda: greedy_offset_check(q, config.bound("greedy_k_max")))
        out.append(record("greedy_offsets", {"group": g, **rec["instance"]}, rec["verdict"], rec["witness"], rec["slack"], rec["elapsed"]))
    return out


def suite_openness(config: RunConfig, maps) -> List[dict]:
    out = []
    for g, q in maps.items():
        for n in range(config.bound("open_n_max") + 1):
            rec = _timed(lambda: openness_check(q, n, config.bound("open_prefix")))
            w = rec["witness"]
            out.append(record("openness", {"group": g, **rec["instance"]}, rec["verdict"],
                              {"max_k": w["max_k"], "covered": len(w["cover"]), "missing": w["missing"]},
                              None, rec["elapsed"]))
    return out


def suite_offset_chain(config: RunConfig, maps) -> List[dict]:
    out = []
    for g, q in maps.items():
        for n in range(config.bound("chain_n_max") + 1):
            t0 = time.perf_counter()
            reps = [verify_offset_chain(q, k, n) for k in range(config.bound("chain_k_max") + 1)]
            rec = _aggregate("offset_chain", {"group": g, "n": n, "k_max": config.bound("chain_k_max")}, reps, time.perf_counter() - t0)
            slacks = [r["slack"]["n_plus_m_minus_theta"] for r in reps]
            rec["slack"] = {"min_k_minus_m": min(r["slack"]["k_minus_m"] for r in reps), "min_n_plus_m_minus_theta": min(slacks)}
            out.append(rec)
    return out


def suite_word_scale(config: RunConfig, maps) -> List[dict]:
    out = []
    words = list(reduced_words(config.bound("word_max_len"), config.bound("word_max_letter")))
    for g, q in maps.items():
        for n in range(config.bound("word_n_max") + 1):
            t0 = time.perf_counter()
            reps = [verify_word_scale(q, w, n) for w in words]
            out.append(_aggregate("word_scale", {"group": g, "n": n, "words": len(words)}, reps, time.perf_counter() - t0))
    return out


def suite_continuity(config: RunConfig, maps) -> List[dict]:
    out = []
    for g, q in maps.items():
        for n in range(config.bound("cont_n_max") + 1):
            rec = _timed(lambda: continuity_check(q, n, config.bound("cont_samples"), config.seed))
            out.append(record("continuity", {"group": g, **rec["instance"]}, rec["verdict"], rec["witness"], None, rec["elapsed"]))
    return out


def suite_pw(config: RunConfig) -> List[dict]:
    out = []
    rng = _rng(config, "pw")
    oracles = [oracle_from_id(g) for g in config.groups]
    total = config.bound("pw_scenarios")
    for i in range(total):
        oracle = oracles[i % len(oracles)]
        t0 = time.perf_counter()
        scenario = random_scenario(oracle, rng)
        try:
            transcript = run_scenario(scenario)
            verdict, witness = PASS, transcript.to_json(oracle)
        except Exception as exc:  # noqa: BLE001 - any failure is a FAIL record with its scenario
            verdict = FAIL
            witness = {"error": f"{type(exc).__name__}: {exc}", "u": scenario.u_index, "b_word": format_word(scenario.b_word)}
        out.append(record("pw.openness", {"scenario": i, "group": oracle.name, "points": len(scenario.sample),
                                          "d": scenario.x.d, "conjugators": len(scenario.conjugators),
                                          "u": scenario.u_index}, verdict, witness, None, time.perf_counter() - t0))
    return out


def run_suite(config: RunConfig, maps_cache: Optional[Dict[str, QuotientMap]] = None) -> dict:
    """Run the selected suites and return the report dict."""
    ctx = PhiContext(chain_from_id(config.chain))
    maps_cache = {} if maps_cache is None else maps_cache
    SUPPORT_AUDIT.reset()
    records: List[dict] = []
    suites = set(config.suites)
    if "phi" in suites:
        records += suite_phi(config, ctx)
    if "certs" in suites:
        records += suite_certs(config, ctx)
        records.append(support_record())
    if "bk" in suites:
        records += suite_bk(config)
    quotient_suites = {"greedy_offsets", "openness", "offset_chain", "word_scale", "continuity"} & suites
    if quotient_suites:
        maps = _maps(config, maps_cache)
        for name in ("greedy_offsets", "openness", "offset_chain", "word_scale", "continuity"):
            if name in suites:
                records += globals()[f"suite_{name}"](config, maps)
    if "pw" in suites:
        records += suite_pw(config)
    records.sort(key=lambda r: (r["check"], json.dumps(r["instance"], sort_keys=True)))
    summary = {v: sum(1 for r in records if r["verdict"] == v) for v in (PASS, FAIL, INCONCLUSIVE, UNKNOWN)}
    return {"schema": SCHEMA, "config": asdict(config), "records": records, "summary": summary}


def canonical(report: dict) -> str:
    """JSON text of a report with timing fields removed, for reproducibility checks."""
    stripped = dict(report)
    stripped["records"] = [{k: v for k, v in r.items() if k != "elapsed"} for r in report["records"]]
    return json.dumps(stripped, sort_keys=True, default=str)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str)
