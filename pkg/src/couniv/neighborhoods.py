"""Symmetric-product neighborhoods of the identity in F(N).

For a word ``g`` the letters allowed at slot ``n`` of the subbasic set
``<V_{Phi^h_{k n}}>`` are the generators of chain level at least
``phi_{k n}(g h)``; a neighborhood element is a product of conjugated letters
``g_i^-1 l_i g_i`` sitting in pairwise distinct slots.  Membership is shown by
a :class:`SymCertificate`, which :func:`cert_verify` re-checks from scratch.
"""
from __future__ import annotations

import threading
from array import array
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import kernels
from .scale import PhiContext
from .words import (
    IDENTITY,
    Letter,
    Word,
    conjugate,
    cyclic_reduce,
    format_word,
    invert,
    multiply,
    parse_word,
    words_over,
)


class HypothesisViolation(ValueError):
    """A neighborhood chain fails symmetry or the squaring condition."""


@dataclass(frozen=True)
class SubbasicSpec:
    """Designates ``<V_{Phi^h_{k n}}>``: slot ``n`` uses ``Phi_{k n}`` translated by ``h``."""

    h: Word = IDENTITY
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"dilation k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class CertEntry:
    slot: int
    conjugator: Word
    letter: Letter

    def element(self) -> Word:
        return conjugate(Word((self.letter.code,)), self.conjugator)


@dataclass(frozen=True)
class SymCertificate:
    factors: Tuple[CertEntry, ...]
    spec: SubbasicSpec = field(default_factory=SubbasicSpec)

    def product(self) -> Word:
        out = IDENTITY
        for entry in self.factors:
            out = multiply(out, entry.element())
        return out

    def to_json(self) -> list:
        return [
            {"slot": e.slot, "conjugator": format_word(e.conjugator), "letter": str(e.letter)}
            for e in self.factors
        ]

    @classmethod
    def from_json(cls, data: list, spec: SubbasicSpec) -> "SymCertificate":
        entries = []
        for item in data:
            letter_word = parse_word(item["letter"])
            if len(letter_word) != 1:
                raise ValueError(f"certificate letter must be a single letter: {item['letter']!r}")
            entries.append(CertEntry(int(item["slot"]), parse_word(item["conjugator"]), letter_word.letters[0]))
        return cls(tuple(entries), spec)


@dataclass(frozen=True)
class SearchResult:
    status: str  # "Member" or "Unknown"
    certificate: Optional[SymCertificate] = None
    explored: int = 0

    @property
    def is_member(self) -> bool:
        return self.status == "Member"


class SupportAudit:
    """Records the letter-level check on every certificate this module emits.

    A certificate at dilation ``k`` only uses generators of chain level
    ``>= k``, so its element lies in the normal closure of ``U_k``.
    """

    def __init__(self):
        self.checked = 0
        self.violations: List[SymCertificate] = []
        self._lock = threading.Lock()

    def __call__(self, ctx: PhiContext, cert: SymCertificate) -> SymCertificate:
        ok = all(ctx.chain.nu(e.letter.index) >= cert.spec.k for e in cert.factors)
        with self._lock:
            self.checked += 1
            if not ok:
                self.violations.append(cert)
        if not ok:
            raise AssertionError(f"certificate leaves U_{cert.spec.k}: {cert.to_json()}")
        return cert

    def reset(self) -> None:
        with self._lock:
            self.checked = 0
            self.violations = []


SUPPORT_AUDIT = SupportAudit()


def vphi_member(ctx: PhiContext, w: Word, n: int, h: Word = IDENTITY) -> Optional[Tuple[Word, Letter]]:
    """Decide ``w in V_{Phi_n^h}`` exactly; return ``(g, letter)`` with ``w = g^-1 letter g``.

    ``w`` must be a conjugate of one letter ``k^eps``.  Its conjugators are
    ``k^m * g0`` with ``g0`` the maximal wing, which never starts with ``k``.
    Prepending ``k^m`` to ``r = g0 h`` cancels at most the leading run of
    ``k``-letters in ``r`` and adds ``k`` per uncancelled letter, so
    ``|m| <= len(r) + 1`` already contains the minimal threshold.
    """
    if not w:
        raise ValueError("the identity is never in V_Phi")
    core, wing = cyclic_reduce(w)
    if len(core) != 1:
        return None
    letter = core.letters[0]
    gen = Word((2 * letter.index,))
    level = ctx.chain.nu(letter.index)
    r = multiply(wing, h)
    best: Optional[Tuple[int, Word]] = None
    window = len(r) + 1
    for step in range(2 * window + 1):
        m = (step + 1) // 2 if step % 2 else -(step // 2)
        g = wing
        for _ in range(abs(m)):
            g = multiply(gen if m > 0 else invert(gen), g)
        threshold = ctx.phi(n, multiply(g, h))
        if best is None or threshold < best[0]:
            best = (threshold, g)
    assert best is not None
    if level >= best[0]:
        return best[1], letter
    return None


def slot_cap(ctx: PhiContext, spec: SubbasicSpec, conjugator: Word, letter: Letter) -> int:
    """Largest slot at which ``conjugator^-1 letter conjugator`` is admissible (0 if none)."""
    level = ctx.chain.nu(letter.index)
    gh = multiply(conjugator, spec.h)
    cap = 0
    while ctx.phi(spec.k * (cap + 1), gh) <= level:
        cap += 1
    return cap


def assign_slots(caps: Sequence[int]) -> Optional[List[int]]:
    """Distinct slots ``1 <= s_i <= caps[i]``, as large as possible; None if impossible.

    Factors are served in order of decreasing cap, each taking the largest
    free slot below its cap; for nested ranges this succeeds iff any
    assignment exists.
    """
    order = sorted(range(len(caps)), key=lambda i: (-caps[i], i))
    used: set = set()
    slots = [0] * len(caps)
    for i in order:
        s = caps[i]
        while s in used:
            s -= 1
        if s < 1:
            return None
        used.add(s)
        slots[i] = s
    return slots


@dataclass(frozen=True)
class _Piece:
    word: Word
    conjugator: Word
    letter: Letter
    cap: int


def candidate_pieces(
    ctx: PhiContext, spec: SubbasicSpec, alphabet: Sequence[int], max_conj_len: int
) -> List[_Piece]:
    """Admissible conjugated letters over ``alphabet``, one per element, best cap kept."""
    best: Dict[Word, _Piece] = {}
    order: List[Word] = []
    letters = [Letter(k, e) for k in sorted(set(alphabet)) for e in (1, -1)]
    for g in words_over(alphabet, max_conj_len):
        for letter in letters:
            cap = slot_cap(ctx, spec, g, letter)
            if cap < 1:
                continue
            piece = conjugate(Word((letter.code,)), g)
            old = best.get(piece)
            if old is None:
                order.append(piece)
                best[piece] = _Piece(piece, g, letter, cap)
            elif cap > old.cap:
                best[piece] = _Piece(piece, g, letter, cap)
    return [best[p] for p in order]


def _certificate(spec: SubbasicSpec, pieces: Sequence[_Piece]) -> Optional[SymCertificate]:
    slots = assign_slots([p.cap for p in pieces])
    if slots is None:
        return None
    return SymCertificate(
        tuple(CertEntry(s, p.conjugator, p.letter) for s, p in zip(slots, pieces)), spec
    )


def _search_branch(
    first: Optional[_Piece],
    target: Word,
    pieces: Sequence[_Piece],
    lookup: Dict[Word, _Piece],
    n_factors: int,
    spec: SubbasicSpec,
) -> Tuple[Optional[SymCertificate], int]:
    """Depth-first search for ``n_factors`` pieces whose first piece is ``first``.

    The final piece is solved for, not enumerated: it must equal the inverse
    of the prefix product times ``target``.
    """
    explored = 0

    def rec(chosen: List[_Piece], prefix_inv: Word, remaining: int):
        nonlocal explored
        if remaining == 1:
            explored += 1
            last = lookup.get(multiply(prefix_inv, target))
            if last is None:
                return None
            if chosen and chosen[-1].word == invert(last.word):
                return None
            return _certificate(spec, chosen + [last])
        for p in pieces:
            if chosen and chosen[-1].word == invert(p.word):
                continue
            found = rec(chosen + [p], multiply(invert(p.word), prefix_inv), remaining - 1)
            if found is not None:
                return found
        return None

    if first is None:
        found = rec([], IDENTITY, n_factors)
    else:
        found = rec([first], invert(first.word), n_factors - 1)
    return found, explored


def sym_member_bounded(
    ctx: PhiContext,
    w: Word,
    spec: SubbasicSpec,
    max_factors: int,
    max_conj_len: int,
    alphabet: Optional[Iterable[int]] = None,
    workers: int = 1,
) -> SearchResult:
    """Bounded search for a certificate that ``w`` lies in ``<V_{Phi^h_{k n}}>``.

    Iterative deepening on the factor count, then on conjugator length; the
    first certificate in that order (pieces lexicographic within a level) is
    returned.  Letters and conjugator generators range over ``alphabet``,
    which defaults to the generators occurring in ``w`` and ``h``.  ``Unknown``
    only means nothing was found inside these bounds.

    With ``workers > 1`` the branches on the first piece run in a thread pool;
    the lowest-indexed successful branch is still the one returned.
    """
    if max_factors < 1 or max_conj_len < 0:
        raise ValueError("max_factors must be >= 1 and max_conj_len >= 0")
    if alphabet is None:
        alphabet = {c >> 1 for c in w.codes} | {c >> 1 for c in spec.h.codes}
    alphabet = sorted(set(alphabet))
    if not w:
        return SearchResult("Member", SUPPORT_AUDIT(ctx, SymCertificate((), spec)), 0)
    explored = 0
    for n_factors in range(1, max_factors + 1):
        for conj_len in range(0, max_conj_len + 1):
            pieces = candidate_pieces(ctx, spec, alphabet, conj_len)
            if not pieces:
                continue
            lookup = {p.word: p for p in pieces}
            if n_factors == 1 or workers <= 1:
                found, count = _search_branch(None, w, pieces, lookup, n_factors, spec)
                explored += count
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(
                        pool.map(lambda p: _search_branch(p, w, pieces, lookup, n_factors, spec), pieces)
                    )
                explored += sum(c for _, c in results)
                found = next((cert for cert, _ in results if cert is not None), None)
            if found is not None:
                return SearchResult("Member", SUPPORT_AUDIT(ctx, found), explored)
    return SearchResult("Unknown", None, explored)


def cert_verify(ctx: PhiContext, c: SymCertificate, w: Word) -> bool:
    """Recompute everything a certificate claims, independently of how it was found."""
    spec = c.spec
    if spec.k < 1:
        return False
    slots = [e.slot for e in c.factors]
    if any(s < 1 for s in slots) or len(set(slots)) != len(slots):
        return False
    for e in c.factors:
        if e.letter.exponent not in (1, -1) or e.letter.index < 0:
            return False
        if ctx.chain.nu(e.letter.index) < ctx.phi(spec.k * e.slot, multiply(e.conjugator, spec.h)):
            return False
    return c.product() == w


def cert_invert(ctx: PhiContext, c: SymCertificate) -> SymCertificate:
    """Certificate for the inverse element: reversed order, inverted letters."""
    out = SymCertificate(
        tuple(CertEntry(e.slot, e.conjugator, e.letter.inverse()) for e in reversed(c.factors)),
        c.spec,
    )
    return SUPPORT_AUDIT(ctx, out)


def cert_square(ctx: PhiContext, c1: SymCertificate, c2: SymCertificate) -> SymCertificate:
    """Merge two certificates for the doubled family into one for the undoubled family.

    Inputs use dilation ``2k``; slot ``n`` of ``c1`` moves to ``2n - 1`` and
    slot ``n`` of ``c2`` to ``2n``, which is admissible because the scale is
    monotone in the level.
    """
    if c1.spec.h != c2.spec.h:
        raise ValueError("certificates use different translates")
    if c1.spec.k != c2.spec.k:
        raise ValueError("certificates use different dilations")
    if c1.spec.k % 2:
        raise ValueError(f"squaring needs an even dilation, got {c1.spec.k}")
    spec = SubbasicSpec(c1.spec.h, c1.spec.k // 2)
    if not multiply(c1.product(), c2.product()):
        return SUPPORT_AUDIT(ctx, SymCertificate((), spec))
    entries = tuple(CertEntry(2 * e.slot - 1, e.conjugator, e.letter) for e in c1.factors) + tuple(
        CertEntry(2 * e.slot, e.conjugator, e.letter) for e in c2.factors
    )
    return SUPPORT_AUDIT(ctx, SymCertificate(entries, spec))


def cert_conjugate(ctx: PhiContext, c: SymCertificate, h: Word) -> SymCertificate:
    """Move a certificate for ``w`` against translate ``h`` to one for ``h^-1 w h`` against ``e``."""
    if c.spec.h != h:
        raise ValueError(f"certificate is for translate {format_word(c.spec.h)!r}, not {format_word(h)!r}")
    out = SymCertificate(
        tuple(CertEntry(e.slot, multiply(e.conjugator, h), e.letter) for e in c.factors),
        SubbasicSpec(IDENTITY, c.spec.k),
    )
    return SUPPORT_AUDIT(ctx, out)


# ---------------------------------------------------------------------------
# finite-group brute force for the Birkhoff-Kakutani product bound


@dataclass
class BKReport:
    k: int
    max_factors: int
    states: int = 0
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class FiniteTable:
    """A finite group given by its Cayley table ``table[i][j] = index of g_i g_j``."""

    def __init__(self, table: Sequence[Sequence[int]]):
        order = len(table)
        if order == 0 or any(len(row) != order for row in table):
            raise ValueError("Cayley table must be a non-empty square")
        self.order = order
        self.table = [list(map(int, row)) for row in table]
        for row in self.table:
            if sorted(row) != list(range(order)):
                raise ValueError("Cayley table rows must be permutations of the elements")
        for j in range(order):
            if sorted(self.table[i][j] for i in range(order)) != list(range(order)):
                raise ValueError("Cayley table columns must be permutations of the elements")
        ids = [i for i in range(order) if all(self.table[i][j] == j for j in range(order))]
        if not ids or any(self.table[j][ids[0]] != j for j in range(order)):
            raise ValueError("Cayley table has no identity")
        self.identity = ids[0]
        self.inverse = [self.table[i].index(self.identity) for i in range(order)]
        self.flat = array("i", [x for row in self.table for x in row])

    def check_associative(self) -> bool:
        t = self.table
        n = self.order
        return all(t[t[a][b]][c] == t[a][t[b][c]] for a in range(n) for b in range(n) for c in range(n))

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def product_set(self, left: Sequence[int], right: Sequence[int]) -> List[int]:
        return kernels.set_product(self.flat, self.order, left, right)


def validate_chain(group: FiniteTable, chain: Sequence[Iterable[int]]) -> List[frozenset]:
    sets = [frozenset(v) for v in chain]
    if not sets:
        raise HypothesisViolation("empty chain")
    for n, v in enumerate(sets):
        if group.identity not in v:
            raise HypothesisViolation(f"V_{n} does not contain the identity")
        bad = [x for x in v if group.inverse[x] not in v]
        if bad:
            raise HypothesisViolation(f"V_{n} is not symmetric (element {bad[0]})")
    for n in range(len(sets)):
        nxt = sets[min(n + 1, len(sets) - 1)]
        sq = set(group.product_set(sorted(nxt), sorted(nxt)))
        if not sq <= sets[n]:
            which = f"V_{n + 1}^2" if n + 1 < len(sets) else f"V_{n}^2 (constant tail)"
            raise HypothesisViolation(f"{which} is not contained in V_{n}")
    return sets


def bk_check_finite(
    table: Sequence[Sequence[int]] | FiniteTable,
    chain: Sequence[Iterable[int]],
    k: int,
    max_factors: int,
) -> BKReport:
    """Check that products of sets with distinct indices ``>= k + 2`` stay inside ``V_k``.

    The chain is extended by repeating its last set.  Every ordering of up to
    ``max_factors`` distinct indices is covered; search states that share the
    product set and the remaining index budget are visited once.
    """
    group = table if isinstance(table, FiniteTable) else FiniteTable(table)
    sets = validate_chain(group, chain)
    last = len(sets) - 1
    target = sets[min(k, last)]
    head = list(range(k + 2, last))  # indices whose set differs from the tail
    tail_set = sorted(sets[last])
    members = {i: sorted(sets[i]) for i in head}
    report = BKReport(k=k, max_factors=max_factors)
    seen: set = set()
    reported: set = set()

    def factorize(path: List[int], prefixes: List[List[int]], x: int) -> List[int]:
        # walk back through the stored prefix sets to recover one factor per index
        factors: List[int] = []
        for depth in range(len(path), 0, -1):
            opts = members.get(path[depth - 1], tail_set)
            prev = set(prefixes[depth - 1])
            for b in opts:
                y = group.mul(x, group.inverse[b])
                if y in prev:
                    factors.append(b)
                    x = y
                    break
        return list(reversed(factors))

    def dfs(prefix: List[int], used: frozenset, tails: int, path: List[int], prefixes: List[List[int]]):
        if len(path) == max_factors:
            return
        options = [i for i in head if i not in used] + ["tail"]
        for opt in options:
            if opt == "tail":
                nused, ntails, factor = used, tails + 1, tail_set
                label = last + 1 + tails
            else:
                nused, ntails, factor = used | {opt}, tails, members[opt]
                label = opt
            product = group.product_set(prefix, factor)
            key = (tuple(product), nused, ntails)
            if key in seen:
                continue
            seen.add(key)
            report.states += 1
            npath = path + [label]
            nprefixes = prefixes + [product]
            for x in product:
                if x not in target and x not in reported:
                    reported.add(x)
                    report.violations.append(
                        {"element": x, "indices": npath, "factors": factorize(npath, nprefixes, x)}
                    )
            dfs(product, nused, ntails, npath, nprefixes)

    dfs([group.identity], frozenset(), 0, [], [[group.identity]])
    return report


def cyclic_table(order: int) -> List[List[int]]:
    return [[(i + j) % order for j in range(order)] for i in range(order)]


def symmetric_group_table(degree: int) -> Tuple[List[List[int]], List[Tuple[int, ...]]]:
    """Cayley table of S_degree with ``(a*b)(i) = a(b(i))``; identity is element 0."""
    elements = sorted(permutations(range(degree)))
    pos = {p: i for i, p in enumerate(elements)}
    table = [[pos[tuple(a[b[i]] for i in range(degree))] for b in elements] for a in elements]
    return table, elements
