"""The index chain U_n on the naturals and the scale functions phi_n.

A chain is stored as a level function ``nu``: ``m`` lies in ``U_n`` iff
``nu(m) >= n``.  The scale of a reduced word at level ``n`` is computed by the
recursion over its prefix and suffix; :func:`phi_closed` is the independent
closed form ``n + index_sum(w)`` used to cross-check it.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional

from . import kernels
from .words import IDENTITY, Word, format_word, index_sum, multiply


def padic_valuation(value: int, p: int) -> int:
    if value == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return v


@dataclass(frozen=True)
class IndexChain:
    """Decreasing chain ``U_0 = N ⊇ U_1 ⊇ ...`` given by its level function.

    ``base`` is set for the p-adic chains ``nu(m) = v_p(m + 1)``, which have a
    closed-form fiber enumeration; custom chains fall back to scanning.
    """

    name: str
    level_fn: Callable[[int], int] = field(compare=False)
    base: Optional[int] = None

    def nu(self, m: int) -> int:
        if m < 0:
            raise ValueError(f"chain is defined on naturals, got {m}")
        return self.level_fn(m)

    def member(self, m: int, n: int) -> bool:
        return self.nu(m) >= n

    def fiber(self, n: int) -> Iterator[int]:
        """Points of ``U_n \\ U_{n+1}`` in increasing order."""
        if self.base is not None:
            r = 0
            while True:
                yield self.fiber_point(n, r)
                r += 1
        m = 0
        while True:
            if self.level_fn(m) == n:
                yield m
            m += 1

    def fiber_point(self, n: int, r: int) -> int:
        """The ``r``-th (0-based) point of the fiber over ``n``."""
        if self.base is None:
            for i, m in enumerate(self.fiber(n)):
                if i == r:
                    return m
        p = self.base
        # the r-th positive integer not divisible by p
        q = r + r // (p - 1) + 1
        return p**n * q - 1

    def fiber_position(self, m: int) -> int:
        """Inverse of :meth:`fiber_point`: how many fiber points precede ``m``."""
        n = self.nu(m)
        if self.base is not None:
            p = self.base
            q = (m + 1) // p**n
            return q - 1 - (q - 1) // p
        return sum(1 for k in range(m) if self.level_fn(k) == n)

    def point_with_level_at_least(self, t: int, r: int = 0) -> int:
        """A point of ``U_t``; with the p-adic chains it has level exactly ``t``."""
        return self.fiber_point(t, r)


def dyadic_chain() -> IndexChain:
    return IndexChain("dyadic", lambda m: padic_valuation(m + 1, 2), base=2)


def padic_chain(p: int) -> IndexChain:
    if p < 2:
        raise ValueError("chain base must be >= 2")
    return IndexChain(f"padic:{p}", lambda m: padic_valuation(m + 1, p), base=p)


def chain_from_id(chain_id: str) -> IndexChain:
    if chain_id == "dyadic":
        return dyadic_chain()
    if chain_id == "triadic":
        return padic_chain(3)
    if chain_id.startswith("padic:"):
        return padic_chain(int(chain_id.split(":", 1)[1]))
    raise ValueError(f"unknown chain {chain_id!r} (expected dyadic, triadic or padic:<p>)")


def check_chain(chain: IndexChain, n_max: int = 5, per_fiber: int = 20, bound: int = 10**6) -> List[str]:
    """Spot-check the chain axioms; returns a list of problems (empty if fine)."""
    problems = []
    for n in range(n_max + 1):
        found = 0
        for m in chain.fiber(n):
            if m >= bound:
                break
            found += 1
            if found >= per_fiber:
                break
        if found < per_fiber:
            problems.append(f"fiber {n} has fewer than {per_fiber} points below {bound}")
    return problems


class PhiContext:
    """Memoized evaluation of ``phi_n`` for one chain.

    The memo is keyed on ``(n, word)`` and guarded by a lock, so one context
    can be shared between threads.
    """

    def __init__(self, chain: Optional[IndexChain] = None, memo_limit: int = 1 << 18):
        self.chain = chain if chain is not None else dyadic_chain()
        self._memo: dict = {}
        self._lock = threading.Lock()
        self.memo_limit = memo_limit

    def phi(self, n: int, w: Word) -> int:
        key = (n, w.codes)
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            return hit
        value = kernels.phi_recursive(n, w.codes)
        with self._lock:
            if len(self._memo) >= self.memo_limit:
                self._memo.clear()
            self._memo[key] = value
        return value

    def Phi_level(self, n: int, w: Word) -> int:
        """``Phi_n(w) = U_{phi_n(w)}``; returned as the chain level."""
        return self.phi(n, w)

    def in_Phi(self, n: int, w: Word, k: int) -> bool:
        return self.chain.nu(k) >= self.phi(n, w)


def phi(ctx: PhiContext, n: int, w: Word) -> int:
    return ctx.phi(n, w)


def phi_closed(ctx: PhiContext, n: int, w: Word) -> int:
    return n + index_sum(w)


def phi_threshold(ctx: PhiContext, n: int, g: Word, h: Word = IDENTITY) -> int:
    """Chain level required of a letter in ``Phi_n^h(g) = U_{phi_n(g h)}``."""
    return ctx.phi(n, multiply(g, h))


def phi_reference(n: int, w: Word) -> int:
    """Top-down transcription of the recursion, without sharing subresults.

    Exponential in the word length; used only to test the tabulated kernels.
    """
    codes = w.codes
    if not codes:
        return n
    if len(codes) == 1:
        return n + (codes[0] >> 1)
    left = phi_reference(n, Word(codes[:-1])) + (codes[-1] >> 1)
    right = phi_reference(n, Word(codes[1:])) + (codes[0] >> 1)
    return max(left, right)


def explain(n: int, w: Word, indent: str = "") -> List[str]:
    """Recursion tree for ``phi_n(w)`` as indented text lines."""
    codes = w.codes
    if not codes:
        return [f"{indent}phi_{n}(e) = {n}"]
    if len(codes) == 1:
        return [f"{indent}phi_{n}({format_word(w)}) = {n} + {codes[0] >> 1} = {n + (codes[0] >> 1)}"]
    prefix, suffix = Word(codes[:-1]), Word(codes[1:])
    pv = kernels.phi_recursive(n, prefix.codes)
    sv = kernels.phi_recursive(n, suffix.codes)
    last, first = codes[-1] >> 1, codes[0] >> 1
    value = max(pv + last, sv + first)
    lines = [
        f"{indent}phi_{n}({format_word(w)}) = max(phi_{pv}({last}), phi_{sv}({first}))"
        f" = max({pv + last}, {sv + first}) = {value}"
    ]
    lines.extend(explain(n, prefix, indent + "  "))
    lines.extend(explain(n, suffix, indent + "  "))
    return lines
