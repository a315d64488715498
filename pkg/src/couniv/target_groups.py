"""Oracle-presented countable metrizable groups with a neighborhood basis V_n.

Every oracle enumerates its elements with ``enumerate(1) == e``, decides
membership in ``V_n`` and supplies analytic bounds: ``conj_bound(g, n)`` is a
``j`` with ``g^-1 V_j g`` and ``g V_j g^-1`` inside ``V_n``, ``sq_bound(n)`` a
``j`` with ``V_j^2`` inside ``V_n``.  Containments between infinite sets are
never decided by search.
"""
from __future__ import annotations

import math
import threading
from abc import ABC, abstractmethod
from fractions import Fraction
from itertools import permutations
from pathlib import Path
from typing import Hashable, List, Optional, Sequence, Tuple

from .neighborhoods import FiniteTable, symmetric_group_table


class GroupOracle(ABC):
    name = "oracle"
    abelian = False

    @property
    def identity(self) -> Hashable:
        return self.enumerate(1)

    @abstractmethod
    def enumerate(self, m: int) -> Hashable:
        """The ``m``-th element, ``m >= 1``; ``enumerate(1)`` is the identity."""

    @abstractmethod
    def mul(self, a, b): ...

    @abstractmethod
    def inv(self, a): ...

    @abstractmethod
    def basis_member(self, n: int, g) -> bool: ...

    @abstractmethod
    def basis_enumerate(self, n: int, i: int):
        """Injective enumeration of ``V_n`` with ``basis_enumerate(n, 0) == e``."""

    @abstractmethod
    def conj_bound(self, g, n: int) -> int: ...

    @abstractmethod
    def sq_bound(self, n: int) -> int: ...

    def theta_exact(self, g, n: int) -> Optional[int]:
        return None

    def order(self) -> Optional[int]:
        """Number of elements, or None when infinite."""
        return None

    def basis_size(self, n: int) -> Optional[int]:
        return None

    def power(self, g, e: int):
        base = g if e >= 0 else self.inv(g)
        out = self.identity
        for _ in range(abs(e)):
            out = self.mul(out, base)
        return out

    def conj(self, v, g):
        """``g^-1 v g``."""
        return self.mul(self.mul(self.inv(g), v), g)

    def format(self, g) -> str:
        return str(g)

    def to_json(self, g):
        return self.format(g)


def _zigzag(i: int) -> int:
    """0, 1, -1, 2, -2, ... for i = 0, 1, 2, ..."""
    return (i + 1) // 2 if i % 2 else -(i // 2)


class IntegersPadic(GroupOracle):
    """(Z, +) with ``V_n = p^n Z``."""

    abelian = True

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
            raise ValueError(f"p must be prime, got {p}")
        self.p = p
        self.name = f"zp{p}"

    def enumerate(self, m):
        if m < 1:
            raise ValueError("enumeration starts at 1")
        return _zigzag(m - 1)

    def index_of(self, g: int) -> int:
        return 2 * g if g > 0 else -2 * g + 1

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def power(self, g, e):
        return g * e

    def basis_member(self, n, g):
        return g % self.p**n == 0

    def basis_enumerate(self, n, i):
        return self.p**n * _zigzag(i)

    def conj_bound(self, g, n):
        return n

    def sq_bound(self, n):
        return n

    def theta_exact(self, g, n):
        return n

    def to_json(self, g):
        return g


class Perm(tuple):
    """A finitary permutation of N stored as its image tuple on ``0..d-1``.

    Trailing fixed points are trimmed, so equal permutations compare equal.
    Products compose right to left: ``(a*b)(i) = a(b(i))``.
    """

    def __new__(cls, images: Sequence[int] = ()):
        images = list(images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation of 0..{len(images) - 1}: {images}")
        while images and images[-1] == len(images) - 1:
            images.pop()
        return super().__new__(cls, images)

    def __call__(self, i: int) -> int:
        return self[i] if i < len(self) else i

    @property
    def degree(self) -> int:
        return len(self)

    def inverse(self) -> "Perm":
        out = [0] * len(self)
        for i, x in enumerate(self):
            out[x] = i
        return Perm(out)

    def __str__(self) -> str:
        cycles = []
        seen = set()
        for start in range(len(self)):
            if start in seen or self[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            x = self[start]
            while x != start:
                cyc.append(x)
                seen.add(x)
                x = self[x]
            cycles.append("(" + " ".join(map(str, cyc)) + ")")
        return "".join(cycles) or "()"


def perm_mul(a: Perm, b: Perm) -> Perm:
    d = max(len(a), len(b))
    return Perm([a(b(i)) for i in range(d)])


def transposition(i: int, j: int) -> Perm:
    images = list(range(max(i, j) + 1))
    images[i], images[j] = j, i
    return Perm(images)


class FinitarySymmetric(GroupOracle):
    """Finitary permutations of N; ``V_n`` fixes ``0..n-1`` pointwise.

    Elements are enumerated by degree (largest moved point + 1), and within a
    degree in lexicographic order of the image tuple.
    """

    name = "symfin"

    def __init__(self):
        self._elements: List[Perm] = [Perm()]
        self._degree_done = 1
        self._index: dict = {Perm(): 1}
        self._lock = threading.Lock()

    def _grow(self, count: int) -> None:
        with self._lock:
            while len(self._elements) < count:
                d = self._degree_done + 1
                for images in permutations(range(d)):
                    if images[d - 1] != d - 1:
                        p = Perm(images)
                        self._elements.append(p)
                        self._index[p] = len(self._elements)
                self._degree_done = d

    def enumerate(self, m):
        if m < 1:
            raise ValueError("enumeration starts at 1")
        self._grow(m)
        return self._elements[m - 1]

    def index_of(self, g: Perm) -> int:
        self._grow(math.factorial(max(g.degree, 1)))
        return self._index[g]

    def mul(self, a, b):
        return perm_mul(a, b)

    def inv(self, a):
        return a.inverse()

    def basis_member(self, n, g):
        return all(g(i) == i for i in range(min(n, g.degree)))

    def basis_enumerate(self, n, i):
        # shift the i-th permutation so it acts on n, n+1, ...
        p = self.enumerate(i + 1)
        return Perm(list(range(n)) + [n + x for x in p])

    def conj_bound(self, g, n):
        return self.theta_exact(g, n)

    def sq_bound(self, n):
        return n

    def theta_exact(self, g, n):
        # g^-1 V_j g is the pointwise stabilizer of g^-1{0..j-1}; it lies in V_n
        # iff g(i) < j for all i < n, and symmetrically for g^-1
        if n == 0:
            return 0
        ginv = g.inverse()
        return max(max(g(i), ginv(i)) for i in range(n)) + 1

    def format(self, g):
        return str(g)

    def to_json(self, g):
        return list(g)


class DyadicRationals(GroupOracle):
    """(Z[1/2], +) with ``V_0 = G`` and ``V_n = {q : |q| < 2^-n}`` for ``n >= 1``."""

    abelian = True
    name = "dyadic"

    def __init__(self):
        self._elements: List[Fraction] = [Fraction(0)]
        self._seen = {Fraction(0)}
        self._level = 0
        self._lock = threading.Lock()

    def _grow(self, count: int) -> None:
        # level s adds every a / 2^b with b <= s and |a| <= s not seen before
        with self._lock:
            while len(self._elements) < count:
                self._level += 1
                s = self._level
                for b in range(s + 1):
                    for a in range(1, s + 1):
                        for q in (Fraction(a, 2**b), Fraction(-a, 2**b)):
                            if q not in self._seen:
                                self._seen.add(q)
                                self._elements.append(q)

    def enumerate(self, m):
        if m < 1:
            raise ValueError("enumeration starts at 1")
        self._grow(m)
        return self._elements[m - 1]

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def power(self, g, e):
        return g * e

    def basis_member(self, n, g):
        return n == 0 or abs(g) < Fraction(1, 2**n)

    def basis_enumerate(self, n, i):
        if n == 0:
            return self.enumerate(i + 1)
        return _unit_dyadic(i) / 2**n

    def conj_bound(self, g, n):
        return n

    def sq_bound(self, n):
        return n + 1

    def theta_exact(self, g, n):
        return n

    def to_json(self, g):
        return str(g)


def _unit_dyadic(i: int) -> Fraction:
    """Bijection from N onto the dyadic rationals in (-1, 1), starting at 0."""
    if i == 0:
        return Fraction(0)
    # level b >= 1 holds the 2^b odd numerators a with |a| < 2^b
    i -= 1
    b = 1
    while i >= 2**b:
        i -= 2**b
        b += 1
    a = 2 * (i // 2) + 1
    return Fraction(a if i % 2 == 0 else -a, 2**b)


class FiniteDiscrete(GroupOracle):
    """A finite group from a Cayley table, discrete: ``V_n = {e}`` for ``n >= 1``."""

    def __init__(self, table: Sequence[Sequence[int]] | FiniteTable, name: str = "finite"):
        self.group = table if isinstance(table, FiniteTable) else FiniteTable(table)
        if not self.group.check_associative():
            raise ValueError("Cayley table is not associative")
        self.name = name
        e = self.group.identity
        self._order = [e] + [i for i in range(self.group.order) if i != e]

    def order(self):
        return self.group.order

    def basis_size(self, n):
        return self.group.order if n == 0 else 1

    def enumerate(self, m):
        if not 1 <= m <= len(self._order):
            raise IndexError(f"finite group has {len(self._order)} elements")
        return self._order[m - 1]

    def mul(self, a, b):
        return self.group.table[a][b]

    def inv(self, a):
        return self.group.inverse[a]

    def basis_member(self, n, g):
        return n == 0 or g == self.group.identity

    def basis_enumerate(self, n, i):
        if n == 0:
            return self.enumerate(i + 1)
        if i != 0:
            raise IndexError("V_n = {e} for n >= 1")
        return self.group.identity

    def conj_bound(self, g, n):
        return 0 if n == 0 else 1

    def sq_bound(self, n):
        return 0 if n == 0 else 1

    def theta_exact(self, g, n):
        if n == 0 or self.group.order == 1:
            return 0
        return 1

    def to_json(self, g):
        return g


class BoundsOnly(GroupOracle):
    """Wraps an oracle and hides its exact scale, leaving only ``conj_bound``."""

    def __init__(self, inner: GroupOracle):
        self.inner = inner
        self.name = f"{inner.name}-bounds"
        self.abelian = inner.abelian

    def enumerate(self, m):
        return self.inner.enumerate(m)

    def mul(self, a, b):
        return self.inner.mul(a, b)

    def inv(self, a):
        return self.inner.inv(a)

    def basis_member(self, n, g):
        return self.inner.basis_member(n, g)

    def basis_enumerate(self, n, i):
        return self.inner.basis_enumerate(n, i)

    def conj_bound(self, g, n):
        return self.inner.conj_bound(g, n)

    def sq_bound(self, n):
        return self.inner.sq_bound(n)

    def order(self):
        return self.inner.order()

    def basis_size(self, n):
        return self.inner.basis_size(n)

    def format(self, g):
        return self.inner.format(g)

    def to_json(self, g):
        return self.inner.to_json(g)


def adapter_int_padic(p: int) -> IntegersPadic:
    return IntegersPadic(p)


def adapter_sym_fin() -> FinitarySymmetric:
    return FinitarySymmetric()


def adapter_dyadic_rationals() -> DyadicRationals:
    return DyadicRationals()


def adapter_finite(table) -> FiniteDiscrete:
    return FiniteDiscrete(table)


def read_cayley_table(path: str | Path) -> List[List[int]]:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([int(tok) for tok in line.split()])
    return rows


def write_cayley_table(path: str | Path, table: Sequence[Sequence[int]]) -> None:
    Path(path).write_text("\n".join(" ".join(map(str, row)) for row in table) + "\n")


def oracle_from_id(group_id: str) -> GroupOracle:
    """``zp<p>``, ``symfin``, ``dyadic``, ``finite:<file>``, or the builtins ``finite:s3`` / ``finite:c<n>``."""
    if group_id.startswith("zp"):
        return IntegersPadic(int(group_id[2:]))
    if group_id == "symfin":
        return FinitarySymmetric()
    if group_id == "dyadic":
        return DyadicRationals()
    if group_id.startswith("finite:"):
        ref = group_id.split(":", 1)[1]
        if ref.startswith("s") and ref[1:].isdigit():
            table, _ = symmetric_group_table(int(ref[1:]))
        elif ref.startswith("c") and ref[1:].isdigit():
            order = int(ref[1:])
            table = [[(i + j) % order for j in range(order)] for i in range(order)]
        else:
            table = read_cayley_table(ref)
        oracle = FiniteDiscrete(table, name=group_id)
        return oracle
    raise ValueError(f"unknown group {group_id!r}")


def check_oracle(oracle: GroupOracle, n_max: int = 6, elements: int = 50, samples: int = 50) -> List[str]:
    """Sample the oracle axioms; returns the problems found."""
    problems: List[str] = []
    e = oracle.identity
    size = oracle.order()
    count = elements if size is None else min(elements, size)
    gs = [oracle.enumerate(m) for m in range(1, count + 1)]
    if len(set(map(_key, gs))) != len(gs):
        problems.append("enumeration is not injective")
    for n in range(n_max + 1):
        vsize = oracle.basis_size(n)
        vcount = samples if vsize is None else min(samples, vsize)
        vs = [oracle.basis_enumerate(n, i) for i in range(vcount)]
        if vs[0] != e:
            problems.append(f"basis_enumerate({n}, 0) is not the identity")
        if len(set(map(_key, vs))) != len(vs):
            problems.append(f"basis_enumerate({n}, .) repeats")
        for v in vs:
            if not oracle.basis_member(n, v):
                problems.append(f"basis_enumerate({n}, .) left V_{n}: {oracle.format(v)}")
            if not oracle.basis_member(n, oracle.inv(v)):
                problems.append(f"V_{n} is not symmetric at {oracle.format(v)}")
        j = oracle.sq_bound(n)
        wsize = oracle.basis_size(j)
        ws = [oracle.basis_enumerate(j, i) for i in range(min(12, wsize or 12))]
        for a in ws:
            for b in ws:
                if not oracle.basis_member(n, oracle.mul(a, b)):
                    problems.append(f"V_{j}^2 not inside V_{n}")
        for g in gs:
            j = oracle.conj_bound(g, n)
            jsize = oracle.basis_size(j)
            for i in range(min(samples, jsize or samples)):
                v = oracle.basis_enumerate(j, i)
                if not (oracle.basis_member(n, oracle.conj(v, g)) and oracle.basis_member(n, oracle.conj(v, oracle.inv(g)))):
                    problems.append(f"conj_bound({oracle.format(g)}, {n}) unsound at {oracle.format(v)}")
                    break
    if not all(oracle.basis_member(0, g) for g in gs):
        problems.append("V_0 is not the whole group")
    return problems


def _key(g):
    return g if not isinstance(g, list) else tuple(g)


def settled_level(oracle: GroupOracle, g) -> Optional[int]:
    """A raw level ``L`` with ``theta_g(j) == j`` for every ``j >= L``, when known."""
    inner = oracle.inner if isinstance(oracle, BoundsOnly) else oracle
    if isinstance(inner, FinitarySymmetric):
        return g.degree
    if isinstance(inner, (IntegersPadic, DyadicRationals)):
        return 0
    if isinstance(inner, FiniteDiscrete):
        return 1
    return None
