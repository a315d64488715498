"""Pure-Python versions of the hot kernels.

Letters are encoded as ints: ``2*k`` is generator ``k`` and ``2*k + 1`` its
inverse, so ``code ^ 1`` inverts a letter and ``code >> 1`` recovers the index.
"""
from __future__ import annotations

from typing import Sequence, Tuple


def reduce_codes(codes: Sequence[int]) -> Tuple[int, ...]:
    out: list[int] = []
    for c in codes:
        if out and out[-1] == c ^ 1:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def mul_codes(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    # both inputs reduced: only the junction can cancel
    i = len(a)
    j = 0
    nb = len(b)
    while i > 0 and j < nb and a[i - 1] == b[j] ^ 1:
        i -= 1
        j += 1
    return a[:i] + b[j:]


def index_sum_codes(codes: Sequence[int]) -> int:
    return sum(c >> 1 for c in codes)


def phi_recursive(n: int, codes: Sequence[int]) -> int:
    """Evaluate the scale recursion bottom-up over contiguous subwords.

    ``table[i]`` holds the value on the subword of the current length that
    starts at ``i``; a single letter ``k`` at level ``m`` is worth ``m + k``.
    """
    length = len(codes)
    if length == 0:
        return n
    table = [n + (c >> 1) for c in codes]
    for span in range(2, length + 1):
        nxt = []
        for i in range(length - span + 1):
            # prefix codes[i:i+span-1] is table[i], suffix codes[i+1:i+span] is table[i+1]
            left = table[i] + (codes[i + span - 1] >> 1)
            right = table[i + 1] + (codes[i] >> 1)
            nxt.append(left if left >= right else right)
        table = nxt
    return table[0]


def set_product(flat: Sequence[int], order: int, left: Sequence[int], right: Sequence[int]) -> list[int]:
    """Sorted list of all products ``a*b`` for a in left, b in right.

    ``flat`` is the Cayley table in row-major order: ``a*b = flat[a*order + b]``.
    """
    seen = bytearray(order)
    for a in left:
        base = a * order
        for b in right:
            seen[flat[base + b]] = 1
    return [i for i, flag in enumerate(seen) if flag]
