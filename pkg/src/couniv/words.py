"""Reduced words in the free group F(N) on generators 0, 1, 2, ...

Text format: whitespace separated tokens, ``k`` for generator k and ``k'`` for
its inverse; the empty string is the identity.
"""
from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple, Sequence, Tuple

from . import kernels


class Letter(NamedTuple):
    index: int
    exponent: int = 1

    @property
    def code(self) -> int:
        return 2 * self.index + (0 if self.exponent == 1 else 1)

    @classmethod
    def from_code(cls, code: int) -> "Letter":
        return cls(code >> 1, -1 if code & 1 else 1)

    def inverse(self) -> "Letter":
        return Letter(self.index, -self.exponent)

    def __str__(self) -> str:
        return f"{self.index}'" if self.exponent == -1 else str(self.index)


def letter_code(index: int, exponent: int = 1) -> int:
    if index < 0:
        raise ValueError(f"generator index must be a natural number, got {index}")
    if exponent not in (1, -1):
        raise ValueError(f"exponent must be +1 or -1, got {exponent}")
    return 2 * index + (0 if exponent == 1 else 1)


class Word:
    """An immutable, freely reduced word.

    Stored as a tuple of letter codes (``2k`` / ``2k+1``). Construct through
    :func:`reduce`, :func:`parse_word` or :meth:`Word.of`; the raw constructor
    trusts its input to be reduced.
    """

    __slots__ = ("codes",)

    def __init__(self, codes: Tuple[int, ...] = ()):
        object.__setattr__(self, "codes", codes)

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    @classmethod
    def of(cls, *items) -> "Word":
        """Build and reduce from ints (generators) and ``(k, eps)`` pairs.

        ``Word.of(3, (5, -1), 5, 2)`` is ``3 5' 5 2`` which reduces to ``3 2``.
        """
        codes = []
        for item in items:
            if isinstance(item, Letter):
                codes.append(item.code)
            elif isinstance(item, tuple):
                codes.append(letter_code(*item))
            else:
                codes.append(letter_code(item))
        return cls(kernels.reduce_codes(codes))

    @property
    def letters(self) -> Tuple[Letter, ...]:
        return tuple(Letter.from_code(c) for c in self.codes)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __len__(self) -> int:
        return len(self.codes)

    def __bool__(self) -> bool:
        return bool(self.codes)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.codes == other.codes

    def __lt__(self, other: "Word") -> bool:
        return (len(self.codes), self.codes) < (len(other.codes), other.codes)

    def __hash__(self) -> int:
        return hash(self.codes)

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


IDENTITY = Word(())


def reduce(raw: Iterable) -> Word:
    """Freely reduce a sequence of :class:`Letter` (or letter codes)."""
    codes = [x.code if isinstance(x, Letter) else int(x) for x in raw]
    return Word(kernels.reduce_codes(codes))


def multiply(a: Word, b: Word) -> Word:
    return Word(kernels.mul_codes(a.codes, b.codes))


def invert(w: Word) -> Word:
    return Word(tuple(c ^ 1 for c in reversed(w.codes)))


def conjugate(w: Word, g: Word) -> Word:
    """Return ``g^-1 w g``."""
    return multiply(multiply(invert(g), w), g)


def power(w: Word, exponent: int) -> Word:
    base = w if exponent >= 0 else invert(w)
    out = IDENTITY
    for _ in range(abs(exponent)):
        out = multiply(out, base)
    return out


def cyclic_reduce(w: Word) -> Tuple[Word, Word]:
    """Split ``w`` as ``wing^-1 * core * wing`` with ``core`` cyclically reduced.

    Matched inverse pairs are stripped greedily from both ends, so the wing is
    as long as possible.
    """
    codes = w.codes
    i, j = 0, len(codes) - 1
    while i < j and codes[i] == codes[j] ^ 1:
        i += 1
        j -= 1
    return Word(codes[i : j + 1]), Word(codes[j + 1 :])


def index_sum(w: Word) -> int:
    """Sum of generator indices over all letters, ignoring exponents."""
    return kernels.index_sum_codes(w.codes)


def max_index(w: Word) -> int:
    return max((c >> 1 for c in w.codes), default=-1)


def parse_word(text: str) -> Word:
    codes = []
    for token in text.split():
        inv = token.endswith("'")
        body = token[:-1] if inv else token
        if not body.isdigit():
            raise ValueError(f"bad word token {token!r}")
        codes.append(letter_code(int(body), -1 if inv else 1))
    return Word(kernels.reduce_codes(codes))


def format_word(w: Word) -> str:
    return " ".join(str(Letter.from_code(c)) for c in w.codes)


def reduced_words(max_len: int, max_letter: int, min_len: int = 0) -> Iterator[Word]:
    """All reduced words with ``min_len <= len <= max_len`` over generators ``0..max_letter``.

    Ordered by length, then lexicographically by letter code.
    """
    alphabet = range(2 * (max_letter + 1))

    def extend(prefix: Tuple[int, ...], remaining: int) -> Iterator[Tuple[int, ...]]:
        if remaining == 0:
            yield prefix
            return
        last = prefix[-1] if prefix else None
        for c in alphabet:
            if last is not None and c == last ^ 1:
                continue
            yield from extend(prefix + (c,), remaining - 1)

    for length in range(min_len, max_len + 1):
        for codes in extend((), length):
            yield Word(codes)


def words_over(indices: Sequence[int], max_len: int) -> Iterator[Word]:
    """All reduced words of length ``<= max_len`` using only the given generators."""
    alphabet = sorted({letter_code(k, e) for k in indices for e in (1, -1)})

    def extend(prefix: Tuple[int, ...], remaining: int) -> Iterator[Tuple[int, ...]]:
        yield prefix
        if remaining == 0:
            return
        last = prefix[-1] if prefix else None
        for c in alphabet:
            if last is not None and c == last ^ 1:
                continue
            yield from extend(prefix + (c,), remaining - 1)

    by_len: dict[int, list[Tuple[int, ...]]] = {}
    for codes in extend((), max_len):
        by_len.setdefault(len(codes), []).append(codes)
    for length in sorted(by_len):
        for codes in by_len[length]:
            yield Word(codes)
