"""Finite-sample model of the group K of piecewise-projection maps.

A point ``x = (x_0, ..., x_{d-1})`` is a truncated sequence of group elements.
A map in K is given by a partition of a finite sample set into cells and an
H-word per cell, i.e. a reduced word whose letter ``i`` stands for the
projection ``p_i(x) = x_i``.  Every subset of the sample counts as clopen.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Hashable, List, Optional, Sequence, Tuple

from .target_groups import GroupOracle
from .words import IDENTITY, Letter, Word, format_word, invert, multiply, power, words_over


class UnknownPoint(KeyError):
    pass


class BNotInV(ValueError):
    """The requested value is outside the chosen neighborhood V; shrink it first."""


@dataclass(frozen=True)
class SamplePoint:
    coords: Tuple[Hashable, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError("a sample point needs at least one coordinate")

    @property
    def d(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class PiecewiseMap:
    """``partition[i]`` is the cell of ``sample[i]``; ``cell_words[c]`` the H-word on cell ``c``.

    Kept canonical: cells are numbered by first occurrence and carry distinct
    words, so equal maps compare equal.
    """

    sample: Tuple[SamplePoint, ...]
    partition: Tuple[int, ...]
    cell_words: Tuple[Word, ...]

    def __post_init__(self):
        if len(self.partition) != len(self.sample):
            raise ValueError("every sample point needs exactly one cell")
        if any(not 0 <= c < len(self.cell_words) for c in self.partition):
            raise ValueError("partition refers to a missing cell")
        d = min(p.d for p in self.sample)
        for w in self.cell_words:
            if any((c >> 1) >= d for c in w.codes):
                raise ValueError(f"H-word {format_word(w)!r} uses a coordinate >= {d}")

    def word_at(self, x: SamplePoint) -> Word:
        try:
            i = self.sample.index(x)
        except ValueError:
            raise UnknownPoint(x) from None
        return self.cell_words[self.partition[i]]


def make_map(sample: Sequence[SamplePoint], words_per_point: Sequence[Word]) -> PiecewiseMap:
    """Canonical map from one word per sample point (equal words share a cell)."""
    cells: dict = {}
    partition = []
    for w in words_per_point:
        partition.append(cells.setdefault(w, len(cells)))
    return PiecewiseMap(tuple(sample), tuple(partition), tuple(cells))


def constant_map(sample: Sequence[SamplePoint], word: Word = IDENTITY) -> PiecewiseMap:
    return make_map(sample, [word] * len(sample))


def projection(sample: Sequence[SamplePoint], i: int) -> PiecewiseMap:
    return constant_map(sample, Word((2 * i,)))


def eval_word(oracle: GroupOracle, word: Word, x: SamplePoint):
    out = oracle.identity
    for letter in word.letters:
        v = x.coords[letter.index]
        out = oracle.mul(out, v if letter.exponent == 1 else oracle.inv(v))
    return out


def eval_map(oracle: GroupOracle, f: PiecewiseMap, x: SamplePoint):
    return eval_word(oracle, f.word_at(x), x)


def _per_point(f: PiecewiseMap) -> List[Word]:
    return [f.cell_words[c] for c in f.partition]


def k_mul(f: PiecewiseMap, g: PiecewiseMap) -> PiecewiseMap:
    """Pointwise product over the common refinement of the two partitions."""
    if f.sample != g.sample:
        raise ValueError("maps live on different sample sets")
    return make_map(f.sample, [multiply(a, b) for a, b in zip(_per_point(f), _per_point(g))])


def k_inv(f: PiecewiseMap) -> PiecewiseMap:
    return make_map(f.sample, [invert(w) for w in _per_point(f)])


def k_conj(f: PiecewiseMap, g: PiecewiseMap) -> PiecewiseMap:
    """``g^-1 f g``."""
    return k_mul(k_mul(k_inv(g), f), g)


def w_u_member(oracle: GroupOracle, f: PiecewiseMap, u_index: int) -> bool:
    """``f(X) ⊂ V_u``, checked at every sample point."""
    return all(oracle.basis_member(u_index, eval_map(oracle, f, x)) for x in f.sample)


def invariant_nbhd_member(
    oracle: GroupOracle, f: PiecewiseMap, conjugators: Sequence[PiecewiseMap], u_index: int
) -> bool:
    """``f`` lies in the intersection of ``g_i W_U g_i^-1`` (plain ``W_U`` if no conjugators)."""
    if not conjugators:
        return w_u_member(oracle, f, u_index)
    return all(w_u_member(oracle, k_conj(f, g), u_index) for g in conjugators)


def cube_bound(oracle: GroupOracle, a, u_index: int) -> int:
    """Index ``j`` with ``a^-1 V_j^3 a`` inside ``V_u``.

    ``V_j^2 ⊆ V_{j2}`` and ``V_{j2}^2 ⊆ V_{j1}`` give
    ``V_j^3 ⊆ V_{j2} V_{j2} ⊆ V_{j1}``, then conjugation lands in ``V_u``.
    """
    j1 = oracle.conj_bound(a, u_index)
    j2 = max(oracle.sq_bound(j1), j1)
    return max(oracle.sq_bound(j2), j2)


@dataclass
class OpennessTranscript:
    point: SamplePoint
    a: list
    v_index: int
    b: Hashable
    witness: Optional[PiecewiseMap]
    checks: dict

    def to_json(self, oracle: GroupOracle) -> dict:
        return {
            "x": [oracle.to_json(c) for c in self.point.coords],
            "a": [oracle.to_json(v) for v in self.a],
            "v_index": self.v_index,
            "b": oracle.to_json(self.b),
            "witness": None
            if self.witness is None
            else {
                "partition": list(self.witness.partition),
                "cell_words": [format_word(w) for w in self.witness.cell_words],
            },
            "checks": self.checks,
        }


def openness_witness(
    oracle: GroupOracle,
    x: SamplePoint,
    conjugators: Sequence[PiecewiseMap],
    u_index: int,
    b_word: Word,
    sample: Optional[Sequence[SamplePoint]] = None,
    cube_samples: int = 6,
) -> OpennessTranscript:
    """Produce ``f`` in the intersection of ``g_i W_U g_i^-1`` with ``f(x) = b``.

    ``V`` is chosen from the values ``a_i = g_i(x)`` so that every
    ``a_i^-1 V^3 a_i`` lies in ``U``; ``f`` is ``b_word`` on the cell ``{x}``
    and the identity elsewhere.  The resulting membership is re-checked here
    and a failure raises AssertionError.
    """
    if sample is None:
        if not conjugators:
            raise ValueError("pass the sample set when there are no conjugators")
        sample = conjugators[0].sample
    sample = tuple(sample)
    if x not in sample:
        raise UnknownPoint(x)
    a = [eval_map(oracle, g, x) for g in conjugators]
    v_index = max([cube_bound(oracle, ai, u_index) for ai in a], default=u_index)
    b = eval_word(oracle, b_word, x)
    if not oracle.basis_member(v_index, b):
        raise BNotInV(f"b = {oracle.format(b)} is not in V_{v_index}")

    # a_i^-1 V^3 a_i ⊆ U on sampled triples from V
    size = oracle.basis_size(v_index)
    vs = [oracle.basis_enumerate(v_index, i) for i in range(min(cube_samples, size or cube_samples))]
    cube_ok = all(
        oracle.basis_member(u_index, oracle.conj(oracle.mul(oracle.mul(v1, v2), v3), ai))
        for ai in a
        for v1 in vs
        for v2 in vs
        for v3 in vs
    )
    # at y = x: g_i(x) = a_i lies in V a_i and f(x) = b lies in V
    at_x_ok = all(oracle.basis_member(u_index, oracle.conj(b, ai)) for ai in a)

    witness = make_map(sample, [b_word if y == x else IDENTITY for y in sample])
    member_ok = invariant_nbhd_member(oracle, witness, conjugators, u_index)
    value_ok = eval_map(oracle, witness, x) == b
    checks = {"cube_sample": cube_ok, "containment_at_x": at_x_ok, "in_neighborhood": member_ok, "value": value_ok}
    if not all(checks.values()):
        raise AssertionError(f"openness witness failed its own checks: {checks}")
    return OpennessTranscript(x, a, v_index, b, witness, checks)


@dataclass
class Scenario:
    oracle: GroupOracle
    sample: Tuple[SamplePoint, ...]
    x: SamplePoint
    conjugators: List[PiecewiseMap]
    u_index: int
    b_word: Word


def random_point(oracle: GroupOracle, rng: random.Random, d: int) -> SamplePoint:
    coords = []
    for _ in range(d):
        level = rng.randint(0, 5)
        size = oracle.basis_size(level)
        i = rng.randrange(size) if size is not None else rng.randint(0, 30)
        coords.append(oracle.basis_enumerate(level, i))
    return SamplePoint(tuple(coords))


def random_h_word(rng: random.Random, d: int, max_len: int = 3) -> Word:
    return Word.of(*[(rng.randrange(d), rng.choice((1, -1))) for _ in range(rng.randint(0, max_len))])


def random_map(rng: random.Random, sample: Sequence[SamplePoint], d: int, max_cells: int = 3) -> PiecewiseMap:
    cells = [random_h_word(rng, d) for _ in range(rng.randint(1, max_cells))]
    return make_map(sample, [rng.choice(cells) for _ in sample])


def small_values_in_v(oracle: GroupOracle, x: SamplePoint, v_index: int, max_len: int = 4) -> List[Word]:
    """H-words whose value at ``x`` lies in ``V_{v_index}``: short words and powers of letters."""
    candidates = list(words_over(range(x.d), max_len))
    for i in range(x.d):
        for e in (2, 3, 4, 8, 9, 16, 27, 32, 64, 81):
            candidates.append(power(Word((2 * i,)), e))
    return [w for w in candidates if oracle.basis_member(v_index, eval_word(oracle, w, x))]


def random_scenario(oracle: GroupOracle, rng: random.Random, max_points: int = 4, max_d: int = 3,
                    max_conjugators: int = 3, max_u: int = 4, fixed: Optional[dict] = None) -> Scenario:
    """Random configuration; ``fixed`` may pin ``points``, ``d``, ``conjugators`` or ``u``.

    The value ``b`` is drawn from the H-words that land in ``V`` at ``x``, so
    it always lies in ``V ∩ G_x``.
    """
    fixed = fixed or {}
    d = fixed.get("d", rng.randint(1, max_d))
    target = fixed.get("points", rng.randint(1, max_points))
    sample: List[SamplePoint] = []
    for _ in range(10 * target):
        p = random_point(oracle, rng, d)
        if p not in sample:
            sample.append(p)
        if len(sample) == target:
            break
    x = rng.choice(sample)
    n_conj = fixed.get("conjugators", rng.randint(0, max_conjugators))
    conjugators = [random_map(rng, sample, d) for _ in range(n_conj)]
    u_index = fixed.get("u", rng.randint(0, max_u))
    a = [eval_map(oracle, g, x) for g in conjugators]
    v_index = max([cube_bound(oracle, ai, u_index) for ai in a], default=u_index)
    b_word = rng.choice(small_values_in_v(oracle, x, v_index))
    return Scenario(oracle, tuple(sample), x, conjugators, u_index, b_word)


def run_scenario(s: Scenario) -> OpennessTranscript:
    return openness_witness(s.oracle, s.x, s.conjugators, s.u_index, s.b_word, sample=s.sample)
