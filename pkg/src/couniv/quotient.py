"""The quotient homomorphism from F(N) onto an oracle-presented group.

Pipeline: refine the oracle's basis so that the first ``n`` enumerated
elements conjugate ``V'_{n+1}`` into ``V'_n``; compute the offsets ``m(g)``
bounding the scale ``theta_g(n) <= n + m(g)``; on every chain fiber run the
greedy surjection onto ``V'_n``; amalgamate to ``f: N -> G`` and extend to
words.  The ``verify_*`` and ``*_check`` functions return plain report dicts.
"""
from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from .neighborhoods import vphi_member
from .scale import IndexChain, PhiContext, dyadic_chain
from .target_groups import GroupOracle, settled_level
from .words import IDENTITY, Letter, Word, conjugate, format_word, multiply, reduce

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


class OracleUnsound(RuntimeError):
    """A sampled conjugation check contradicts the oracle's own bounds."""


class DepthExceeded(RuntimeError):
    pass


class RefinedBasis:
    """Indices ``0 = j_0 < j_1 < ...`` into the oracle basis, ``V'_n = V_{j_n}``.

    Built recursively with ``j_{n+1} = max(sq_bound(j_n), conj_bound(g_m, j_n)
    for m <= n, j_n + 1)`` and extended on demand up to ``max_depth``.
    """

    def __init__(self, oracle: GroupOracle, depth: int = 1, max_depth: int = 4096):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.oracle = oracle
        self.max_depth = max_depth
        self.indices: List[int] = [0]
        self._lock = threading.Lock()
        self.extend(depth)

    @property
    def depth(self) -> int:
        return len(self.indices) - 1

    def extend(self, depth: int) -> None:
        if depth > self.max_depth:
            raise DepthExceeded(f"refined basis capped at depth {self.max_depth}, asked for {depth}")
        size = self.oracle.order()
        with self._lock:
            while len(self.indices) <= depth:
                n = len(self.indices) - 1
                jn = self.indices[n]
                nxt = max(self.oracle.sq_bound(jn), jn + 1)
                for m in range(1, n + 1):
                    if size is not None and m > size:
                        break
                    nxt = max(nxt, self.oracle.conj_bound(self.oracle.enumerate(m), jn))
                self.indices.append(nxt)

    def __getitem__(self, n: int) -> int:
        if n > self.depth:
            self.extend(n)
        return self.indices[n]

    def member(self, n: int, g) -> bool:
        return self.oracle.basis_member(self[n], g)

    def enumerate(self, n: int, i: int):
        return self.oracle.basis_enumerate(self[n], i)

    def size(self, n: int) -> Optional[int]:
        return self.oracle.basis_size(self[n])

    def level_for(self, raw: int) -> int:
        """Smallest ``t`` with ``j_t >= raw``."""
        t = 0
        while self[t] < raw:
            t += 1
        return t

    def validate(self, depth: Optional[int] = None, samples: int = 20) -> None:
        """Re-check the defining properties on sampled elements; raise OracleUnsound."""
        oracle = self.oracle
        depth = self.depth if depth is None else depth
        size = oracle.order()
        for n in range(depth):
            if self[n + 1] <= self[n]:
                raise OracleUnsound(f"indices not increasing at {n}")
            nsize = self.size(n + 1)
            vs = [self.enumerate(n + 1, i) for i in range(min(samples, nsize or samples))]
            for a in vs[:8]:
                for b in vs[:8]:
                    if not self.member(n, oracle.mul(a, b)):
                        raise OracleUnsound(f"V'_{n + 1}^2 not inside V'_{n}")
            for m in range(1, n + 1):
                if size is not None and m > size:
                    break
                g = oracle.enumerate(m)
                for v in vs:
                    if not (self.member(n, oracle.conj(v, g)) and self.member(n, oracle.conj(v, oracle.inv(g)))):
                        raise OracleUnsound(
                            f"g_{m} = {oracle.format(g)} conjugates V'_{n + 1} out of V'_{n}"
                        )


def build_refined_basis(oracle: GroupOracle, depth: int) -> RefinedBasis:
    basis = RefinedBasis(oracle, depth)
    basis.validate(min(depth, 12))
    return basis


@dataclass
class ScaleProfile:
    """Scale data of one element against the refined basis."""

    theta_upper: Callable[[int], int]
    offset: int
    exact: bool
    horizon: Optional[int]  # None: offset holds at every level


def refined_theta(basis: RefinedBasis, g, n: int) -> tuple[int, bool]:
    """``(value, exact)``: the scale of ``g`` at refined level ``n``, or an upper bound."""
    oracle = basis.oracle
    raw = oracle.theta_exact(g, basis[n])
    exact = raw is not None
    if raw is None:
        raw = oracle.conj_bound(g, basis[n])
    return basis.level_for(raw), exact


def scale_offsets(basis: RefinedBasis, oracle: GroupOracle, g, n_max: int = 32) -> ScaleProfile:
    """Offset ``m(g) = max(0, max_n theta(n) - n)``.

    When the oracle knows a level past which ``theta_g(j) = j``, the maximum
    is taken over all refined levels up to it and is valid globally;
    otherwise it only covers ``n <= n_max``.
    """
    if g == oracle.identity:
        return ScaleProfile(lambda n: refined_theta(basis, g, n)[0], 0, True, None)
    settled = settled_level(oracle, g)
    if settled is not None:
        top = basis.level_for(settled)
        horizon = None
    else:
        top = n_max
        horizon = n_max
    best = 0
    exact = True
    for n in range(top + 1):
        value, ex = refined_theta(basis, g, n)
        exact = exact and ex
        best = max(best, value - n)
    return ScaleProfile(lambda n: refined_theta(basis, g, n)[0], best, exact, horizon)


class Greedy:
    """The greedy surjection onto an enumerated set, fed points in increasing order.

    At point ``k`` it takes the smallest index not yet chosen if its offset
    is at most ``k``, and index 0 otherwise.  Chosen indices always form a
    prefix ``0..next-1``, so a counter is the whole state.
    """

    def __init__(self, m_values: Callable[[int], int], size: Optional[int] = None):
        self.m_values = m_values
        self.size = size
        self.next = 0
        self.choices: List[int] = []
        self.points: List[int] = []

    def step(self, k: int) -> int:
        if self.points and k <= self.points[-1]:
            raise ValueError("points must be fed in increasing order")
        c = self.next
        if (self.size is None or c < self.size) and self.m_values(c) <= k:
            self.next += 1
            choice = c
        else:
            choice = 0
        self.points.append(k)
        self.choices.append(choice)
        return choice


def greedy_surjection(m_values: Callable[[int], int], k: int) -> int:
    """``f(k)`` for the greedy surjection on ``U = N``; requires ``m_values(0) == 0``."""
    if m_values(0) != 0:
        raise ValueError("m_values(0) must be 0")
    greedy = Greedy(m_values)
    for point in range(k + 1):
        choice = greedy.step(point)
    return choice


class QuotientMap:
    """``f: N -> G`` amalgamated over the chain fibers, and its extension to words."""

    def __init__(
        self,
        oracle: GroupOracle,
        chain: Optional[IndexChain] = None,
        depth: int = 16,
        ctx: Optional[PhiContext] = None,
        n_max: int = 32,
    ):
        self.oracle = oracle
        self.chain = chain if chain is not None else dyadic_chain()
        self.ctx = ctx if ctx is not None else PhiContext(self.chain)
        self.basis = build_refined_basis(oracle, depth)
        self.n_max = n_max
        self._offsets: Dict = {}
        self._fibers: Dict[int, Greedy] = {}
        self._fiber_iters: Dict = {}
        self._lock = threading.RLock()

    # -- offsets
    def m_of(self, g) -> int:
        key = _hashable(g)
        with self._lock:
            hit = self._offsets.get(key)
        if hit is None:
            hit = scale_offsets(self.basis, self.oracle, g, self.n_max).offset
            with self._lock:
                self._offsets[key] = hit
        return hit

    def profile(self, g) -> ScaleProfile:
        return scale_offsets(self.basis, self.oracle, g, self.n_max)

    # -- greedy per fiber
    def _fiber(self, n: int) -> Greedy:
        with self._lock:
            greedy = self._fibers.get(n)
            if greedy is None:
                greedy = Greedy(lambda i, n=n: self.m_of(self.basis.enumerate(n, i)), self.basis.size(n))
                self._fibers[n] = greedy
                self._fiber_iters[n] = self.chain.fiber(n)
            return greedy

    def fiber_choice(self, n: int, r: int) -> int:
        """Index into ``V'_n`` chosen at the ``r``-th point of fiber ``n``."""
        greedy = self._fiber(n)
        with self._lock:
            it = self._fiber_iters[n]
            while len(greedy.choices) <= r:
                greedy.step(next(it))
            return greedy.choices[r]

    def choice_log(self) -> Dict[int, List[int]]:
        with self._lock:
            return {n: list(g.choices) for n, g in sorted(self._fibers.items())}

    def f_index(self, k: int) -> tuple[int, int]:
        n = self.chain.nu(k)
        return n, self.fiber_choice(n, self.chain.fiber_position(k))

    def f(self, k: int):
        n, i = self.f_index(k)
        return self.basis.enumerate(n, i)

    def bar_f(self, w: Word):
        out = self.oracle.identity
        for letter in w.letters:
            value = self.f(letter.index)
            out = self.oracle.mul(out, value if letter.exponent == 1 else self.oracle.inv(value))
        return out


def amalgamated_f(q: QuotientMap, k: int):
    return q.f(k)


def bar_f(q: QuotientMap, w: Word):
    return q.bar_f(w)


def _hashable(g):
    return tuple(g) if isinstance(g, list) else g


def _theta(q: QuotientMap, g, n: int) -> tuple[int, bool]:
    return refined_theta(q.basis, g, n)


def verify_offset_chain(q: QuotientMap, k: int, n: int) -> dict:
    """Check ``phi_n(k) = n + k >= n + m(f(k)) >= theta_{f(k)}(n)`` link by link."""
    g = q.f(k)
    phi_value = q.ctx.phi(n, Word((2 * k,)))
    m = q.m_of(g)
    theta, exact = _theta(q, g, n)
    ok0 = phi_value == n + k
    ok1 = k >= m
    ok2 = n + m >= theta
    if ok0 and ok1 and ok2:
        verdict = PASS
    elif ok0 and ok1 and not exact:
        verdict = INCONCLUSIVE
    else:
        verdict = FAIL
    return {
        "check": "offset_chain",
        "instance": {"k": k, "n": n},
        "verdict": verdict,
        "slack": {"phi_vs_closed": phi_value - (n + k), "k_minus_m": k - m, "n_plus_m_minus_theta": n + m - theta},
        "witness": {"f_k": q.oracle.to_json(g), "m": m, "theta": theta, "theta_exact": exact},
    }


def verify_word_scale(q: QuotientMap, w: Word, n: int) -> dict:
    """``theta_{bar f(w)}(n) <= phi_n(w)``; INCONCLUSIVE when only a failing upper bound is known."""
    image = q.bar_f(w)
    theta, exact = _theta(q, image, n)
    phi_value = q.ctx.phi(n, w)
    if theta <= phi_value:
        verdict = PASS
    else:
        verdict = FAIL if exact else INCONCLUSIVE
    return {
        "check": "word_scale",
        "instance": {"word": format_word(w), "n": n},
        "verdict": verdict,
        "slack": phi_value - theta,
        "witness": {"image": q.oracle.to_json(image), "theta": theta, "phi": phi_value, "theta_exact": exact},
    }


def sample_vphi(q: QuotientMap, n: int, rng: random.Random, max_conj_len: int = 2, max_letter: int = 6) -> Word:
    """A random element ``g^-1 k^eps g`` of ``V_{Phi_n}`` (never the identity)."""
    length = rng.randint(0, max_conj_len)
    g = reduce(Letter(rng.randint(0, max_letter), rng.choice((1, -1))).code for _ in range(length))
    threshold = q.ctx.phi(n, g)
    k = q.chain.fiber_point(threshold + rng.randint(0, 1), rng.randint(0, 3))
    w = conjugate(Word((Letter(k, rng.choice((1, -1))).code,)), g)
    witness = vphi_member(q.ctx, w, n)
    if witness is None:
        raise AssertionError(f"sampled element {format_word(w)} is not in V_Phi_{n}")
    return w


def continuity_check(q: QuotientMap, n: int, samples: int, seed: int = 0) -> dict:
    """Map sampled elements of ``V_{Phi_n}`` and of products over slots ``>= n + 2`` into ``V'_n``."""
    rng = random.Random(f"continuity:{n}:{seed}")
    violations = []
    checked = 0
    for _ in range(samples):
        w = sample_vphi(q, n, rng)
        checked += 1
        if not q.basis.member(n, q.bar_f(w)):
            violations.append({"kind": "vphi", "word": format_word(w)})
    for _ in range(samples):
        count = rng.randint(1, 3)
        slots = rng.sample(range(n + 2, n + 7), count)
        w = IDENTITY
        for s in slots:
            w = multiply(w, sample_vphi(q, s, rng, max_conj_len=1, max_letter=4))
        checked += 1
        if not q.basis.member(n, q.bar_f(w)):
            violations.append({"kind": "product", "slots": slots, "word": format_word(w)})
    return {
        "check": "continuity",
        "instance": {"n": n, "samples": samples, "seed": seed},
        "verdict": PASS if not violations else FAIL,
        "slack": None,
        "witness": {"checked": checked, "violations": violations[:5]},
    }


def openness_check(q: QuotientMap, n: int, prefix: int, max_points: int = 10**6) -> dict:
    """Replay fiber ``n`` until each of the first ``prefix`` elements of ``V'_n`` is hit."""
    size = q.basis.size(n)
    want = prefix if size is None else min(prefix, size)
    cover: Dict[int, int] = {}
    r = 0
    while len(cover) < want and r < max_points:
        i = q.fiber_choice(n, r)
        if i < want and i not in cover:
            cover[i] = q.chain.fiber_point(n, r)
        r += 1
    missing = [i for i in range(want) if i not in cover]
    return {
        "check": "openness",
        "instance": {"n": n, "prefix": prefix},
        "verdict": PASS if not missing else FAIL,
        "slack": None,
        "witness": {
            "cover": {str(i): cover[i] for i in sorted(cover)},
            "max_k": max(cover.values(), default=0),
            "missing": missing,
        },
    }


def greedy_offset_check(q: QuotientMap, k_max: int) -> dict:
    """``m(f(k)) <= k`` for every ``k <= k_max``."""
    worst = None
    bad = []
    for k in range(k_max + 1):
        m = q.m_of(q.f(k))
        if m > k:
            bad.append(k)
        slack = k - m
        worst = slack if worst is None else min(worst, slack)
    return {
        "check": "greedy_offsets",
        "instance": {"k_max": k_max},
        "verdict": PASS if not bad else FAIL,
        "slack": worst,
        "witness": {"violations": bad[:5]},
    }
