import random

import pytest
from hypothesis import given, settings, strategies as st

from couniv.quotient import (
    FAIL, INCONCLUSIVE, PASS, DepthExceeded, Greedy, QuotientMap, RefinedBasis, amalgamated_f, bar_f,
    build_refined_basis, continuity_check, greedy_surjection, openness_check, refined_theta,
    scale_offsets, greedy_offset_check, verify_offset_chain, verify_word_scale,
)
from couniv.target_groups import BoundsOnly, FinitarySymmetric, oracle_from_id, transposition
from couniv.words import IDENTITY, multiply, parse_word, reduced_words
from strategies import short_words

W = parse_word
_MAPS = {}


def qmap(gid):
    if gid not in _MAPS:
        _MAPS[gid] = QuotientMap(oracle_from_id(gid), depth=16)
    return _MAPS[gid]


def test_refined_indices_examples():
    assert build_refined_basis(oracle_from_id("zp2"), 4).indices == [0, 1, 2, 3, 4]
    assert build_refined_basis(oracle_from_id("dyadic"), 3).indices == [0, 1, 2, 3]
    sym = build_refined_basis(FinitarySymmetric(), 8)
    assert sym.indices == sorted(set(sym.indices)) and sym.indices[0] == 0


def test_refined_basis_extends_lazily():
    b = RefinedBasis(oracle_from_id("zp2"), depth=2, max_depth=10)
    assert b.depth == 2
    assert b[7] == 7 and b.depth == 7
    with pytest.raises(DepthExceeded):
        b[11]
    assert b.level_for(5) == 5


def test_scale_offsets_examples():
    s = FinitarySymmetric()
    raw = RefinedBasis(s, depth=8)
    assert scale_offsets(raw, s, s.identity).offset == 0
    z = oracle_from_id("zp3")
    zb = RefinedBasis(z, 5)
    assert all(scale_offsets(zb, z, g).offset == 0 for g in range(-6, 7))


def test_transposition_offset_and_theta():
    q = qmap("symfin")
    g = transposition(0, 4)
    assert q.m_of(g) == 4
    assert refined_theta(q.basis, g, 1) == (5, True)


def test_greedy_examples():
    assert [greedy_surjection(lambda i: 0, k) for k in range(6)] == list(range(6))
    m = [0, 3, 1, 0, 0, 0]
    assert [greedy_surjection(lambda i: m[i], k) for k in range(5)] == [0, 0, 0, 1, 2]
    with pytest.raises(ValueError):
        greedy_surjection(lambda i: 1, 3)


def test_greedy_finite_set_runs_out():
    g = Greedy(lambda i: 0, size=2)
    assert [g.step(k) for k in range(4)] == [0, 1, 0, 0]
    with pytest.raises(ValueError):
        g.step(2)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=50, max_size=50))
def test_greedy_respects_offsets(tail):
    m = [0] + tail
    g = Greedy(lambda i: m[i] if i < len(m) else 10**9)
    for k in range(2000):
        assert m[g.step(k)] <= k


def test_padic_f_examples():
    q = qmap("zp2")
    assert [q.f(k) for k in (0, 2, 7)] == [0, 1, 0]
    assert bar_f(q, W("0 2")) == 1
    assert amalgamated_f(q, 4) == q.f(4)


@pytest.mark.parametrize("gid", ["zp2", "zp3", "dyadic", "symfin", "finite:s3"])
def test_f_lands_in_level(gid):
    q = qmap(gid)
    for k in range(300):
        n = q.chain.nu(k)
        assert q.basis.member(n, q.f(k))


@pytest.mark.parametrize("gid", ["zp2", "symfin", "finite:s3"])
@settings(max_examples=40, deadline=None)
@given(u=short_words, v=short_words)
def test_bar_f_is_homomorphism(gid, u, v):
    q = qmap(gid)
    o = q.oracle
    assert q.bar_f(multiply(u, v)) == o.mul(q.bar_f(u), q.bar_f(v))
    assert q.bar_f(~u) == o.inv(q.bar_f(u))


def test_offset_chain_examples():
    q = qmap("zp2")
    rep = verify_offset_chain(q, 37, 3)
    assert rep["verdict"] == PASS and rep["slack"]["k_minus_m"] == 37
    assert rep["slack"]["n_plus_m_minus_theta"] == 0
    assert verify_offset_chain(q, 0, 4)["witness"]["m"] == 0
    s = qmap("symfin")
    assert all(verify_offset_chain(s, k, n)["verdict"] == PASS for k in range(200) for n in range(6))


def test_offset_chain_detects_broken_offsets(monkeypatch):
    q = QuotientMap(oracle_from_id("symfin"), depth=16)
    k = next(k for k in range(1000) if q.m_of(q.f(k)) > 0)
    monkeypatch.setattr(q, "m_of", lambda g: 0)
    assert verify_offset_chain(q, k, 1)["verdict"] == FAIL


def test_word_scale_examples():
    s = qmap("symfin")
    for n in range(5):
        assert verify_word_scale(s, IDENTITY, n)["verdict"] == PASS
        for k in range(20):
            assert verify_word_scale(s, W(str(k)), n)["verdict"] == PASS
    assert all(verify_word_scale(s, w, 2)["verdict"] == PASS for w in reduced_words(2, 6))


def test_word_scale_fail_and_inconclusive(monkeypatch):
    s = QuotientMap(oracle_from_id("symfin"), depth=16)
    w = next(w for w in reduced_words(2, 10) if s.bar_f(w) != s.oracle.identity)
    monkeypatch.setattr(s.ctx, "phi", lambda n, word: -1)
    assert verify_word_scale(s, w, 1)["verdict"] == FAIL
    b = QuotientMap(BoundsOnly(FinitarySymmetric()), depth=16)
    monkeypatch.setattr(b.ctx, "phi", lambda n, word: -1)
    assert verify_word_scale(b, w, 1)["verdict"] == INCONCLUSIVE


@pytest.mark.parametrize("gid, n", [("zp2", 3), ("symfin", 2)])
def test_continuity_examples(gid, n):
    rep = continuity_check(qmap(gid), n, 200, seed=1)
    assert rep["verdict"] == PASS and rep["witness"]["checked"] == 400


def test_openness_examples():
    rep = openness_check(qmap("zp2"), 1, 10)
    assert rep["verdict"] == PASS and len(rep["witness"]["cover"]) == 10
    assert rep["witness"]["cover"]["0"] == qmap("zp2").chain.fiber_point(1, 0)
    assert openness_check(qmap("symfin"), 0, 25)["verdict"] == PASS
    assert openness_check(qmap("finite:s3"), 1, 50)["witness"]["missing"] == []


def test_greedy_offsets():
    for gid in ("zp2", "symfin", "dyadic"):
        rep = greedy_offset_check(qmap(gid), 2000)
        assert rep["verdict"] == PASS and rep["slack"] >= 0


def test_f_does_not_depend_on_query_order():
    a = QuotientMap(FinitarySymmetric(), depth=12)
    b = QuotientMap(FinitarySymmetric(), depth=12)
    ks = list(range(500))
    random.Random(0).shuffle(ks)
    shuffled = {k: b.f(k) for k in ks}
    assert [a.f(k) for k in range(500)] == [shuffled[k] for k in range(500)]
    assert a.choice_log() == b.choice_log()
