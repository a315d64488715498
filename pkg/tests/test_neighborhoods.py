import random

import pytest
from hypothesis import given, settings, strategies as st

from couniv.harness import cyclic_power_chain, s5_chain
from couniv.neighborhoods import (
    SUPPORT_AUDIT, CertEntry, FiniteTable, HypothesisViolation, SubbasicSpec, SymCertificate,
    assign_slots, bk_check_finite, cert_conjugate, cert_invert, cert_square, cert_verify,
    cyclic_table, slot_cap, sym_member_bounded, symmetric_group_table, vphi_member,
)
from couniv.scale import PhiContext, dyadic_chain
from couniv.words import IDENTITY, Letter, conjugate, cyclic_reduce, format_word, multiply, parse_word, reduce

W = parse_word
CTX = PhiContext(dyadic_chain())


def entry(slot, conj, letter):
    return CertEntry(slot, W(conj), W(letter).letters[0])


def test_vphi_examples():
    w = W("5' 31 5")
    assert vphi_member(CTX, w, 0) == (W("5"), Letter(31, 1))
    assert vphi_member(CTX, w, 1) is None  # threshold phi_1(5) = 6 > nu(31) = 5
    assert vphi_member(CTX, W("3"), 1) == (IDENTITY, Letter(3, 1))
    assert vphi_member(CTX, W("2"), 3) is None
    assert vphi_member(CTX, W("2 3"), 0) is None
    with pytest.raises(ValueError):
        vphi_member(CTX, IDENTITY, 0)


def test_vphi_finds_cheaper_conjugator():
    # 31 commutes with itself, so 31' 31 31 equals 31 and needs no conjugator
    w = conjugate(W("31"), W("31 0"))
    g, _ = vphi_member(CTX, w, 0)
    assert CTX.phi(0, g) == CTX.phi(0, W("0"))


def test_spec_validation():
    with pytest.raises(ValueError):
        SubbasicSpec(k=0)


def test_assign_slots():
    assert assign_slots([4]) == [4]
    assert sorted(assign_slots([4, 3])) == [3, 4]
    assert assign_slots([1, 1]) is None
    assert assign_slots([0]) is None
    assert sorted(assign_slots([2, 5, 2])) == [1, 2, 5]


def test_slot_cap():
    assert slot_cap(CTX, SubbasicSpec(), IDENTITY, Letter(15, 1)) == 4
    assert slot_cap(CTX, SubbasicSpec(k=2), IDENTITY, Letter(15, 1)) == 2


def test_member_single_letter():
    res = sym_member_bounded(CTX, W("15"), SubbasicSpec(), 2, 2)
    assert res.is_member
    assert [(e.slot, format_word(e.conjugator)) for e in res.certificate.factors] == [(4, "")]
    assert cert_verify(CTX, res.certificate, W("15"))


def test_member_two_letters():
    res = sym_member_bounded(CTX, W("15 7"), SubbasicSpec(), 2, 2)
    assert res.is_member
    assert {e.slot for e in res.certificate.factors} == {3, 4}
    assert cert_verify(CTX, res.certificate, W("15 7"))


def test_member_unknown_within_bounds():
    res = sym_member_bounded(CTX, W("5' 31 5"), SubbasicSpec(), 3, 4)
    assert res.status == "Unknown" and res.certificate is None


def test_member_identity_has_empty_certificate():
    res = sym_member_bounded(CTX, IDENTITY, SubbasicSpec(), 1, 1)
    assert res.is_member and res.certificate.factors == ()


def test_member_bounds_validated():
    with pytest.raises(ValueError):
        sym_member_bounded(CTX, W("1"), SubbasicSpec(), 0, 1)


def test_parallel_search_agrees():
    for text in ["15 7", "31 15' 7", "3 1 3"]:
        a = sym_member_bounded(CTX, W(text), SubbasicSpec(), 3, 1)
        b = sym_member_bounded(CTX, W(text), SubbasicSpec(), 3, 1, workers=4)
        assert a.status == b.status and a.certificate == b.certificate


def test_cert_verify_negatives():
    good = SymCertificate((entry(4, "", "15"),))
    assert cert_verify(CTX, good, W("15"))
    assert not cert_verify(CTX, SymCertificate((entry(5, "", "15"),)), W("15"))
    dup = SymCertificate((entry(3, "", "15"), entry(3, "", "7")))
    assert not cert_verify(CTX, dup, W("15 7"))
    assert not cert_verify(CTX, good, W("7"))
    assert not cert_verify(CTX, SymCertificate((entry(0, "", "15"),)), W("15"))


def test_cert_json_roundtrip():
    c = SymCertificate((entry(4, "2", "15'"), entry(1, "", "3")), SubbasicSpec(W("1"), 1))
    assert SymCertificate.from_json(c.to_json(), c.spec) == c
    with pytest.raises(ValueError):
        SymCertificate.from_json([{"slot": 1, "conjugator": "", "letter": "3 5"}], c.spec)


def test_cert_square_example():
    doubled = SubbasicSpec(k=2)
    c1 = SymCertificate((entry(2, "", "31"),), doubled)
    c2 = SymCertificate((entry(2, "", "31"),), doubled)
    assert cert_verify(CTX, c1, W("31"))
    sq = cert_square(CTX, c1, c2)
    assert sq.spec.k == 1
    assert sorted(e.slot for e in sq.factors) == [3, 4]
    assert cert_verify(CTX, sq, W("31 31"))


def test_cert_square_with_empty_and_cancelling():
    doubled = SubbasicSpec(k=2)
    c1 = SymCertificate((entry(2, "", "31"),), doubled)
    empty = SymCertificate((), doubled)
    sq = cert_square(CTX, c1, empty)
    assert [e.slot for e in sq.factors] == [3]
    inv = cert_invert(CTX, c1)
    assert cert_square(CTX, c1, inv).factors == ()
    with pytest.raises(ValueError):
        cert_square(CTX, SymCertificate((), SubbasicSpec(k=1)), SymCertificate((), SubbasicSpec(k=1)))


def test_cert_conjugate():
    h = W("2")
    c = SymCertificate((entry(1, "", "31"),), SubbasicSpec(h, 1))
    w = W("31")
    assert cert_verify(CTX, c, w)
    moved = cert_conjugate(CTX, c, h)
    assert format_word(moved.factors[0].conjugator) == "2"
    assert moved.spec.h == IDENTITY
    assert cert_verify(CTX, moved, conjugate(w, h))
    assert cert_conjugate(CTX, SymCertificate((), SubbasicSpec(h, 1)), h).factors == ()
    same = SymCertificate((entry(1, "", "31"),))
    assert cert_conjugate(CTX, same, IDENTITY) == same
    with pytest.raises(ValueError):
        cert_conjugate(CTX, same, h)


def test_support_audit_rejects_low_letters():
    before = SUPPORT_AUDIT.checked
    with pytest.raises(AssertionError):
        SUPPORT_AUDIT(CTX, SymCertificate((entry(1, "", "2"),), SubbasicSpec(k=1)))
    assert SUPPORT_AUDIT.checked == before + 1
    SUPPORT_AUDIT.violations.clear()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, 3, 5, 7, 11, 15, 23, 31]), min_size=1, max_size=3),
       st.lists(st.booleans(), min_size=3, max_size=3), st.sampled_from(["", "0", "1 2'"]))
def test_search_results_verify(letters, signs, conj):
    g = W(conj)
    w = IDENTITY
    for k, s in zip(letters, signs):
        w = multiply(w, conjugate(W(f"{k}" + ("'" if s else "")), g))
    res = sym_member_bounded(CTX, w, SubbasicSpec(), 3, 2)
    if res.is_member:
        assert cert_verify(CTX, res.certificate, w)
        inv = cert_invert(CTX, res.certificate)
        assert cert_verify(CTX, inv, multiply(IDENTITY, ~w))


def test_finite_table_validation():
    with pytest.raises(ValueError):
        FiniteTable([[0, 1], [1, 1]])
    t = FiniteTable(cyclic_table(6))
    assert t.inverse[2] == 4 and t.check_associative()
    table, elements = symmetric_group_table(3)
    assert len(elements) == 6 and elements[0] == (0, 1, 2)
    assert FiniteTable(table).check_associative()


def test_bk_cyclic_and_s5():
    for k in range(3):
        rep = bk_check_finite(cyclic_table(256), cyclic_power_chain(8), k, 4)
        assert rep.ok and rep.states > 0
    table, chain = s5_chain()
    for k in range(3):
        assert bk_check_finite(table, chain, k, 4).ok


def test_bk_rejects_bad_chains():
    with pytest.raises(HypothesisViolation, match="V_2"):
        bk_check_finite(cyclic_table(256), [set(range(256)), {0, 2, 254}, {0, 2, 254}, {0}], 0, 2)
    with pytest.raises(HypothesisViolation, match="symmetric"):
        bk_check_finite(cyclic_table(8), [set(range(8)), {0, 1}], 0, 2)
    with pytest.raises(HypothesisViolation, match="identity"):
        bk_check_finite(cyclic_table(8), [set(range(8)), {2, 6}], 0, 2)


def _vphi_wide(w, n, h, extra=6):
    core, wing = cyclic_reduce(w)
    if len(core) != 1:
        return False
    letter = core.letters[0]
    gen = W(str(letter.index))
    r = multiply(wing, h)
    best = None
    for m in range(-(len(r) + extra), len(r) + extra + 1):
        g = wing
        for _ in range(abs(m)):
            g = multiply(gen if m > 0 else ~gen, g)
        t = CTX.phi(n, multiply(g, h))
        best = t if best is None else min(best, t)
    return CTX.chain.nu(letter.index) >= best


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 31), st.booleans(), st.lists(st.integers(0, 9), max_size=4),
       st.lists(st.integers(0, 9), max_size=3), st.integers(0, 3))
def test_vphi_window_is_exact(k, inv, conj, h_codes, n):
    g = reduce(conj)
    h = reduce(h_codes)
    w = conjugate(W(f"{k}" + ("'" if inv else "")), g)
    assert (vphi_member(CTX, w, n, h) is not None) == _vphi_wide(w, n, h)
