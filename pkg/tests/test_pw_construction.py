import random

import pytest
from hypothesis import given, settings, strategies as st

from couniv.pw_construction import (
    BNotInV, PiecewiseMap, SamplePoint, UnknownPoint, constant_map, cube_bound, eval_map, eval_word,
    invariant_nbhd_member, k_conj, k_inv, k_mul, make_map, openness_witness, projection, random_map,
    random_point, random_scenario, run_scenario, w_u_member,
)
from couniv.target_groups import FinitarySymmetric, IntegersPadic, oracle_from_id, transposition
from couniv.words import IDENTITY, parse_word

W = parse_word
Z = IntegersPadic(2)
S = FinitarySymmetric()


def points(*rows):
    return tuple(SamplePoint(tuple(r)) for r in rows)


def test_sample_point_and_map_validation():
    with pytest.raises(ValueError):
        SamplePoint(())
    pts = points((1,), (2,))
    with pytest.raises(ValueError):
        PiecewiseMap(pts, (0,), (IDENTITY,))
    with pytest.raises(ValueError):
        PiecewiseMap(pts, (0, 1), (IDENTITY,))
    with pytest.raises(ValueError):
        make_map(pts, [W("1"), IDENTITY])  # coordinate 1 does not exist when d = 1


def test_make_map_is_canonical():
    pts = points((1, 2), (3, 4), (5, 6))
    f = make_map(pts, [W("0"), W("1"), W("0")])
    assert f.partition == (0, 1, 0) and len(f.cell_words) == 2
    assert f == make_map(pts, [W("0"), W("1"), W("0")])
    with pytest.raises(UnknownPoint):
        f.word_at(SamplePoint((9, 9)))


def test_eval_word_uses_coordinates():
    x = SamplePoint((transposition(0, 1), transposition(1, 2)))
    assert eval_word(S, W("0 1"), x) == S.mul(transposition(0, 1), transposition(1, 2))
    assert eval_word(S, W("1'"), x) == transposition(1, 2)
    assert eval_word(Z, IDENTITY, SamplePoint((5,))) == 0
    assert eval_map(Z, projection(points((5, 7)), 1), SamplePoint((5, 7))) == 7


def test_group_operations_pointwise():
    pts = points((4, 8), (2, 6), (1, 1))
    f = make_map(pts, [W("0"), W("1 0'"), IDENTITY])
    g = make_map(pts, [W("1"), W("1"), W("0")])
    for x in pts:
        assert eval_map(Z, k_mul(f, k_inv(f)), x) == 0
        assert eval_map(Z, k_mul(f, g), x) == eval_map(Z, f, x) + eval_map(Z, g, x)
    assert k_mul(f, constant_map(pts)) == f
    assert k_mul(constant_map(pts), f) == f


def test_product_refines_partitions():
    pts = points((1, 2), (3, 4), (5, 6), (7, 8))
    f = make_map(pts, [W("0"), W("0"), W("1"), W("1")])
    g = make_map(pts, [W("0"), W("1"), W("0"), W("1")])
    assert len(k_mul(f, g).cell_words) <= 4


def test_w_u_and_invariant_membership():
    pts = points((4, 8), (2, 6))
    f = make_map(pts, [W("0"), W("1")])
    assert w_u_member(Z, f, 1) and not w_u_member(Z, f, 2)
    assert invariant_nbhd_member(Z, f, [], 1) == w_u_member(Z, f, 1)
    g = make_map(pts, [W("1"), W("0 1")])
    for u in range(4):
        assert invariant_nbhd_member(Z, f, [g], u) == w_u_member(Z, f, u)
    sp = points((transposition(0, 1), transposition(2, 3)))
    ident = constant_map(sp)
    assert invariant_nbhd_member(S, ident, [projection(sp, 0), projection(sp, 1)], 7)


def test_conjugated_membership_in_symfin():
    sp = points((transposition(1, 2), transposition(0, 4)))
    f = projection(sp, 0)
    g = projection(sp, 1)
    assert w_u_member(S, f, 1)
    # conjugating by (0 4) moves the support of (1 2) nowhere near 0, so V_1 survives
    assert w_u_member(S, k_conj(f, g), 1)
    assert not w_u_member(S, k_conj(f, g), 2)


def test_cube_bound_abelian():
    assert cube_bound(Z, 5, 2) == 2
    d = oracle_from_id("dyadic")
    assert cube_bound(d, 0, 2) == 4


def test_openness_padic_examples():
    x = SamplePoint((4, 2))
    sample = (x, SamplePoint((1, 3)))
    t = openness_witness(Z, x, [], 2, W("0"), sample=sample)
    assert t.v_index == 2 and t.b == 4 and all(t.checks.values())
    assert eval_map(Z, t.witness, x) == 4
    assert eval_map(Z, t.witness, sample[1]) == 0
    with pytest.raises(BNotInV):
        openness_witness(Z, x, [], 2, W("1"), sample=sample)
    with pytest.raises(UnknownPoint):
        openness_witness(Z, SamplePoint((0, 0)), [], 2, W("0"), sample=sample)
    with pytest.raises(ValueError):
        openness_witness(Z, x, [], 2, W("0"))


def test_openness_identity_value():
    sp = points((transposition(0, 3), transposition(1, 2)), (transposition(0, 1), transposition(5, 6)))
    g = make_map(sp, [W("0 1"), W("1")])
    t = openness_witness(S, sp[0], [g], 3, IDENTITY)
    assert all(t.checks.values())
    assert invariant_nbhd_member(S, t.witness, [g], 3)


def test_openness_transcript_json():
    x = SamplePoint((4,))
    t = openness_witness(Z, x, [], 2, W("0"), sample=(x,))
    data = t.to_json(Z)
    assert data["b"] == 4 and data["witness"]["cell_words"] == ["0"]


@pytest.mark.parametrize("gid", ["zp2", "zp3", "dyadic", "symfin", "finite:s3"])
def test_random_scenarios_succeed(gid):
    oracle = oracle_from_id(gid)
    rng = random.Random(gid)
    for _ in range(15):
        s = random_scenario(oracle, rng)
        t = run_scenario(s)
        assert all(t.checks.values())
        assert eval_map(oracle, t.witness, s.x) == t.b


def test_random_scenario_fixed_parameters():
    rng = random.Random(5)
    s = random_scenario(S, rng, fixed={"points": 3, "d": 2, "conjugators": 2, "u": 3})
    assert len(s.sample) == 3 and s.x.d == 2 and len(s.conjugators) == 2 and s.u_index == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_evaluation_is_homomorphism(seed):
    rng = random.Random(seed)
    pts = []
    while len(pts) < 3:
        p = random_point(S, rng, 2)
        if p not in pts:
            pts.append(p)
    f, g = random_map(rng, pts, 2), random_map(rng, pts, 2)
    for x in pts:
        assert eval_map(S, k_mul(f, g), x) == S.mul(eval_map(S, f, x), eval_map(S, g, x))
