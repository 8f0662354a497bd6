import random

import pytest

from krcrystal.branching import enumerate_S, g2_weyl_orbit_hull_contains, tuple_weight, weyl_dimension
from krcrystal.cartan import Weight, cartan_data
from krcrystal.fundamental import (G2_LABELS, _d4_assemble, _d4_tangent, build_g2_irrep,
                                   build_W1_D4, build_W1_G2, d4_claims)
from krcrystal.fusion import w1_report
from krcrystal.polarverify import check_polarization_positive
from krcrystal.qfield import ONE, membership
from krcrystal.repcore import act, apply_e_monomial, pair, submodule_closure, verify_relations

IX = {lab: k for k, lab in enumerate(G2_LABELS)}


@pytest.fixture(scope="module")
def g2():
    return build_W1_G2()


@pytest.fixture(scope="module")
def d4():
    return w1_report("d4-3")


def test_g2_dimension_and_top(g2):
    rep = g2.rep
    assert rep.dim == 7
    assert rep.weights[IX["1"]] == cartan_data("g2-1").varpi2
    assert g2.ok


def test_g2_classical_restriction_is_irreducible(g2):
    rep = g2.rep
    # vector 1 generates everything under e1, e2, f1, f2
    clo = submodule_closure(rep, {IX["1"]: ONE}, indices=(1, 2))
    assert len(clo.vectors) == 7
    for i in (1, 2):
        assert not act(rep, "e", i, {IX["1"]: ONE})


def test_g2_irrep_dimensions():
    data = cartan_data("g2-1")
    assert build_g2_irrep("g2-1", Weight()).dim == 1
    assert build_g2_irrep("g2-1", data.varpi2).dim == 7
    lam_long = data.lift(1, 0)
    assert build_g2_irrep("g2-1", lam_long).dim == weyl_dimension("g2-1", (1, 0)) == 14


def test_g2_irrep_highest_weight_vector_killed():
    data = cartan_data("g2-1")
    rep = build_g2_irrep("g2-1", data.lift(1, 0))
    top = rep.blocks()[data.lift(1, 0)]
    assert len(top) == 1
    for i in (1, 2):
        assert not act(rep, "e", i, {top[0]: ONE})
    assert verify_relations(rep, indices=(1, 2)) == []


def test_irrep_rejects_nondominant():
    with pytest.raises(ValueError):
        build_g2_irrep("g2-1", cartan_data("g2-1").lift(1, -1))


@pytest.mark.parametrize("t", ["g2-1", "d4-3"])
def test_weight_support(t):
    rep = w1_report(t).rep
    data = cartan_data(t)
    top = data.varpi2
    assert rep.weights.count(top) == 1
    for w in rep.weights:
        assert g2_weyl_orbit_hull_contains(t, top, w)


@pytest.mark.parametrize("t", ["g2-1", "d4-3"])
def test_polarization_positive(t):
    r = w1_report(t)
    assert check_polarization_positive(r.gram, r.rep)


@pytest.mark.parametrize("t", ["g2-1", "d4-3"])
def test_generated_by_random_weight_vectors(t):
    rep = w1_report(t).rep
    rng = random.Random(5)
    blocks = rep.blocks()
    for _ in range(4):
        idx = blocks[rng.choice(sorted(blocks))]
        v = {j: ONE * rng.randint(1, 3) for j in idx}
        clo = submodule_closure(rep, v)
        assert len(clo.vectors) == rep.dim


def test_d4_build(d4):
    assert d4.ok
    assert d4.rep.dim == 29
    assert d4.rep.weights[d4.rep.cyclic] == cartan_data("d4-3").varpi2


def test_d4_claims(d4):
    rep = d4.rep
    w = {rep.cyclic: ONE}
    assert all(ok for _, ok, _ in d4_claims(rep, w))
    assert act(rep, "e", 2, apply_e_monomial(rep, (3, 2, 3), w)) == w
    assert act(rep, "e", 2, apply_e_monomial(rep, (1, 1, 3), w)) == apply_e_monomial(rep, (1, 2, 3), w)
    x = apply_e_monomial(rep, (1, 1, 3), w)
    assert membership(pair(x, d4.gram, x), "one_plus_qA")


def test_d4_decomposition_matches_S1(d4):
    from collections import Counter

    from krcrystal.branching import branch_verify

    rep = branch_verify(d4.rep, 1)
    assert rep.passed
    expect = Counter(tuple_weight("d4-3", 1, s).classical for s in enumerate_S("d4-3", 1))
    assert Counter(rep.computed) == expect
    assert (0, 0) in rep.computed


def test_d4_sign_flip_negates_last_claim():
    """Flipping the sign of e0 keeps the relations but sends e2 e^(3,2,3) w to -w."""
    rep, gram, _ = _d4_assemble(sign=-1)
    assert verify_relations(rep) == []
    w = {rep.cyclic: ONE}
    claims = dict((name, ok) for name, ok, _ in d4_claims(rep, w))
    assert not claims["e2 e^(3,2,3) w = w"]
    assert act(rep, "e", 2, apply_e_monomial(rep, (3, 2, 3), w)) == {rep.cyclic: -ONE}


def test_d4_solution_is_rigid():
    rep, gram, info = _d4_assemble()
    tangent, orbit, _ = _d4_tangent(rep, gram, info)
    assert tangent == orbit == 5


def test_build_is_fresh_each_call():
    # the cached report and a direct build agree
    assert build_W1_D4().rep.dumps() == w1_report("d4-3").rep.dumps()
