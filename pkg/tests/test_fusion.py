import random
from itertools import product

import pytest

from krcrystal.fusion import (FusionError, KRModule, check_intertwiner, compose_R, fuse, fusion_shifts,
                              solve_R, staircase_word, verify_tensor_expansion, w1_report)
from krcrystal.linalg import nullspace
from krcrystal.polarverify import monomial_gram
from krcrystal.qfield import ONE, ZERO
from krcrystal.repcore import check_admissible, kron_gram, tensor_power, tensor_with_shifts

from helpers import fused, g2_weyl_dim, recursive


@pytest.fixture(scope="module")
def W():
    return w1_report("g2-1").rep


def test_shifts_and_word():
    assert fusion_shifts("g2-1", 3) == [2, 0, -2]
    assert fusion_shifts("d4-3", 2) == [1, -1]
    assert staircase_word(1) == []
    assert staircase_word(3) == [0, 1, 0]
    assert len(staircase_word(4)) == 6


def test_R_identity_for_equal_shifts(W):
    R = solve_R(W, 2, 2)
    assert all(col == {c: ONE} for c, col in enumerate(R.cols))


def test_R_unique_and_rank(W):
    R = solve_R(W, 1, -1, method="linear")
    assert R.solution_dim == 1
    # rank is the sum of the classical constituents of W^2
    assert R.rank() == g2_weyl_dim(0, 2) + g2_weyl_dim(0, 1) == 34
    n = W.dim
    uu = W.cyclic * n + W.cyclic
    assert R.cols[uu] == {uu: ONE}


def test_R_methods_agree(W):
    a = solve_R(W, 1, -1, method="linear")
    b = solve_R(W, 1, -1, method="cyclic")
    assert a.cols == b.cols


def test_R_intertwines(W):
    R = solve_R(W, 2, 0)
    src = tensor_with_shifts(W.twist(2), W.twist(0))
    tgt = tensor_with_shifts(W.twist(0), W.twist(2))
    assert check_intertwiner(R.cols, src, tgt) == []


def test_R_wrong_order(W):
    with pytest.raises(FusionError):
        solve_R(W, -1, 1)


def test_yang_baxter(W):
    shifts = fusion_shifts("g2-1", 3)
    r1, o1 = compose_R(W, shifts, [0, 1, 0])
    r2, o2 = compose_R(W, shifts, [1, 0, 1])
    assert o1 == o2 == sorted(shifts)
    assert r1 == r2


def test_fuse_level_one_is_fundamental():
    M = fuse("g2-1", 1)
    w1 = w1_report("g2-1")
    assert M.rep.dumps() == w1.rep.dumps() and M.gram == w1.gram


@pytest.mark.parametrize("t,ell,dim", [("g2-1", 2, 34), ("g2-1", 3, 133), ("d4-3", 2, 329)])
def test_fused_dimension_and_norm(t, ell, dim):
    M = fused(t, ell)
    assert M.dim == dim
    assert M.pairing(M.v, M.v) == ONE


def test_resource_bound():
    with pytest.raises(FusionError):
        fuse("g2-1", 4, max_level=3)


def test_gram_symmetric_and_admissible():
    M = fused("g2-1", 2)
    for j, col in enumerate(M.gram):
        for i, a in col.items():
            assert M.gram[i].get(j) == a
    assert check_admissible(M.rep, M.rep, M.gram) == []


def test_gram_well_defined_on_kernel(W):
    """(u, R v)_0 vanishes for u in the kernel of R_2."""
    shifts = fusion_shifts("g2-1", 2)
    cols, _ = compose_R(W, shifts, staircase_word(2))
    src = tensor_power(W, shifts)
    g1 = w1_report("g2-1").gram
    pair0 = kron_gram(g1, g1)
    rng = random.Random(2)
    for wt, idx in sorted(src.blocks().items())[:12]:
        rows: dict = {}
        for p, c in enumerate(idx):
            for r, a in cols[c].items():
                rows.setdefault(r, {})[p] = a
        kern = nullspace(list(rows.values()), len(idx))
        for k in kern:
            u = {idx[p]: a for p, a in k.items()}
            v = rng.choice(idx)
            val = ZERO
            for i, a in u.items():
                for r, b in cols[v].items():
                    g = pair0[r].get(i)
                    if g:
                        val = val + a * g * b
            assert not val


@pytest.mark.parametrize("ell", [2, 3])
def test_cross_model_gram_tables(ell):
    F, R = fused("g2-1", ell), recursive("g2-1", ell)
    assert F.dim == R.dim
    box = [(a, b, c, d) for a in range(2) for b in range(ell + 1) for c in range(2 * ell + 1)
           for d in range(ell + 1)]
    assert monomial_gram(F, box, four=True) == monomial_gram(R, box, four=True)


def test_cross_model_weight_multiplicities():
    from collections import Counter

    F, R = fused("g2-1", 3), recursive("g2-1", 3)
    assert Counter(F.rep.weights) == Counter(R.rep.weights)


def test_recursive_nonvanishing_matches_tensor():
    M1 = recursive("g2-1", 1)
    M2 = recursive("g2-1", 2)
    amb = tensor_with_shifts(M1.rep, M1.rep.twist(2))
    seed = {j * M1.dim + M1.rep.cyclic: a for j, a in M1.v.items()}
    from krcrystal.repcore import apply_e_monomial

    for t in product(range(3), range(5), range(3)):
        assert bool(M2.monomial(t)) == bool(apply_e_monomial(amb, t, seed))


@pytest.mark.parametrize("ell", [2, 3])
def test_g2_expansion(ell):
    prev = recursive("g2-1", ell - 1)
    for tup in product(range(4), repeat=3):
        for m in (-ell, ell):
            assert verify_tensor_expansion("g2-1", prev, tup, m)


def test_expansion_trivial_tuple():
    prev = recursive("d4-3", 1)
    for m in (-5, 0, 5):
        assert verify_tensor_expansion("d4-3", prev, (0, 0, 0), m)


@pytest.mark.parametrize("form", ["d4", "d4-e2"])
def test_d4_expansions(form):
    prev = recursive("d4-3", 1)
    for tup in product(range(5), range(4), range(6)):
        for m in (-2, 2):
            assert verify_tensor_expansion("d4-3", prev, tup, m, form=form), (tup, m)


def test_json_round_trip():
    M = fused("g2-1", 2)
    back = KRModule.from_json(M.to_json())
    assert back.rep.dumps() == M.rep.dumps()
    assert back.gram == M.gram and back.v == M.v and back.ell == 2
