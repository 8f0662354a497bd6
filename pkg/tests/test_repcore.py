import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krcrystal.cartan import Weight
from krcrystal.fundamental import G2_LABELS, build_W1_G2
from krcrystal.linalg import vaxpy
from krcrystal.qfield import ONE, Q, q_binom, q_fact, qpow
from krcrystal.repcore import (GramError, Rep, act, act_divided, apply_e_monomial,
                              check_admissible, gram_from_cyclic, kron_gram, monomial_weight,
                              pair, tensor_with_shifts, verify_relations, zero_rep)

IX = {lab: k for k, lab in enumerate(G2_LABELS)}


@pytest.fixture(scope="module")
def w1():
    return build_W1_G2()


def vec(label):
    return {IX[label]: ONE}


def random_vec(rep, rng, wt=None):
    idx = rep.blocks()[wt] if wt is not None else range(rep.dim)
    out = {}
    for j in idx:
        c = rng.randint(-3, 3)
        if c:
            out[j] = Q(c) * qpow(rng.randint(-2, 2))
    return out


# -- divided powers and monomials ----------------------------------------------


def test_e2_on_zero_vector(w1):
    assert act(w1.rep, "e", 2, vec("0")) == {IX["3"]: qpow(-1) + qpow(1)}


def test_negative_divided_power(w1):
    for gen in ("e", "f"):
        for i in range(3):
            assert act_divided(w1.rep, gen, i, -1, vec("1")) == {}


def test_f1_squared_vanishes(w1):
    for j in range(7):
        assert act_divided(w1.rep, "f", 1, 2, {j: ONE}) == {}


def test_monomial_examples(w1):
    v = vec("1")
    assert apply_e_monomial(w1.rep, (0, 0, 0, 0), v) == v
    assert apply_e_monomial(w1.rep, (1, 1, 1), v) == {}


@pytest.mark.parametrize("t", [(0, 1, 1), (0, 0, 1, 1), (1, 0, 2, 1), (0, 1, 2, 1)])
def test_monomial_weight(w1, t):
    x = apply_e_monomial(w1.rep, t, vec("1"))
    if x:
        assert w1.rep.weight_of(x) == monomial_weight(w1.rep.cartan, 1, t)


# -- relations -------------------------------------------------------------------


def test_relations_hold(w1):
    assert verify_relations(w1.rep) == []


def test_relations_detect_zeroed_e2(w1):
    rep = w1.rep
    e = list(rep.e)
    e[2] = tuple({} for _ in range(rep.dim))
    broken = replace(rep, e=tuple(e), _blocks=None)
    bad = verify_relations(broken)
    assert {"relation": "[e2,f2]", "vector": IX["3"]} in bad


def test_trivial_module():
    assert verify_relations(zero_rep("g2-1")) == []
    assert verify_relations(zero_rep("d4-3")) == []


# -- tensor products ---------------------------------------------------------------


def test_coproduct_on_lowest_vector(w1):
    rep = w1.rep
    T = tensor_with_shifts(rep, rep)
    n = rep.dim
    data = rep.cartan
    # -3 is lowest for i = 2; Delta(e2)(v (x) w) = e2 v (x) t2^-1 w + v (x) e2 w
    v, w = IX["-3"], IX["3"]
    lhs = act(T, "e", 2, {v * n + w: ONE})
    expect = {}
    tinv = qpow(-data.s[2] * rep.weights[w][2])
    for r, c in act(rep, "e", 2, {v: ONE}).items():
        vaxpy(expect, c * tinv, {r * n + w: ONE})
    for r, c in act(rep, "e", 2, {w: ONE}).items():
        vaxpy(expect, c, {v * n + r: ONE})
    assert lhs == expect


@settings(max_examples=25)
@given(st.integers(0, 2), st.integers(2, 3), st.integers(-2, 2), st.integers(-2, 2), st.integers(0, 10 ** 6))
def test_divided_coproduct_formula(i, k, ma, mb, seed):
    """Delta(e_i^(k)) as the q-binomial sum agrees with k-fold application / [k]!."""
    rep = build_W1_G2().rep
    A, B = rep.twist(ma), rep.twist(mb)
    T = tensor_with_shifts(A, B)
    rng = random.Random(seed)
    x, y = rng.randrange(7), rng.randrange(7)
    n = rep.dim
    lhs = act_divided(T, "e", i, k, {x * n + y: ONE})
    si = rep.cartan.s[i]
    rhs = {}
    for j in range(k + 1):
        left = act_divided(A, "e", i, k - j, {x: ONE})
        right = act_divided(B, "e", i, j, {y: ONE})
        if not left or not right:
            continue
        # t_i^{-(k-j)} acts on the right factor after e_i^(j)
        wr = B.weight_of(right)
        c = qpow(si * j * (k - j)) * qpow(-si * (k - j) * wr[i])
        for a, ca in left.items():
            for b, cb in right.items():
                vaxpy(rhs, c * ca * cb, {a * n + b: ONE})
    assert lhs == rhs


def test_zero_shift_tensor_is_plain(w1):
    rep = w1.rep
    T0 = tensor_with_shifts(rep, rep)
    T1 = tensor_with_shifts(rep.twist(0), rep.twist(0))
    for i in range(3):
        assert T0.e[i] == T1.e[i] and T0.f[i] == T1.f[i]
    assert T0.shift == 0


def test_tensor_relations_hold(w1):
    T = tensor_with_shifts(w1.rep.twist(1), w1.rep.twist(-1))
    assert verify_relations(T) == []


# -- Gram matrices -----------------------------------------------------------------


def test_fundamental_norms(w1):
    g = w1.gram
    for lab in ("1", "2", "3", "-1", "-2", "-3"):
        assert g[IX[lab]][IX[lab]] == ONE
    assert g[IX["0"]][IX["0"]] == Q("1+q^2")
    # distinct weights pair to zero
    assert all(set(col) == {j} for j, col in enumerate(g))


def test_gram_errors(w1):
    rep = w1.rep
    with pytest.raises(GramError) as exc:
        gram_from_cyclic(rep, {IX["0"]: ONE}, ONE, indices=(1,))
    assert exc.value.kind == "underdetermined"


def test_gram_trivial_module():
    base = zero_rep("g2-1")
    e = tuple(({},) for _ in range(3))
    rep = Rep(base.type, ("x",), (Weight(0, 0, 0),), e, e, 0, 0)
    assert gram_from_cyclic(rep, {0: ONE}) == [{0: ONE}]
    with pytest.raises(ValueError):
        gram_from_cyclic(rep, {0: ONE}, 0)


def test_admissible_on_fundamental(w1):
    assert check_admissible(w1.rep, w1.rep, w1.gram) == []


def test_product_pairing_is_admissible(w1):
    """The factorwise pairing between shift m and shift -m copies is admissible."""
    rep = w1.rep
    M = tensor_with_shifts(rep.twist(1), rep.twist(-1))
    N = tensor_with_shifts(rep.twist(-1), rep.twist(1))
    g = kron_gram(w1.gram, w1.gram)
    rng = random.Random(3)
    wts = sorted(M.blocks())
    us, vs = [], []
    data = rep.cartan
    while len(us) < 12:
        wt = rng.choice(wts)
        wv = wt + data.alpha(rng.randrange(3)).scale(rng.choice((1, -1)))
        if wv not in N.blocks():
            continue
        us.append(random_vec(M, rng, wt) or {M.blocks()[wt][0]: ONE})
        vs.append(random_vec(N, rng, wv) or {N.blocks()[wv][0]: ONE})
    assert check_admissible(M, N, g, us, vs) == []


@pytest.mark.parametrize("i", [0, 1, 2])
def test_divided_adjointness(w1, i):
    """(e_i^(k) u, v) = q_i^{k^2 - k<h_i, wt v>} (u, f_i^(k) v)."""
    rep, g = w1.rep, w1.gram
    si = rep.cartan.s[i]
    for k in (1, 2):
        for a in range(7):
            for b in range(7):
                u, v = {a: ONE}, {b: ONE}
                lhs = pair(act_divided(rep, "e", i, k, u), g, v)
                lam = rep.weights[b][i]
                rhs = qpow(si * (k * k - k * lam)) * pair(u, g, act_divided(rep, "f", i, k, v))
                assert lhs == rhs


@pytest.mark.parametrize("i", [1, 2])
def test_commutation_identity(w1, i):
    """f^(r) e^(s) v = sum_k [r - s - <h_i, lam>, k] e^(s-k) f^(r-k) v on a weight vector v."""
    from helpers import recursive

    M = recursive("g2-1", 2)
    rep = M.rep
    si = rep.cartan.s[i]
    rng = random.Random(11 + i)
    for _ in range(10):
        wt = rng.choice(sorted(rep.blocks()))
        v = random_vec(rep, rng, wt)
        if not v:
            continue
        lam = wt[i]
        for r in range(4):
            for s in range(4):
                lhs = act_divided(rep, "f", i, r, act_divided(rep, "e", i, s, v))
                rhs = {}
                for k in range(min(r, s) + 1):
                    term = act_divided(rep, "e", i, s - k, act_divided(rep, "f", i, r - k, v))
                    vaxpy(rhs, q_binom(r - s - lam, k, si), term)
                assert lhs == rhs


def test_lowest_string_norms():
    """||e_i^(k) u||^2 = q_i^{-k^2 - k<h_i, lam>} [-<h_i, lam>, k] ||u||^2 when f_i u = 0."""
    from helpers import recursive

    checked = 0
    for ell in (1, 2):
        M = recursive("g2-1", ell)
        rep = M.rep
        for i in range(3):
            si = rep.cartan.s[i]
            for wt, idx in rep.blocks().items():
                for j in idx:
                    u = {j: ONE}
                    if act(rep, "f", i, u):
                        continue
                    nu = M.pairing(u, u)
                    lam = wt[i]
                    for k in range(1, 4):
                        x = act_divided(rep, "e", i, k, u)
                        expect = qpow(si * (-k * k - k * lam)) * q_binom(-lam, k, si) * nu
                        assert M.pairing(x, x) == expect
                        checked += 1
    assert checked > 50


def test_rep_json_round_trip(w1):
    rep = w1.rep
    back = Rep.from_json(rep.dumps())
    assert back.dumps() == rep.dumps()
    for i in range(3):
        assert back.e[i] == rep.e[i] and back.f[i] == rep.f[i]


def test_q_factorial_consistency():
    assert q_fact(3) == (qpow(1) + qpow(-1)) * (qpow(2) + ONE + qpow(-2))
