import json
import random

import pytest

from krcrystal.crystal import (CrystalGraph, export_graph, extract_pseudobase, graph_from_json,
                               kashiwara, string_ops, word_basis)
from krcrystal.fundamental import G2_LABELS
from krcrystal.fusion import w1_module
from krcrystal.qfield import ONE, Q, membership

from helpers import fused, recursive

IX = {lab: k for k, lab in enumerate(G2_LABELS)}


@pytest.fixture(scope="module")
def w1():
    return w1_module("g2-1")


@pytest.fixture(scope="module")
def base1(w1):
    return extract_pseudobase(w1)


def test_raise_kills_highest_vector(w1):
    for i in (1, 2):
        assert kashiwara(w1, i, "raise", {IX["1"]: ONE}) == {}


def test_lower_along_short_string(w1):
    assert kashiwara(w1, 2, "lower", {IX["3"]: ONE}) == {IX["0"]: ONE}
    assert kashiwara(w1, 2, "raise", {IX["0"]: ONE}) == {IX["3"]: ONE}
    assert kashiwara(w1, 2, "lower", {IX["-3"]: ONE}) == {}


def test_string_calculus(w1):
    """e~_i f~_i v = v when no string component of v is at the bottom of its string,
    and f~_i e~_i v = v when none is at the top."""
    from krcrystal.repcore import act_divided

    M = recursive("g2-1", 2)
    ops = string_ops(M)
    rng = random.Random(4)
    blocks = M.rep.blocks()
    checked = 0
    for _ in range(60):
        idx = blocks[rng.choice(sorted(blocks))]
        v = {j: Q(rng.randint(-2, 2) or 1) for j in idx}
        for i in range(3):
            parts = ops.decompose(i, v)
            if all(act_divided(M.rep, "f", i, k + 1, u) for k, u in parts):
                assert kashiwara(M, i, "raise", kashiwara(M, i, "lower", v)) == v
                checked += 1
            if all(k >= 1 for k, _ in parts):
                assert kashiwara(M, i, "lower", kashiwara(M, i, "raise", v)) == v
                checked += 1
    assert checked > 20


def test_string_decomposition_reassembles(w1):
    from krcrystal.linalg import vaxpy
    from krcrystal.repcore import act, act_divided

    M = recursive("g2-1", 2)
    ops = string_ops(M)
    for j in range(M.dim):
        for i in range(3):
            parts = ops.decompose(i, {j: ONE})
            back: dict = {}
            for k, u in parts:
                assert not act(M.rep, "e", i, u)
                vaxpy(back, ONE, act_divided(M.rep, "f", i, k, u))
            assert back == {j: ONE}


def test_fundamental_graph(base1):
    assert base1.ok, base1.checks
    G = base1.graph
    assert len(G.nodes) == 7
    assert len(G.edges) == 8
    assert {i for _, _, i in G.edges} == {0, 1, 2}
    # each node has at most one outgoing edge per color and no loops
    for i in range(3):
        outs = [a for a, _, k in G.edges if k == i]
        assert len(outs) == len(set(outs))
    assert all(a != b for a, b, _ in G.edges)


def test_fundamental_dot(base1):
    dot = export_graph(base1.graph, "dot")
    assert dot.startswith("digraph crystal {")
    assert dot.count("[label=\"") == 7 + 8
    labels = {int(x) for x in __import__("re").findall(r'-> n\d+ \[label="(\d)"\]', dot)}
    assert labels <= {0, 1, 2}
    assert export_graph(base1.graph, "dot") == dot


def test_json_round_trip(base1):
    text = export_graph(base1.graph, "json")
    back = graph_from_json(text)
    assert back == base1.graph
    assert json.loads(export_graph(back, "json")) == json.loads(text)


def test_empty_graph():
    G = CrystalGraph()
    assert export_graph(G, "dot") == "digraph crystal {\n}\n"
    assert graph_from_json(export_graph(G, "json")) == G


def test_unknown_format(base1):
    with pytest.raises(ValueError):
        export_graph(base1.graph, "svg")


def test_lattice_vectors_have_norms_in_A(base1, w1):
    for _, b in base1.lattice.vectors():
        assert membership(w1.pairing(b, b), "A")


@pytest.mark.parametrize("model", ["fused", "recursive"])
def test_level_two(model):
    M = fused("g2-1", 2) if model == "fused" else recursive("g2-1", 2)
    P = extract_pseudobase(M)
    assert P.ok, P.checks
    assert len(P.graph.nodes) == M.dim == 34
    assert len(P.graph.edges) == 50


def test_fused_and_word_basis_agree():
    M = fused("g2-1", 2)
    N = word_basis(M)
    assert N.dim == M.dim and N.pairing(N.v, N.v) == ONE
    a = extract_pseudobase(M, rebase=False)
    b = extract_pseudobase(N, rebase=False)
    assert a.graph.to_json() == b.graph.to_json()


def test_d4_fundamental_graph():
    P = extract_pseudobase(w1_module("d4-3"))
    assert P.ok
    assert len(P.graph.nodes) == 29
    assert len(P.graph.edges) == 42
