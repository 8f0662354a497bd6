"""Kashiwara operators, the crystal lattice L and the pseudobase B.

L is built as the A-span of all Kashiwara monomials applied to the
distinguished vector, with A the rational functions regular at q = 0.  Each
weight space of L is kept as a triangular A-basis (elimination on minimal
q-adic valuation), so the class of a lattice vector mod qL is read off by
evaluating its A-coordinates at q = 0.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .cartan import Weight
from .linalg import EchelonSpan, _cost, nullspace, vaxpy
from .qfield import ONE, RatQ, Q, membership
from .repcore import Rep, act, act_divided

log = logging.getLogger(__name__)

__all__ = [
    "CrystalError",
    "LatticeBasis",
    "CrystalNode",
    "CrystalGraph",
    "Pseudobase",
    "kashiwara",
    "string_ops",
    "extract_pseudobase",
    "word_basis",
    "export_graph",
    "graph_from_json",
]


class CrystalError(RuntimeError):
    pass


def _rep_of(M) -> Rep:
    return M if isinstance(M, Rep) else M.rep


# ---------------------------------------------------------------------------
# Kashiwara operators


class StringOps:
    """i-string decompositions of every weight space of a module.

    For a weight lam and index i the vectors f_i^(k) u, with u running over a
    basis of ker e_i on lam + k alpha_i, form a basis of the lam weight space.
    Coordinates in that basis give the decomposition v = sum_k f_i^(k) u_k.
    """

    def __init__(self, rep: Rep):
        self.rep = rep
        self.blocks = rep.blocks()
        self.data = rep.cartan
        self._kernels: dict = {}
        self._strings: dict = {}

    def kernel(self, i: int, wt) -> list:
        key = (i, wt)
        if key not in self._kernels:
            idx = self.blocks.get(wt, [])
            rows: dict = {}
            for j, c in enumerate(idx):
                for r, a in act(self.rep, "e", i, {c: ONE}).items():
                    rows.setdefault(r, {})[j] = a
            kern = nullspace(list(rows.values()), len(idx))
            self._kernels[key] = [{idx[j]: a for j, a in x.items()} for x in kern]
        return self._kernels[key]

    def strings(self, i: int, wt):
        """(span, heads): span holds f_i^(k) u in order, heads[n] = (k, u)."""
        key = (i, wt)
        if key not in self._strings:
            alpha = self.data.alpha(i)
            span, heads = EchelonSpan(), []
            k = 0
            top = wt
            limit = max(w[i] for w in self.blocks)
            while top[i] <= limit:
                if top in self.blocks:
                    for u in self.kernel(i, top):
                        x = act_divided(self.rep, "f", i, k, u)
                        if not x:
                            continue
                        if not span.add(x):
                            raise CrystalError(f"string vectors at {wt} for i={i} are dependent")
                        heads.append((k, u))
                k += 1
                top = top + alpha
            if len(span) != len(self.blocks.get(wt, [])):
                raise CrystalError(f"i={i} strings do not span the weight space {wt}")
            self._strings[key] = (span, heads)
        return self._strings[key]

    def decompose(self, i: int, v: dict) -> list:
        """List of (k, u_k) with v = sum f_i^(k) u_k and e_i u_k = 0."""
        parts: dict = {}
        for j, a in v.items():
            parts.setdefault(self.rep.weights[j], {})[j] = a
        out = []
        for wt, vw in parts.items():
            span, heads = self.strings(i, wt)
            coords = span.coords(vw)
            if coords is None:
                raise CrystalError("vector outside its weight space")
            for n, a in coords.items():
                k, u = heads[n]
                out.append((k, {r: a * b for r, b in u.items()}))
        return out

    def apply(self, i: int, direction: str, v: dict) -> dict:
        if not v:
            return {}
        step = 1 if direction in ("lower", "f") else -1
        if direction not in ("lower", "f", "raise", "e"):
            raise ValueError(f"unknown direction {direction!r}")
        out: dict = {}
        for k, u in self.decompose(i, v):
            vaxpy(out, ONE, act_divided(self.rep, "f", i, k + step, u))
        return out


_OPS: dict = {}


def string_ops(M) -> StringOps:
    rep = _rep_of(M)
    hit = _OPS.get(id(rep))
    if hit is None or hit[0] is not rep:
        if len(_OPS) > 16:
            _OPS.clear()
        hit = (rep, StringOps(rep))
        _OPS[id(rep)] = hit
    return hit[1]


def kashiwara(M, i: int, direction: str, v: dict) -> dict:
    """Kashiwara operator e~_i (``direction='raise'``) or f~_i (``'lower'``)."""
    return string_ops(M).apply(i, direction, v)


# ---------------------------------------------------------------------------
# A-lattices


def _lattice_basis(gens: list) -> list:
    """A-basis of the A-span of ``gens``: repeatedly pivot on the entry of
    least valuation, which makes every elimination coefficient lie in A."""
    cols = [dict(g) for g in gens if g]
    basis = []
    while cols:
        best = None
        for ci, c in enumerate(cols):
            for r, a in c.items():
                key = (a.valuation(), _cost(a), r, ci)
                if best is None or key < best[0]:
                    best = (key, r, ci)
        _, r, ci = best
        piv = cols.pop(ci)
        inv = piv[r].inverse()
        basis.append((r, piv))
        rest = []
        for c in cols:
            a = c.get(r)
            if a is not None:
                vaxpy(c, -(a * inv), piv)
            if c:
                rest.append(c)
        cols = rest
    return basis


def _lattice_coords(basis: list, x: dict) -> list | None:
    """Coordinates of x in a triangular lattice basis, or None if x is not in
    the Q(q)-span.  Basis vector k vanishes on the pivots of vectors < k."""
    x = dict(x)
    out = []
    for r, b in basis:
        a = x.get(r)
        if a is None:
            out.append(RatQ(0))
            continue
        c = a / b[r]
        out.append(c)
        vaxpy(x, -c, b)
    return None if x else out


@dataclass
class LatticeBasis:
    """Per weight, an A-basis of L_lam in module coordinates (triangular)."""

    blocks: dict

    def rank(self) -> int:
        return sum(len(b) for b in self.blocks.values())

    def coords(self, wt, x: dict):
        return _lattice_coords(self.blocks.get(wt, []), x)

    def contains(self, wt, x: dict) -> bool:
        if not x:
            return True
        c = self.coords(wt, x)
        return c is not None and all(membership(a, "A") for a in c)

    def vectors(self):
        for wt in sorted(self.blocks):
            for _, b in self.blocks[wt]:
                yield wt, b


# ---------------------------------------------------------------------------
# crystal graph


@dataclass
class CrystalNode:
    id: int
    weight: tuple
    sign: int = 1
    vector: tuple | None = field(default=None, compare=False)


@dataclass
class CrystalGraph:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": n.id, "weight": list(n.weight), "sign": n.sign} for n in self.nodes],
            "edges": [{"from": a, "to": b, "i": i} for a, b, i in self.edges],
        }

    def out_edges(self, i: int) -> dict:
        return {a: b for a, b, k in self.edges if k == i}


def graph_from_json(data) -> CrystalGraph:
    if isinstance(data, str):
        data = json.loads(data)
    nodes = [CrystalNode(int(n["id"]), tuple(n["weight"]), int(n.get("sign", 1))) for n in data["nodes"]]
    edges = [(int(e["from"]), int(e["to"]), int(e["i"])) for e in data["edges"]]
    return CrystalGraph(nodes, edges)


def export_graph(G: CrystalGraph, fmt: str = "dot") -> str:
    """Deterministic DOT or JSON text for a crystal graph."""
    if fmt == "json":
        return json.dumps(G.to_json(), sort_keys=True, indent=1)
    if fmt != "dot":
        raise ValueError(f"unknown graph format {fmt!r}")
    lines = ["digraph crystal {"]
    for n in sorted(G.nodes, key=lambda n: n.id):
        w = ",".join(str(x) for x in n.weight)
        lines.append(f'  n{n.id} [label="{n.id}: ({w})"];')
    for a, b, i in sorted(G.edges):
        lines.append(f'  n{a} -> n{b} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# extraction


@dataclass
class Pseudobase:
    lattice: LatticeBasis
    graph: CrystalGraph
    checks: dict
    form0: list

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _build_lattice(M, ops: StringOps, indices, depth_bound: int) -> LatticeBasis:
    rep = ops.rep
    v = dict(M.v)
    bases: dict = {}
    wt0 = rep.weight_of(v)
    bases[wt0] = _lattice_basis([v])
    queue = [(v, wt0, 0)]
    pos = 0
    while pos < len(queue):
        x, wt, depth = queue[pos]
        pos += 1
        for i in indices:
            for direction in ("lower", "raise"):
                y = ops.apply(i, direction, x)
                if not y:
                    continue
                wy = rep.weight_of(y)
                c = _lattice_coords(bases.get(wy, []), y)
                if c is not None and all(membership(a, "A") for a in c):
                    continue
                if depth + 1 > depth_bound:
                    raise CrystalError(f"lattice did not stabilize within depth {depth_bound} "
                                       f"(weight {tuple(wy)}, {len(queue)} generators)")
                # the old basis spans the same lattice as the old generators
                bases[wy] = _lattice_basis([b for _, b in bases.get(wy, [])] + [y])
                queue.append((y, wy, depth + 1))
    return LatticeBasis(bases)


def _mod_q(L: LatticeBasis, wt, x: dict) -> tuple:
    c = L.coords(wt, x)
    if c is None or not all(membership(a, "A") for a in c):
        raise CrystalError(f"vector of weight {tuple(wt)} is not in L")
    return tuple(a.at_zero() for a in c)


def _lift(L: LatticeBasis, wt, cls) -> dict:
    out: dict = {}
    for (_, b), a in zip(L.blocks[wt], cls):
        if a:
            vaxpy(out, Q(a), b)
    return out


def _canon(cls):
    for a in cls:
        if a:
            return (tuple(-x for x in cls), -1) if a < 0 else (tuple(cls), 1)
    return None, 0


def word_basis(M):
    """M re-expressed in the basis of generator words applied to its
    distinguished vector.  The fused model's image basis carries large
    coefficients; the word basis keeps the lattice arithmetic small."""
    from .fusion import KRModule
    from .repcore import submodule_closure

    clo = submodule_closure(M.rep, M.v, M.rep, M.v)
    if len(clo.vectors) != M.dim:
        raise CrystalError("distinguished vector does not generate the module")
    gram = clo.gram(M.gram)
    return KRModule(clo.rep, {0: ONE}, gram, M.ell, M.provenance, dict(M.meta))


def extract_pseudobase(M, indices=(0, 1, 2), depth_bound: int | None = None,
                       rebase: bool | None = None) -> Pseudobase:
    """Crystal lattice and pseudobase generated from the distinguished vector of M.

    With ``rebase`` (default for fused modules) the computation runs in the
    word basis of :func:`word_basis`; the graph does not depend on the basis.
    """
    if rebase is None:
        rebase = getattr(M, "provenance", None) == "fused"
    if rebase:
        M = word_basis(M)
    rep = _rep_of(M)
    ops = string_ops(rep)
    n = rep.dim
    if depth_bound is None:
        depth_bound = n + len(rep.blocks())
    L = _build_lattice(M, ops, indices, depth_bound)
    if L.rank() != n:
        raise CrystalError(f"lattice has rank {L.rank()}, module has dimension {n}")

    # Gram of the lattice basis: entries in A, reduced mod q
    form = {}
    gram_in_A = True
    for wt, basis in L.blocks.items():
        for a_idx, (_, x) in enumerate(basis):
            for b_idx, (_, y) in enumerate(basis):
                val = M.pairing(x, y)
                gram_in_A &= membership(val, "A")
                form[(wt, a_idx, b_idx)] = val.at_zero() if membership(val, "A") else None

    def form0(wt, c1, c2):
        s = Fraction(0)
        for a_idx, a in enumerate(c1):
            if not a:
                continue
            for b_idx, b in enumerate(c2):
                if b:
                    s += a * b * form[(wt, a_idx, b_idx)]
        return s

    # orbit of the class of v mod qL, up to sign
    wt0 = rep.weight_of(M.v)
    start, _ = _canon(_mod_q(L, wt0, M.v))
    keys = {(wt0, start): 0}
    nodes = [CrystalNode(0, tuple(wt0), 1, start)]
    signed_edges: dict = {}
    norm_ok = True
    pos = 0
    while pos < len(nodes):
        node = nodes[pos]
        pos += 1
        wt = Weight(*node.weight)
        x = _lift(L, wt, node.vector)
        for i in indices:
            for direction in ("lower", "raise"):
                y = ops.apply(i, direction, x)
                if not y:
                    continue
                wy = rep.weight_of(y)
                cls = _mod_q(L, wy, y)
                key, sign = _canon(cls)
                if key is None:
                    continue
                if (wy, key) not in keys:
                    if len(nodes) >= n + 1:
                        raise CrystalError("more classes than the dimension")
                    keys[(wy, key)] = len(nodes)
                    nodes.append(CrystalNode(len(nodes), tuple(wy), 1, key))
                    norm_ok &= form0(wy, key, key) == 1
                signed_edges[(node.id, direction, i)] = (keys[(wy, key)], sign)
    norm_ok &= form0(wt0, start, start) == 1

    # B' must be a basis of L/qL and orthonormal for (,)_0
    independent = True
    orthonormal = True
    for wt in L.blocks:
        members = [nd for nd in nodes if nd.weight == tuple(wt)]
        span = EchelonSpan()
        for nd in members:
            independent &= span.add({k: Q(a) for k, a in enumerate(nd.vector) if a})
        independent &= len(members) == len(L.blocks[wt])
        for a in members:
            for b in members:
                orthonormal &= form0(wt, a.vector, b.vector) == (1 if a is b else 0)

    # mutual inverse edges, on B' with signs (covers -B' by linearity)
    inverse_ok = True
    for (src, direction, i), (dst, sign) in signed_edges.items():
        back = "raise" if direction == "lower" else "lower"
        inverse_ok &= signed_edges.get((dst, back, i)) == (src, sign)
    edges = sorted((s, d, i) for (s, direction, i), (d, _) in signed_edges.items() if direction == "lower")
    graph = CrystalGraph(nodes, edges)

    # stability of L under every operator, on the final basis
    stable = all(L.contains(rep.weight_of(y), y) if (y := ops.apply(i, dr, b)) else True
                 for _, b in L.vectors() for i in indices for dr in ("lower", "raise"))
    weights_ok = all(rep.weight_of(_lift(L, Weight(*nd.weight), nd.vector)) == Weight(*nd.weight)
                     for nd in nodes)
    checks = {
        "lattice rank equals dimension": L.rank() == n,
        "lattice stable under Kashiwara operators": stable,
        "lattice Gram entries in A": gram_in_A,
        "|B'| equals dimension": len(nodes) == n,
        "B' is a basis of L/qL": independent,
        "(b, b')_0 is the identity on B'": orthonormal and norm_ok,
        "weight grading": weights_ok,
        "f~_i b = b' iff e~_i b' = b": inverse_ok,
    }
    form_rows = [[str(form[(wt, a, b)]) for b in range(len(bs))]
                 for wt, bs in sorted(L.blocks.items()) for a in range(len(bs))]
    return Pseudobase(L, graph, checks, form_rows)
