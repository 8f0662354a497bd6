"""Finite-dimensional U'_q(g)-modules with exact sparse actions.

A :class:`Rep` stores, for every generator ``e_i`` / ``f_i``, the images of
the basis vectors as sparse columns.  An integer ``shift`` m twists the
module to M_{q^m}: every application of e_0 (resp. f_0) picks up a factor
q^m (resp. q^-m).  Tensor products follow the coproduct

    D(e_i) = e_i (x) t_i^-1 + 1 (x) e_i,   D(f_i) = f_i (x) 1 + t_i (x) f_i,

with t_i acting on a weight vector of weight lam by q_i^<h_i, lam>.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

from .cartan import AffineType, CartanData, Weight, cartan_data, parse_type
from .linalg import EchelonSpan, LinAlgError, Vec, bilinear, matvec, nullspace, solve, vaxpy, vscale
from .qfield import ONE, ZERO, Q, RatQ, q_fact, q_int, qpow

log = logging.getLogger(__name__)

__all__ = [
    "Rep",
    "GramError",
    "act",
    "act_divided",
    "apply_e_monomial",
    "verify_relations",
    "tensor_with_shifts",
    "tensor_power",
    "gram_from_cyclic",
    "Closure",
    "submodule_closure",
    "kron_gram",
    "pair",
    "check_admissible",
]

GENS = ("e", "f")


class GramError(ArithmeticError):
    """gram_from_cyclic failure; ``kind`` is 'inconsistent' or 'underdetermined'."""

    def __init__(self, kind: str, msg: str):
        super().__init__(msg)
        self.kind = kind


@dataclass(frozen=True, eq=False)
class Rep:
    type: AffineType
    basis: tuple
    weights: tuple
    e: tuple
    f: tuple
    shift: int = 0
    cyclic: int | None = None
    _blocks: dict = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def cartan(self) -> CartanData:
        return cartan_data(self.type)

    def twist(self, m: int) -> "Rep":
        """The module M_{q^m} (shifts compose additively)."""
        return replace(self, shift=self.shift + m, _blocks=self._blocks)

    def blocks(self) -> dict:
        """Weight -> list of basis indices, in basis order."""
        if self._blocks is None:
            b: dict = {}
            for j, w in enumerate(self.weights):
                b.setdefault(w, []).append(j)
            object.__setattr__(self, "_blocks", b)
        return self._blocks

    def basis_vector(self, j: int) -> Vec:
        return {j: ONE}

    def weight_of(self, v: Vec) -> Weight | None:
        ws = {self.weights[j] for j in v}
        if len(ws) > 1:
            raise ValueError("vector is not a weight vector")
        return next(iter(ws)) if ws else None

    def matrix(self, gen: str, i: int):
        return (self.e if gen == "e" else self.f)[i]

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        def enc(mats):
            out = {}
            for i, cols in enumerate(mats):
                out[str(i)] = [[r, c, str(a)] for c, col in enumerate(cols)
                               for r, a in sorted(col.items())]
            return out

        return {
            "type": self.type.value,
            "shift": self.shift,
            "basis": [str(b) for b in self.basis],
            "weights": [list(w) for w in self.weights],
            "e": enc(self.e),
            "f": enc(self.f),
            "cyclic": self.cyclic,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Rep":
        if isinstance(data, str):
            data = json.loads(data)
        n = len(data["basis"])

        def dec(m):
            mats = []
            for i in range(3):
                cols = [dict() for _ in range(n)]
                for r, c, s in m.get(str(i), []):
                    cols[c][r] = RatQ.parse(s)
                mats.append(tuple(cols))
            return tuple(mats)

        return cls(
            type=parse_type(data["type"]),
            basis=tuple(data["basis"]),
            weights=tuple(Weight(*w) for w in data["weights"]),
            e=dec(data["e"]),
            f=dec(data["f"]),
            shift=int(data.get("shift", 0)),
            cyclic=data.get("cyclic"),
        )


def zero_rep(t, weight=Weight(0, 0, 0)) -> Rep:
    """One-dimensional module with all generators acting by zero."""
    empty = tuple(({},) for _ in range(3))
    return Rep(parse_type(t), ("1",), (Weight(*weight),), empty, empty)


# ---------------------------------------------------------------------------
# actions


def act(rep: Rep, gen: str, i: int, v: Vec) -> Vec:
    """Single generator application, including the spectral shift on index 0."""
    out = matvec(rep.matrix(gen, i), v)
    if i == 0 and rep.shift and out:
        c = qpow(rep.shift if gen == "e" else -rep.shift)
        out = {k: a * c for k, a in out.items()}
    return out


def act_divided(rep: Rep, gen: str, i: int, k: int, v: Vec) -> Vec:
    """Divided power ``gen_i^(k)`` applied to v; zero for k < 0."""
    if k < 0:
        return {}
    if k == 0:
        return dict(v)
    out = v
    for _ in range(k):
        out = act(rep, gen, i, out)
        if not out:
            return {}
    d = q_fact(k, rep.cartan.s[i]).inverse()
    return {j: a * d for j, a in out.items()}


def apply_e_monomial(rep: Rep, t: Sequence[int], v: Vec) -> Vec:
    """e^{(a,b,c,d)} = e0^(a) e1^(b) e2^(c) e1^(d) e0^(d) applied to v.

    A triple ``(b, c, d)`` means ``a = 0``.
    """
    if len(t) == 3:
        t = (0, *t)
    a, b, c, d = t
    if min(a, b, c, d) < 0:
        return {}
    out = v
    for i, k in ((0, d), (1, d), (2, c), (1, b), (0, a)):
        out = act_divided(rep, "e", i, k, out)
        if not out:
            return {}
    return out


def monomial_weight(data: CartanData, ell: int, t: Sequence[int]) -> Weight:
    if len(t) == 3:
        t = (0, *t)
    a, b, c, d = t
    return (data.varpi2.scale(ell) + data.alpha(0).scale(a + d)
            + data.alpha(1).scale(b + d) + data.alpha(2).scale(c))


# ---------------------------------------------------------------------------
# relations


def _apply_word(rep: Rep, word, v: Vec) -> Vec:
    # word: sequence of (gen, i, k), applied right to left
    out = v
    for gen, i, k in reversed(word):
        out = act_divided(rep, gen, i, k, out)
        if not out:
            return {}
    return out


def verify_relations(rep: Rep, indices=(0, 1, 2)) -> list[dict]:
    """Check every defining relation on every basis vector.

    Returns the list of violations; each is a dict with the relation name and
    the witnessing basis index.  An empty list means the module is valid.
    ``indices=(1, 2)`` restricts to the classical subalgebra.
    """
    data = rep.cartan
    C, s = data.cartan, data.s
    bad = []
    for j in range(rep.dim):
        wt = rep.weights[j]
        v = {j: ONE}
        for i in indices:
            for gen, sign in (("e", 1), ("f", -1)):
                for r in rep.matrix(gen, i)[j]:
                    if rep.weights[r] != wt + data.alpha(i).scale(sign):
                        bad.append({"relation": f"weight {gen}{i}", "vector": j})
        for i in indices:
            for k in indices:
                lhs = vaxpy(act(rep, "e", i, act(rep, "f", k, v)), -ONE,
                            act(rep, "f", k, act(rep, "e", i, v)))
                if i == k:
                    vaxpy(lhs, -q_int(wt[i], s[i]), v)
                if lhs:
                    bad.append({"relation": f"[e{i},f{k}]", "vector": j})
        for i in indices:
            for k in indices:
                if i == k:
                    continue
                n = 1 - C[i][k]
                for gen in GENS:
                    tot: Vec = {}
                    for m in range(n + 1):
                        term = _apply_word(rep, [(gen, i, m), (gen, k, 1), (gen, i, n - m)], v)
                        vaxpy(tot, ONE if m % 2 == 0 else -ONE, term)
                    if tot:
                        bad.append({"relation": f"serre {gen}{i}{gen}{k}", "vector": j})
    return bad


# ---------------------------------------------------------------------------
# tensor products


def tensor_with_shifts(a: Rep, b: Rep) -> Rep:
    """a (x) b with each factor's own spectral shift baked into the actions.

    Basis index of ``x (x) y`` is ``ix * dim(b) + iy``.
    """
    if a.type != b.type:
        raise ValueError("type mismatch in tensor product")
    data = a.cartan
    nb = b.dim
    n = a.dim * nb
    weights = tuple(wa + wb for wa in a.weights for wb in b.weights)
    basis = tuple(f"{la}|{lb}" for la in a.basis for lb in b.basis)
    e_mats, f_mats = [], []
    for i in range(3):
        si = data.s[i]
        ea = [act(a, "e", i, {x: ONE}) for x in range(a.dim)]
        eb = [act(b, "e", i, {y: ONE}) for y in range(nb)]
        fa = [act(a, "f", i, {x: ONE}) for x in range(a.dim)]
        fb = [act(b, "f", i, {y: ONE}) for y in range(nb)]
        ecols, fcols = [], []
        for x in range(a.dim):
            tx = qpow(si * a.weights[x][i])
            for y in range(nb):
                col: Vec = {}
                if ea[x]:
                    tinv = qpow(-si * b.weights[y][i])
                    for r, c in ea[x].items():
                        col[r * nb + y] = c * tinv
                for r, c in eb[y].items():
                    k = x * nb + r
                    col[k] = col[k] + c if k in col else c
                ecols.append({k: c for k, c in col.items() if c})
                col = {}
                for r, c in fa[x].items():
                    col[r * nb + y] = c
                for r, c in fb[y].items():
                    k = x * nb + r
                    val = tx * c
                    col[k] = col[k] + val if k in col else val
                fcols.append({k: c for k, c in col.items() if c})
        e_mats.append(tuple(ecols))
        f_mats.append(tuple(fcols))
    return Rep(a.type, basis, weights, tuple(e_mats), tuple(f_mats), 0,
               None if a.cyclic is None or b.cyclic is None else a.cyclic * nb + b.cyclic)


def tensor_power(rep: Rep, shifts: Sequence[int]) -> Rep:
    """rep_{q^s1} (x) rep_{q^s2} (x) ... for the given shift list."""
    out = rep.twist(shifts[0])
    for s in shifts[1:]:
        out = tensor_with_shifts(out, rep.twist(s))
    return out


def pure_tensor(dims: Sequence[int], idx: Sequence[int]) -> int:
    k = 0
    for d, i in zip(dims, idx):
        k = k * d + i
    return k


# ---------------------------------------------------------------------------
# bilinear forms


def pair(u: Vec, gram_cols, v: Vec) -> RatQ:
    """The bilinear form u^T G v."""
    return bilinear(u, gram_cols, v)


def kron_gram(g1, g2) -> list:
    """Column-sparse Kronecker product of two Gram matrices (basis ``i * n2 + j``)."""
    n2 = len(g2)
    cols = []
    for b1 in range(len(g1)):
        for b2 in range(n2):
            col = {}
            for a1, x in g1[b1].items():
                for a2, y in g2[b2].items():
                    col[a1 * n2 + a2] = x * y
            cols.append(col)
    return cols


def check_admissible(m: Rep, n: Rep, gram_cols, vectors_m=None, vectors_n=None) -> list[str]:
    """Check adjointness of ``gram`` as a pairing M x N on the given vectors.

    Defaults to all basis vectors.  Returns failure descriptions.
    """
    data = m.cartan
    vm = vectors_m if vectors_m is not None else [{j: ONE} for j in range(m.dim)]
    vn = vectors_n if vectors_n is not None else [{j: ONE} for j in range(n.dim)]
    bad = []
    for a, u in enumerate(vm):
        for b, v in enumerate(vn):
            for i in range(3):
                si = data.s[i]
                fv = act(n, "f", i, v)
                wv = n.weight_of(fv) if fv else None
                rhs = ZERO
                if fv:
                    rhs = qpow(-si - si * wv[i]) * pair(u, gram_cols, fv)
                lhs = pair(act(m, "e", i, u), gram_cols, v)
                if lhs != rhs:
                    bad.append(f"e{i} adjointness at ({a},{b})")
                ev = act(n, "e", i, v)
                we = n.weight_of(ev) if ev else None
                rhs = ZERO
                if ev:
                    rhs = qpow(-si + si * we[i]) * pair(u, gram_cols, ev)
                lhs = pair(act(m, "f", i, u), gram_cols, v)
                if lhs != rhs:
                    bad.append(f"f{i} adjointness at ({a},{b})")
    return bad


def gram_from_cyclic(rep: Rep, v0: Vec, norm=ONE, indices=(0, 1, 2)) -> list:
    """Solve for the prepolarization with (v0, v0) = norm.

    Unknowns are the symmetric weight-block entries; equations are the
    adjointness relations (e_i u, v) = (u, q_i^-1 t_i^-1 f_i v) for all basis
    pairs, plus the normalization.  ``indices`` restricts the generators
    (e.g. (1, 2) for a U_q(g0)-module).  Returns the Gram as sparse columns.
    """
    data = rep.cartan
    norm = Q(norm)
    if not norm:
        raise ValueError("norm must be nonzero")
    var: dict = {}
    for idx in rep.blocks().values():
        for x in idx:
            for y in idx:
                if x <= y:
                    var[(x, y)] = len(var)

    def vid(x, y):
        return var[(x, y) if x <= y else (y, x)]

    rows, rhs = [], []
    for i in indices:
        si = data.s[i]
        for a in range(rep.dim):
            ea = act(rep, "e", i, {a: ONE})
            target_wt = rep.weights[a] + data.alpha(i)
            for b in rep.blocks().get(target_wt, []):
                row: Vec = {}
                for r, c in ea.items():
                    vaxpy(row, c, {vid(r, b): ONE})
                fb = act(rep, "f", i, {b: ONE})
                coef = qpow(-si - si * rep.weights[a][i])
                for s_, c in fb.items():
                    vaxpy(row, -coef * c, {vid(a, s_): ONE})
                if row:
                    rows.append(row)
                    rhs.append(ZERO)
    row = {}
    for x, cx in v0.items():
        for y, cy in v0.items():
            if rep.weights[x] == rep.weights[y]:
                vaxpy(row, cx * cy, {vid(x, y): ONE})
    rows.append(row)
    rhs.append(norm)
    try:
        sol, kernel = solve(rows, rhs, len(var))
    except LinAlgError:
        raise GramError("inconsistent", "no prepolarization with the requested normalization")
    if kernel:
        raise GramError("underdetermined", f"{len(kernel)}-dimensional family: v0 is not cyclic")
    cols = [dict() for _ in range(rep.dim)]
    for (x, y), k in var.items():
        val = sol.get(k)
        if val:
            cols[y][x] = val
            cols[x][y] = val
    return cols


# ---------------------------------------------------------------------------
# cyclic submodules


@dataclass
class Closure:
    """Submodule generated by a vector, with optional partner vectors.

    ``vectors[j]`` is the j-th basis vector in ambient coordinates and
    ``partners[j]`` the same word applied to the partner seed.  ``rep`` is the
    submodule as a Rep in the closure basis.
    """

    rep: Rep
    vectors: list
    partners: list | None
    words: list
    spans: dict

    def coords(self, v: Vec) -> Vec | None:
        """Coordinates of an ambient weight vector in the closure basis."""
        if not v:
            return {}
        w = self.ambient_weight(v)
        span, glob = self.spans.get(w, (None, None))
        if span is None:
            return None
        c = span.coords(v)
        if c is None:
            return None
        return {glob[k]: a for k, a in c.items()}

    def ambient_weight(self, v):
        return self._ambient.weight_of(v)

    def gram(self, pairing_cols) -> list:
        """Gram matrix (partner_i, vector_j) under a source-target pairing."""
        n = len(self.vectors)
        cols = [dict() for _ in range(n)]
        for idx in self.rep.blocks().values():
            for j in idx:
                for i in idx:
                    val = pair(self.partners[i], pairing_cols, self.vectors[j])
                    if val:
                        cols[j][i] = val
        return cols


def submodule_closure(ambient: Rep, seed: Vec, partner_rep: Rep | None = None,
                      partner_seed: Vec | None = None, indices=(0, 1, 2),
                      max_dim: int | None = None, label="v") -> Closure:
    """Breadth-first closure of ``seed`` under the generators.

    When a partner module is given, every new basis vector records the same
    word applied to ``partner_seed`` in ``partner_rep``; this realizes the
    preimage bookkeeping needed to evaluate (R u, R v) = (u, R v)_0 without
    inverting R.
    """
    data = ambient.cartan
    spans: dict = {}
    vectors, partners, words, weights = [], [], [], []
    e_cols: list = [[] for _ in range(3)]
    f_cols: list = [[] for _ in range(3)]

    def add(vec, pvec, word, wt):
        span, glob = spans.setdefault(wt, (EchelonSpan(), []))
        if not span.add(vec):
            return None
        glob.append(len(vectors))
        vectors.append(vec)
        partners.append(pvec)
        words.append(word)
        weights.append(wt)
        for i in range(3):
            e_cols[i].append(None)
            f_cols[i].append(None)
        if max_dim is not None and len(vectors) > max_dim:
            raise RuntimeError(f"closure exceeded dimension bound {max_dim}")
        return len(vectors) - 1

    add(dict(seed), dict(partner_seed) if partner_rep is not None else None, (), ambient.weight_of(seed))
    j = 0
    while j < len(vectors):
        for i in range(3):
            for gen, store, sign in (("e", e_cols, 1), ("f", f_cols, -1)):
                if i not in indices:
                    store[i][j] = {}
                    continue
                y = act(ambient, gen, i, vectors[j])
                if not y:
                    store[i][j] = {}
                    continue
                wt = weights[j] + data.alpha(i).scale(sign)
                span, glob = spans.get(wt, (None, None))
                c = span.coords(y) if span is not None else None
                if c is None:
                    py = act(partner_rep, gen, i, partners[j]) if partner_rep is not None else None
                    k = add(y, py, words[j] + ((gen, i),), wt)
                    store[i][j] = {k: ONE}
                else:
                    store[i][j] = {glob[k]: a for k, a in c.items()}
        j += 1
    basis = tuple(label + "".join(f"{g}{i}" for g, i in reversed(w)) if w else label for w in words)
    rep = Rep(ambient.type, basis, tuple(weights),
              tuple(tuple(c) for c in e_cols), tuple(tuple(c) for c in f_cols), 0, 0)
    clo = Closure(rep, vectors, partners if partner_rep is not None else None, words, spans)
    clo._ambient = ambient
    return clo
