"""Prepolarization values on monomial vectors and the statement battery."""

from __future__ import annotations

from dataclasses import dataclass, field

from .cartan import AffineType, parse_type
from .qfield import ONE, ZERO, RatQ, compare, membership

__all__ = [
    "CheckReport",
    "Verdict",
    "Battery",
    "DISCLAIMER",
    "block_pivots",
    "check_polarization_positive",
    "monomial_gram",
    "check_statements",
    "check_lattice_conditions",
    "check_kz_integrality",
    "default_box",
]


def block_pivots(gram_cols, idx):
    """LDL^T pivots of the Gram restricted to ``idx`` (no pivoting).

    The k-th pivot is the ratio of consecutive leading principal minors, so
    all leading minors are positive iff all pivots are.  Returns None when a
    leading minor vanishes.
    """
    n = len(idx)
    a = [[gram_cols[idx[j]].get(idx[i], ZERO) for j in range(n)] for i in range(n)]
    piv = []
    for k in range(n):
        p = a[k][k]
        if not p:
            return None
        piv.append(p)
        inv = p.inverse()
        for i in range(k + 1, n):
            if not a[i][k]:
                continue
            f = a[i][k] * inv
            for j in range(k + 1, n):
                if a[k][j]:
                    a[i][j] = a[i][j] - f * a[k][j]
    return piv


def check_polarization_positive(gram_cols, rep=None, blocks=None) -> bool:
    """All leading principal minors of every weight block are > 0."""
    if blocks is None:
        blocks = rep.blocks() if rep is not None else {None: list(range(len(gram_cols)))}
    for key in sorted(blocks, key=lambda w: tuple(w) if w is not None else ()):
        piv = block_pivots(gram_cols, blocks[key])
        if piv is None or any(compare(p, ZERO) != "greater" for p in piv):
            return False
    return True


# ---------------------------------------------------------------------------
# monomial Gram values and the statement battery

DISCLAIMER = ("bounded verification: passing checks for the levels examined does not "
              "prove the statements for all levels")


@dataclass
class Verdict:
    tuple: tuple
    value: RatQ | None
    tested: str
    passed: bool

    def to_json(self) -> dict:
        out = {"tuple": [list(t) if isinstance(t, tuple) else t for t in self.tuple],
               "tested": self.tested, "pass": self.passed}
        if self.value is not None:
            out["value"] = str(self.value)
            if self.value:
                out["valuation"] = self.value.valuation()
                out["leading"] = str(self.value.leading_coefficient())
        return out


@dataclass
class CheckReport:
    statement: str
    type: AffineType
    ell: int
    box: tuple
    verdicts: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add(self, tup, value, tested, passed):
        self.verdicts.append(Verdict(tup, value, tested, bool(passed)))

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def summary_line(self) -> str:
        bad = self.failures()
        return (f"{self.statement} {self.type.cli_name} l={self.ell}: "
                f"{'PASS' if not bad else 'FAIL'} ({len(self.verdicts) - len(bad)}/{len(self.verdicts)})")

    def to_json(self) -> dict:
        return {"statement": self.statement, "type": self.type.value, "ell": self.ell,
                "box": list(self.box), "pass": self.ok, "notes": list(self.notes),
                "verdicts": [v.to_json() for v in self.verdicts]}

    def text(self, show_all: bool = False) -> str:
        lines = [self.summary_line()]
        for v in self.verdicts:
            if show_all or not v.passed:
                val = "" if v.value is None else str(v.value)
                extra = ""
                if v.value:
                    extra = f"  val={v.value.valuation()} lead={v.value.leading_coefficient()}"
                lines.append(f"  {'ok ' if v.passed else 'BAD'} {v.tuple}  {v.tested}  {val}{extra}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


class MonomialCache:
    """Monomial vectors e^{(b,c,d)} v and e2 e^{(b,c,d)} v of a module, memoized."""

    def __init__(self, M):
        self.M = M
        self._mono: dict = {}
        self._e2: dict = {}

    def mono(self, t):
        t = tuple(t)
        if min(t) < 0:
            return {}
        x = self._mono.get(t)
        if x is None:
            x = self.M.monomial(t)
            self._mono[t] = x
        return x

    def e2(self, t):
        t = tuple(t)
        if min(t) < 0:
            return {}
        x = self._e2.get(t)
        if x is None:
            from .repcore import act

            y = self.mono(t)
            x = act(self.M.rep, "e", 2, y) if y else {}
            self._e2[t] = x
        return x

    def pair(self, x, y) -> RatQ:
        if not x or not y:
            return ZERO
        wx = self.M.rep.weight_of(x)
        if wx != self.M.rep.weight_of(y):
            return ZERO
        return self.M.pairing(x, y)


def default_box(t, ell: int) -> tuple:
    """Cube [0, m]^3 with m one past the largest coordinate allowed by the
    vanishing condition (b, c, d <= l, 2l, l for G2^(1) and 3l, 2l, 3l for D4^(3))."""
    t = parse_type(t)
    m = 2 * ell if t is AffineType.G2_1 else 3 * ell
    return (m + 1, m + 1, m + 1)


def _box_tuples(box):
    B, C, D = box
    return [(b, c, d) for b in range(B + 1) for c in range(C + 1) for d in range(D + 1)]


def monomial_gram(M, box=None, four=False) -> dict:
    """Pairwise values (e^X v, e^Y v) over the box; distinct weights give 0 directly.

    With ``four=True`` the box is a list of 4-tuples (a, b, c, d).
    """
    cache = MonomialCache(M)
    tuples = list(box) if four else _box_tuples(box or default_box(M.type, M.ell))
    vecs = {t: cache.mono(t) for t in tuples}
    wts = {t: (M.rep.weight_of(x) if x else None) for t, x in vecs.items()}
    out = {}
    for s in tuples:
        for t in tuples:
            if (t, s) in out:
                out[(s, t)] = out[(t, s)]
            elif wts[s] is None or wts[s] != wts[t]:
                out[(s, t)] = ZERO
            else:
                out[(s, t)] = M.pairing(vecs[s], vecs[t])
    return out


def _cond(which, ell, b, c, d):
    if which == "G":
        return 2 * b <= c <= 2 * d <= 2 * ell
    return 2 * b <= 3 * c <= 2 * d <= 6 * ell


STATEMENT_NAMES = (
    "nonvanishing pattern",
    "monomial norms in 1+qA",
    "distinct monomials orthogonal",
    "e2 image norm bound",
    "e2 image overlap bound",
    "mixed e2 pairing bound",
)


def check_statements(M, which: str | None = None, box=None) -> list:
    """Six reports over the box, in the order of STATEMENT_NAMES.

    ``which`` is "G" for G2^(1) or "D" for D4^(3) and must match the type.
    """
    t = parse_type(M.type)
    expected = "G" if t is AffineType.G2_1 else "D"
    which = which or expected
    if which != expected:
        raise ValueError(f"statements {which} do not apply to type {t.cli_name}")
    ell = M.ell
    box = tuple(box or default_box(t, ell))
    tuples = _box_tuples(box)
    cache = MonomialCache(M)
    R = {k: CheckReport(STATEMENT_NAMES[k - 1], t, ell, box) for k in range(1, 7)}
    for (b, c, d) in tuples:
        x = cache.mono((b, c, d))
        cond = _cond(which, ell, b, c, d)
        R[1].add((b, c, d), None, "nonzero" if cond else "zero", bool(x) == cond)
        if cond:
            val = cache.pair(x, x)
            R[2].add((b, c, d), val, "1+qA", membership(val, "one_plus_qA"))
        y = cache.e2((b, c, d))
        n4 = cache.pair(y, y)
        if which == "G":
            m = min(0, 6 * b - 2 * c, -2 * c + 6 * d - 2 * ell)
            R[4].add((b, c, d), n4, f"q^{m}A", membership(n4, "q_pow_n_A", m))
            m5 = -c + 3 * d - ell
            v5 = cache.pair(cache.mono((b - 1, c - 2, d - 1)), y)
            m6 = 3 * b - c + 1
        else:
            strong = min(0, 6 * b - 6 * c, -6 * c + 6 * d - 6 * ell)
            m = min(0, 6 * b - 6 * c) if b < 3 else strong
            R[4].add((b, c, d), n4, f"q^{m}A", membership(n4, "q_pow_n_A", m))
            if b < 3 and not membership(n4, "q_pow_n_A", strong):
                R[4].notes.append(f"stronger bound q^{strong}A fails at {(b, c, d)}")
            m5 = -3 * c + 3 * d - 3 * ell
            v5 = cache.pair(cache.mono((b - 3, c - 2, d - 3)), y)
            m6 = 3 * b - 3 * c + 3
        R[5].add((b, c, d), v5, f"q^{m5}A", membership(v5, "q_pow_n_A", m5))
        v6 = cache.pair(x, cache.e2((b, c - 1, d)))
        R[6].add((b, c, d), v6, f"q^{m6}A", membership(v6, "q_pow_n_A", m6))
    # orthogonality of distinct monomials (same weight pairs; others vanish by weight)
    for i, s in enumerate(tuples):
        xs = cache.mono(s)
        if not xs:
            continue
        for u in tuples[i + 1:]:
            xu = cache.mono(u)
            if not xu or M.rep.weight_of(xs) != M.rep.weight_of(xu):
                continue
            val = cache.pair(xs, xu)
            R[3].add((s, u), val, "0", not val)
    if which == "D":
        weak = [n for n in R[4].notes]
        R[4].notes = [f"stronger (b >= 3) bound also holds for all b < 3 in the box: {not weak}"] + weak[:10]
    return [R[k] for k in range(1, 7)]


@dataclass
class Battery:
    reports: list

    @property
    def ok(self):
        return all(r.ok for r in self.reports)

    def summary_line(self):
        return "; ".join(r.summary_line() for r in self.reports)


def check_lattice_conditions(M, S=None) -> list:
    """The two conclusions for the tuples of S (default S_l): the near
    orthonormality of the monomial vectors, and the e1/e2 norm bounds."""
    from .branching import enumerate_S
    from .repcore import act

    t = parse_type(M.type)
    S = list(S) if S is not None else enumerate_S(t, M.ell)
    data = M.rep.cartan
    rn = CheckReport("near-orthonormality", t, M.ell, (len(S),))
    rb = CheckReport("e1/e2 norm bounds", t, M.ell, (len(S),))
    vecs = {s: M.monomial(s) for s in S}
    for i, s in enumerate(S):
        for u in S[i:]:
            xs, xu = vecs[s], vecs[u]
            if not xs or not xu or M.rep.weight_of(xs) != M.rep.weight_of(xu):
                val = ZERO
                if s == u:
                    rn.add((s, u), val, "1+qA", False)
                continue
            val = M.pairing(xs, xu)
            if s == u:
                rn.add((s, u), val, "1+qA", membership(val, "one_plus_qA"))
            else:
                rn.add((s, u), val, "qA", membership(val, "qA"))
    for s in S:
        x = vecs[s]
        wt = M.rep.weight_of(x) if x else None
        for i in (1, 2):
            y = act(M.rep, "e", i, x) if x else {}
            val = M.pairing(y, y) if y else ZERO
            n = data.s[i] * (-2 * (wt[i] if wt is not None else 0) - 2) + 1
            rb.add((s, i), val, f"q^{n}A", membership(val, "q_pow_n_A", n))
    return [rn, rb]


def check_kz_integrality(M, box=None) -> CheckReport:
    """All monomial Gram values over the box lie in K_Z."""
    box = tuple(box or default_box(M.type, M.ell))
    rep = CheckReport("K_Z", parse_type(M.type), M.ell, box)
    for (s, u), val in monomial_gram(M, box).items():
        if s <= u and val:
            rep.add((s, u), val, "K_Z", membership(val, "K_Z"))
    return rep
