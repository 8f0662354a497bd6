"""Classical branching of W^l: tuple sets S_l, G2 characters, and peeling.

Classical weights are handled as Dynkin-label pairs ``(m1, m2)`` for the
simple roots alpha_1, alpha_2 of g0 (the labeling of the affine type in use,
so "short" is index 2 for G2^(1) and index 1 for D4^(3)).
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .cartan import AffineType, Weight, cartan_data, parse_type

__all__ = [
    "enumerate_S",
    "enumerate_T",
    "tuple_weight",
    "irrep_dim_char",
    "weyl_dimension",
    "branch_verify",
    "BranchReport",
    "peel_characters",
    "g2_weyl_orbit_hull_contains",
    "s_to_csv",
]


def enumerate_S(t, ell: int) -> list[tuple[int, int, int, int]]:
    """All (a, b, c, d) in the tuple set S_l, sorted."""
    t = parse_type(t)
    if ell < 1:
        raise ValueError("level must be >= 1")
    out = []
    if t is AffineType.G2_1:
        # 3b <= c <= b + d forces 2b <= d; then 2d <= l + b forces d <= l
        for d in range(ell + 1):
            for b in range(ell + 1):
                for c in range(2 * ell + 1):
                    for a in range(ell + 1):
                        if 3 * b <= c <= b + d and a <= b and -c + 3 * d <= ell:
                            out.append((a, b, c, d))
    else:
        # 3c <= b + d <= c + d forces 2c <= d <= l + c, so c <= l and d <= 2l
        for d in range(2 * ell + 1):
            for c in range(ell + 1):
                for b in range(ell + 1):
                    for a in range(ell + 1):
                        if 3 * c <= b + d and a <= b <= c and -c + d <= ell:
                            out.append((a, b, c, d))
    return sorted(out)


def enumerate_T(t, ell: int):
    """The fermionic-formula index sets, mapped to (a, b, c, d) and weights.

    Returns a list of ``((a, b, c, d), (m1, m2))`` obtained from T_l through
    the inverse of the substitution relating the two parametrizations.
    """
    t = parse_type(t)
    out = []
    for r1 in range(ell + 1):
        for r2 in range(ell + 1):
            for r3 in range(ell + 1):
                for r4 in range(ell + 1):
                    if t is AffineType.G2_1:
                        if not (r4 <= r2 and 2 * r1 + 3 * r2 + 3 * r3 <= ell):
                            continue
                        a = r4
                        b = r3 + r4
                        c = r1 + 3 * b
                        d = r2 - a - b + c
                        wt = (r2 + r3 - r4, ell - r1 - 3 * r2 - 3 * r3)
                    else:
                        if not (r3 <= r1 and r1 + r2 + r3 + r4 <= ell):
                            continue
                        a = r4
                        b = r2 + r4
                        c = r3 + b
                        d = r1 + 2 * c
                        wt = (r1 + r2 - r3, ell - r1 - r2 - r4)
                    out.append(((a, b, c, d), wt))
    return sorted(out)


def tuple_weight(t, ell: int, tup) -> Weight:
    """l*w2 + (a+d) alpha_0 + (b+d) alpha_1 + c alpha_2."""
    data = cartan_data(t)
    a, b, c, d = tup
    return (data.varpi2.scale(ell) + data.alpha(0).scale(a + d)
            + data.alpha(1).scale(b + d) + data.alpha(2).scale(c))


# ---------------------------------------------------------------------------
# G2 root data in Dynkin-label coordinates


@lru_cache(maxsize=None)
def _roots(t: AffineType):
    data = cartan_data(t)
    C = data.cartan
    short = 2 if t is AffineType.G2_1 else 1
    long_ = 3 - short
    # positive roots as (n1, n2) multiples of (alpha_1, alpha_2)
    combos = [(1, 0), (0, 1), (1, 1), (2, 1), (3, 1), (3, 2)]
    pos = []
    for ns, nl in combos:
        n = {short: ns, long_: nl}
        pos.append((n[1], n[2]))
    alpha = {1: (C[1][1], C[2][1]), 2: (C[1][2], C[2][2])}
    s = {1: data.s[1], 2: data.s[2]}
    return pos, alpha, s


def _to_root_coords(t, m):
    # solve m = x1 * alpha_1 + x2 * alpha_2 in label coordinates
    _, alpha, _ = _roots(t)
    (a, c), (b, d) = alpha[1], alpha[2]
    det = a * d - b * c
    x1 = Fraction(m[0] * d - b * m[1], det)
    x2 = Fraction(a * m[1] - c * m[0], det)
    return x1, x2


def _ip(t, m, n) -> Fraction:
    """Invariant form with (alpha_i, alpha_i) = 2 s_i."""
    _, _, s = _roots(t)
    x1, x2 = _to_root_coords(t, m)
    return x1 * s[1] * n[0] + x2 * s[2] * n[1]


def _root_vec(t, n):
    _, alpha, _ = _roots(t)
    return (n[0] * alpha[1][0] + n[1] * alpha[2][0], n[0] * alpha[1][1] + n[1] * alpha[2][1])


def weyl_dimension(t, lam) -> int:
    t = parse_type(t)
    pos, _, _ = _roots(t)
    lr = (lam[0] + 1, lam[1] + 1)
    num = Fraction(1)
    for n in pos:
        a = _root_vec(t, n)
        num *= _ip(t, lr, a) / _ip(t, (1, 1), a)
    assert num.denominator == 1
    return int(num)


@lru_cache(maxsize=None)
def _char(t: AffineType, lam: tuple[int, int]):
    pos, _, _ = _roots(t)
    lr = (lam[0] + 1, lam[1] + 1)
    top = _ip(t, lr, lr)
    x1, x2 = _to_root_coords(t, lam)
    n1max, n2max = int(2 * x1) + 1, int(2 * x2) + 1
    mult: dict = {lam: 1}
    proots = [_root_vec(t, n) for n in pos]
    # process weights lam - k1 a1 - k2 a2 by increasing depth
    order = sorted(((k1, k2) for k1 in range(n1max + 1) for k2 in range(n2max + 1)),
                   key=lambda k: (k[0] + k[1], k))
    _, alpha, _ = _roots(t)
    for k1, k2 in order:
        if k1 == k2 == 0:
            continue
        mu = (lam[0] - k1 * alpha[1][0] - k2 * alpha[2][0], lam[1] - k1 * alpha[1][1] - k2 * alpha[2][1])
        mr = (mu[0] + 1, mu[1] + 1)
        den = top - _ip(t, mr, mr)
        if den == 0:
            continue
        s = Fraction(0)
        for a in proots:
            k = 1
            while True:
                nu = (mu[0] + k * a[0], mu[1] + k * a[1])
                m = mult.get(nu)
                if m is None:
                    # weights above lam in this direction vanish
                    y1, y2 = _to_root_coords(t, (lam[0] - nu[0], lam[1] - nu[1]))
                    if y1 < 0 or y2 < 0:
                        break
                    k += 1
                    continue
                s += m * _ip(t, nu, a)
                k += 1
        val = 2 * s / den
        assert val.denominator == 1 and val >= 0
        if val:
            mult[mu] = int(val)
    return mult


def irrep_dim_char(t, lam):
    """(dimension, {classical weight (m1, m2): multiplicity}) of V0(lam).

    Weyl's dimension formula and Freudenthal's recursion; both independent of
    any module construction.
    """
    t = parse_type(t)
    lam = tuple(lam[1:]) if len(lam) == 3 else tuple(lam)
    if lam[0] < 0 or lam[1] < 0:
        raise ValueError(f"{lam} is not dominant")
    ch = dict(_char(t, lam))
    dim = weyl_dimension(t, lam)
    if sum(ch.values()) != dim:
        raise AssertionError("Freudenthal and Weyl disagree")
    return dim, ch


def _dominant_rep(t, m):
    _, alpha, _ = _roots(t)
    m = tuple(m)
    while True:
        for i in (1, 2):
            if m[i - 1] < 0:
                k = m[i - 1]
                m = (m[0] - k * alpha[i][0], m[1] - k * alpha[i][1])
                break
        else:
            return m


def g2_weyl_orbit_hull_contains(t, lam, mu) -> bool:
    """mu lies in the convex hull of the finite Weyl orbit of lam (classical parts)."""
    t = parse_type(t)
    lam = tuple(lam[1:]) if len(lam) == 3 else tuple(lam)
    mu = tuple(mu[1:]) if len(mu) == 3 else tuple(mu)
    dom = _dominant_rep(t, mu)
    x1, x2 = _to_root_coords(t, (lam[0] - dom[0], lam[1] - dom[1]))
    return x1 >= 0 and x2 >= 0


def _height(t, m):
    x1, x2 = _to_root_coords(t, m)
    return x1 + x2


def peel_characters(t, mults: dict, tiebreak: str = "lex"):
    """Decompose a classical character into irreducibles.

    ``mults`` maps (m1, m2) to multiplicities.  Maximal weights are taken in
    order of height; ties broken by (m1, m2) lexicographically ('lex') or by
    (m2, m1) ('revlex').  Raises ValueError on a negative multiplicity.
    """
    t = parse_type(t)
    rem = Counter({k: v for k, v in mults.items() if v})
    out = Counter()
    while rem:
        key = (lambda m: (_height(t, m), m)) if tiebreak == "lex" else (lambda m: (_height(t, m), m[::-1]))
        top = max(rem, key=key)
        if top[0] < 0 or top[1] < 0:
            raise ValueError(f"maximal weight {top} is not dominant")
        n = rem[top]
        out[top] += n
        _, ch = irrep_dim_char(t, top)
        for w, m in ch.items():
            rem[w] -= n * m
            if rem[w] < 0:
                raise ValueError(f"negative multiplicity at {w} while peeling")
            if rem[w] == 0:
                del rem[w]
    return out


@dataclass
class BranchReport:
    ell: int
    type: AffineType
    tuples: list
    tuple_weights: list
    computed: dict
    expected: dict
    dim_module: int
    dim_expected: int
    passed: bool
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "type": self.type.value,
            "tuples": [list(x) for x in self.tuples],
            "tuple_weights": [list(w) for w in self.tuple_weights],
            "computed": sorted([list(k), v] for k, v in self.computed.items()),
            "expected": sorted([list(k), v] for k, v in self.expected.items()),
            "dim_module": self.dim_module,
            "dim_expected": self.dim_expected,
            "pass": self.passed,
        }

    def text(self) -> str:
        fmt = lambda c: ", ".join(f"{v}x{k}" for k, v in sorted(c.items()))
        return (f"branching {self.type.value} l={self.ell}: {'PASS' if self.passed else 'FAIL'}\n"
                f"  S_l = {self.tuples}\n  computed: {fmt(self.computed)}\n"
                f"  expected: {fmt(self.expected)}\n  dim {self.dim_module} vs {self.dim_expected}")


def branch_verify(module, ell: int | None = None) -> BranchReport:
    """Compare the classical decomposition of a built module with S_l.

    ``module`` is a KRModule or a Rep; for a bare Rep pass ``ell``.
    """
    rep = getattr(module, "rep", module)
    ell = getattr(module, "ell", ell)
    t = rep.type
    mults = Counter(w.classical for w in rep.weights)
    computed = peel_characters(t, mults)
    S = enumerate_S(t, ell)
    tw = [tuple_weight(t, ell, s) for s in S]
    expected = Counter(w.classical for w in tw)
    dim_exp = sum(weyl_dimension(t, w.classical) for w in tw)
    passed = computed == expected and dim_exp == rep.dim
    return BranchReport(ell, t, S, tw, dict(computed), dict(expected), rep.dim, dim_exp, passed)


def s_to_csv(t, ell: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["a", "b", "c", "d", "m0", "m1", "m2"])
    for s in enumerate_S(t, ell):
        w.writerow([*s, *tuple_weight(t, ell, s)])
    return buf.getvalue()
