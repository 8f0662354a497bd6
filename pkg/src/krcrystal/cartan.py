"""Affine Cartan data for G2^(1) and D4^(3), and weights in P_cl.

A weight is stored only through its coroot pairings
``(<h0, wt>, <h1, wt>, <h2, wt>)``; the null root never appears.  Classical
weights are written in the fundamental-weight basis ``(w1, w2)`` and lifted
to triples with the derived pairings ``<h0, w1>``, ``<h0, w2>``.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "AffineType",
    "CartanData",
    "Weight",
    "cartan_data",
    "classical_root_embedding",
    "weight_ops",
    "parse_type",
]


class AffineType(enum.Enum):
    G2_1 = "G2_1"
    D4_3 = "D4_3"

    @property
    def cli_name(self) -> str:
        return {"G2_1": "g2-1", "D4_3": "d4-3"}[self.value]


def parse_type(text) -> AffineType:
    if isinstance(text, AffineType):
        return text
    key = str(text).strip().lower().replace("_", "-")
    for t in AffineType:
        if key in (t.cli_name, t.value.lower().replace("_", "-")):
            return t
    raise ValueError(f"unknown affine type {text!r}")


class Weight(tuple):
    """Element of P_cl as the triple of coroot pairings."""

    __slots__ = ()

    def __new__(cls, m0=0, m1=0, m2=0):
        return super().__new__(cls, (int(m0), int(m1), int(m2)))

    def __add__(self, other):
        return Weight(self[0] + other[0], self[1] + other[1], self[2] + other[2])

    def __sub__(self, other):
        return Weight(self[0] - other[0], self[1] - other[1], self[2] - other[2])

    def __neg__(self):
        return Weight(-self[0], -self[1], -self[2])

    def scale(self, k: int) -> "Weight":
        return Weight(k * self[0], k * self[1], k * self[2])

    def pairing(self, i: int) -> int:
        return self[i]

    @property
    def classical(self) -> tuple[int, int]:
        """Coordinates in the (w1, w2) basis."""
        return (self[1], self[2])

    def is_dominant_classical(self) -> bool:
        return self[1] >= 0 and self[2] >= 0

    def __repr__(self):
        return f"Weight{tuple(self)}"


@dataclass(frozen=True)
class CartanData:
    type: AffineType
    cartan: tuple[tuple[int, int, int], ...]
    s: tuple[int, int, int]
    root_cl: tuple[tuple[int, int], ...]
    h0_pairings: tuple[int, int]
    fusion_k: int

    def alpha(self, i: int) -> Weight:
        """cl(alpha_i) as a coroot-pairing triple (column i of the Cartan matrix)."""
        return Weight(*(self.cartan[j][i] for j in range(3)))

    def lift(self, c1: int, c2: int) -> Weight:
        """Classical weight c1*w1 + c2*w2 as a triple."""
        return Weight(c1 * self.h0_pairings[0] + c2 * self.h0_pairings[1], c1, c2)

    @property
    def varpi1(self) -> Weight:
        return self.lift(1, 0)

    @property
    def varpi2(self) -> Weight:
        return self.lift(0, 1)

    def table_hash(self) -> str:
        blob = json.dumps([self.type.value, self.cartan, self.s, self.root_cl,
                           self.h0_pairings, self.fusion_k])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def check(self) -> list[str]:
        """Return the list of violated type invariants (empty when consistent)."""
        bad = []
        C = self.cartan
        for i in range(3):
            if C[i][i] != 2:
                bad.append(f"c_{i}{i} != 2")
            for j in range(3):
                if i != j and C[i][j] > 0:
                    bad.append(f"c_{i}{j} > 0")
                if self.s[i] * C[i][j] != self.s[j] * C[j][i]:
                    bad.append(f"not symmetrizable at ({i},{j})")
        for j in range(3):
            c1, c2 = self.root_cl[j]
            if tuple(self.lift(c1, c2)) != tuple(C[i][j] for i in range(3)):
                bad.append(f"root_cl[{j}] inconsistent with column {j}")
        return bad


# Rows are <h_i, alpha_j>.  Node 0 attaches to node 1 in both types; the
# triple bond is between nodes 1 and 2 with the short root reversed.
_CARTAN = {
    AffineType.G2_1: ((2, -1, 0), (-1, 2, -1), (0, -3, 2)),
    AffineType.D4_3: ((2, -1, 0), (-1, 2, -3), (0, -1, 2)),
}
_S = {AffineType.G2_1: (3, 3, 1), AffineType.D4_3: (1, 1, 3)}
_ROOT_CL = {
    AffineType.G2_1: ((-1, 0), (2, -3), (-1, 2)),
    AffineType.D4_3: ((-1, 0), (2, -1), (-3, 2)),
}


def _solve2(m, rhs):
    # exact solve of a 2x2 integer system
    (a, b), (c, d) = m
    det = a * d - b * c
    x = Fraction(rhs[0] * d - b * rhs[1], det)
    y = Fraction(a * rhs[1] - c * rhs[0], det)
    return x, y


def classical_root_embedding(t: AffineType):
    """Return ``(root_cl, h0_pairings)``.

    The classical coordinates of alpha_1, alpha_2 are inverted to write w1, w2
    in the alpha basis, after which row 0 of the Cartan matrix gives
    ``<h0, w_j>``.
    """
    t = parse_type(t)
    root_cl = _ROOT_CL[t]
    C = _CARTAN[t]
    # columns: alpha_1, alpha_2 in (w1, w2) coordinates
    m = ((root_cl[1][0], root_cl[2][0]), (root_cl[1][1], root_cl[2][1]))
    h0 = []
    for target in ((1, 0), (0, 1)):
        x1, x2 = _solve2(m, target)
        if x1.denominator != 1 or x2.denominator != 1:
            raise ArithmeticError("fundamental weight is not in the root lattice")
        h0.append(int(x1) * C[0][1] + int(x2) * C[0][2])
    return root_cl, (h0[0], h0[1])


@lru_cache(maxsize=None)
def cartan_data(t) -> CartanData:
    t = parse_type(t)
    root_cl, h0 = classical_root_embedding(t)
    data = CartanData(t, _CARTAN[t], _S[t], root_cl, h0, 1)
    bad = data.check()
    if bad:
        raise AssertionError(f"inconsistent Cartan data for {t.value}: {bad}")
    return data


def weight_ops(op: str, *args):
    """Small dispatcher over weight arithmetic (add, sub, scale, pairing, dominant_classical)."""
    if op == "add":
        return args[0] + args[1]
    if op == "sub":
        return args[0] - args[1]
    if op == "scale":
        return args[0].scale(args[1])
    if op == "pairing":
        return args[0].pairing(args[1])
    if op == "dominant_classical":
        return args[0].is_dominant_classical()
    raise ValueError(f"unknown weight op {op!r}")
