"""Exact arithmetic in the rational function field Q(q).

Elements are stored as a reduced fraction of integer polynomials (backed by
FLINT's ``fmpz_poly``).  The canonical form is unique, so equality and
hashing are syntactic:

* ``gcd(num, den) = 1`` over Q[q],
* the joint content of ``num`` and ``den`` is 1,
* ``den`` has a positive leading coefficient; zero is ``0/1``.

Besides field arithmetic the module provides the q-adic valuation, the
total order on Q(q) (``f > g`` iff the lowest q-adic coefficient of ``f - g``
is positive), and membership tests for the subrings A (no pole at q = 0),
A_Z and K_Z = A_Z[q^-1].
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd

from flint import fmpz_poly

__all__ = [
    "RatQ",
    "Q",
    "ZERO",
    "ONE",
    "qpow",
    "q_int",
    "q_fact",
    "q_binom",
    "q_int_fact_binom",
    "membership",
    "compare",
    "QFieldError",
]


class QFieldError(ArithmeticError):
    """Raised for undefined operations in Q(q) (division by zero etc.)."""


_P_ZERO = fmpz_poly([])
_P_ONE = fmpz_poly([1])


def _ord0(p: fmpz_poly) -> int:
    # multiplicity of q as a factor of a nonzero polynomial
    k = 0
    while p[k] == 0:
        k += 1
    return k


def _content(p: fmpz_poly) -> int:
    return int(p.content())


class RatQ:
    """An element of Q(q) in canonical reduced form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1, _canonical=False):
        if _canonical:
            self.num = num
            self.den = den
            self._hash = None
            return
        if isinstance(num, Fraction):
            num, den0 = num.numerator, num.denominator
            den = den0 * den if isinstance(den, int) else fmpz_poly([den0]) * _as_poly(den)
        n = _as_poly(num)
        d = _as_poly(den)
        if d.is_zero():
            raise QFieldError("zero denominator")
        self.num, self.den = _normalize(n, d)
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_coeffs(cls, num_coeffs, den_coeffs=(1,)) -> "RatQ":
        """Build from ascending integer coefficient lists."""
        return cls(fmpz_poly(list(num_coeffs)), fmpz_poly(list(den_coeffs)))

    @classmethod
    def laurent(cls, coeffs: dict) -> "RatQ":
        """Build a Laurent polynomial from ``{exponent: integer coefficient}``."""
        if not coeffs:
            return ZERO
        lo = min(coeffs)
        shift = -lo if lo < 0 else 0
        c = [0] * (max(coeffs) + shift + 1)
        for e, a in coeffs.items():
            c[e + shift] = a
        return cls(fmpz_poly(c), fmpz_poly([0] * shift + [1]))

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_laurent(self) -> bool:
        """True when the denominator is a monomial."""
        d = self.den
        return d.degree() == _ord0(d)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        if self.den == other.den:
            return _make(self.num + other.num, self.den)
        return _make(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatQ(-self.num, self.den, _canonical=True)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        return _make(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise QFieldError("division by zero in Q(q)")
        return _make(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def inverse(self) -> "RatQ":
        if self.num.is_zero():
            raise QFieldError("division by zero in Q(q)")
        return _make(self.den, self.num)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        return RatQ(self.num**n, self.den**n, _canonical=True) if n else ONE

    # -- comparison / hashing --------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(int(c) for c in self.num.coeffs()),
                               tuple(int(c) for c in self.den.coeffs())))
        return self._hash

    def __lt__(self, other):
        return compare(self, _coerce(other)) == "less"

    def __le__(self, other):
        return compare(self, _coerce(other)) != "greater"

    def __gt__(self, other):
        return compare(self, _coerce(other)) == "greater"

    def __ge__(self, other):
        return compare(self, _coerce(other)) != "less"

    # -- q-adic data ------------------------------------------------------
    def valuation(self):
        """q-adic valuation; ``None`` for zero (i.e. +infinity)."""
        if self.num.is_zero():
            return None
        return _ord0(self.num) - _ord0(self.den)

    def leading_coefficient(self) -> Fraction:
        """Lowest-order coefficient of the q-adic expansion."""
        if self.num.is_zero():
            return Fraction(0)
        return Fraction(int(self.num[_ord0(self.num)]), int(self.den[_ord0(self.den)]))

    def at_zero(self) -> Fraction:
        """Value at q = 0; requires membership in A."""
        v = self.valuation()
        if v is None or v > 0:
            return Fraction(0)
        if v < 0:
            raise QFieldError(f"{self} has a pole at q = 0")
        return self.leading_coefficient()

    def mul_qpow(self, k: int) -> "RatQ":
        """Multiply by q**k without a gcd computation."""
        if k == 0 or self.num.is_zero():
            return self
        if k > 0:
            dz = _ord0(self.den)
            t = min(k, dz)
            den = self.den.right_shift(t) if t else self.den
            return RatQ(self.num.left_shift(k - t), den, _canonical=True)
        k = -k
        nz = _ord0(self.num)
        t = min(k, nz)
        num = self.num.right_shift(t) if t else self.num
        return RatQ(num, self.den.left_shift(k - t), _canonical=True)

    def subs_q(self, s: int) -> "RatQ":
        """Substitute q -> q**s (s >= 1)."""
        if s == 1:
            return self
        return RatQ(_inflate(self.num, s), _inflate(self.den, s))

    # -- text -------------------------------------------------------------
    def __str__(self):
        return f"({_poly_str(self.num)})/({_poly_str(self.den)})"

    def __repr__(self):
        return f"RatQ('{self}')"

    def pretty(self) -> str:
        """Short human form: omits a unit denominator."""
        if self.den == _P_ONE:
            return _poly_str(self.num)
        return str(self)

    @classmethod
    def parse(cls, text: str) -> "RatQ":
        """Inverse of ``str``; also accepts a bare polynomial."""
        text = text.strip()
        m = re.fullmatch(r"\((.*)\)/\((.*)\)", text)
        if m:
            return cls(_parse_poly(m.group(1)), _parse_poly(m.group(2)))
        return cls(_parse_poly(text), _P_ONE)


def _inflate(p: fmpz_poly, s: int) -> fmpz_poly:
    c = [int(x) for x in p.coeffs()]
    out = [0] * ((len(c) - 1) * s + 1) if c else []
    for i, a in enumerate(c):
        out[i * s] = a
    return fmpz_poly(out)


def _as_poly(x) -> fmpz_poly:
    if isinstance(x, fmpz_poly):
        return x
    if isinstance(x, int):
        return fmpz_poly([x])
    if isinstance(x, (list, tuple)):
        return fmpz_poly(list(x))
    raise TypeError(f"cannot interpret {x!r} as an integer polynomial")


def _normalize(n: fmpz_poly, d: fmpz_poly):
    if n.is_zero():
        return _P_ZERO, _P_ONE
    g = n.gcd(d)
    if not g.is_one():
        n = n // g
        d = d // g
    c = gcd(_content(n), _content(d))
    if c != 1:
        n = fmpz_poly([int(a) // c for a in n.coeffs()])
        d = fmpz_poly([int(a) // c for a in d.coeffs()])
    if d.leading_coefficient() < 0:
        n, d = -n, -d
    return n, d


def _make(n: fmpz_poly, d: fmpz_poly) -> RatQ:
    n, d = _normalize(n, d)
    return RatQ(n, d, _canonical=True)


def _coerce(x):
    if isinstance(x, RatQ):
        return x
    if isinstance(x, int):
        return _int_cache(x) if -64 <= x <= 64 else RatQ(fmpz_poly([x]), _P_ONE, _canonical=True)
    if isinstance(x, Fraction):
        return RatQ(x)
    return NotImplemented


@lru_cache(maxsize=None)
def _int_cache(x: int) -> RatQ:
    return RatQ(fmpz_poly([x]) if x else _P_ZERO, _P_ONE, _canonical=True)


def Q(x) -> RatQ:
    """Coerce an int, Fraction, RatQ or text into RatQ."""
    if isinstance(x, str):
        return RatQ.parse(x)
    y = _coerce(x)
    if y is NotImplemented:
        raise TypeError(f"cannot coerce {x!r} to RatQ")
    return y


def _poly_str(p: fmpz_poly) -> str:
    terms = []
    for e, a in enumerate(int(c) for c in p.coeffs()):
        if a == 0:
            continue
        if e == 0:
            body = str(abs(a))
        else:
            mono = "q" if e == 1 else f"q^{e}"
            body = mono if abs(a) == 1 else f"{abs(a)}*{mono}"
        sign = "-" if a < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += sign + body
    return out


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(q(?:\^(\d+))?)?")


def _parse_poly(s: str) -> fmpz_poly:
    s = s.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or not (m.group(2) or m.group(3)):
            raise ValueError(f"cannot parse polynomial {s!r} at {pos}")
        sign = -1 if m.group(1) == "-" else 1
        a = int(m.group(2)) if m.group(2) else 1
        e = 0 if not m.group(3) else (int(m.group(4)) if m.group(4) else 1)
        coeffs[e] = coeffs.get(e, 0) + sign * a
        pos = m.end()
    c = [0] * (max(coeffs) + 1)
    for e, a in coeffs.items():
        c[e] = a
    return fmpz_poly(c)


ZERO = RatQ(_P_ZERO, _P_ONE, _canonical=True)
ONE = RatQ(_P_ONE, _P_ONE, _canonical=True)


@lru_cache(maxsize=4096)
def qpow(k: int) -> RatQ:
    """q**k for any integer k."""
    return ONE.mul_qpow(k)


# ---------------------------------------------------------------------------
# q-integers


@lru_cache(maxsize=None)
def q_int(m: int, s: int = 1) -> RatQ:
    """[m] at q**s: (q^{sm} - q^{-sm}) / (q^s - q^{-s})."""
    if m == 0:
        return ZERO
    if m < 0:
        return -q_int(-m, s)
    # q^{-s(m-1)} + q^{-s(m-3)} + ... + q^{s(m-1)}
    return RatQ.laurent({s * (m - 1 - 2 * j): 1 for j in range(m)})


@lru_cache(maxsize=None)
def q_fact(n: int, s: int = 1) -> RatQ:
    if n < 0:
        raise QFieldError("q-factorial of a negative integer")
    out = ONE
    for j in range(1, n + 1):
        out = out * q_int(j, s)
    return out


@lru_cache(maxsize=None)
def q_binom(m: int, n: int, s: int = 1) -> RatQ:
    """Gaussian binomial [m choose n] at q**s, for any integer m and n >= 0."""
    if n < 0:
        raise QFieldError("q-binomial with negative lower index")
    num = ONE
    for j in range(n):
        num = num * q_int(m - j, s)
    return num / q_fact(n, s)


def q_int_fact_binom(kind: str, m: int, n: int = 0, s: int = 1) -> RatQ:
    if s < 1:
        raise ValueError("s must be >= 1")
    if kind == "int":
        return q_int(m, s)
    if kind == "fact":
        return q_fact(m, s)
    if kind == "binom":
        return q_binom(m, n, s)
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# order and membership


def compare(f, g) -> str:
    """Total order on Q(q): returns 'less', 'equal' or 'greater'."""
    d = Q(f) - Q(g)
    if d.is_zero():
        return "equal"
    return "greater" if d.leading_coefficient() > 0 else "less"


def in_A(f: RatQ, n: int = 0) -> bool:
    """f in q^n A."""
    v = f.valuation()
    return v is None or v >= n


def membership(f, which: str, n: int = 0) -> bool:
    """Decide f in A, qA, q^n A, 1+qA, A_Z or K_Z.

    ``which`` is one of ``'A'``, ``'qA'``, ``'q_pow_n_A'`` (uses ``n``),
    ``'one_plus_qA'``, ``'A_Z'``, ``'K_Z'``.
    """
    f = Q(f)
    if which == "A":
        return in_A(f, 0)
    if which == "qA":
        return in_A(f, 1)
    if which == "q_pow_n_A":
        return in_A(f, n)
    if which == "one_plus_qA":
        return in_A(f - ONE, 1)
    if which == "A_Z":
        return f.is_zero() or (in_A(f) and abs(int(f.den[0])) == 1)
    if which == "K_Z":
        if f.is_zero():
            return True
        d = f.den
        return abs(int(d[_ord0(d)])) == 1
    raise ValueError(f"unknown set {which!r}")
