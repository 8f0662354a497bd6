"""Shared module builders (memoized across test files) and independent oracles."""

from functools import lru_cache
from itertools import product

import sympy

from krcrystal.fusion import fuse, kr_recursive, w1_module

Q_SYM = sympy.Symbol("q")


@lru_cache(maxsize=None)
def fused(t, ell):
    return fuse(t, ell)


@lru_cache(maxsize=None)
def recursive(t, ell):
    if ell == 1:
        return w1_module(t)
    return kr_recursive(t, ell, recursive(t, ell - 1))


def to_sympy(f):
    """Independent reading of a RatQ through its printed form."""
    num, den = str(f)[1:-1].split(")/(")
    return sympy.sympify(num.replace("^", "**"), {"q": Q_SYM}) / sympy.sympify(
        den.replace("^", "**"), {"q": Q_SYM})


def sympy_valuation(expr):
    """q-adic valuation of a nonzero rational function, by sympy."""
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))

    def low(p):
        poly = sympy.Poly(p, Q_SYM)
        return min(m[0] for m in poly.monoms())

    return low(num) - low(den)


def g2_weyl_dim(long_label, short_label):
    """Weyl dimension formula for G2 with Dynkin labels (long, short)."""
    a, b = long_label, short_label
    return ((a + 1) * (b + 1) * (a + b + 2) * (2 * a + b + 3) * (3 * a + b + 4)
            * (3 * a + 2 * b + 5)) // 120


def brute_S(t, ell, bound=None):
    """The tuple set S_l by brute force over a generous box."""
    bound = bound or 4 * ell + 6
    out = []
    for a, b, c, d in product(range(bound), repeat=4):
        if t == "g2-1":
            ok = 3 * b <= c <= b + d and a <= b and -c + 3 * d <= ell
        else:
            ok = 3 * c <= b + d and a <= b <= c and -c + d <= ell
        if ok:
            out.append((a, b, c, d))
    return sorted(out)
