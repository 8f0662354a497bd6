"""Sparse exact linear algebra over Q(q).

Vectors are plain ``dict[int, RatQ]`` with no stored zeros.  Pivots are
chosen by a cheapness heuristic (total degree of the entry) with the column
index as tie-break, which keeps results deterministic.
"""

from __future__ import annotations

from typing import Iterable

from .qfield import ONE, ZERO, RatQ

Vec = dict


class LinAlgError(ArithmeticError):
    pass


def _cost(x: RatQ) -> int:
    return x.num.degree() + x.den.degree() + (x.num.length() > 1) + (x.den.length() > 1)


def vadd(u: Vec, v: Vec) -> Vec:
    out = dict(u)
    for k, a in v.items():
        b = out.get(k)
        if b is None:
            out[k] = a
        else:
            c = a + b
            if c:
                out[k] = c
            else:
                del out[k]
    return out


def vsub(u: Vec, v: Vec) -> Vec:
    return vaxpy(dict(u), -ONE, v)


def vscale(c, v: Vec) -> Vec:
    if not c:
        return {}
    if c == ONE:
        return dict(v)
    return {k: c * a for k, a in v.items()}


def vaxpy(x: Vec, c, v: Vec) -> Vec:
    """In place ``x += c * v``; returns ``x``."""
    if not c:
        return x
    for k, a in v.items():
        t = c * a
        b = x.get(k)
        if b is None:
            x[k] = t
        else:
            s = b + t
            if s:
                x[k] = s
            else:
                del x[k]
    return x


def vcombine(terms: Iterable) -> Vec:
    """Sum of ``c * v`` over ``(c, v)`` pairs."""
    out: Vec = {}
    for c, v in terms:
        vaxpy(out, c, v)
    return out


def vdot(u: Vec, v: Vec) -> RatQ:
    if len(u) > len(v):
        u, v = v, u
    s = ZERO
    for k, a in u.items():
        b = v.get(k)
        if b is not None:
            s = s + a * b
    return s


def bilinear(u: Vec, gram_cols, v: Vec) -> RatQ:
    """u^T G v where ``gram_cols[j]`` is column j of G as a sparse dict."""
    s = ZERO
    for j, b in v.items():
        col = gram_cols[j]
        if not col:
            continue
        t = vdot(u, col)
        if t:
            s = s + t * b
    return s


class EchelonSpan:
    """Incrementally maintained span with coordinates in the inserted vectors.

    ``add`` returns True (and records the vector as the next basis element)
    when the vector is independent of what is already stored.
    """

    def __init__(self):
        self.rows: list[tuple[int, Vec, Vec]] = []   # (pivot, reduced row, combination)
        self.pivots: dict[int, int] = {}
        self.size = 0

    def __len__(self):
        return self.size

    def _reduce(self, x: Vec, track: bool):
        x = dict(x)
        comb: Vec = {}
        for p, row, t in self.rows:
            c = x.get(p)
            if c is None:
                continue
            vaxpy(x, -c, row)
            if track:
                vaxpy(comb, c, t)
        return x, comb

    def reduce(self, x: Vec) -> Vec:
        return self._reduce(x, False)[0]

    def contains(self, x: Vec) -> bool:
        return not self._reduce(x, False)[0]

    def add(self, x: Vec) -> bool:
        r, comb = self._reduce(x, True)
        if not r:
            return False
        p = min(r, key=lambda k: (_cost(r[k]), k))
        inv = r[p].inverse()
        row = vscale(inv, r)
        t = vscale(-inv, comb)
        t[self.size] = inv
        self.rows.append((p, row, t))
        self.pivots[p] = len(self.rows) - 1
        self.size += 1
        return True

    def coords(self, x: Vec) -> Vec | None:
        """Coordinates of x in the inserted basis, or None when x is outside the span."""
        r, comb = self._reduce(x, True)
        if r:
            return None
        return comb


def rref(rows: list[Vec], pivot_limit: int | None = None):
    """Reduced row echelon form; returns ``(pivot_cols, rows)``.

    Columns >= ``pivot_limit`` are only used as pivots for rows with no
    other entry (this is how inconsistency of an augmented system shows up).
    """
    work = [dict(r) for r in rows if r]
    done: list[tuple[int, Vec]] = []
    while work:
        # choose the row/pivot with the cheapest entry
        best = None
        for idx, r in enumerate(work):
            for k, a in r.items():
                late = pivot_limit is not None and k >= pivot_limit
                key = (late, _cost(a), len(r), k)
                if best is None or key < best[0]:
                    best = (key, idx, k)
        _, idx, p = best
        r = work.pop(idx)
        r = vscale(r[p].inverse(), r)
        nxt = []
        for w in work:
            c = w.get(p)
            if c is not None:
                vaxpy(w, -c, r)
            if w:
                nxt.append(w)
        work = nxt
        for j, (_, d) in enumerate(done):
            c = d.get(p)
            if c is not None:
                vaxpy(d, -c, r)
        done.append((p, r))
    done.sort(key=lambda t: t[0])
    return [p for p, _ in done], [r for _, r in done]


def nullspace(rows: list[Vec], ncols: int) -> list[Vec]:
    """Basis of {x : r . x = 0 for every row r} in Q(q)^ncols."""
    pivots, red = rref(rows)
    pivset = set(pivots)
    free = [j for j in range(ncols) if j not in pivset]
    basis = []
    for f in free:
        x = {f: ONE}
        for p, r in zip(pivots, red):
            c = r.get(f)
            if c is not None:
                x[p] = -c
        basis.append(x)
    return basis


def rank(vectors: list[Vec]) -> int:
    span = EchelonSpan()
    for v in vectors:
        span.add(v)
    return len(span)


def solve(rows: list[Vec], rhs: list, ncols: int):
    """One solution of the system, or raise LinAlgError when inconsistent.

    Returns ``(x, nullspace_basis)``.
    """
    aug = []
    for r, b in zip(rows, rhs):
        row = dict(r)
        if b:
            row[ncols] = b
        aug.append(row)
    pivots, red = rref(aug, pivot_limit=ncols)
    if ncols in pivots:
        raise LinAlgError("inconsistent linear system")
    x = {}
    for p, r in zip(pivots, red):
        c = r.get(ncols)
        if c is not None:
            x[p] = c
    kernel = nullspace(rows, ncols) if len(pivots) < ncols else []
    return x, kernel


def matvec(cols, v: Vec) -> Vec:
    """Apply a column-sparse matrix (``cols[j]`` = image of basis vector j)."""
    out: Vec = {}
    for j, c in v.items():
        col = cols[j]
        if col:
            vaxpy(out, c, col)
    return out


def matmul(a_cols, b_cols):
    return [matvec(a_cols, col) for col in b_cols]
