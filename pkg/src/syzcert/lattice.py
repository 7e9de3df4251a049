"""Exact arithmetic on hyperbolic integral lattices.

Everything here works over the integers (or exact rationals where a
rational diagonalization is unavoidable).  The enumerators slice the
lattice by the degree ``L.M`` and run a Fincke-Pohst search on the
negative-definite part of each slice, so the search region is a finite
ellipsoid once the degree is fixed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

from .errors import DomainError, HypothesisError, InvalidClassError

__all__ = [
    "LatticeForm",
    "NumClass",
    "intersect",
    "square",
    "signature",
    "isqrt_ceil",
    "hodge_min_degree",
    "enumerate_classes",
    "enumerate_isotropic_primitive",
    "enumerate_positive_classes",
    "box_bounds",
    "naive_box_scan",
]


@dataclass(frozen=True)
class LatticeForm:
    rank: int
    gram: tuple[tuple[int, ...], ...]
    label: str = ""

    def __post_init__(self) -> None:
        gram = tuple(tuple(int(v) for v in row) for row in self.gram)
        object.__setattr__(self, "gram", gram)
        if self.rank < 1 or len(gram) != self.rank or any(len(row) != self.rank for row in gram):
            raise InvalidClassError(f"gram matrix of {self.label!r} is not {self.rank}x{self.rank}")
        for i in range(self.rank):
            for j in range(i):
                if gram[i][j] != gram[j][i]:
                    raise InvalidClassError(f"gram matrix of {self.label!r} is not symmetric")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], label: str = "") -> "LatticeForm":
        return cls(len(rows), tuple(tuple(r) for r in rows), label)

    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def apply(self, coords: Sequence[int]) -> tuple[int, ...]:
        """Return ``gram @ coords``."""
        return tuple(sum(g * c for g, c in zip(row, coords)) for row in self.gram)


@dataclass(frozen=True, order=True)
class NumClass:
    """A numerical class, stored by its integer coordinates."""

    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @classmethod
    def of(cls, *coords: int) -> "NumClass":
        return cls(tuple(coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __add__(self, other: "NumClass") -> "NumClass":
        if len(other) != len(self):
            raise InvalidClassError("cannot add classes of different length")
        return NumClass(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "NumClass") -> "NumClass":
        return self + (-other)

    def __neg__(self) -> "NumClass":
        return NumClass(tuple(-a for a in self.coords))

    def __mul__(self, k: int) -> "NumClass":
        return NumClass(tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def divisibility(self) -> int:
        """gcd of the coordinates (0 for the zero class)."""
        return math.gcd(*self.coords)

    def is_primitive(self) -> bool:
        return self.divisibility() == 1

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def _check(x: NumClass, form: LatticeForm) -> None:
    if len(x.coords) != form.rank:
        raise InvalidClassError(
            f"class {x} has {len(x.coords)} coordinates, lattice {form.label!r} has rank {form.rank}"
        )


def intersect(x: NumClass, y: NumClass, form: LatticeForm) -> int:
    _check(x, form)
    _check(y, form)
    return sum(a * b for a, b in zip(x.coords, form.apply(y.coords)))


def square(x: NumClass, form: LatticeForm) -> int:
    return intersect(x, x, form)


def signature(form: LatticeForm) -> tuple[int, int]:
    """(n_plus, n_minus) by symmetric Gaussian elimination over Q."""
    a = [[Fraction(v) for v in row] for row in form.gram]
    n = form.rank
    pos = neg = 0
    for i in range(n):
        if a[i][i] == 0:
            j = next((j for j in range(i + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[i], a[j] = a[j], a[i]
                for row in a:
                    row[i], row[j] = row[j], row[i]
            else:
                j = next((j for j in range(i + 1, n) if a[i][j] != 0), None)
                if j is None:
                    continue  # zero row: degenerate direction
                # e_i -> e_i + e_j makes the pivot 2*a_ij
                for k in range(n):
                    a[i][k] += a[j][k]
                for k in range(n):
                    a[k][i] += a[k][j]
        p = a[i][i]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for r in range(i + 1, n):
            f = a[r][i] / p
            if f:
                for c in range(i, n):
                    a[r][c] -= f * a[i][c]
        for c in range(i + 1, n):
            a[i][c] = Fraction(0)
    return pos, neg


def isqrt_ceil(n: int) -> int:
    """Smallest integer d >= 0 with d*d >= n."""
    if n < 0:
        raise DomainError("isqrt_ceil of a negative number")
    d = math.isqrt(n)
    return d if d * d == n else d + 1


def hodge_min_degree(Lsq: int, Msq: int) -> int:
    """Least positive d with d^2 >= Lsq*Msq, the Hodge-index floor for L.M."""
    if Lsq <= 0 or Msq <= 0:
        raise DomainError(f"hodge_min_degree needs positive squares, got ({Lsq}, {Msq})")
    return isqrt_ceil(Lsq * Msq)


# ---------------------------------------------------------------------------
# degree slicing + Fincke-Pohst


def _floor_plus_sqrt(center: Fraction, s2: Fraction) -> int:
    """Largest integer y with y - center <= sqrt(s2)."""
    y = math.floor(center) + math.isqrt(math.floor(s2))
    t = y + 1 - center
    if t <= 0 or t * t <= s2:
        y += 1
    return y


def _ceil_minus_sqrt(center: Fraction, s2: Fraction) -> int:
    return -_floor_plus_sqrt(-center, s2)


def _unimodular_for_row(w: list[int]) -> tuple[int, list[list[int]]]:
    """Column operations taking the row ``w`` to ``(g, 0, ..., 0)``.

    Returns ``g`` and the columns of a unimodular matrix ``U`` with
    ``w . U[:, 0] = g`` and ``w . U[:, j] = 0`` for j > 0.
    """
    n = len(w)
    w = list(w)
    cols = [[int(i == j) for i in range(n)] for j in range(n)]
    while True:
        nz = [i for i in range(n) if w[i]]
        if len(nz) <= 1:
            break
        p = min(nz, key=lambda i: abs(w[i]))
        for j in nz:
            if j != p:
                q = w[j] // w[p]
                w[j] -= q * w[p]
                cols[j] = [a - q * b for a, b in zip(cols[j], cols[p])]
    p = next(i for i in range(n) if w[i])
    if w[p] < 0:
        w[p] = -w[p]
        cols[p] = [-a for a in cols[p]]
    g = w[p]
    cols.insert(0, cols.pop(p))
    return g, cols


def _lll(basis: list[list[int]], gram: Callable[[list[int], list[int]], int]) -> list[list[int]]:
    """Textbook LLL (delta = 3/4) for a positive definite pairing, exact."""
    b = [list(v) for v in basis]
    n = len(b)
    if n <= 1:
        return b

    def gso() -> tuple[list[list[Fraction]], list[Fraction]]:
        mu = [[Fraction(0)] * n for _ in range(n)]
        bstar_norm: list[Fraction] = []
        # work with coefficients of b* in terms of b via the Gram matrix
        G = [[Fraction(gram(b[i], b[j])) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i):
                s = G[i][j] - sum(mu[j][k] * mu[i][k] * bstar_norm[k] for k in range(j))
                mu[i][j] = s / bstar_norm[j]
            bstar_norm.append(G[i][i] - sum(mu[i][k] ** 2 * bstar_norm[k] for k in range(i)))
        return mu, bstar_norm

    mu, bn = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for i in range(j):
                    mu[k][i] -= q * mu[j][i]
                mu[k][j] -= q
        if bn[k] >= (Fraction(3, 4) - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, bn = gso()
            k = max(k - 1, 1)
    return b


class _DegreeSlicer:
    """Precomputed data for enumerating classes of a fixed L-degree.

    A class with ``L.M = d`` is ``t*u0 + K y`` with ``d = g*t`` and ``K`` a
    basis of the orthogonal complement of L.  On that complement the form is
    negative definite, so ``M^2 >= T`` cuts out a finite ellipsoid in ``y``.
    """

    def __init__(self, form: LatticeForm, L: NumClass):
        Lsq = square(L, form)
        if Lsq <= 0:
            raise HypothesisError(f"enumeration needs L^2 > 0, got L^2 = {Lsq}")
        self.form = form
        self.L = L
        self.Lsq = Lsq
        w = list(form.apply(L.coords))
        self.g, cols = _unimodular_for_row(w)
        self.u0 = cols[0]
        n = form.rank - 1
        self.m = n

        def pair(x: Sequence[int], y: Sequence[int]) -> int:
            return sum(a * b for a, b in zip(x, form.apply(y)))

        kernel = _lll(cols[1:], lambda x, y: -pair(x, y)) if n else []
        self.kernel = kernel
        if n == 0:
            return
        A = [[Fraction(-pair(kernel[i], kernel[j])) for j in range(n)] for i in range(n)]
        bvec = [Fraction(pair(kernel[i], self.u0)) for i in range(n)]
        # center per unit t: A c = b
        self.c_unit = _solve(A, bvec)
        u0sq = pair(self.u0, self.u0)
        if sum(x * y for x, y in zip(self.c_unit, bvec)) + u0sq != Fraction(self.g * self.g, Lsq):
            raise AssertionError("degree slice decomposition inconsistent")
        self.q = _fp_decompose(A)

    def classes(self, degree: int, min_square: int, exact: bool = False) -> list[tuple[int, ...]]:
        """All coordinate vectors M with L.M = degree and M^2 >= min_square
        (M^2 == min_square when ``exact``)."""
        if degree % self.g:
            return []
        if degree * degree < self.Lsq * min_square:
            return []
        t = degree // self.g
        base = [t * a for a in self.u0]
        n = self.m
        out: list[tuple[int, ...]] = []
        if n == 0:
            M = tuple(base)
            sq = sum(a * b for a, b in zip(M, self.form.apply(M)))
            if sq == min_square or (not exact and sq > min_square):
                out.append(M)
            return out
        R = Fraction(degree * degree, self.Lsq) - min_square
        c = [t * x for x in self.c_unit]
        for y in _fincke_pohst(self.q, c, R):
            M = list(base)
            for yi, k in zip(y, self.kernel):
                if yi:
                    for j in range(len(M)):
                        M[j] += yi * k[j]
            M = tuple(M)
            if exact:
                sq = sum(a * b for a, b in zip(M, self.form.apply(M)))
                if sq != min_square:
                    continue
            out.append(M)
        return out


def _solve(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    m = [row[:] + [b[i]] for i, row in enumerate(A)]
    for i in range(n):
        p = next(r for r in range(i, n) if m[r][i] != 0)
        m[i], m[p] = m[p], m[i]
        for r in range(n):
            if r != i and m[r][i]:
                f = m[r][i] / m[i][i]
                m[r] = [x - f * y for x, y in zip(m[r], m[i])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _fp_decompose(A: list[list[Fraction]]) -> list[list[Fraction]]:
    """Cholesky-style decomposition: Q(z) = sum_i q_ii (z_i + sum_{j>i} q_ij z_j)^2."""
    n = len(A)
    q = [row[:] for row in A]
    for i in range(n):
        if q[i][i] <= 0:
            raise AssertionError("form on the orthogonal complement is not negative definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _fincke_pohst(q: list[list[Fraction]], c: list[Fraction], R: Fraction) -> Iterator[list[int]]:
    """Integer y with sum_i q_ii (y_i - c_i + sum_{j>i} q_ij (y_j - c_j))^2 <= R."""
    if R < 0:
        return
    n = len(q)
    y = [0] * n
    budget = [Fraction(0)] * (n + 1)
    budget[n] = R

    def rec(i: int) -> Iterator[list[int]]:
        shift = sum((q[i][j] * (y[j] - c[j]) for j in range(i + 1, n)), Fraction(0))
        center = c[i] - shift
        s2 = budget[i + 1] / q[i][i]
        lo = _ceil_minus_sqrt(center, s2)
        hi = _floor_plus_sqrt(center, s2)
        for v in range(lo, hi + 1):
            y[i] = v
            z = v - center
            budget[i] = budget[i + 1] - q[i][i] * z * z
            if i == 0:
                yield list(y)
            else:
                yield from rec(i - 1)

    yield from rec(n - 1)


@lru_cache(maxsize=256)
def _slicer(form: LatticeForm, L: NumClass) -> _DegreeSlicer:
    return _DegreeSlicer(form, L)


def enumerate_classes(
    form: LatticeForm, L: NumClass, degree: int, min_square: int, exact: bool = False
) -> list[NumClass]:
    """Classes M with L.M == degree and M^2 >= min_square (== when exact), sorted."""
    _check(L, form)
    found = _slicer(form, L).classes(degree, min_square, exact)
    return [NumClass(m) for m in sorted(found)]


def _check_window(form: LatticeForm, L: NumClass, max_degree: int) -> None:
    _check(L, form)
    if square(L, form) <= 0:
        raise HypothesisError("a positive polarization (L^2 > 0) is required for finiteness")
    if max_degree < 1:
        raise HypothesisError(f"empty degree window: max_degree = {max_degree}")


def enumerate_isotropic_primitive(form: LatticeForm, L: NumClass, max_degree: int) -> list[NumClass]:
    """Primitive P with P^2 = 0 and 0 < L.P <= max_degree, lexicographic."""
    _check_window(form, L, max_degree)
    s = _slicer(form, L)
    found = []
    for d in range(1, max_degree + 1):
        found.extend(m for m in s.classes(d, 0, exact=True) if math.gcd(*m) == 1)
    return [NumClass(m) for m in sorted(found)]


def enumerate_positive_classes(form: LatticeForm, L: NumClass, max_degree: int) -> list[NumClass]:
    """All M with M^2 > 0 and 0 < L.M <= max_degree, lexicographic."""
    _check_window(form, L, max_degree)
    s = _slicer(form, L)
    found = []
    for d in range(1, max_degree + 1):
        found.extend(s.classes(d, 1))
    return [NumClass(m) for m in sorted(found)]


# ---------------------------------------------------------------------------
# naive oracle


def box_bounds(form: LatticeForm, L: NumClass, max_degree: int, min_square: int) -> list[int]:
    """Coordinate box containing every M with 0 < L.M <= max_degree, M^2 >= min_square.

    Uses the positive definite form P(M) = 2(L.M)^2 - L^2 M^2 <= 2D^2 - L^2 T
    and the bound x_i^2 <= R * (P^-1)_ii.
    """
    _check_window(form, L, max_degree)
    Lsq = square(L, form)
    w = form.apply(L.coords)
    n = form.rank
    P = [[Fraction(2 * w[i] * w[j] - Lsq * form.gram[i][j]) for j in range(n)] for i in range(n)]
    R = 2 * max_degree * max_degree - Lsq * min_square
    if R < 0:
        return [0] * n
    bounds = []
    for i in range(n):
        e = [Fraction(int(i == j)) for j in range(n)]
        inv_ii = _solve(P, e)[i]
        bounds.append(math.isqrt(math.floor(R * inv_ii)))
    return bounds


def naive_box_scan(
    form: LatticeForm,
    L: NumClass,
    max_degree: int,
    predicate: Callable[[NumClass, int, int], bool],
    min_square: int = 0,
) -> list[NumClass]:
    """Scan the whole coordinate box; keep M with 0 < L.M <= max_degree and
    ``predicate(M, L.M, M^2)``.  Test oracle only: cost is the box volume."""
    import numpy as np

    bounds = box_bounds(form, L, max_degree, min_square)
    n = form.rank
    G = np.array(form.gram, dtype=np.int64)
    w = np.array(form.apply(L.coords), dtype=np.int64)
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    out: list[NumClass] = []
    # split on the first coordinates so each block stays modest
    split = 0
    size = 1
    for i in range(n - 1, -1, -1):
        size *= len(ranges[i])
        if size > 200_000:
            split = i + 1
            break
    head_ranges = ranges[:split]
    tail = ranges[split:]
    if tail:
        mesh = np.stack(np.meshgrid(*tail, indexing="ij"), axis=-1).reshape(-1, n - split)
    else:
        mesh = np.zeros((1, 0), dtype=np.int64)
    for head in itertools.product(*[r.tolist() for r in head_ranges]):
        block = np.concatenate([np.tile(np.array(head, dtype=np.int64), (len(mesh), 1)), mesh], axis=1)
        deg = block @ w
        keep = (deg > 0) & (deg <= max_degree)
        if not keep.any():
            continue
        sub = block[keep]
        sq = np.einsum("ij,jk,ik->i", sub, G, sub)
        for row, d, s in zip(sub.tolist(), deg[keep].tolist(), sq.tolist()):
            M = NumClass(tuple(row))
            if predicate(M, d, s):
                out.append(M)
    return sorted(out)
