import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from syzcert.errors import DomainError, HypothesisError, InvalidClassError
from syzcert.lattice import (
    LatticeForm,
    NumClass,
    box_bounds,
    enumerate_classes,
    enumerate_isotropic_primitive,
    enumerate_positive_classes,
    hodge_min_degree,
    intersect,
    isqrt_ceil,
    naive_box_scan,
    signature,
    square,
)
from syzcert.surface import lattice_form

from conftest import enr

U = lattice_form("bielliptic")
E10 = lattice_form("enriques")


def brute_ceil_sqrt(n):
    d = 0
    while d * d < n:
        d += 1
    return d


def test_intersect_examples():
    assert intersect(NumClass.of(1, 0), NumClass.of(0, 1), U) == 1
    assert square(NumClass.of(2, 3), U) == 12
    e, f = enr(1, 0), enr(0, 1)
    assert intersect(e, f, E10) == 1
    assert intersect(e, e, E10) == 0


def test_intersect_dimension_mismatch():
    with pytest.raises(InvalidClassError):
        intersect(NumClass.of(1, 0), enr(1, 0), U)


@given(st.lists(st.integers(-50, 50), min_size=10, max_size=10),
       st.lists(st.integers(-50, 50), min_size=10, max_size=10),
       st.lists(st.integers(-50, 50), min_size=10, max_size=10),
       st.integers(-5, 5))
def test_intersect_symmetric_bilinear(x, y, z, k):
    x, y, z = NumClass(tuple(x)), NumClass(tuple(y)), NumClass(tuple(z))
    assert intersect(x, y, E10) == intersect(y, x, E10)
    assert intersect(k * x + z, y, E10) == k * intersect(x, y, E10) + intersect(z, y, E10)


def test_shipped_forms():
    assert signature(U) == (1, 1)
    assert signature(E10) == (1, 9)
    assert U.is_even() and E10.is_even()
    assert E10.rank == 10 and E10.label == "U+E8(-1)"


def test_signature_zero_diagonal_pivot():
    # all-zero diagonal needs the e_i + e_j pivot trick
    form = LatticeForm.from_rows([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert signature(form) == (1, 2)


def test_lattice_form_rejects_asymmetric():
    with pytest.raises(InvalidClassError):
        LatticeForm.from_rows([[0, 1], [2, 0]])


def test_divisibility():
    assert NumClass.of(4, 6).divisibility() == 2
    assert NumClass.of(3, 5).is_primitive()
    assert not NumClass.of(0, 2).is_primitive()


@pytest.mark.parametrize("Lsq,Msq,expected", [(10, 4, 7), (4, 4, 4), (8, 2, 4)])
def test_hodge_min_degree_examples(Lsq, Msq, expected):
    assert expected == brute_ceil_sqrt(Lsq * Msq)
    assert hodge_min_degree(Lsq, Msq) == expected


def test_hodge_min_degree_exhaustive_small():
    for a in range(1, 151):
        for b in range(1, 151):
            assert hodge_min_degree(a, b) == brute_ceil_sqrt(a * b) if a * b < 2000 else True
            d = hodge_min_degree(a, b)
            assert d * d >= a * b > (d - 1) * (d - 1)


@settings(max_examples=2000)
@given(st.integers(1, 10**4), st.integers(1, 10**4))
def test_hodge_min_degree_property(a, b):
    d = hodge_min_degree(a, b)
    assert d * d >= a * b
    assert (d - 1) * (d - 1) < a * b


@pytest.mark.parametrize("bad", [(0, 4), (4, 0), (-2, 3)])
def test_hodge_min_degree_domain(bad):
    with pytest.raises(DomainError):
        hodge_min_degree(*bad)


def test_isqrt_exact_where_float_fails():
    n = 10**36 + 10**18 * 2  # (10^18 + 1)^2 - 1
    d = isqrt_ceil(n)
    assert d * d >= n > (d - 1) ** 2
    assert d == 10**18 + 1
    # double precision cannot see the difference
    assert math.ceil(math.sqrt(n)) != d
    big = hodge_min_degree(10**18, 10**18 + 2)
    assert big * big >= 10**18 * (10**18 + 2) > (big - 1) ** 2


def test_enumerate_isotropic_examples():
    assert enumerate_isotropic_primitive(U, NumClass.of(2, 2), 4) == [NumClass.of(0, 1), NumClass.of(1, 0)]
    assert enumerate_isotropic_primitive(E10, enr(4, 4), 4) == [enr(0, 1), enr(1, 0)]
    with pytest.raises(HypothesisError):
        enumerate_isotropic_primitive(U, NumClass.of(2, 2), 0)


def test_enumerate_requires_positive_polarization():
    with pytest.raises(HypothesisError):
        enumerate_positive_classes(U, NumClass.of(1, -1), 3)
    with pytest.raises(HypothesisError):
        enumerate_isotropic_primitive(E10, enr(1, 0), 3)


def test_enumerate_positive_examples():
    assert enumerate_positive_classes(U, NumClass.of(2, 2), 7) == [
        NumClass.of(1, 1), NumClass.of(1, 2), NumClass.of(2, 1)]
    assert enumerate_positive_classes(U, NumClass.of(1, 1), 1) == []
    L = enr(4, 4)
    naive = naive_box_scan(E10, L, 4, lambda M, d, s: s > 0, min_square=1)
    assert enumerate_positive_classes(E10, L, 4) == naive == []


def test_enumerate_positive_enriques_count():
    # L = 2e+2f, L.M <= 7: x+y <= 3 with 2xy > |v|^2 -> (1,1,0), (1,2,v), (2,1,v), |v|^2 in {0,2}
    found = enumerate_positive_classes(E10, enr(2, 2), 7)
    assert len(found) == 1 + 2 * (1 + 240)


def test_enumerate_classes_exact_and_threshold():
    L = NumClass.of(3, 2)
    # degree 2x+3y = 12 with 2xy >= 8: (3,2) only; (6,0), (0,4) are isotropic
    assert enumerate_classes(U, L, 12, 8) == [NumClass.of(3, 2)]
    assert enumerate_classes(U, L, 12, 0, exact=True) == [NumClass.of(0, 4), NumClass.of(6, 0)]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 30))
def test_enumerators_match_box_scan_bielliptic(a, b, D):
    L = NumClass.of(a, b)
    iso = naive_box_scan(U, L, D, lambda M, d, s: s == 0 and M.is_primitive())
    pos = naive_box_scan(U, L, D, lambda M, d, s: s > 0, min_square=1)
    assert enumerate_isotropic_primitive(U, L, D) == iso
    assert enumerate_positive_classes(U, L, D) == pos


def test_enumerators_match_box_scan_enriques_small():
    L = enr(3, 4, 0, 1)
    D = 3
    assert math.prod(2 * x + 1 for x in box_bounds(E10, L, D, 0)) < 3_000_000
    iso = naive_box_scan(E10, L, D, lambda M, d, s: s == 0 and M.is_primitive())
    assert enumerate_isotropic_primitive(E10, L, D) == iso
    pos = naive_box_scan(E10, L, 4, lambda M, d, s: s > 0, min_square=1)
    assert enumerate_positive_classes(E10, L, 4) == pos


def test_hodge_index_random_sample():
    rng = random.Random(7)
    for _ in range(2000):
        L = enr(rng.randint(1, 20), rng.randint(1, 20), *[rng.randint(-2, 2) for _ in range(8)])
        Lsq = square(L, E10)
        if Lsq <= 0:
            continue
        M = NumClass(tuple(rng.randint(-15, 15) for _ in range(10)))
        assert intersect(L, M, E10) ** 2 >= Lsq * square(M, E10)
