from fractions import Fraction

import pytest

from syzcert.errors import InternalConsistencyError
from syzcert.lattice import NumClass, naive_box_scan
from syzcert.surface import PSI, MovableClassDescriptor, bielliptic_types, build_surface
from syzcert.syzygy import SyzygyData, slope_exterior_twist, syzygy_data
from syzcert.verifier import (
    BIG_EXCLUDED,
    BIG_SWEEP,
    CERTIFIED,
    EXCLUDED,
    PASS,
    PENCIL_BOUND,
    REJECTED_INPUT,
    VIOLATION,
    VIOLATIONS_FOUND,
    StabilityCertificate,
    brute_force_oracle,
    certify,
    check_big_movable_sweep,
    check_pencil_and_fiber_families,
    dispatch_kodaira_zero,
    lemma34_row,
    min_destabilizing_r,
    replay_lemma34,
    row_verdict,
)

from conftest import enr

ENR = build_surface("enriques")
Z6 = build_surface("bielliptic:Z/6")
Z2 = build_surface("bielliptic:Z/2")
TYPES = sorted(bielliptic_types())


def _data(rank, Lsq):
    return SyzygyData(rank, NumClass.of(0, 0), Lsq, rank + 1)


@pytest.mark.parametrize("rank,Lsq,LdotM,expected", [(4, 8, 2, 1), (4, 8, 6, 3), (4, 8, 7, None), (3, 8, 4, 2)])
def test_min_destabilizing_r_examples(rank, Lsq, LdotM, expected):
    assert min_destabilizing_r(_data(rank, Lsq), LdotM) == expected


def test_min_destabilizing_r_is_least():
    for Lsq in range(2, 61, 2):
        for chi in (0, 1):
            rank = chi + Lsq // 2 - 1
            if rank < 1:
                continue
            data = _data(rank, Lsq)
            for d in range(1, Lsq):
                r = min_destabilizing_r(data, d)
                steps = [rr for rr in range(1, rank) if slope_exterior_twist(data, rr, d) <= 0]
                assert r == (steps[0] if steps else None)
                if r is not None and r > 1:
                    assert slope_exterior_twist(data, r - 1, d) > 0


def test_row_verdict():
    assert row_verdict(None, 5) == EXCLUDED
    assert row_verdict(3, 3) == PASS
    assert row_verdict(1, 2) == VIOLATION


def test_lemma_row_examples():
    assert lemma34_row(10, 4, 1) == (7, 4, 3, PASS)
    assert lemma34_row(8, 2, 0) == (4, 2, 1, PASS)
    assert lemma34_row(8, 4, 0)[3] == EXCLUDED


def test_sweep_rows_enriques():
    rows = check_big_movable_sweep(ENR, enr(5, 1))
    by_sq = {r.Msq: r for r in rows if r.kind == BIG_SWEEP}
    assert sorted(by_sq) == [2, 4, 6, 8]
    r4 = by_sq[4]
    assert (r4.LdotM, r4.r_min, r4.h0, r4.verdict) == (7, 4, 3, PASS)
    assert rows[-1].kind == BIG_EXCLUDED and rows[-1].verdict == EXCLUDED


def test_sweep_rows_bielliptic():
    rows = check_big_movable_sweep(Z6, (2, 2))
    got = [(r.Msq, r.LdotM, r.r_min, r.h0, r.verdict) for r in rows if r.kind == BIG_SWEEP]
    assert got == [(2, 4, 2, 1, PASS), (4, 6, None, 2, EXCLUDED), (6, 7, None, 3, EXCLUDED)]


def test_family_rows_z6():
    from syzcert.surface import movable_families

    fams = movable_families(Z6, (2, 2), include_big=False)
    rows = check_pencil_and_fiber_families(Z6, (2, 2), fams)
    psi = [(r.cls, r.LdotM, r.r_min, r.h0, r.verdict) for r in rows if r.kind == PSI]
    assert psi == [((0, 2), 4, 2, 2, PASS), ((0, 3), 6, None, 3, EXCLUDED)]


def test_family_rows_enriques_pencil():
    cert = certify(ENR, enr(4, 4))
    pencil = [r for r in cert.rows if r.kind == "pencil" and r.label == "k=1"]
    assert {(r.LdotM, r.r_min, r.h0, r.verdict) for r in pencil} == {(8, 4, 2, PASS)}
    b1 = [r for r in cert.rows_of(PENCIL_BOUND) if r.label == "k=1"][0]
    assert (b1.LdotM, b1.r_min, b1.h0, b1.verdict) == (4, 2, 2, PASS)


def test_family_rows_violation_z2():
    from syzcert.surface import movable_families

    fams = movable_families(Z2, (4, 1), unsafe=True, include_big=False)
    rows = check_pencil_and_fiber_families(Z2, (4, 1), fams)
    phi = {r.cls: (r.LdotM, r.r_min, r.h0, r.verdict) for r in rows if r.kind == "phi"}
    assert phi[(2, 0)] == (2, 1, 2, VIOLATION)


def test_family_out_of_window_is_internal_error():
    bogus = MovableClassDescriptor(PSI, NumClass.of(0, 9), 9, 9)
    with pytest.raises(InternalConsistencyError):
        check_pencil_and_fiber_families(Z6, (2, 2), [bogus])


def test_certify_examples():
    c = certify(Z6, (2, 2))
    assert c.verdict == CERTIFIED and not c.violations
    assert c.hash.startswith("sha256:")
    assert certify(ENR, enr(2, 2)).verdict == CERTIFIED
    assert certify(ENR, enr(4, 4)).verdict == CERTIFIED
    assert certify(ENR, enr(2, 1)).verdict == REJECTED_INPUT


def test_certify_negative_control():
    c = certify(Z2, (4, 1))
    assert c.verdict == REJECTED_INPUT
    assert [x.statement for x in c.report.conditions if not x.passed] == ["(μ/m_i)·b ≥ 2"]
    u = certify(Z2, (4, 1), unsafe=True)
    assert u.verdict == VIOLATIONS_FOUND and u.validation_overridden
    assert {r.cls for r in u.violations} == {(2, 0), (4, 0)}


def test_certify_never_raises_on_bad_input():
    assert certify(ENR, (1, 2)).verdict == REJECTED_INPUT
    assert certify(build_surface("k3"), (1, 1)).verdict == REJECTED_INPUT
    assert certify(Z6, (1, 1), unsafe=True).verdict == REJECTED_INPUT
    assert certify(Z6, (0, 0), unsafe=True).verdict == REJECTED_INPUT


def test_certify_degenerate_rank_one():
    X = build_surface("bielliptic:Z/3xZ/3")
    c = certify(X, (1, 2))
    assert c.syzygy.degenerate
    assert c.verdict == CERTIFIED
    assert all(r.verdict != VIOLATION for r in c.rows)


def test_certificate_round_trip():
    c = certify(Z6, (3, 2))
    back = StabilityCertificate.from_dict(c.to_dict())
    assert back == c and back.hash == c.hash
    tampered = c.to_dict()
    tampered["verdict"] = VIOLATIONS_FOUND
    with pytest.raises(ValueError):
        StabilityCertificate.from_dict(tampered)


def test_certificate_jobs_independent():
    assert certify(ENR, enr(4, 4), jobs=1).hash == certify(ENR, enr(4, 4), jobs=4).hash


@pytest.mark.parametrize("label", TYPES)
def test_bielliptic_scaling_monotone(label):
    X = build_surface(f"bielliptic:{label}")
    good = {(a, b) for a in range(1, 9) for b in range(1, 9) if certify(X, (a, b)).verdict == CERTIFIED}
    for a, b in good:
        for nxt in ((a + 1, b), (a, b + 1)):
            if max(nxt) <= 8:
                assert nxt in good


def test_oracle_examples():
    assert brute_force_oracle(Z6, (2, 2)) == []
    assert brute_force_oracle(Z2, (4, 1)) == [((2, 0), 1), ((4, 0), 2)]
    assert brute_force_oracle(ENR, enr(2, 2)) == []


def _naive_oracle(X, L):
    """Slope test over an unpruned coordinate box, with h0 written out per family."""
    data = syzygy_data(X, L)
    cfg = X.config
    mu, ratio = cfg.mu, cfg.gamma // cfg.mu
    Lsq, rank = data.c2, data.rank
    out = []

    def h0(M, s):
        x, y = M.coords
        if s > 0:
            return s // 2
        if s == 0 and y == 0 and x > 0 and x % mu == 0:
            return x // mu + 1
        if s == 0 and x == 0 and y > 0 and y % ratio == 0 and y // ratio >= 2:
            return y // ratio
        return None

    def keep(M, d, s):
        if not 0 < d < Lsq:
            return False
        h = h0(M, s)
        if h is None:
            return False
        for r in range(1, rank):
            if r < h and Fraction(-r * Lsq, rank) + d <= 0:
                out.append((M.coords, r))
        return False

    naive_box_scan(X.form, NumClass.of(*L), Lsq - 1, keep)
    return sorted(out)


@pytest.mark.parametrize("label", TYPES)
@pytest.mark.parametrize("L", [(4, 1), (1, 4), (3, 2), (2, 5), (6, 3), (3, 3), (2, 1)])
def test_oracle_matches_unpruned_scan(label, L):
    X = build_surface(f"bielliptic:{label}")
    try:
        syzygy_data(X, L)
    except Exception:
        pytest.skip("rank below one")
    assert brute_force_oracle(X, L) == _naive_oracle(X, L)


def test_certify_agrees_with_oracle_unsafe():
    for label in TYPES:
        X = build_surface(f"bielliptic:{label}")
        for a in range(1, 7):
            for b in range(1, 7):
                c = certify(X, (a, b), unsafe=True)
                if c.syzygy is None:
                    continue
                oracle = brute_force_oracle(X, (a, b))
                if c.verdict == CERTIFIED:
                    assert oracle == []
                if oracle:
                    assert c.verdict == VIOLATIONS_FOUND


def test_replay_small():
    for chi in (0, 1):
        checked, failures = replay_lemma34(100, chi)
        assert checked == 1225
        assert failures == []


def test_dispatch():
    k3 = dispatch_kodaira_zero(build_surface("k3"))
    assert (k3.verdict, k3.source) == ("stable", "EXTERNAL")
    ab = dispatch_kodaira_zero(build_surface("abelian"))
    assert ab.source == "EXTERNAL" and "cohomologically" in ab.verdict
    z = dispatch_kodaira_zero(Z6, (2, 2))
    assert z.verdict == CERTIFIED and z.certificate is not None
