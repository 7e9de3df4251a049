"""Certification of cohomological stability for M_L.

A certificate is a finite ledger.  The ledger asks one question for each
candidate ``(r, M)``: is the slope of ``wedge^r M_L (x) M`` non-positive for
some ``0 < r < rank`` while ``r < h^0(M)``?  If no row answers yes, Green's
vanishing applies to every candidate.

Big classes (M^2 > 0) are covered by one row per even value of M^2, taken
at the smallest degree L.M that the Hodge index inequality allows.  r_min
is nondecreasing in L.M, so that degree is the worst case.  Pencil and
fiber families get one row per concrete class, plus rows at the
smallest degree the polarization allows.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from . import __version__
from .errors import DegenerateError, InternalConsistencyError, InvalidClassError, InvalidPolarizationError
from .lattice import NumClass, enumerate_classes, hodge_min_degree, intersect, isqrt_ceil, square
from .surface import (
    ABELIAN,
    BIELLIPTIC,
    BIG,
    ENRIQUES,
    K3,
    PENCIL,
    PHI,
    PSI,
    Condition,
    MovableClassDescriptor,
    PolarizationReport,
    SurfaceModel,
    half_pencils,
    movable_families,
    validate_polarization,
)
from .syzygy import SyzygyData, slope_exterior_twist, syzygy_data, twist_nonpositive

SCHEMA_VERSION = 1

PASS = "PASS"
EXCLUDED = "EXCLUDED"
VIOLATION = "VIOLATION"

CERTIFIED = "CERTIFIED"
REJECTED_INPUT = "REJECTED_INPUT"
VIOLATIONS_FOUND = "VIOLATIONS_FOUND"

# row kinds
BIG_SWEEP = "big-sweep"
BIG_EXCLUDED = "big-excluded"
PENCIL_BOUND = "pencil-bound"
PHI_BOUND = "phi-bound"
PSI_BOUND = "psi-bound"

REDUCTION_NOTE = (
    "Any N with h^0(N) >= 2 splits as N = M + F with M movable and F the fixed part; "
    "h^0(M) = h^0(N) and L.F >= 0 since L is ample, so L.N >= L.M and the slope condition for N "
    "implies it for M. Candidates with h^0 <= 1 are discharged by Green's vanishing with r >= 1. "
    "Hence checking movable M with 0 < L.M < L^2 covers every twist N. "
    "Cohomological stability implies slope stability of M_L with respect to L."
)

HYPOTHESES = {
    ENRIQUES: "L ample and globally generated (asserted); base field algebraically closed of characteristic != 2",
    BIELLIPTIC: "L ample and globally generated (asserted); base field algebraically closed of characteristic != 2, 3",
}


@dataclass(frozen=True)
class CandidateRecord:
    kind: str
    label: str
    cls: Optional[tuple[int, ...]]
    LdotM: int
    r_min: Optional[int]
    h0: int
    verdict: str
    Msq: Optional[int] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cls"] = list(self.cls) if self.cls is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateRecord":
        d = dict(d)
        d["cls"] = tuple(d["cls"]) if d["cls"] is not None else None
        return cls(**d)


def min_destabilizing_r(data: SyzygyData, LdotM: int) -> Optional[int]:
    """Least r with non-positive twisted slope, or None if it is >= rank."""
    r = -(-LdotM * data.rank // data.c2)
    return r if r <= data.rank - 1 else None


def row_verdict(r_min: Optional[int], h0: int) -> str:
    if r_min is None:
        return EXCLUDED
    return PASS if r_min >= h0 else VIOLATION


def _record(data: SyzygyData, kind: str, label: str, cls, LdotM: int, h0: int, Msq=None) -> CandidateRecord:
    r = min_destabilizing_r(data, LdotM)
    return CandidateRecord(kind, label, cls, LdotM, r, h0, row_verdict(r, h0), Msq)


def lemma34_row(Lsq: int, Msq: int, chi: int) -> tuple[int, Optional[int], int, str]:
    """(L.M at the Hodge floor, r_min, h0, verdict) for a big class of square Msq."""
    rank = chi + Lsq // 2 - 1
    d = hodge_min_degree(Lsq, Msq)
    r = -(-d * rank // Lsq)
    r_min = r if r <= rank - 1 else None
    h0 = max(chi + Msq // 2, 1)
    return d, r_min, h0, row_verdict(r_min, h0)


def check_big_movable_sweep(X: SurfaceModel, L: "NumClass | Sequence[int]") -> list[CandidateRecord]:
    data = syzygy_data(X, L)
    Lsq = data.c2
    rows = []
    for Msq in range(2, Lsq, 2):
        d, _, h0, _ = lemma34_row(Lsq, Msq, X.chi)
        rows.append(_record(data, BIG_SWEEP, f"M^2={Msq}", None, d, h0, Msq))
    # M^2 >= L^2 forces L.M >= L^2, hence r >= rank
    d = hodge_min_degree(Lsq, Lsq)
    rows.append(_record(data, BIG_EXCLUDED, f"M^2>={Lsq}", None, d, max(X.chi + Lsq // 2, 1), Lsq))
    return rows


def family_bound_rows(X: SurfaceModel, data: SyzygyData) -> list[CandidateRecord]:
    """Rows at the least degree each family can reach under the polarization checks."""
    Lsq = data.c2
    rows = []
    if X.kind == ENRIQUES:
        # L.(kP) = 2k L.E >= 4k
        k = 1
        while 4 * k < Lsq:
            rows.append(_record(data, PENCIL_BOUND, f"k={k}", None, 4 * k, k + 1))
            k += 1
    elif X.kind == BIELLIPTIC:
        # L.(aA) = a m_i L.A_i >= 2a L.A_i >= 4a
        a = 1
        while 4 * a < Lsq:
            rows.append(_record(data, PHI_BOUND, f"a={a}", None, 4 * a, a + 1))
            a += 1
        # L.(psi^* L') = deg(L') L.B >= 2 deg(L')
        dd = 2
        while 2 * dd < Lsq:
            rows.append(_record(data, PSI_BOUND, f"deg={dd}", None, 2 * dd, dd))
            dd += 1
    return rows


def check_pencil_and_fiber_families(
    X: SurfaceModel,
    L: "NumClass | Sequence[int]",
    families: Sequence[MovableClassDescriptor],
    *,
    jobs: int = 1,
) -> list[CandidateRecord]:
    L = L if isinstance(L, NumClass) else NumClass(tuple(L))
    data = syzygy_data(X, L)
    form = X.form

    def one(D: MovableClassDescriptor) -> CandidateRecord:
        LdotM = intersect(L, D.cls, form)
        if not 0 < LdotM < data.c2:
            raise InternalConsistencyError(f"{D.family} class {D.cls} has L.M = {LdotM} outside (0, {data.c2})")
        Msq = square(D.cls, form) if D.family == BIG else None
        return _record(data, D.family, D.label, D.cls.coords, LdotM, D.h0, Msq)

    if jobs > 1 and len(families) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, families))
    else:
        rows = [one(D) for D in families]
    return rows + family_bound_rows(X, data)


def _enriques_pencils(X: SurfaceModel, L: NumClass, Lsq: int) -> tuple[list[MovableClassDescriptor], Optional[int]]:
    """Concrete pencils kP, P = 2E, for the half-pencils E of least degree."""
    delta = 1
    while 2 * delta < Lsq:
        found = half_pencils(X, L, delta)
        if found:
            out = []
            for E in found:
                P = 2 * E
                k = 1
                while 2 * delta * k < Lsq:
                    out.append(MovableClassDescriptor(PENCIL, k * P, k + 1, k, P))
                    k += 1
            return out, delta
        delta += 1
    return [], None


@dataclass(frozen=True)
class StabilityCertificate:
    surface: str
    L: tuple[int, ...]
    report: PolarizationReport
    syzygy: Optional[SyzygyData]
    rows: tuple[CandidateRecord, ...]
    bounds: dict
    verdict: str
    hypotheses: str = ""
    reduction_note: str = REDUCTION_NOTE
    validation_overridden: bool = False
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def content(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "surface": self.surface,
            "L": list(self.L),
            "report": {
                "conditions": [asdict(c) for c in self.report.conditions],
                "hypotheses_ok": self.report.hypotheses_ok,
                "note": self.report.note,
            },
            "syzygy": self.syzygy.to_dict() if self.syzygy else None,
            "hypotheses": self.hypotheses,
            "reduction_note": self.reduction_note,
            "validation_overridden": self.validation_overridden,
            "bounds": self.bounds,
            "rows": [r.to_dict() for r in self.rows],
            "verdict": self.verdict,
        }

    @property
    def hash(self) -> str:
        return content_hash(self.content())

    def to_dict(self) -> dict:
        d = self.content()
        d["hash"] = self.hash
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityCertificate":
        rep = d["report"]
        cert = cls(
            surface=d["surface"],
            L=tuple(d["L"]),
            report=PolarizationReport(
                tuple(Condition(**c) for c in rep["conditions"]), rep["hypotheses_ok"], rep["note"]
            ),
            syzygy=SyzygyData.from_dict(d["syzygy"]) if d["syzygy"] else None,
            rows=tuple(CandidateRecord.from_dict(r) for r in d["rows"]),
            bounds=d["bounds"],
            verdict=d["verdict"],
            hypotheses=d["hypotheses"],
            reduction_note=d["reduction_note"],
            validation_overridden=d["validation_overridden"],
            tool_version=d["tool_version"],
            schema_version=d["schema_version"],
        )
        if "hash" in d and d["hash"] != cert.hash:
            raise InvalidClassError("certificate hash does not match its content")
        return cert

    def rows_of(self, kind: str) -> list[CandidateRecord]:
        return [r for r in self.rows if r.kind == kind]

    @property
    def violations(self) -> list[CandidateRecord]:
        return [r for r in self.rows if r.verdict == VIOLATION]


def canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(content: dict) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(content).encode()).hexdigest()


def _rejected(X_desc, L, report, reason=None, hyp="") -> StabilityCertificate:
    if reason is not None:
        report = PolarizationReport(report.conditions + (reason,), False)
    return StabilityCertificate(X_desc, tuple(L), report, None, (), {}, REJECTED_INPUT, hyp)


def certify(
    X: SurfaceModel, L: "NumClass | Sequence[int]", *, jobs: int = 1, unsafe: bool = False
) -> StabilityCertificate:
    """Run the full check; every outcome is reported in the verdict."""
    L = L if isinstance(L, NumClass) else NumClass(tuple(L))
    empty = PolarizationReport((), False)
    if X.kind not in (ENRIQUES, BIELLIPTIC):
        cond = Condition("S", "surface carries a lattice model", False, f"{X.kind} is dispatch-only")
        return _rejected(X.descriptor, L, empty, cond)
    if len(L) != X.form.rank:
        cond = Condition("C", "L has one coordinate per lattice basis vector", False,
                         f"{len(L)} coordinates for rank {X.form.rank}")
        return _rejected(X.descriptor, L, empty, cond)
    hyp = HYPOTHESES[X.kind]
    report = validate_polarization(X, L)
    if not report.hypotheses_ok and not unsafe:
        return _rejected(X.descriptor, L, report, hyp=hyp)
    try:
        data = syzygy_data(X, L)
    except (InvalidPolarizationError, DegenerateError) as exc:
        cond = Condition("S1", "h^0(L) >= 2 with L^2 positive and even", False, str(exc))
        return _rejected(X.descriptor, L, report, cond, hyp)

    Lsq = data.c2
    rows = check_big_movable_sweep(X, L)
    bounds: dict = {
        "degree_window": [1, Lsq - 1],
        "big_sweep_Msq": [2, Lsq - 2] if Lsq > 2 else [],
        "rank_window": [1, data.rank - 1],
    }
    if X.kind == BIELLIPTIC:
        families = movable_families(X, L, unsafe=True, include_big=False)
        bounds["fiber_families"] = "complete: all a*A and deg(L')*B with degree < L^2"
    else:
        families, delta = _enriques_pencils(X, L, Lsq)
        bounds["half_pencil_min_degree"] = delta
        bounds["pencil_bound_k"] = [1, (Lsq - 1) // 4] if Lsq > 4 else []
        bounds["concrete_pencils"] = "all P = 2E with E primitive isotropic of least degree L.E"
    rows += check_pencil_and_fiber_families(X, L, families, jobs=jobs)

    if any(r.verdict == VIOLATION for r in rows):
        verdict = VIOLATIONS_FOUND
    elif report.hypotheses_ok:
        verdict = CERTIFIED
    else:
        verdict = REJECTED_INPUT
    return StabilityCertificate(
        X.descriptor, L.coords, report, data, tuple(rows), bounds, verdict, hyp, validation_overridden=unsafe
    )


# ---------------------------------------------------------------------------
# independent brute-force oracle


def _oracle_isotropic_h0(X: SurfaceModel, M: NumClass) -> Optional[int]:
    """h^0 of the movable member numerically equal to M, None if M is not one."""
    if X.kind == ENRIQUES:
        # M = cE, E a half-pencil: h^0(cE) = floor(c/2) + 1
        return M.divisibility() // 2 + 1
    cfg = X.config
    x, y = M.coords
    if y == 0 and x > 0 and x % cfg.mu == 0:
        return x // cfg.mu + 1
    if x == 0 and y > 0 and y % cfg.fiber_ratio == 0 and y // cfg.fiber_ratio >= 2:
        return y // cfg.fiber_ratio
    return None


def brute_force_oracle(X: SurfaceModel, L: "NumClass | Sequence[int]") -> list[tuple[tuple[int, ...], int]]:
    """All (M, r) with 0 < r < rank, twisted slope <= 0 and r < h^0(M).

    Classes are found by lattice enumeration at each degree 0 < d < L^2.
    Only classes whose h^0 could exceed the first destabilizing r at that
    degree are searched.  The first destabilizing r is found by stepping
    through r with exact rational slopes.
    """
    L = L if isinstance(L, NumClass) else NumClass(tuple(L))
    data = syzygy_data(X, L)
    form = X.form
    Lsq, rank, chi = data.c2, data.rank, X.chi

    first: dict[int, int] = {}
    r = 1
    for d in range(1, Lsq):
        while r <= rank - 1 and slope_exterior_twist(data, r, d) > 0:
            r += 1
        if r > rank - 1:
            break
        first[d] = r

    found: set[tuple[tuple[int, ...], int]] = set()

    def record(M: NumClass, d: int, h0: int) -> None:
        for rr in range(first[d], min(h0, rank)):
            if slope_exterior_twist(data, rr, d) <= 0:
                found.add((M.coords, rr))

    for d, rf in first.items():
        # h^0 = chi + M^2/2 > rf  <=>  M^2 > 2 (rf - chi)
        T = max(1, 2 * (rf - chi) + 1)
        for M in enumerate_classes(form, L, d, T):
            record(M, d, chi + square(M, form) // 2)

    # isotropic multiples cE: every family member has h^0(cE) <= c + 1
    for delta in range(1, Lsq):
        c_max = (Lsq - 1) // delta
        if not any(c * delta in first and first[c * delta] < c + 1 for c in range(1, c_max + 1)):
            continue
        for E in enumerate_classes(form, L, delta, 0, exact=True):
            if not E.is_primitive():
                continue
            for c in range(1, c_max + 1):
                if c * delta in first:
                    M = c * E
                    h0 = _oracle_isotropic_h0(X, M)
                    if h0 is not None:
                        record(M, c * delta, h0)
    return sorted(found)


# ---------------------------------------------------------------------------
# Lemma replay over a range of squares


def replay_lemma34(max_Lsq: int, chi: int) -> tuple[int, list[tuple[int, int]]]:
    """Check every even pair 0 < M^2 < L^2 <= max_Lsq; return (pairs checked, failures).

    Vectorized: ceil(sqrt(p)) is seeded from a float square root and then
    corrected with exact integer comparisons, so the result is exact.
    """
    import numpy as np

    checked = 0
    failures: list[tuple[int, int]] = []
    for Lsq in range(4, max_Lsq + 1, 2):
        rank = chi + Lsq // 2 - 1
        if rank < 1:
            continue
        m = np.arange(2, Lsq, 2, dtype=np.int64)
        p = Lsq * m
        d = np.ceil(np.sqrt(p.astype(np.float64))).astype(np.int64)
        while True:
            over = (d - 1) * (d - 1) >= p
            if not over.any():
                break
            d[over] -= 1
        while True:
            under = d * d < p
            if not under.any():
                break
            d[under] += 1
        r = -((-d * rank) // Lsq)
        h0 = np.maximum(chi + m // 2, 1)
        bad = (r <= rank - 1) & (r < h0)
        checked += len(m)
        failures.extend((Lsq, int(x)) for x in m[bad])
    return checked, failures


# ---------------------------------------------------------------------------
# Kodaira dimension zero


@dataclass(frozen=True)
class DispatchVerdict:
    surface: str
    verdict: str
    source: str
    citation: str = ""
    certificate: Optional[StabilityCertificate] = None

    def to_dict(self) -> dict:
        d = {"surface": self.surface, "verdict": self.verdict, "source": self.source, "citation": self.citation}
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        return d


def dispatch_kodaira_zero(X: SurfaceModel, L: "NumClass | Sequence[int] | None" = None, **kw) -> DispatchVerdict:
    if X.kind == K3:
        return DispatchVerdict(X.descriptor, "stable", "EXTERNAL", "Camere, Thm 1")
    if X.kind == ABELIAN:
        return DispatchVerdict(X.descriptor, "cohomologically stable", "EXTERNAL", "Caucci-Lahoz, Thm 1.5")
    cert = certify(X, L, **kw)
    return DispatchVerdict(X.descriptor, cert.verdict, "CERTIFIED" if cert.verdict == CERTIFIED else "TOOL", "", cert)
