"""Surface models, h^0 of movable classes, polarization checks and the
movable families that can destabilize a syzygy bundle."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigurationError, DomainError, HypothesisError, InvalidClassError
from .lattice import (
    LatticeForm,
    NumClass,
    enumerate_classes,
    enumerate_isotropic_primitive,
    enumerate_positive_classes,
    intersect,
    square,
)

ENRIQUES = "enriques"
BIELLIPTIC = "bielliptic"
K3 = "k3"
ABELIAN = "abelian"
KINDS = (ENRIQUES, BIELLIPTIC, K3, ABELIAN)

BIG = "big"
PENCIL = "pencil"
PHI = "phi"
PSI = "psi"


# ---------------------------------------------------------------------------
# shipped data


def _data_text(name: str) -> str:
    override = os.environ.get("SYZCERT_DATA_DIR")
    if override:
        return (Path(override) / name).read_text()
    return resources.files("syzcert").joinpath("data", name).read_text()


@lru_cache(maxsize=None)
def _load(name: str, _override: Optional[str]) -> dict:
    return json.loads(_data_text(name))


def load_data(name: str) -> dict:
    return _load(name, os.environ.get("SYZCERT_DATA_DIR"))


def lattice_form(kind: str) -> LatticeForm:
    entry = load_data("lattices.json")["forms"][kind]
    return LatticeForm.from_rows(entry["gram"], entry["label"])


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class BiellipticConfig:
    gamma: int
    mu: int
    multiplicities: tuple[int, ...]
    label: str = "custom"
    canonical_order: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in self.multiplicities))

    def validate(self) -> None:
        if self.gamma < 1 or self.mu < 1:
            raise ConfigurationError(f"{self.label}: gamma and mu must be positive")
        if not self.multiplicities:
            raise ConfigurationError(f"{self.label}: multiplicities must be nonempty")
        if any(m < 2 for m in self.multiplicities):
            raise ConfigurationError(f"{self.label}: every multiplicity m_i must be >= 2")
        lcm = reduce(math.lcm, self.multiplicities)
        if lcm != self.mu:
            raise ConfigurationError(
                f"{self.label}: invariant mu = lcm(m_i) violated (lcm{self.multiplicities} = {lcm} != {self.mu})"
            )
        if self.gamma % self.mu:
            raise ConfigurationError(f"{self.label}: invariant gamma/mu integral violated ({self.gamma}/{self.mu})")

    @property
    def fiber_ratio(self) -> int:
        """gamma/mu; the psi-fiber B has coordinates (0, gamma/mu)."""
        return self.gamma // self.mu

    @property
    def phi_fiber(self) -> NumClass:
        return NumClass.of(self.mu, 0)

    @property
    def psi_fiber(self) -> NumClass:
        return NumClass.of(0, self.fiber_ratio)

    def reduced_fiber(self, m: int) -> NumClass:
        """A_i = A/m_i."""
        return NumClass.of(self.mu // m, 0)


@dataclass(frozen=True)
class SurfaceModel:
    kind: str
    chi: int
    q: int
    pg: int
    canonical_torsion_order: int
    form: Optional[LatticeForm] = None
    config: Optional[BiellipticConfig] = None

    @property
    def descriptor(self) -> str:
        if self.kind == BIELLIPTIC:
            return f"bielliptic:{self.config.label}"
        return self.kind

    def require_lattice(self) -> LatticeForm:
        if self.form is None:
            raise DomainError(f"no lattice model for {self.kind} surfaces (dispatch only)")
        return self.form


def bielliptic_types() -> dict[str, BiellipticConfig]:
    out = {}
    for t in load_data("bielliptic_types.json")["types"]:
        cfg = BiellipticConfig(t["gamma"], t["mu"], tuple(t["multiplicities"]), t["label"], t.get("canonical_order"))
        cfg.validate()
        out[cfg.label] = cfg
    return out


def _normalize_label(label: str) -> str:
    return label.replace(" ", "").replace("×", "x").replace("*", "x")


def build_surface(spec: "str | BiellipticConfig") -> SurfaceModel:
    """Build a model from "enriques", "bielliptic:<label>", "k3", "abelian"
    or a custom :class:`BiellipticConfig`."""
    if isinstance(spec, BiellipticConfig):
        spec.validate()
        order = spec.canonical_order if spec.canonical_order is not None else spec.mu
        return SurfaceModel(BIELLIPTIC, 0, 1, 0, order, lattice_form(BIELLIPTIC), spec)
    name = spec.strip()
    kind, _, label = name.partition(":")
    kind = kind.lower()
    if kind == ENRIQUES:
        return SurfaceModel(ENRIQUES, 1, 0, 0, 2, lattice_form(ENRIQUES))
    if kind == BIELLIPTIC:
        types = bielliptic_types()
        key = _normalize_label(label)
        match = {_normalize_label(k): v for k, v in types.items()}.get(key)
        if match is None:
            raise ConfigurationError(f"unknown bielliptic type {label!r}; known: {', '.join(types)}")
        return build_surface(match)
    if kind == K3:
        return SurfaceModel(K3, 2, 0, 1, 1)
    if kind == ABELIAN:
        return SurfaceModel(ABELIAN, 0, 2, 1, 1)
    raise ConfigurationError(f"unknown surface descriptor {spec!r}")


# ---------------------------------------------------------------------------
# movable classes


@dataclass(frozen=True)
class MovableClassDescriptor:
    """A numerical class tagged with its movable family.

    ``param`` is k for pencils (cls = k*P), a for phi-fibers and deg(L')
    for psi-fibers; ``base`` is the pencil class P = 2E.
    """

    family: str
    cls: NumClass
    h0: int
    param: Optional[int] = None
    base: Optional[NumClass] = None

    @property
    def label(self) -> str:
        if self.family == PENCIL:
            return f"k={self.param}"
        if self.family == PHI:
            return f"a={self.param}"
        if self.family == PSI:
            return f"deg={self.param}"
        return "big"


def h0_movable(X: SurfaceModel, D: MovableClassDescriptor) -> int:
    form = X.require_lattice()
    if D.family == BIG:
        sq = square(D.cls, form)
        if sq <= 0 or sq % 2:
            raise InvalidClassError(f"big movable class needs positive even square, got {sq}")
        return X.chi + sq // 2
    if D.family == PENCIL:
        if X.kind != ENRIQUES:
            raise DomainError("elliptic pencils kP are an Enriques family")
        return D.param + 1
    if D.family in (PHI, PSI):
        if X.kind != BIELLIPTIC:
            raise DomainError("fiber families live on bielliptic surfaces")
        return D.param + 1 if D.family == PHI else D.param
    raise DomainError(f"unknown family {D.family!r}")


def check_descriptor(X: SurfaceModel, D: MovableClassDescriptor) -> None:
    """Re-check a descriptor against its family invariant."""
    form = X.require_lattice()
    ok = True
    if D.family == BIG:
        ok = square(D.cls, form) > 0
    elif D.family == PENCIL:
        half = NumClass(tuple(c // 2 for c in D.base.coords))
        ok = (
            D.base == 2 * half
            and half.is_primitive()
            and square(half, form) == 0
            and D.cls == D.param * D.base
            and D.param >= 1
        )
    elif D.family == PHI:
        ok = D.param >= 1 and D.cls == D.param * X.config.phi_fiber
    elif D.family == PSI:
        ok = D.param >= 2 and D.cls == D.param * X.config.psi_fiber
    if not ok or D.h0 != h0_movable(X, D):
        raise InvalidClassError(f"descriptor {D} violates its family invariant")


# ---------------------------------------------------------------------------
# polarization


@dataclass(frozen=True)
class Condition:
    code: str
    statement: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PolarizationReport:
    conditions: tuple[Condition, ...]
    hypotheses_ok: bool
    note: str = (
        "These are necessary numerical consequences of 'L ample and globally generated'; "
        "they are not sufficient. Ampleness and global generation remain asserted hypotheses."
    )

    def failed(self) -> list[Condition]:
        return [c for c in self.conditions if not c.passed]


def _lattice_class(X: SurfaceModel, L: "NumClass | Sequence[int]") -> NumClass:
    form = X.require_lattice()
    L = L if isinstance(L, NumClass) else NumClass(tuple(L))
    if len(L) != form.rank:
        raise InvalidClassError(f"L has {len(L)} coordinates; {X.descriptor} lattice has rank {form.rank}")
    return L


def half_pencils(X: SurfaceModel, L: NumClass, degree: int) -> list[NumClass]:
    """Primitive isotropic classes E with L.E == degree (Enriques half-pencils)."""
    form = X.require_lattice()
    return [E for E in enumerate_classes(form, L, degree, 0, exact=True) if E.is_primitive()]


def validate_polarization(X: SurfaceModel, L: "NumClass | Sequence[int]") -> PolarizationReport:
    L = _lattice_class(X, L)
    form = X.form
    conds: list[Condition] = []
    if X.kind == ENRIQUES:
        Lsq = square(L, form)
        e1 = Lsq > 0 and Lsq % 2 == 0
        conds.append(Condition("E1", "L² > 0 and L² even", e1, f"L^2 = {Lsq}"))
        if e1:
            witness = half_pencils(X, L, 1)
            detail = (
                f"witness E = {witness[0]} with L.E = 1" if witness
                else "no primitive isotropic E with L.E = 1; pencils P = 2E have L.P >= 4"
            )
            conds.append(Condition("E2", "L·E ≥ 2 for every primitive isotropic E", not witness, detail))
        else:
            conds.append(Condition("E2", "L·E ≥ 2 for every primitive isotropic E", False, "not evaluated: E1 failed"))
    elif X.kind == BIELLIPTIC:
        cfg = X.config
        a, b = L.coords
        conds.append(Condition("B1", "a > 0 and b > 0", a > 0 and b > 0, f"(a, b) = ({a}, {b})"))
        degrees = [intersect(L, cfg.reduced_fiber(m), form) for m in cfg.multiplicities]
        bad = [(m, d) for m, d in zip(cfg.multiplicities, degrees) if d < 2]
        detail = ", ".join(f"m={m}: L.A_i={d}" for m, d in zip(cfg.multiplicities, degrees))
        conds.append(Condition("B2", "(μ/m_i)·b ≥ 2", not bad, detail))
        lb = intersect(L, cfg.psi_fiber, form)
        conds.append(Condition("B3", "(γ/μ)·a ≥ 2", lb >= 2, f"L.B = {lb}"))
    else:
        raise DomainError(f"no numerical polarization check for {X.kind}")
    return PolarizationReport(tuple(conds), all(c.passed for c in conds))


def movable_families(
    X: SurfaceModel,
    L: "NumClass | Sequence[int]",
    *,
    unsafe: bool = False,
    include_big: bool = True,
    max_degree: Optional[int] = None,
) -> list[MovableClassDescriptor]:
    """Every movable-family candidate M with 0 < L.M < L^2.

    Pencil and fiber families are kept only when h^0 >= 2.  Big classes
    (M^2 > 0) are all kept: the cone of movable classes is over-approximated
    by the whole positive window.  ``max_degree`` narrows the window further.
    """
    L = _lattice_class(X, L)
    form = X.form
    if not unsafe:
        report = validate_polarization(X, L)
        if not report.hypotheses_ok:
            failed = "; ".join(f"{c.code}: {c.statement}" for c in report.failed())
            raise HypothesisError(f"polarization check failed ({failed})")
    Lsq = square(L, form)
    if Lsq <= 0:
        raise HypothesisError("movable families need L^2 > 0")
    top = Lsq - 1 if max_degree is None else min(Lsq - 1, max_degree)
    out: list[tuple[tuple, MovableClassDescriptor]] = []
    if top < 1:
        return []
    if include_big:
        for M in enumerate_positive_classes(form, L, top):
            d = MovableClassDescriptor(BIG, M, X.chi + square(M, form) // 2)
            out.append(((0, intersect(L, M, form), M.coords), d))
    if X.kind == ENRIQUES and top >= 2:
        for E in enumerate_isotropic_primitive(form, L, top // 2):
            P = 2 * E
            deg = intersect(L, P, form)
            k = 1
            while k * deg <= top:
                out.append(((1, k * deg, P.coords, k), MovableClassDescriptor(PENCIL, k * P, k + 1, k, P)))
                k += 1
    elif X.kind == BIELLIPTIC:
        cfg = X.config
        dA = intersect(L, cfg.phi_fiber, form)
        a = 1
        while dA > 0 and a * dA <= top:
            out.append(((2, a * dA, a), MovableClassDescriptor(PHI, a * cfg.phi_fiber, a + 1, a)))
            a += 1
        dB = intersect(L, cfg.psi_fiber, form)
        d = 2
        while dB > 0 and d * dB <= top:
            out.append(((3, d * dB, d), MovableClassDescriptor(PSI, d * cfg.psi_fiber, d, d)))
            d += 1
    out.sort(key=lambda kv: kv[0])
    return [d for _, d in out]
