"""Numerical invariants of the syzygy bundle M_L.

From ``0 -> M_L -> H^0(L) (x) O_X -> L -> 0``: rank h^0(L) - 1, c1 = -L,
c2 = L^2.  Slopes are exact rationals; sign tests use integer
cross-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateError, InvalidPolarizationError, UnsupportedError
from .lattice import NumClass, square
from .surface import BIELLIPTIC, ENRIQUES, SurfaceModel


@dataclass(frozen=True)
class SyzygyData:
    rank: int
    c1: NumClass
    c2: int
    h0L: int

    @property
    def slope(self) -> Fraction:
        return Fraction(-self.c2, self.rank)

    @property
    def slope_num(self) -> int:
        return self.slope.numerator

    @property
    def slope_den(self) -> int:
        return self.slope.denominator

    @property
    def degenerate(self) -> bool:
        """Rank one: there is no r with 0 < r < rank."""
        return self.rank == 1

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "c1": list(self.c1.coords),
            "c2": self.c2,
            "h0L": self.h0L,
            "slope": [self.slope_num, self.slope_den],
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyzygyData":
        return cls(d["rank"], NumClass(tuple(d["c1"])), d["c2"], d["h0L"])


def h0_polarization(chi: int, Lsq: int) -> int:
    """h^0(L) = chi(L) = chi(X) + L^2/2 for an ample globally generated L."""
    if Lsq <= 0 or Lsq % 2:
        raise InvalidPolarizationError(f"L^2 must be positive and even, got {Lsq}")
    return chi + Lsq // 2


def syzygy_data(X: SurfaceModel, L: "NumClass | Sequence[int]") -> SyzygyData:
    L = L if isinstance(L, NumClass) else NumClass(tuple(L))
    Lsq = square(L, X.require_lattice())
    h0 = h0_polarization(X.chi, Lsq)
    if h0 <= 1:
        raise DegenerateError(f"h^0(L) = {h0}: M_L has rank {h0 - 1}")
    return SyzygyData(h0 - 1, -L, Lsq, h0)


def slope_exterior_twist(data: SyzygyData, r: int, LdotN: int) -> Fraction:
    """mu_L(wedge^r M_L (x) N) = -r L^2 / rank + L.N."""
    return Fraction(-r * data.c2, data.rank) + LdotN


def twist_nonpositive(data: SyzygyData, r: int, LdotN: int) -> bool:
    """Integer form of ``slope_exterior_twist(...) <= 0``."""
    return r * data.c2 >= data.rank * LdotN


def moduli_dimension_from_square(X: SurfaceModel, Lsq: int, use_closed_form: bool = False) -> int:
    if use_closed_form:
        if Lsq <= 0 or Lsq % 2:
            raise InvalidPolarizationError(f"L^2 must be positive and even, got {Lsq}")
        if X.kind == ENRIQUES:
            return Lsq * Lsq // 4 + Lsq + 1
        if X.kind == BIELLIPTIC:
            return Lsq * Lsq // 2
        raise UnsupportedError(f"no closed form for {X.kind} surfaces")
    r = h0_polarization(X.chi, Lsq) - 1
    c2 = Lsq
    c1sq = Lsq
    return 2 * r * c2 - (r - 1) * c1sq - (r * r - 1) * X.chi


def moduli_dimension(X: SurfaceModel, L: "NumClass | Sequence[int]", use_closed_form: bool = False) -> int:
    """Expected dimension 2 r c2 - (r-1) c1^2 - (r^2-1) chi at [M_L], or its closed form."""
    data = syzygy_data(X, L)
    return moduli_dimension_from_square(X, data.c2, use_closed_form)
