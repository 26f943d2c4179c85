"""Translation on Z with counting measure, the classical case of the ratio theorem."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from ..averaging import ZeroDenominator


def _clean(f: Mapping) -> dict:
    return {int(k): Fraction(v) for k, v in f.items() if Fraction(v) != 0}


@dataclass(frozen=True)
class HopfSystem:
    """Finitely supported ``phi``, ``psi`` on Z; ``T^h x = x + h``; ``F_n = [-n, n]``."""

    phi: dict
    psi: dict

    def __post_init__(self):
        object.__setattr__(self, "phi", _clean(self.phi))
        object.__setattr__(self, "psi", _clean(self.psi))
        if sum(self.psi.values()) == 0:
            raise ZeroDenominator("sum of psi is zero")

    def _f(self, which: str) -> dict:
        if which not in ("phi", "psi"):
            raise ValueError(which)
        return self.phi if which == "phi" else self.psi

    def S(self, which: str, F: Union[int, Iterable[int]], x: int) -> Fraction:
        """``sum over h in F of f(x + h)``; an int F means the interval ``[-F, F]``."""
        f = self._f(which)
        if isinstance(F, int):
            return sum((v for s, v in f.items() if abs(s - x) <= F), Fraction(0))
        return sum((f.get(x + h, Fraction(0)) for h in set(F)), Fraction(0))

    def R(self, F, x: int) -> Fraction:
        den = self.S("psi", F, x)
        if den == 0:
            raise ZeroDenominator(f"S(psi) vanishes at x={x}")
        return self.S("phi", F, x) / den

    @property
    def limit(self) -> Fraction:
        return sum(self.phi.values(), Fraction(0)) / sum(self.psi.values(), Fraction(0))

    def absorption_radius(self, x: int) -> int:
        """Smallest n with both supports inside ``x + [-n, n]``."""
        pts = list(self.phi) + list(self.psi)
        return max((abs(s - x) for s in pts), default=0)

    def ball_sum(self, which: str, x: int):
        return lambda rho: self.S(which, rho, x)

    def shifted(self, t: int) -> "HopfSystem":
        return HopfSystem({s + t: v for s, v in self.phi.items()}, {s + t: v for s, v in self.psi.items()})


def hopf_system(phi: Mapping, psi: Mapping) -> HopfSystem:
    return HopfSystem(dict(phi), dict(psi))
