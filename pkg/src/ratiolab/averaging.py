"""The block-arithmetic averaging subsequence and finite-horizon density statistics."""
from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence


class ZeroDenominator(ArithmeticError):
    """The normalizing sum of a ratio vanished."""


class IndexSequence:
    """Memoized ``n(i)``, ``N(m)``, ``L(m)``.

    Blocks are ``J_m = [2^(m-1), 2^m)``. ``n(1) = 1``; for ``m >= 2``,
    ``N(m) = n(2^(m-1) - 1)``, ``L(m) = 2^(m-1) * 3 N(m)`` and
    ``n(2^(m-1) + i) = L(m) + 3 i N(m)`` for ``0 <= i < 2^(m-1)``.
    By convention ``N(1) = n(0) = 0`` (block 1 holds the single index 1).
    """

    def __init__(self):
        self._n = {1: 1}
        self._lock = threading.Lock()

    @staticmethod
    def block(i: int) -> int:
        if i < 1:
            raise ValueError("indices start at 1")
        return i.bit_length()

    def N(self, m: int) -> int:
        if m < 1:
            raise ValueError("blocks start at 1")
        if m == 1:
            return 0
        return self.n(2 ** (m - 1) - 1)

    def L(self, m: int) -> Optional[int]:
        if m == 1:
            return None
        return 2 ** (m - 1) * 3 * self.N(m)

    def n(self, i: int) -> int:
        got = self._n.get(i)
        if got is not None:
            return got
        m = self.block(i)
        # fill blocks in order so N(m) is always available
        with self._lock:
            for mm in range(2, m + 1):
                start = 2 ** (mm - 1)
                if start in self._n and (2 ** mm - 1) in self._n:
                    continue
                Nm = self._n[start - 1]
                Lm = start * 3 * Nm
                for j in range(start):
                    self._n[start + j] = Lm + 3 * j * Nm
        return self._n[i]

    def block_data(self, m: int) -> tuple[tuple[int, int], int, Optional[int]]:
        """``((start, stop), N(m), L(m))`` with ``J_m = [start, stop)``."""
        return (2 ** (m - 1), 2**m), self.N(m), self.L(m)


DEFAULT_INDEX = IndexSequence()


def index_n(i: int) -> int:
    return DEFAULT_INDEX.n(i)


@dataclass(frozen=True)
class AveragingSets:
    """Radii of ``F_i``, ``F_i^+`` and the annulus ``∂*F_i = B_outer minus B_inner``."""

    i: int
    m: int
    F: int
    F_plus: int
    boundary_outer: int
    boundary_inner: int

    def boundary_contains(self, length: int) -> bool:
        return self.boundary_inner < length <= self.boundary_outer


def averaging_sets(i: int, seq: IndexSequence = DEFAULT_INDEX) -> AveragingSets:
    m = seq.block(i)
    n, N = seq.n(i), seq.N(m)
    # strict inner radius: the annulus excludes B_{n-N} itself
    return AveragingSets(i, m, n, n + N, n + N, n - N)


def nesting_holds(i: int, seq: IndexSequence = DEFAULT_INDEX) -> bool:
    """``F_{i-1}^+`` sits inside the ball removed from ``∂*F_i``."""
    prev, cur = averaging_sets(i - 1, seq), averaging_sets(i, seq)
    return prev.F_plus <= cur.boundary_inner


def avgseq_rows(i_max: int, seq: IndexSequence = DEFAULT_INDEX) -> list[dict]:
    rows = []
    for i in range(1, i_max + 1):
        s = averaging_sets(i, seq)
        rows.append(
            {
                "i": i,
                "m": s.m,
                "n": s.F,
                "N": seq.N(s.m),
                "L": seq.L(s.m),
                "F_plus": s.F_plus,
                "boundary_inner": s.boundary_inner,
                "boundary_outer": s.boundary_outer,
                "nesting": True if i == 1 else nesting_holds(i, seq),
            }
        )
    return rows


def avgseq_csv(i_max: int) -> str:
    buf = io.StringIO()
    rows = avgseq_rows(i_max)
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def boundary_ratio_phi_i(ball_sum: Callable[[int], Fraction], i: int, seq: IndexSequence = DEFAULT_INDEX) -> Fraction:
    """``S over ∂*F_i`` divided by ``S over F_{i-1}^+``.

    ``ball_sum(rho)`` returns the exact sum of the function over ``B_rho`` applied
    at the fixed base point. The annulus sum is ``ball_sum(outer) - ball_sum(inner)``.
    """
    if i < 2:
        raise ValueError("the boundary statistic needs i >= 2")
    cur, prev = averaging_sets(i, seq), averaging_sets(i - 1, seq)
    den = Fraction(ball_sum(prev.F_plus))
    if den == 0:
        raise ZeroDenominator(f"S over F_{i - 1}^+ vanishes")
    num = Fraction(ball_sum(cur.boundary_outer)) - Fraction(ball_sum(cur.boundary_inner))
    return num / den


# -- density ------------------------------------------------------------------


@dataclass(frozen=True)
class DensityEstimate:
    horizon: int
    hits: int
    estimate: Fraction
    running_max: Fraction
    running_max_at: int
    exact: Optional[Fraction] = None

    def __post_init__(self):
        if not 0 <= self.estimate <= 1:
            raise ValueError("estimate out of range")


def _indicator_values(indicator, N: int) -> list[bool]:
    if callable(indicator):
        return [bool(indicator(n)) for n in range(1, N + 1)]
    vals = [bool(x) for x in list(indicator)[:N]]
    if len(vals) < N:
        raise ValueError("indicator sequence shorter than the horizon")
    return vals


def upper_density(indicator, N: int, exact: Optional[Fraction] = None) -> DensityEstimate:
    """``|I ∩ [1, N]| / N`` plus the running max over ``M <= N``.

    ``indicator`` is a predicate on positive integers or a 0/1 sequence indexed
    from 1.
    """
    if N < 1:
        raise ValueError("horizon must be positive")
    vals = _indicator_values(indicator, N)
    hits, best, best_at = 0, Fraction(0), 1
    for M, v in enumerate(vals, start=1):
        hits += v
        q = Fraction(hits, M)
        if q > best:
            best, best_at = q, M
    return DensityEstimate(N, hits, Fraction(hits, N), best, best_at, exact)


def negligible(hits: int, N: int) -> bool:
    """Finite-horizon stand-in for "density zero": at most ``N^(2/3)`` hits."""
    return hits**3 <= N * N


@dataclass(frozen=True)
class DlsResult:
    value: Fraction
    profile: tuple  # (threshold, hits, estimate) per grid point


def dls(values: Sequence, horizon: int, grid: Sequence) -> DlsResult:
    """Smallest grid threshold ``t`` whose superlevel set ``{n : a_n > t}`` is
    negligible up to ``horizon``.

    If no grid point qualifies the top of the grid is returned together with the
    profile, which then shows every threshold as non-negligible.
    """
    if not grid:
        raise ValueError("empty threshold grid")
    grid = [Fraction(t) for t in grid]
    if grid != sorted(grid):
        raise ValueError("grid must be sorted")
    vals = [Fraction(a) for a in list(values)[:horizon]]
    if len(vals) < horizon:
        raise ValueError("sequence shorter than the horizon")
    profile, value = [], None
    for t in grid:
        hits = sum(1 for a in vals if a > t)
        profile.append((t, hits, Fraction(hits, horizon)))
        if value is None and negligible(hits, horizon):
            value = t
    if value is None:
        value = grid[-1]
    return DlsResult(value, tuple(profile))
