"""Translate families, multiplicity and incremental sequences.

A family is a list of ``(radius, center)`` pairs standing for the sets
``F_radius * center`` (set on the left, center on the right). With balls as the
``F_n`` membership is ``|x center^-1| <= radius`` everywhere in this module.
"""
from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional, Sequence

from .groups import (
    BudgetExceeded,
    FiniteSubset,
    GroupContext,
    ball,
    central_power,
    central_powers_in_ball,
    heisenberg,
)


@dataclass(frozen=True)
class TranslateFamily:
    """An ordered family ``{F_{n_i} g_i}``.

    ``provider`` maps a radius index to an explicit FiniteSubset. When it is
    None the sets are word-metric balls and membership is implicit.
    """

    members: tuple
    ctx: GroupContext
    provider: Optional[Callable[[int], FiniteSubset]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.members:
            raise ValueError("family must be non-empty")
        object.__setattr__(self, "members", tuple((int(n), g) for n, g in self.members))
        for n, g in self.members:
            if n < 0:
                raise ValueError(f"negative radius {n}")
            self.ctx.check(g)

    def __len__(self):
        return len(self.members)

    @property
    def radii(self):
        return [n for n, _ in self.members]

    @property
    def centers(self):
        return [g for _, g in self.members]

    def base_set(self, n: int) -> FiniteSubset:
        if self.provider is not None:
            return self.provider(n)
        return ball(self.ctx, n)

    def contains(self, idx: int, x) -> bool:
        """Is ``x`` in member ``idx``?"""
        n, g = self.members[idx]
        if self.provider is None:
            return self.ctx.translated_ball_contains(n, g, x)
        return self.ctx._mul(x, self.ctx.invert(g)) in self.provider(n)

    def member_set(self, idx: int) -> set:
        n, g = self.members[idx]
        mul = self.ctx._mul
        return {mul(h, g) for h in self.base_set(n).elements}

    def sub(self, indices: Sequence[int]) -> "TranslateFamily":
        return TranslateFamily(tuple(self.members[i] for i in indices), self.ctx, self.provider)


@dataclass(frozen=True)
class MultiplicityReport:
    multiplicity: int
    witness: object
    histogram: Optional[dict] = None


@dataclass(frozen=True)
class Violation:
    """First failure of incrementality: member ``j`` against earlier member ``i`` (1-based)."""

    j: int
    i: int
    reason: str


@dataclass(frozen=True)
class IncrementalSequence:
    family: TranslateFamily
    certificate: dict

    @property
    def members(self):
        return self.family.members


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a witness search. ``status`` is ``found``, ``exhausted`` or ``budget``.

    ``exhausted`` means the whole candidate space was searched without success;
    it is evidence about that space only, not a covering-property certificate.
    """

    status: str
    sequence: Optional[IncrementalSequence] = None
    nodes: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"


# -- multiplicity ---------------------------------------------------------------


def multiplicity_at(fam: TranslateFamily, g) -> int:
    return sum(1 for i in range(len(fam)) if fam.contains(i, g))


def multiplicity(fam: TranslateFamily, histogram: bool = False, budget: Optional[int] = None) -> MultiplicityReport:
    """Maximum, over the union of the members, of the number of members containing a point.

    The witness is the smallest point (canonical tuple order) reaching the max.
    """
    budget = fam.ctx.budget if budget is None else budget
    counts: Counter = Counter()
    for i in range(len(fam)):
        counts.update(fam.member_set(i))
        if len(counts) > budget:
            bound = max(counts.values())
            raise BudgetExceeded(f"union exceeds budget; multiplicity >= {bound}", size=len(counts))
    best = max(counts.values())
    witness = min(x for x, c in counts.items() if c == best)
    return MultiplicityReport(best, witness, dict(counts) if histogram else None)


# -- incrementality -----------------------------------------------------------


def is_incremental(fam: TranslateFamily) -> tuple[bool, Optional[Violation]]:
    radii = fam.radii
    for j in range(1, len(fam)):
        if radii[j] > radii[j - 1]:
            return False, Violation(j + 1, j, "radius increases")
    for j in range(1, len(fam)):
        gj = fam.members[j][1]
        for i in range(j):
            if fam.contains(i, gj):
                return False, Violation(j + 1, i + 1, "center covered by earlier member")
    return True, None


def _certify(fam: TranslateFamily, **extra) -> IncrementalSequence:
    ok, viol = is_incremental(fam)
    e = fam.ctx.identity
    cert = {
        "incremental": ok,
        "violation": None if viol is None else [viol.j, viol.i, viol.reason],
        "multiplicity_at_identity": multiplicity_at(fam, e),
    }
    cert.update(extra)
    return IncrementalSequence(fam, cert)


def greedy_incremental(fam: TranslateFamily) -> IncrementalSequence:
    """Keep the first member, then each next member whose center is not yet covered.

    Because every set contains the identity, a skipped center is covered by a
    kept member, so the output covers all input centers.
    """
    radii = fam.radii
    if any(radii[i] < radii[i + 1] for i in range(len(radii) - 1)):
        raise ValueError("family must be sorted by non-increasing radius")
    e = fam.ctx.identity
    for n in set(radii):
        if e not in fam.base_set(n):
            raise ValueError(f"set of radius {n} does not contain the identity")
    kept: list[int] = []
    for j in range(len(fam)):
        g = fam.members[j][1]
        if not any(fam.contains(i, g) for i in kept):
            kept.append(j)
    out = fam.sub(kept)
    seq = _certify(out, source_indices=kept)
    covers = all(any(out.contains(i, g) for i in range(len(out))) for g in fam.centers)
    seq.certificate["covers_input"] = covers
    return seq


def covering_subfamilies(fam: TranslateFamily) -> list[tuple]:
    """All index subsets whose union covers every center (exhaustive, small families only)."""
    k = len(fam)
    out = []
    centers = fam.centers
    for size in range(1, k + 1):
        for sub in combinations(range(k), size):
            if all(any(fam.contains(i, g) for i in sub) for g in centers):
                out.append(sub)
    return out


# -- witness search -------------------------------------------------------------


def incremental_witness_search(ctx: GroupContext, radii: Sequence[int], k: int, budget: int = 200_000) -> SearchResult:
    """Depth-first search for an incremental sequence whose first ``k`` members
    all contain the identity.

    Member i uses radius ``radii[i]`` (must be non-increasing). Candidates for
    the i-th center are ``B_{radii[i]}`` (exactly the centers whose translate
    contains the identity), tried longest first and then in canonical order.
    """
    radii = list(radii)[:k]
    if len(radii) < k:
        raise ValueError("need at least k radii")
    if any(radii[i] < radii[i + 1] for i in range(k - 1)):
        raise ValueError("radii must be non-increasing")
    cands = {}
    for r in set(radii):
        B = ball(ctx, r)
        cands[r] = sorted(B.elements, key=lambda g, L=B.lengths: (-L[g], g))

    nodes = 0
    chosen: list = []

    def covered(g) -> bool:
        return any(ctx.translated_ball_contains(radii[i], c, g) for i, c in enumerate(chosen))

    def dfs(depth: int) -> Optional[bool]:
        nonlocal nodes
        if depth == k:
            return True
        for g in cands[radii[depth]]:
            nodes += 1
            if nodes > budget:
                return None
            if covered(g):
                continue
            chosen.append(g)
            res = dfs(depth + 1)
            if res is None or res:
                return res
            chosen.pop()
        return False

    res = dfs(0)
    if res is None:
        return SearchResult("budget", nodes=nodes)
    if not res:
        return SearchResult("exhausted", nodes=nodes)
    fam = TranslateFamily(tuple(zip(radii, chosen)), ctx)
    seq = _certify(fam, route="search")
    if not seq.certificate["incremental"] or seq.certificate["multiplicity_at_identity"] < k:
        raise AssertionError("search produced an uncertified sequence")
    return SearchResult("found", seq, nodes)


# -- Heisenberg ---------------------------------------------------------------


def maximal_gap(M) -> Optional[tuple[int, int]]:
    """Leftmost pair ``s < t`` of consecutive members of ``M`` maximizing ``t - s``."""
    xs = sorted(M)
    best = None
    for s, t in zip(xs, xs[1:]):
        if best is None or t - s > best[1] - best[0]:
            best = (s, t)
    return best


def radius_schedule(r0: int = 1):
    r = r0
    while True:
        yield r
        r = 2 * r + 1


def central_gap_family(ctx: GroupContext, k: int, r0: int = 1, r_max: int = 31) -> TranslateFamily:
    """The central-gap recipe: balls ``B_{r(i)}`` centered at ``c^{s - t}`` for the
    maximal gap ``(s, t)`` of ``M_{r(i)}``, with ``r(i+1)`` taken from the schedule
    as the first radius whose gap exceeds ``r(i)^2`` (or the next one if none does
    up to ``r_max``). Members are ordered with radii non-increasing.
    """
    rs = []
    sched = radius_schedule(r0)
    r = next(sched)
    rs.append(r)
    while len(rs) < k:
        prev = rs[-1]
        choice = None
        for r in sched:
            if r > r_max:
                break
            s, t = maximal_gap(central_powers_in_ball(r))
            if t - s > prev * prev:
                choice = r
                break
        if choice is None:
            # growth condition unattainable in range; keep the schedule's next radius
            choice = 2 * prev + 1
        rs.append(choice)
        sched = radius_schedule(2 * choice + 1)
    members = []
    for r in sorted(rs, reverse=True):
        s, t = maximal_gap(central_powers_in_ball(r))
        members.append((r, central_power(s - t)))
    return TranslateFamily(tuple(members), ctx)


def heisenberg_incremental(k: int, ctx: Optional[GroupContext] = None, r_max: int = 31, budget: int = 200_000) -> IncrementalSequence:
    """A verified incremental sequence of k balls in the Heisenberg group, all
    containing the identity.

    The central-gap recipe is tried first; each candidate is verified and the
    route taken is recorded in the certificate. When the recipe does not verify,
    equal radii from the schedule ``r <- 2r + 1`` are handed to the certified
    search.
    """
    ctx = ctx or heisenberg()
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        fam = TranslateFamily(((0, ctx.identity),), ctx)
        return _certify(fam, route="trivial")
    tried = []
    try:
        fam = central_gap_family(ctx, k)
        seq = _certify(fam, route="central-gap")
        c = seq.certificate
        if c["incremental"] and c["multiplicity_at_identity"] == k:
            return seq
        tried.append("central-gap")
    except BudgetExceeded:
        tried.append("central-gap(budget)")
    for r in radius_schedule(1):
        if r > r_max:
            break
        res = incremental_witness_search(ctx, [r] * k, k, budget=budget)
        if res.found:
            seq = res.sequence
            if multiplicity_at(seq.family, ctx.identity) == k:
                seq.certificate["route"] = "search"
                seq.certificate["rejected_routes"] = tried
                seq.certificate["radius"] = r
                return seq
        tried.append(f"search(r={r}):{res.status}")
    raise BudgetExceeded(f"no verified sequence of length {k}; tried {tried}")


# -- almost central, bounded radius ---------------------------------------------


def almost_central_expander(ctx: GroupContext, g, n_max: int, samples: int = 200, rng=None) -> int:
    """``m = |g|``, checked on samples: ``x in B_n g`` implies ``x in B_m B_n``.

    With balls ``B_m B_n = B_{m+n}``, so membership reduces to ``|x| <= m + n``.
    """
    import random

    rng = rng or random.Random(0)
    m = ctx.word_length(g)
    for n in range(n_max + 1):
        B = ball(ctx, n).sorted()
        pts = B if len(B) <= samples else rng.sample(B, samples)
        for h in pts:
            x = ctx._mul(h, g)
            if ctx.word_length(x) > m + n:
                raise AssertionError(f"metric inconsistency: {h}*{g} has length > {m}+{n}")
    return m


def besicovitch_bound_constant(c: int, c1, c2) -> Fraction:
    """``6^c c2 / c1``, exact."""
    c1, c2 = Fraction(c1), Fraction(c2)
    if c < 0 or c1 <= 0 or c2 <= 0:
        raise ValueError("need c >= 0 and positive c1, c2")
    if c == 0:
        warnings.warn("degenerate exponent c = 0", RuntimeWarning, stacklevel=2)
    return Fraction(6) ** c * c2 / c1


def verify_bounded_radius_multiplicity(seq, N: int, growth: Optional[tuple] = None) -> tuple[bool, int, Fraction]:
    """Check measured multiplicity against the bounded-radius constant.

    Returns ``(ok, measured, bound)``. Growth constants come from ``growth`` or
    the family's context.
    """
    fam = seq.family if isinstance(seq, IncrementalSequence) else seq
    for n in fam.radii:
        if not N <= n <= 2 * N:
            raise ValueError(f"radius {n} outside [{N}, {2 * N}]")
    growth = growth or fam.ctx.growth
    if growth is None:
        raise ValueError("growth constants are required")
    bound = besicovitch_bound_constant(*growth)
    measured = multiplicity(fam).multiplicity
    return measured <= bound, measured, bound


# -- serialization ------------------------------------------------------------------


def _jsonable(g):
    if isinstance(g, tuple):
        return [_jsonable(x) for x in g]
    return g


def family_to_dict(seq) -> dict:
    fam = seq.family if isinstance(seq, IncrementalSequence) else seq
    cert = dict(seq.certificate) if isinstance(seq, IncrementalSequence) else {}
    ok, _ = is_incremental(fam)
    rep = multiplicity(fam)
    return {
        "group": fam.ctx.kind,
        "generators": [_jsonable(a) for a in fam.ctx.generators],
        "members": [{"radius": n, "center": _jsonable(g)} for n, g in fam.members],
        "certificate": {
            "incremental": ok,
            "multiplicity": rep.multiplicity,
            "witness": _jsonable(rep.witness),
            **{k: v for k, v in cert.items() if k not in ("incremental",)},
        },
    }


def family_to_json(seq) -> str:
    return json.dumps(family_to_dict(seq), sort_keys=True)
