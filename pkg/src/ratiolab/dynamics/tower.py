"""Exact cutting-and-stacking stages on the real line.

Every allocated element ``g`` owns one half-open interval ``[a_g, a_g + r)``
of the common stage length ``r`` and carries constant values of ``phi``, ``psi``
and the index function on it. ``T^h`` maps ``I_g`` onto ``I_{hg}`` by
translation, so a sum ``S_F(f, x)`` for ``x`` in ``I_u`` is the sum of ``f`` over
allocated ``w`` with ``w u^-1`` in ``F``. Elements that were never allocated
carry ``phi = psi = 0`` and are not stored.
"""
from __future__ import annotations

import bisect
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from ..averaging import ZeroDenominator
from ..groups import FiniteSubset, GroupContext, heisenberg
from .provider import HeisenbergProvider, verify_conditions


class IntervalCollision(RuntimeError):
    pass


class PlanRejected(RuntimeError):
    pass


class UndefinedTranslate(LookupError):
    pass


@dataclass(frozen=True)
class Piece:
    a: Fraction
    phi: Fraction
    psi: Fraction
    idx: Optional[int]


@dataclass(frozen=True)
class TowerStage:
    n: int
    r: Fraction
    pieces: dict  # element -> Piece
    cursor: Fraction
    ctx: GroupContext = field(default_factory=heisenberg, compare=False)
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    # -- lookup

    def _sorted_starts(self):
        got = self._index.get("starts")
        if got is None:
            items = sorted((p.a, g) for g, p in self.pieces.items())
            got = ([a for a, _ in items], [g for _, g in items])
            self._index["starts"] = got
        return got

    def element_at(self, x) -> object:
        """The element whose interval contains the point ``x``."""
        x = Fraction(x)
        starts, els = self._sorted_starts()
        i = bisect.bisect_right(starts, x) - 1
        if i < 0 or x >= starts[i] + self.r:
            raise UndefinedTranslate(f"{x} lies in no interval")
        return els[i]

    def unit_elements(self) -> list:
        """Elements whose intervals lie in ``[0, 1)``, left to right."""
        starts, els = self._sorted_starts()
        return [g for a, g in zip(starts, els) if 0 <= a < 1]

    def _abelian_index(self):
        got = self._index.get("ab")
        if got is None:
            items = sorted((g[0], g[2], g) for g in self.pieces)
            got = ([k for k, _, _ in items], items)
            self._index["ab"] = got
        return got

    def candidates(self, u, radius: int) -> list:
        """Allocated ``w`` that may satisfy ``|w u^-1| <= radius``.

        For the Heisenberg group the abelianization ``(k, n)`` is 1-Lipschitz
        in the word metric, so only ``w`` with ``|dk| + |dn| <= radius`` survive.
        """
        if self.ctx.kind != "heis":
            return list(self.pieces)
        ks, items = self._abelian_index()
        lo = bisect.bisect_left(ks, u[0] - radius)
        hi = bisect.bisect_right(ks, u[0] + radius)
        return [w for k, n, w in items[lo:hi] if abs(k - u[0]) + abs(n - u[2]) <= radius]

    # -- partial action

    def translate(self, h, x) -> Fraction:
        """``T^h x``; raises UndefinedTranslate when ``h g`` has no interval."""
        x = Fraction(x)
        g = self.element_at(x)
        hg = self.ctx._mul(h, g)
        if hg not in self.pieces:
            raise UndefinedTranslate(f"{hg} not allocated")
        return self.pieces[hg].a + (x - self.pieces[g].a)

    # -- norms

    def norm(self, which: str) -> Fraction:
        return sum((abs(getattr(p, which)) for p in self.pieces.values()), Fraction(0)) * self.r

    def integral(self, which: str) -> Fraction:
        return sum((getattr(p, which) for p in self.pieces.values()), Fraction(0)) * self.r

    @property
    def i_star(self) -> int:
        return max(p.idx for p in self.pieces.values() if p.idx is not None)

    def check_invariants(self) -> list[str]:
        bad = []
        starts, els = self._sorted_starts()
        for i in range(len(starts) - 1):
            if starts[i] + self.r > starts[i + 1]:
                bad.append(f"intervals of {els[i]} and {els[i + 1]} overlap")
                break
        if starts and starts[-1] + self.r > self.cursor:
            bad.append("cursor is not past all intervals")
        if not self.norm("phi") < 2:
            bad.append("||phi||_1 >= 2")
        if not self.norm("psi") < 2:
            bad.append("||psi||_1 >= 2")
        return bad

    # -- serialization

    def snapshot(self) -> dict:
        def q(x):
            x = Fraction(x)
            return [x.numerator, x.denominator]

        pieces = []
        for a, g in zip(*self._sorted_starts()):
            p = self.pieces[g]
            pieces.append(
                {
                    "element": list(g),
                    "interval": [q(a), q(a + self.r)],
                    "phi": q(p.phi),
                    "psi": q(p.psi),
                    "idx": p.idx,
                }
            )
        return {
            "n": self.n,
            "r_n": q(self.r),
            "pieces": pieces,
            "norms": {"phi_l1": q(self.norm("phi")), "psi_l1": q(self.norm("psi"))},
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))


def stage_init(ctx: Optional[GroupContext] = None) -> TowerStage:
    ctx = ctx or heisenberg()
    one = Fraction(1)
    return TowerStage(1, one, {ctx.identity: Piece(Fraction(0), one, one, 1)}, one, ctx)


# -- sums -------------------------------------------------------------------------


def eval_S(stage: TowerStage, F: Union[int, FiniteSubset], which: str, x, strict: bool = False) -> tuple[Fraction, bool]:
    """``S_F(f, x)`` with F a ball radius or an explicit finite set.

    Returns ``(value, defined)``. Translates to unallocated elements contribute
    0; ``defined`` turns False for them only in strict mode with an explicit F
    (a ball radius is never enumerated).
    """
    if which not in ("phi", "psi"):
        raise ValueError(which)
    u = stage.element_at(x)
    mul, inv = stage.ctx._mul, stage.ctx.invert
    total, defined = Fraction(0), True
    if isinstance(F, int):
        u_inv = inv(u)
        wl = stage.ctx.word_length
        for w in stage.candidates(u, F):
            val = getattr(stage.pieces[w], which)
            if val and wl(mul(w, u_inv)) <= F:
                total += val
        return total, defined
    for h in F.elements:
        p = stage.pieces.get(mul(h, u))
        if p is None:
            if strict:
                defined = False
            continue
        total += getattr(p, which)
    return total, defined


def eval_R(stage: TowerStage, F, x) -> Fraction:
    num, _ = eval_S(stage, F, "phi", x)
    den, _ = eval_S(stage, F, "psi", x)
    if den == 0:
        raise ZeroDenominator(f"S(psi) vanishes at {x}")
    return num / den


def _distance_profile(stage: TowerStage, u) -> list[tuple[int, Fraction, Fraction]]:
    """``(d(w, u), phi_w, psi_w)`` for every allocated w with nonzero values, by distance."""
    mul, inv, wl = stage.ctx._mul, stage.ctx.invert, stage.ctx.word_length
    u_inv = inv(u)
    rows = [(wl(mul(w, u_inv)), p.phi, p.psi) for w, p in stage.pieces.items() if p.phi or p.psi]
    rows.sort(key=lambda t: t[0])
    return rows


def _sup_over_radii(profile, which: int, k_min: int) -> Fraction:
    """``max over k >= k_min`` of ``|sum of values with distance <= k|``."""
    best, acc, i = Fraction(0), Fraction(0), 0
    while i < len(profile) and profile[i][0] <= k_min:
        acc += profile[i][which]
        i += 1
    best = abs(acc)
    while i < len(profile):
        d = profile[i][0]
        while i < len(profile) and profile[i][0] == d:
            acc += profile[i][which]
            i += 1
        best = max(best, abs(acc))
    return best


# -- transitions ----------------------------------------------------------------


@dataclass(frozen=True)
class StageTransitionPlan:
    Phi: Fraction
    Psi: Fraction
    Phi_local: Fraction
    Psi_local: Fraction
    v: Fraction
    H: tuple
    N: int
    gammas: tuple
    ks: tuple
    sign: int
    info: dict = field(default_factory=dict, compare=False)


def plan_transition(stage: TowerStage, provider=None, sign: Optional[int] = None, max_N: int = 2**24) -> StageTransitionPlan:
    """Choose ``v``, ``N``, ``H`` and the translates for the next stage.

    The sums bounded by ``Phi`` and ``Psi`` are taken over every radius above
    the current maximal index, since the next index is only known to exceed it.
    The values at the current index alone are kept as ``Phi_local``/``Psi_local``.
    """
    provider = provider or HeisenbergProvider(stage.ctx)
    i_star = stage.i_star
    Phi = Psi = Phi_p = Psi_p = Fraction(0)
    for u in stage.unit_elements():
        prof = _distance_profile(stage, u)
        idx = stage.pieces[u].idx
        Phi = max(Phi, _sup_over_radii(prof, 1, i_star + 1))
        Psi = max(Psi, _sup_over_radii(prof, 2, i_star + 1))
        Phi_p = max(Phi_p, abs(sum((f for d, f, _ in prof if d <= idx), Fraction(0))))
        Psi_p = max(Psi_p, abs(sum((s for d, _, s in prof if d <= idx), Fraction(0))))
    v = Phi + Psi
    room = 2 - stage.norm("phi")
    if room <= 0:
        raise PlanRejected("no phi mass left")
    D = sorted(stage.pieces)
    N = 1
    while Fraction(provider.H_size(D, N)) * v * stage.r / N >= room:
        N *= 2
        if N > max_N:
            raise PlanRejected("cut count exceeds max_N")
    res = provider.build(D, D, N, min_radius=i_star + 1)
    if sign is None:
        sign = 1 if (stage.n + 1) % 2 == 1 else -1
    plan = StageTransitionPlan(Phi, Psi, Phi_p, Psi_p, v, res.H, N, res.gammas, res.ks, sign, dict(res.info))
    failures = check_plan(stage, plan)
    if failures:
        raise PlanRejected("; ".join(failures))
    return plan


def check_plan(stage: TowerStage, plan: StageTransitionPlan) -> list[str]:
    bad = []
    if plan.v != plan.Phi + plan.Psi:
        bad.append("v != Phi + Psi")
    if not Fraction(len(plan.H)) * plan.v * stage.r / plan.N < 2 - stage.norm("phi"):
        bad.append("mass budget")
    if len(plan.gammas) != plan.N or len(plan.ks) != plan.N:
        bad.append("wrong number of translates")
    if any(k <= stage.i_star for k in plan.ks):
        bad.append("index not above i*")
    if not set(stage.pieces) <= set(plan.H):
        bad.append("H does not contain the shape")
    bad += verify_conditions(stage.ctx, sorted(stage.pieces), plan.H, plan.gammas, plan.ks)
    return bad


def apply_transition(stage: TowerStage, plan: StageTransitionPlan) -> TowerStage:
    """Cut every interval into ``N`` pieces, send piece j of ``I_g`` to ``g gamma_j``
    and give each element of ``H`` a fresh interval with ``phi = sign v``, ``psi = 0``."""
    mul = stage.ctx._mul
    r_new = stage.r / plan.N
    pieces = {}
    for g, p in stage.pieces.items():
        for j, (gam, k) in enumerate(zip(plan.gammas, plan.ks)):
            h = mul(g, gam)
            if h in pieces:
                raise IntervalCollision(f"{h} assigned twice")
            pieces[h] = Piece(p.a + j * r_new, p.phi, p.psi, k)
    cursor = stage.cursor
    for h in plan.H:
        if h in pieces:
            raise IntervalCollision(f"H element {h} already carries old mass")
        pieces[h] = Piece(cursor, plan.sign * plan.v, Fraction(0), None)
        cursor += r_new
    new = TowerStage(stage.n + 1, r_new, pieces, cursor, stage.ctx)
    bad = new.check_invariants()
    if any(p.idx is not None and p.idx <= stage.i_star for p in pieces.values()):
        bad.append("index did not increase")
    if bad:
        raise IntervalCollision("; ".join(bad))
    return new


def shuffle_stage(stage: TowerStage, copies: int, seed: int, spread: int = 10**6) -> TowerStage:
    """Optional mixing step: cut into ``copies`` pieces placed at seeded random
    far-away translates. Values and indices are inherited; no new mass.

    Not used by the divergence checks.
    """
    rng = random.Random(seed)
    ctx = stage.ctx
    D = sorted(stage.pieces)
    gammas = []
    while len(gammas) < copies:
        k = rng.randrange(-spread, spread + 1)
        n = rng.randrange(-spread, spread + 1)
        gammas.append((k, 0, n) if ctx.kind == "heis" else ctx.identity)
    ks = [stage.i_star + 1] * copies
    # no H here, so only the separation conditions apply
    bad = [f for f in verify_conditions(ctx, D, [], gammas, ks) if f[:3] in ("(b)", "(c)")]
    if bad:
        raise PlanRejected(f"random translates not separated: {bad}")
    mul = ctx._mul
    r_new = stage.r / copies
    pieces = {}
    for g, p in stage.pieces.items():
        for j, gam in enumerate(gammas):
            pieces[mul(g, gam)] = Piece(p.a + j * r_new, p.phi, p.psi, p.idx)
    return TowerStage(stage.n, r_new, pieces, stage.cursor, ctx)


# -- verification ---------------------------------------------------------------


def verify_alternation(history: Sequence[TowerStage]) -> list[str]:
    """Sign of the ratio on every piece of ``[0, 1)`` and growth of the index.

    Stage n must have ``R_{F_{i_n(x)}} >= 1`` for odd n and ``<= -1`` for even n.
    """
    out = []
    for stage in history:
        for u in stage.unit_elements():
            p = stage.pieces[u]
            R = eval_R(stage, p.idx, p.a)
            if stage.n % 2 == 1 and not R >= 1:
                out.append(f"stage {stage.n}: R={R} < 1 at {u}")
            if stage.n % 2 == 0 and not R <= -1:
                out.append(f"stage {stage.n}: R={R} > -1 at {u}")
    for prev, cur in zip(history, history[1:]):
        for u in cur.unit_elements():
            x = cur.pieces[u].a
            old = prev.pieces[prev.element_at(x)].idx
            if not cur.pieces[u].idx > old:
                out.append(f"stage {cur.n}: index did not grow at {x}")
    return out


def check_compatibility(prev: TowerStage, cur: TowerStage, samples: int = 200, seed: int = 0) -> list[str]:
    """Compare ``T^h x`` at consecutive stages where both are defined.

    Samples pairs of old elements ``g, g'`` (so ``h = g' g^-1``) and a point in
    each sub-piece of ``I_g``.
    """
    rng = random.Random(seed)
    ctx = prev.ctx
    els = sorted(prev.pieces)
    N = int(prev.r / cur.r)
    out = []
    for _ in range(samples):
        g, g2 = rng.choice(els), rng.choice(els)
        h = ctx._mul(g2, ctx.invert(g))
        j = rng.randrange(N)
        x = prev.pieces[g].a + j * cur.r + cur.r / 3
        try:
            a = prev.translate(h, x)
            b = cur.translate(h, x)
        except UndefinedTranslate as exc:
            out.append(f"undefined translate: {exc}")
            continue
        if a != b:
            out.append(f"T^{h} at {x}: {a} != {b}")
    return out


def build_tower(stages: int, provider=None, ctx: Optional[GroupContext] = None) -> tuple[list, list]:
    """Stages ``1..stages`` and the plans between them."""
    stage = stage_init(ctx)
    history, plans = [stage], []
    for _ in range(stages - 1):
        plan = plan_transition(stage, provider)
        stage = apply_transition(stage, plan)
        history.append(stage)
        plans.append(plan)
    return history, plans
