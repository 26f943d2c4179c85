"""Translate data for one cutting-and-stacking step, and its verifier.

A provider receives a finite shape ``G`` (used both as the set to keep inside
``H`` and as the set of translates to separate) and a count ``ell`` and returns
``H``, translates ``gamma_1..gamma_ell`` and radii ``k_1..k_ell`` such that

* (d) every ``B_{k_j} g gamma_j`` meets ``H``  (g in G),
* (a) ``H`` avoids every ``G gamma_j``,
* (b) ``G gamma_j`` avoids ``B_{k_j'} g gamma_j'`` for ``j != j'``,
* (c) the ``G gamma_j`` are pairwise disjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..groups import GroupContext, dilate, heisenberg


class ProviderExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class ProviderResult:
    H: tuple
    gammas: tuple
    ks: tuple
    info: dict = field(default_factory=dict, compare=False)


def verify_conditions(ctx: GroupContext, G: Sequence, H: Sequence, gammas: Sequence, ks: Sequence) -> list[str]:
    """Exact check of (d), (a), (b), (c). Returns the names of failed conditions.

    Pairwise separation first tries ``d(x g', y g) >= |x y^-1| - |g'| - |g|`` and
    only falls back to element-by-element tests when that bound is inconclusive.
    """
    mul, inv, wl = ctx._mul, ctx.invert, ctx.word_length
    G = list(G)
    H = list(H)
    failures = []
    glen = {g: wl(g) for g in G}
    R = max(glen.values(), default=0)

    # (c) and (a): plain set arithmetic
    translates = {}
    for j, gam in enumerate(gammas):
        for g in G:
            x = mul(g, gam)
            if x in translates:
                failures.append(f"(c) G*gamma_{translates[x] + 1} meets G*gamma_{j + 1}")
                break
            translates[x] = j
    Hset = set(H)
    for x, j in translates.items():
        if x in Hset:
            failures.append(f"(a) H meets G*gamma_{j + 1}")
            break

    # (d): some h with |h (g gamma)^-1| <= k
    last_hit = None
    for j, (gam, k) in enumerate(zip(gammas, ks)):
        bad = False
        for g in G:
            y_inv = inv(mul(g, gam))
            order = ([last_hit] if last_hit is not None else []) + H
            for h in order:
                if wl(mul(h, y_inv)) <= k:
                    last_hit = h
                    break
            else:
                bad = True
                break
        if bad:
            failures.append(f"(d) B_k g gamma_{j + 1} misses H")
            break

    # (b): d(g' gamma_j', g gamma_j) > k_j' for j != j'
    ginv = [inv(g) for g in G]
    for jp, (gp, kp) in enumerate(zip(gammas, ks)):
        gp_inv = inv(gp)
        for j, gam in enumerate(gammas):
            if j == jp:
                continue
            core = wl(mul(gam, gp_inv))
            if core - 2 * R > kp:
                continue
            for g1 in G:
                left = mul(g1, mul(gam, gp_inv))
                if any(wl(mul(left, gi)) <= kp for gi in ginv):
                    failures.append(f"(b) G*gamma_{j + 1} meets B_k g gamma_{jp + 1}")
                    return failures
    return failures


# Fourteen points of the radius-12 sphere whose dilates stay pairwise far apart
# compared with their own length (margin grows linearly in the dilation factor).
HEIS_TEMPLATE = (
    (4, 6, -6),
    (-3, 9, 5),
    (-8, 14, -4),
    (0, 10, 8),
    (0, -9, -10),
    (9, 26, 3),
    (-8, 26, -4),
    (11, 11, 1),
    (4, -25, -8),
    (-12, 0, 0),
    (-6, -20, 2),
    (-1, -21, 7),
    (4, -14, -8),
    (11, 0, 1),
)


@dataclass
class HeisenbergProvider:
    """Separated translates built from hubs ``a^(h0 + t Delta)`` and a dilated template.

    Each hub carries up to ``len(template)`` translates ``P_i h_t``; the radius
    for ``P_i h_t`` is ``|P_i| + R`` with ``R = max |g|`` over the shape, so the
    ball around any ``g P_i h_t`` reaches back to the hub (which lies in ``H``).
    """

    ctx: GroupContext = field(default_factory=heisenberg)
    template: tuple = HEIS_TEMPLATE
    max_dilation: int = 2**40

    @property
    def per_hub(self) -> int:
        return len(self.template)

    def hub_count(self, ell: int) -> int:
        return math.ceil(ell / self.per_hub)

    def H_size(self, D: Sequence, ell: int) -> int:
        return len(set(D)) + self.hub_count(ell)

    def _cluster(self, R: int, min_radius: int):
        wl, mul, inv = self.ctx.word_length, self.ctx._mul, self.ctx.invert
        lam = 1
        while lam <= self.max_dilation:
            P = [dilate(p, lam) for p in self.template]
            rho = [wl(p) for p in P]
            if min(rho) + R >= min_radius:
                ok = all(
                    wl(mul(P[i], inv(P[j]))) > max(rho[i], rho[j]) + 3 * R
                    for i in range(len(P))
                    for j in range(i + 1, len(P))
                )
                if ok:
                    return P, rho, lam
            lam *= 2
        raise ProviderExhausted("no admissible dilation of the template")

    def build(self, D: Sequence, E: Sequence, ell: int, min_radius: int = 1, verify: bool = True) -> ProviderResult:
        if ell < 1:
            raise ValueError("ell must be positive")
        wl = self.ctx.word_length
        R = max((wl(e) for e in E), default=0)
        RD = max((wl(d) for d in D), default=0)
        P, rho, lam = self._cluster(R, min_radius)
        rmax = max(rho)
        delta = 3 * rmax + 3 * R + 1
        h0 = rmax + R + RD + 1
        M = self.hub_count(ell)
        hubs = [(h0 + t * delta, 0, 0) for t in range(M)]
        gammas, ks = [], []
        for j in range(ell):
            t, i = divmod(j, self.per_hub)
            gammas.append(self.ctx._mul(P[i], hubs[t]))
            ks.append(rho[i] + R)
        H = tuple(sorted(set(D) | set(hubs)))
        res = ProviderResult(H, tuple(gammas), tuple(ks), {"dilation": lam, "hubs": M, "R": R, "h0": h0, "delta": delta})
        if verify:
            bad = verify_conditions(self.ctx, E, H, res.gammas, res.ks)
            if bad:
                raise ProviderExhausted(f"provider output failed {bad}")
        return res


def heisenberg_provider(D, E, ell: int, min_radius: int = 1, ctx: Optional[GroupContext] = None) -> ProviderResult:
    return HeisenbergProvider(ctx or heisenberg()).build(D, E, ell, min_radius)
