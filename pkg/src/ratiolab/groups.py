"""Word metrics and balls in a few concrete finitely generated groups.

Elements are plain tuples so they hash cheaply at BFS scale:

* ``zd``    -- Z^d, an integer vector of length d.
* ``heis``  -- discrete Heisenberg group, a triple ``(k, m, n)`` standing for
  the upper unitriangular matrix with first row ``(1, k, m)`` and second row
  ``(0, 1, n)``.
* ``free``  -- free group of rank r, a reduced word of nonzero letters in
  ``±1..±r`` (``-i`` is the inverse of letter ``i``).
* ``zinf``  -- the direct sum of countably many copies of Z, a sorted tuple of
  ``(index, value)`` pairs with nonzero values.

Balls are right-invariant in the sense used throughout the package:
``B_n = A^n`` and a translate ``B_n g`` contains ``x`` iff ``|x g^-1| <= n``.
"""
from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence

Element = Hashable

DEFAULT_BUDGET = 5_000_000
KINDS = ("zd", "heis", "free", "zinf")


class GroupError(ValueError):
    """Element does not belong to the group of the context."""


class BudgetExceeded(RuntimeError):
    """An enumeration outgrew its element budget.

    ``layers`` is the number of complete BFS layers built before stopping
    (i.e. the largest radius known exactly) and ``size`` the element count
    reached.
    """

    def __init__(self, message: str, layers: int = 0, size: int = 0):
        super().__init__(message)
        self.layers = layers
        self.size = size


# -- group laws -------------------------------------------------------------


def _heis_mul(g, h):
    return (g[0] + h[0], g[1] + h[1] + g[0] * h[2], g[2] + h[2])


def _heis_inv(g):
    k, m, n = g
    return (-k, -m + k * n, -n)


def _free_mul(g, h):
    out = list(g)
    for x in h:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _free_inv(g):
    return tuple(-x for x in reversed(g))


def _zinf_mul(g, h):
    acc = dict(g)
    for i, v in h:
        s = acc.get(i, 0) + v
        if s:
            acc[i] = s
        else:
            acc.pop(i, None)
    return tuple(sorted(acc.items()))


def _zinf_inv(g):
    return tuple((i, -v) for i, v in g)


def _zd_mul(g, h):
    return tuple(a + b for a, b in zip(g, h))


def _zd_inv(g):
    return tuple(-a for a in g)


# -- Heisenberg word length ---------------------------------------------------


def _heis_extremes(k: int, n: int, f: int) -> tuple[int, int]:
    """Largest and (minus) smallest central coordinate reachable by a word of
    length ``k + n + 2f`` ending over ``(k, n)``, for ``k, n >= 0``.

    A word is a lattice path and its central coordinate is the integral of
    ``k dn`` along it. For a fixed step multiset (``p`` right, ``q`` left,
    ``s`` up, ``t`` down) adjacent swaps change that integral by at most one,
    so the reachable values form an interval; its ends are ``s*p`` (downs at
    x=0, then rights, ups, lefts) and ``-(t*k + s*q)``. Both are concave in the
    split ``q`` of the ``f`` surplus pairs, so only the clipped vertex and the
    endpoints need checking.
    """
    cands = {0, f}
    c = (n + f - k) // 2
    for q in (c, c + 1):
        if 0 <= q <= f:
            cands.add(q)
    upper = max((n + f - q) * (k + q) for q in cands)
    lower = max((f - q) * k + (n + f - q) * q for q in cands)
    return upper, lower


def heisenberg_word_length(g) -> int:
    """Exact word length of ``(k, m, n)`` for the generators ``a^±1, b^±1``.

    Runs in O(log |m|) big-integer steps, so it is usable at radii far beyond
    anything BFS can reach.
    """
    k, m, n = g
    # a -> a^-1 and b -> b^-1 are automorphisms fixing the generating set
    if k < 0:
        k, m = -k, -m
    if n < 0:
        n, m = -n, -m

    def reachable(f):
        upper, lower = _heis_extremes(k, n, f)
        return -lower <= m <= upper

    if reachable(0):
        return k + n
    hi = 1
    while not reachable(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reachable(mid):
            hi = mid
        else:
            lo = mid
    return k + n + 2 * hi


# -- contexts ---------------------------------------------------------------


@dataclass(frozen=True)
class GroupContext:
    """A group together with a finite symmetric generating set.

    ``growth`` optionally carries Bass constants ``(c, c1, c2)`` with
    ``c1 n^c <= |B_n| <= c2 n^c``.
    """

    kind: str
    rank: int
    generators: tuple
    growth: Optional[tuple] = None
    budget: int = DEFAULT_BUDGET
    allow_identity: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GroupError(f"unknown group kind {self.kind!r}")
        gens = set(self.generators)
        for a in self.generators:
            self.check(a)
            if self.invert(a) not in gens:
                raise GroupError(f"generating set is not symmetric: missing inverse of {a}")
        if self.identity in gens and not self.allow_identity:
            raise GroupError("identity in generating set")
        std = gens == set(_standard_generators(self.kind, self.rank, self._zinf_indices()))
        object.__setattr__(self, "_standard", std)

    # identity / validation

    @property
    def identity(self):
        if self.kind == "zd":
            return (0,) * self.rank
        if self.kind == "heis":
            return (0, 0, 0)
        return ()

    def check(self, g) -> None:
        """Raise GroupError unless ``g`` is a canonical element of this group."""
        if not isinstance(g, tuple):
            raise GroupError(f"{g!r} is not a tuple")
        if self.kind == "zd":
            ok = len(g) == self.rank and all(isinstance(x, int) for x in g)
        elif self.kind == "heis":
            ok = len(g) == 3 and all(isinstance(x, int) for x in g)
        elif self.kind == "free":
            ok = all(isinstance(x, int) and 0 < abs(x) <= self.rank for x in g)
            ok = ok and all(g[i] != -g[i + 1] for i in range(len(g) - 1))
        else:
            ok = all(
                isinstance(p, tuple) and len(p) == 2 and isinstance(p[0], int) and isinstance(p[1], int) and p[1] != 0
                for p in g
            )
            ok = ok and all(g[i][0] < g[i + 1][0] for i in range(len(g) - 1))
        if not ok:
            raise GroupError(f"{g!r} is not a canonical {self.kind} element")

    # law

    def _mul(self, g, h):
        if self.kind == "heis":
            return _heis_mul(g, h)
        if self.kind == "zd":
            return _zd_mul(g, h)
        if self.kind == "free":
            return _free_mul(g, h)
        return _zinf_mul(g, h)

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return self._mul(g, h)

    def invert(self, g):
        if self.kind == "heis":
            return _heis_inv(g)
        if self.kind == "zd":
            return _zd_inv(g)
        if self.kind == "free":
            return _free_inv(g)
        return _zinf_inv(g)

    def power(self, g, e: int):
        base = g if e >= 0 else self.invert(g)
        out = self.identity
        for _ in range(abs(e)):
            out = self._mul(out, base)
        return out

    # metric

    @property
    def standard(self) -> bool:
        """True when the generators are the canonical ones (closed-form metric)."""
        return self._standard

    def _zinf_indices(self):
        if self.kind != "zinf":
            return ()
        return tuple(sorted({g[0][0] for g in self.generators if len(g) == 1}))

    def word_length(self, g) -> int:
        """Minimal n with g in B_n.

        Closed forms are used for the canonical generating sets; any other
        generating set goes through bidirectional BFS under ``self.budget``.
        For ``zinf`` an element outside the span of the generators has
        infinite length (``math.inf``).
        """
        if self.standard:
            if self.kind == "heis":
                return heisenberg_word_length(g)
            if self.kind == "zd":
                return sum(abs(x) for x in g)
            if self.kind == "free":
                return len(g)
            idx = set(self._zinf_indices())
            if any(i not in idx for i, _ in g):
                return math.inf
            return sum(abs(v) for _, v in g)
        return bidirectional_length(self, g)

    def distance(self, x, y) -> int:
        """Right-invariant distance ``|x y^-1|``."""
        return self.word_length(self._mul(x, self.invert(y)))

    def translated_ball_contains(self, n: int, center, g) -> bool:
        """Membership ``g in B_n center`` without enumerating the ball."""
        return self.distance(g, center) <= n

    def ball(self, n: int) -> "FiniteSubset":
        return ball(self, n)


def _standard_generators(kind, rank, zinf_indices=()):
    if kind == "zd":
        gens = []
        for i in range(rank):
            for s in (1, -1):
                v = [0] * rank
                v[i] = s
                gens.append(tuple(v))
        return gens
    if kind == "heis":
        return [(1, 0, 0), (-1, 0, 0), (0, 0, 1), (0, 0, -1)]
    if kind == "free":
        return [(s * i,) for i in range(1, rank + 1) for s in (1, -1)]
    return [((i, s),) for i in zinf_indices for s in (1, -1)]


def zd(d: int, growth=None, **kw) -> GroupContext:
    return GroupContext("zd", d, tuple(_standard_generators("zd", d)), growth=growth, **kw)


def heisenberg(growth=None, **kw) -> GroupContext:
    return GroupContext("heis", 3, tuple(_standard_generators("heis", 3)), growth=growth, **kw)


def free_group(r: int, **kw) -> GroupContext:
    return GroupContext("free", r, tuple(_standard_generators("free", r)), **kw)


def zinf(indices: Iterable[int], **kw) -> GroupContext:
    """Z^infinity with the unit vectors at ``indices`` (and inverses) as generators."""
    idx = tuple(sorted(set(indices)))
    return GroupContext("zinf", len(idx), tuple(_standard_generators("zinf", 0, idx)), **kw)


def from_kind(kind: str, rank: int = 2, **kw) -> GroupContext:
    if kind == "zd":
        return zd(rank, **kw)
    if kind == "heis":
        return heisenberg(**kw)
    if kind == "free":
        return free_group(rank, **kw)
    if kind == "zinf":
        return zinf(range(1, rank + 1), **kw)
    raise GroupError(f"unknown group kind {kind!r}")


# -- finite subsets and balls ------------------------------------------------


@dataclass(frozen=True)
class FiniteSubset:
    """A finite set of elements; ``radius`` tags it as the ball ``B_radius``."""

    elements: frozenset
    ctx: Optional[GroupContext] = None
    radius: Optional[int] = None
    lengths: Optional[dict] = field(default=None, compare=False, hash=False, repr=False)

    def __contains__(self, g) -> bool:
        return g in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> list:
        return sorted(self.elements)


class _BallCache:
    """Nested BFS layers per context, grown on demand."""

    def __init__(self, ctx: GroupContext):
        self.ctx = ctx
        self.lengths = {ctx.identity: 0}
        self.layers = [[ctx.identity]]
        self.lock = threading.Lock()

    def grow_to(self, n: int, budget: int) -> None:
        self._grow(n, budget)
        # the cache is shared between contexts; the budget applies to the request
        total = 0
        for radius, layer in enumerate(self.layers[: n + 1]):
            total += len(layer)
            if total > budget:
                raise BudgetExceeded(f"ball of radius {n} exceeds budget {budget}", layers=radius - 1, size=total)

    def _grow(self, n: int, budget: int) -> None:
        with self.lock:
            gens = self.ctx.generators
            mul = self.ctx._mul
            while len(self.layers) <= n:
                radius = len(self.layers)
                new = []
                for g in self.layers[-1]:
                    for a in gens:
                        x = mul(a, g)
                        if x not in self.lengths:
                            self.lengths[x] = radius
                            new.append(x)
                    if len(self.lengths) > budget:
                        # roll back the partial layer so the cache stays exact
                        for x in new:
                            del self.lengths[x]
                        raise BudgetExceeded(
                            f"ball of radius {n} exceeds budget {budget}",
                            layers=len(self.layers) - 1,
                            size=len(self.lengths),
                        )
                self.layers.append(new)


_CACHES: dict = {}
_CACHES_LOCK = threading.Lock()


def _cache(ctx: GroupContext) -> _BallCache:
    key = (ctx.kind, ctx.rank, ctx.generators)
    with _CACHES_LOCK:
        c = _CACHES.get(key)
        if c is None:
            c = _CACHES[key] = _BallCache(ctx)
        return c


def ball(ctx: GroupContext, n: int, budget: Optional[int] = None) -> FiniteSubset:
    """``B_n = {g : |g| <= n}`` by breadth-first layers (``B_n = B_{n-1} u A B_{n-1}``)."""
    if n < 0:
        raise ValueError("radius must be non-negative")
    cache = _cache(ctx)
    cache.grow_to(n, ctx.budget if budget is None else budget)
    members = [g for layer in cache.layers[: n + 1] for g in layer]
    lengths = {g: cache.lengths[g] for g in members}
    return FiniteSubset(frozenset(members), ctx, radius=n, lengths=lengths)


def sphere(ctx: GroupContext, n: int) -> list:
    """Elements of length exactly n, in canonical order."""
    cache = _cache(ctx)
    cache.grow_to(n, ctx.budget)
    return sorted(cache.layers[n])


def ball_sizes(ctx: GroupContext, n_max: int) -> list[int]:
    cache = _cache(ctx)
    cache.grow_to(n_max, ctx.budget)
    out, total = [], 0
    for layer in cache.layers[: n_max + 1]:
        total += len(layer)
        out.append(total)
    return out


def bfs_word_length(ctx: GroupContext, g, budget: Optional[int] = None) -> int:
    """Word length read off the cached BFS layers (oracle for small radii)."""
    cache = _cache(ctx)
    n = 0
    while g not in cache.lengths:
        n = len(cache.layers)
        cache.grow_to(n, ctx.budget if budget is None else budget)
    return cache.lengths[g]


def bidirectional_length(ctx: GroupContext, g, budget: Optional[int] = None) -> int:
    """Distance from the identity to ``g`` in the Cayley graph, meeting in the middle."""
    budget = ctx.budget if budget is None else budget
    e = ctx.identity
    if g == e:
        return 0
    gens = ctx.generators
    mul = ctx._mul
    # left and right multiplication give the same word length; expand x -> a x
    fwd, bwd = {e: 0}, {g: 0}
    fq, bq = [e], [g]
    fd = bd = 0
    while fq and bq:
        if len(fwd) + len(bwd) > budget:
            raise BudgetExceeded("bidirectional search exceeded budget", layers=fd + bd, size=len(fwd) + len(bwd))
        grow_fwd = len(fq) <= len(bq)
        frontier, seen, other = (fq, fwd, bwd) if grow_fwd else (bq, bwd, fwd)
        depth = (fd if grow_fwd else bd) + 1
        best = None
        nxt = []
        for x in frontier:
            for a in gens:
                y = mul(a, x)
                if y in seen:
                    continue
                seen[y] = depth
                nxt.append(y)
                if y in other:
                    d = depth + other[y]
                    best = d if best is None else min(best, d)
        if best is not None:
            return best
        if grow_fwd:
            fq, fd = nxt, depth
        else:
            bq, bd = nxt, depth
    raise BudgetExceeded("element not reachable from the generators")


def set_product(A: FiniteSubset, B: FiniteSubset, budget: Optional[int] = None) -> FiniteSubset:
    """Exact product set ``AB = {ab}``."""
    ctx = A.ctx or B.ctx
    if ctx is None:
        raise GroupError("set_product needs a group context")
    if A.ctx is not None and B.ctx is not None and (A.ctx.kind, A.ctx.rank) != (B.ctx.kind, B.ctx.rank):
        raise GroupError("set_product of subsets of different groups")
    budget = ctx.budget if budget is None else budget
    out = set()
    for a in A.elements:
        for b in B.elements:
            out.add(ctx._mul(a, b))
        if len(out) > budget:
            raise BudgetExceeded("product set exceeds budget", size=len(out))
    radius = None
    if A.radius is not None and B.radius is not None and ctx.standard:
        radius = A.radius + B.radius
    return FiniteSubset(frozenset(out), ctx, radius=radius)


def subset(ctx: GroupContext, elements: Iterable) -> FiniteSubset:
    els = frozenset(elements)
    for g in els:
        ctx.check(g)
    return FiniteSubset(els, ctx)


# -- Heisenberg specifics -----------------------------------------------------

HEIS_A = (1, 0, 0)
HEIS_B = (0, 0, 1)
# c = b^-1 a^-1 b a, the generator of the center
HEIS_C = (0, -1, 0)


def central_power(m: int):
    """``c^m`` as a triple."""
    return (0, -m, 0)


def central_powers_in_ball(r: int) -> set[int]:
    """``M_r = {m : c^m in B_{4r}}`` using the closed-form metric.

    ``|c^m| >= 4 sqrt|m|`` (isoperimetry for lattice paths) bounds the sweep by
    ``|m| <= (4r)^2``.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    return set(_central_powers(r))


@functools.lru_cache(maxsize=128)
def _central_powers(r: int) -> frozenset:
    bound = (4 * r) ** 2
    return frozenset(m for m in range(-bound, bound + 1) if heisenberg_word_length(central_power(m)) <= 4 * r)


def dilate(g, lam: int):
    """The injective endomorphism ``(k, m, n) -> (lam k, lam^2 m, lam n)``."""
    k, m, n = g
    return (lam * k, lam * lam * m, lam * n)


# -- growth -------------------------------------------------------------------


def fit_growth_constants(ctx: GroupContext, c: int, n_min: int, n_max: int) -> tuple:
    """Exact ``(c, c1, c2)`` with ``c1 n^c <= |B_n| <= c2 n^c`` on ``[n_min, n_max]``."""
    sizes = ball_sizes(ctx, n_max)
    ratios = [Fraction(sizes[n], n**c) for n in range(max(n_min, 1), n_max + 1)]
    return (c, min(ratios), max(ratios))


def loglog_slope(sizes: Sequence[int], lo: int, hi: int) -> float:
    """Least-squares slope of log|B_n| against log n over ``lo..hi`` (float, labelled as a fit)."""
    xs = [math.log(n) for n in range(lo, hi + 1)]
    ys = [math.log(sizes[n]) for n in range(lo, hi + 1)]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den
