"""Relation lifting, convex hulls of distributions, convex transitions."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from operator import mul
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .model import PA, Dist, ZERO
from .ratlp import solve


@dataclass(frozen=True)
class Polytope:
    """Convex hull of a nonempty, duplicate-free list of distributions."""

    generators: tuple[Dist, ...]

    def __post_init__(self):
        gens = tuple(dict.fromkeys(self.generators))
        if not gens:
            raise ValueError("a polytope needs at least one generator")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def _trusted(cls, gens: tuple[Dist, ...]) -> "Polytope":
        # caller guarantees a nonempty, duplicate-free tuple
        poly = object.__new__(cls)
        object.__setattr__(poly, "generators", gens)
        return poly

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def support(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for g in self.generators:
            for s in g:
                seen.setdefault(s, None)
        return tuple(seen)


def lift_related(relation: Iterable[tuple[str, str]], left: Dist, right: Dist):
    """Find a coupling of ``left`` and ``right`` supported inside ``relation``.

    Returns a dict ``{(s, t): weight}`` or None when the lifting fails.
    """
    rel = set(relation)
    pairs = [(s, t) for s in left for t in right if (s, t) in rel]
    rows = []
    for s in left:
        rows.append(([1 if p[0] == s else 0 for p in pairs], left[s]))
    for t in right:
        rows.append(([1 if p[1] == t else 0 for p in pairs], right[t]))
    out = solve(len(pairs), rows)
    if not out:
        return None
    return {p: w for p, w in zip(pairs, out.witness) if w}


def block_index(partition) -> dict[str, object]:
    """Map each state to a block key; accepts a mapping or a block list."""
    if isinstance(partition, Mapping):
        return dict(partition)
    if hasattr(partition, "block_of"):
        return dict(partition.block_of)
    index = {}
    for i, block in enumerate(partition):
        for s in block:
            index[s] = i
    return index


def block_masses(index: Mapping[str, object], d: Dist) -> dict[object, Fraction]:
    out: dict[object, Fraction] = {}
    for s, w in d.items():
        b = index[s]
        out[b] = out.get(b, ZERO) + w
    return out


def lift_related_partition(partition, left: Dist, right: Dist) -> bool:
    """Lifting for an equivalence given as a partition: equal block masses."""
    index = block_index(partition)
    return block_masses(index, left) == block_masses(index, right)


def conv_member(point: Dist, poly: Polytope | Iterable[Dist]):
    """Coefficients expressing ``point`` as a mixture of the generators.

    Returns a tuple aligned with ``poly.generators`` or None when the
    point lies outside the hull.
    """
    gens = poly.generators if isinstance(poly, Polytope) else tuple(poly)
    k = len(gens)
    for i, g in enumerate(gens):
        if g == point:
            return tuple(Fraction(int(j == i)) for j in range(k))
    states: dict[str, None] = {}
    for g in gens:
        for s in g:
            states.setdefault(s, None)
    if any(s not in states for s in point):
        return None
    if k == 1:
        return None
    if k == 2:
        return _segment_member(point, gens, states)
    # the mass row is implied by the state rows since all inputs are distributions
    rows = [([g[s] for g in gens], point[s]) for s in states]
    out = solve(k, rows)
    return out.witness


def _segment_member(point, gens, states):
    a, b = gens
    lam = None
    for s in states:
        da = a[s] - b[s]
        if da:
            lam = (point[s] - b[s]) / da
            break
    if lam is None or not 0 <= lam <= 1:
        return None
    for s in states:
        if lam * a[s] + (1 - lam) * b[s] != point[s]:
            return None
    return (lam, 1 - lam)


# fixed integer directions used to certify extreme points cheaply
_DIRECTIONS = ((1,), (-1,), (1, 2), (2, -1), (-1, 3), (3, 1, -2), (1, -2, 3, -1),
               (2, 3, -5), (-3, 1, 4, -2), (5, -1, -4, 2, 1))


@lru_cache(maxsize=None)
def _functionals(n: int) -> tuple[tuple[int, ...], ...]:
    out = {}
    for offset in range(n):
        for d in _DIRECTIONS:
            out.setdefault(tuple(d[(i + offset) % len(d)] for i in range(n)), None)
    return tuple(out)


@lru_cache(maxsize=None)
def _orders(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    if n > 3:
        # all signed permutations blow up; keep the cyclic ones
        rots = [tuple((i + r) % n for i in range(n)) for r in range(n)]
        return tuple(tuple((c, sg) for c in rot) for rot in rots for sg in (1, -1))
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            out.append(tuple(zip(perm, signs)))
    return tuple(out)


def _lex_max(vecs, order) -> int:
    cand = range(len(vecs))
    for c, sg in order:
        best = max(sg * vecs[i][c] for i in cand)
        cand = [i for i in cand if sg * vecs[i][c] == best]
        if len(cand) == 1:
            break
    return cand[0]


def scaled_vectors(gens: Sequence[Dist], states: Sequence[str]) -> tuple[int, list[tuple[int, ...]]]:
    """Integer coordinates of ``gens`` over a common denominator (returned first)."""
    forms = [g.integer_form() for g in gens]
    scale = math.lcm(*(den for den, _ in forms))
    out = []
    for den, nums in forms:
        f = scale // den
        out.append(tuple(nums.get(s, 0) * f for s in states))
    return scale, out


def _in_hull(point: tuple[int, ...], vecs: list[tuple[int, ...]]) -> bool:
    if not vecs:
        return False
    if len(vecs) == 1:
        return point == vecs[0]
    if len(vecs) == 2:
        return _on_segment(point, *vecs)
    # all vectors share one total mass, so the state rows imply sum(lam) = 1
    rows = [([v[i] for v in vecs], point[i]) for i in range(len(point))]
    return solve(len(vecs), rows).feasible


def _on_segment(p, a, b) -> bool:
    """Is ``p = lam*a + (1-lam)*b`` for some ``lam`` in [0, 1]? Exact, on integers."""
    num = den = 0
    for pi, ai, bi in zip(p, a, b):
        if ai != bi:
            num, den = pi - bi, ai - bi
            break
    if den == 0:
        return p == a
    if den < 0:
        num, den = -num, -den
    if num < 0 or num > den:
        return False
    # p*den == num*a + (den-num)*b coordinatewise
    return all(pi * den == num * ai + (den - num) * bi for pi, ai, bi in zip(p, a, b))


def extreme_indices(vecs: Sequence[tuple[int, ...]]) -> list[int]:
    """Indices of the extreme points among distinct equal-mass integer vectors."""
    k = len(vecs)
    if k <= 2:
        return list(range(k))
    # a unique maximiser of a linear functional is an extreme point
    known = set()
    # the last coordinate is fixed by the others (equal total mass), so
    # functionals on the leading coordinates already separate everything
    for w in _functionals(len(vecs[0]) - 1):
        scores = [sum(map(mul, v, w)) for v in vecs]
        top = max(scores)
        if scores.count(top) == 1:
            known.add(scores.index(top))
            if len(known) == k:
                return list(range(k))
    # the lexicographic maximum under any signed coordinate order is extreme, and never tied
    for order in _orders(len(vecs[0]) - 1):
        known.add(_lex_max(vecs, order))
        if len(known) == k:
            return list(range(k))
    alive = [True] * k
    ext = [vecs[j] for j in sorted(known)]
    for i, v in enumerate(vecs):
        if i in known:
            continue
        # most non-extreme points of small sums sit on an edge between two extremes
        if any(_on_segment(v, a, b) for a, b in itertools.combinations(ext, 2)):
            alive[i] = False
        elif _in_hull(v, ext):
            alive[i] = False
        elif _in_hull(v, [vecs[j] for j in range(k) if j != i and alive[j]]):
            alive[i] = False
        else:
            known.add(i)
    return [i for i in range(k) if alive[i]]


def conv_reduce(poly: Polytope | Iterable[Dist]) -> Polytope:
    """Keep exactly the extreme generators, in canonical order."""
    gens = poly.generators if isinstance(poly, Polytope) else tuple(dict.fromkeys(poly))
    gens = sorted(gens, key=Dist.sort_key)
    if len(gens) <= 2:
        return Polytope(tuple(gens))
    states = sorted({s for g in gens for s in g})
    _, vecs = scaled_vectors(gens, states)
    return Polytope(tuple(gens[i] for i in extreme_indices(vecs)))


_fraction = lru_cache(maxsize=65536)(Fraction)


def polytope_from_vectors(states: Sequence[str], total: int, vecs) -> Polytope:
    """Reduce integer vectors of mass ``total`` and return their extreme points."""
    vecs = list(dict.fromkeys(vecs))
    keep = extreme_indices(vecs)
    # every vector has mass ``total``, so sorting the integer entries gives
    # the same order as Dist.sort_key
    rows = sorted(tuple((s, x) for s, x in zip(states, vecs[i]) if x) for i in keep)
    gens = []
    for row in rows:
        g = math.gcd(total, *(x for _, x in row))
        d = Dist._trusted({s: _fraction(x, total) for s, x in row})
        d._ints = (total // g, {s: x // g for s, x in row})
        gens.append(d)
    return Polytope._trusted(tuple(gens))


def hull_equal(a: Polytope, b: Polytope) -> bool:
    """Semantic equality: every generator of each lies in the other's hull."""
    if set(a.generators) == set(b.generators):
        return True
    return (all(conv_member(g, b) is not None for g in a.generators)
            and all(conv_member(g, a) is not None for g in b.generators))


def convex_steps(pa: PA, state: str, label: str) -> Polytope | None:
    """Hull of the listed ``label``-successors of ``state``; None if there are none."""
    targets = pa.transitions(state, label)
    if not targets:
        return None
    return Polytope(targets)
