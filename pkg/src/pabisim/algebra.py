"""Convex algebras used by the belief-state transformer.

Four carriers are covered: distributions (the free algebra), nonempty
convex sets of distributions with Minkowski combinations, the same
extended by an absorbing element ``BOTTOM``, and label-indexed families
of the latter. ``axioms_report`` checks the defining laws on random
instances.
"""

from __future__ import annotations

import itertools
import math
import random
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction

from .errors import ArityError, CoefficientError
from .lifting import Polytope, hull_equal, polytope_from_vectors, scaled_vectors
from .model import Dist, ONE, ZERO, convex_combine, format_dist, to_rational


class _Bottom:
    __slots__ = ()

    def __repr__(self):
        return "BOTTOM"

    def __str__(self):
        return "*"

    def __reduce__(self):
        return "BOTTOM"


BOTTOM = _Bottom()


@dataclass(frozen=True)
class SetValue:
    poly: Polytope

    def __str__(self):
        return "{" + "; ".join(format_dist(g) for g in self.poly.generators) + "}"


Lifted = SetValue | _Bottom


def is_bottom(x) -> bool:
    return x is BOTTOM


def _check_p(p) -> Fraction:
    p = to_rational(p)
    if not 0 <= p <= 1:
        raise CoefficientError(f"coefficient {p} outside [0, 1]")
    return p


def minkowski(p, c: Polytope, d: Polytope) -> Polytope:
    """Generators of ``p*C + (1-p)*D``, reduced to extreme points."""
    p = _check_p(p)
    if p == 1:
        return c
    if p == 0:
        return d
    return _mix_polys([p, 1 - p], [c, d])


def minkowski_n(coefficients: Sequence, polys: Sequence[Polytope]) -> Polytope:
    """n-ary pointwise combination, enumerating one generator per argument."""
    coeffs = _convex_coeffs(coefficients, polys)
    live = [(c, poly) for c, poly in zip(coeffs, polys) if c]
    if len(live) == 1:
        return live[0][1]
    return _mix_polys([c for c, _ in live], [poly for _, poly in live])


def _mix_polys(coeffs: list[Fraction], polys: list[Polytope]) -> Polytope:
    # work on integer vectors over one common denominator; only the
    # surviving extreme points are turned back into distributions
    states = sorted({s for poly in polys for g in poly.generators for s in g})
    den = math.lcm(*(c.denominator for c in coeffs))
    weights = [c.numerator * (den // c.denominator) for c in coeffs]
    scaled = [scaled_vectors(poly.generators, states) for poly in polys]
    scale = math.lcm(*(sc for sc, _ in scaled))
    parts = []
    for w, (sc, vecs) in zip(weights, scaled):
        f = w * (scale // sc)
        parts.append([tuple(f * x for x in v) for v in vecs])
    sums = [tuple(map(sum, zip(*choice))) for choice in itertools.product(*parts)]
    return polytope_from_vectors(states, den * scale, sums)


def blackhole_combine(p, u: Lifted, v: Lifted) -> Lifted:
    p = _check_p(p)
    if p == 1:
        return u
    if p == 0:
        return v
    if u is BOTTOM or v is BOTTOM:
        return BOTTOM
    return SetValue(minkowski(p, u.poly, v.poly))


def blackhole_n(coefficients: Sequence, values: Sequence[Lifted]) -> Lifted:
    coeffs = _convex_coeffs(coefficients, values)
    live = [(c, x) for c, x in zip(coeffs, values) if c]
    if any(x is BOTTOM for _, x in live):
        return BOTTOM
    if len(live) == 1:
        return live[0][1]
    return SetValue(minkowski_n([c for c, _ in live], [x.poly for _, x in live]))


def exp_combine(p, f: Mapping[str, Lifted], g: Mapping[str, Lifted]) -> dict[str, Lifted]:
    """Label-wise black-hole combination of two label families."""
    if set(f) != set(g):
        raise ArityError("label families over different label sets")
    return {a: blackhole_combine(p, f[a], g[a]) for a in sorted(f)}


def exp_n(coefficients: Sequence, fams: Sequence[Mapping[str, Lifted]]) -> dict[str, Lifted]:
    if not fams:
        raise ArityError("no arguments")
    labels = set(fams[0])
    if any(set(f) != labels for f in fams):
        raise ArityError("label families over different label sets")
    return {a: blackhole_n(coefficients, [f[a] for f in fams]) for a in sorted(labels)}


def _convex_coeffs(coefficients, args):
    if len(coefficients) != len(args) or not args:
        raise ArityError(f"{len(coefficients)} coefficients for {len(args)} arguments")
    coeffs = [to_rational(c) for c in coefficients]
    if any(c < 0 for c in coeffs) or sum(coeffs, ZERO) != 1:
        raise CoefficientError("coefficients must be nonnegative and sum to 1")
    return coeffs


def nary_from_binary(binary: Callable, coefficients: Sequence, xs: Sequence):
    """Build an n-ary combination from a binary one.

    Projection when some coefficient is 1, otherwise peel off the last
    argument: ``(1-p_n) * (sum_{i<n} p_i/(1-p_n) x_i) + p_n x_n``.
    """
    coeffs = _convex_coeffs(coefficients, xs)
    for c, x in zip(coeffs, xs):
        if c == 1:
            return x
    last = coeffs[-1]
    rest = 1 - last
    inner = nary_from_binary(binary, [c / rest for c in coeffs[:-1]], xs[:-1])
    return binary(rest, inner, xs[-1])


def lifted_equal(u: Lifted, v: Lifted) -> bool:
    if u is BOTTOM or v is BOTTOM:
        return u is v
    return hull_equal(u.poly, v.poly)


def family_equal(f: Mapping[str, Lifted], g: Mapping[str, Lifted]) -> bool:
    return set(f) == set(g) and all(lifted_equal(f[a], g[a]) for a in f)


# ---------------------------------------------------------------- law checks

LAWS = ("projection", "barycenter", "idempotence",
        "parametric commutativity", "parametric associativity")
CARRIERS = ("Dist", "Polytope", "Lifted", "LabeledFam")

_STATES = ("s0", "s1", "s2", "s3")
_LABELS = ("a", "b")
_MAX_DEN = 12


@dataclass
class LawResult:
    law: str
    carrier: str
    passes: int = 0
    failures: int = 0
    counterexample: str | None = None

    def line(self) -> str:
        text = f"{self.law:<26} {self.carrier:<11} passes={self.passes} failures={self.failures}"
        if self.counterexample:
            text += f" counterexample: {self.counterexample}"
        return text


@dataclass
class AxiomsReport:
    samples: int
    seed: int
    results: list[LawResult]

    @property
    def ok(self) -> bool:
        return all(r.failures == 0 for r in self.results)

    def result(self, law: str, carrier: str) -> LawResult:
        return next(r for r in self.results if r.law == law and r.carrier == carrier)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]


@lru_cache(maxsize=None)
def _compositions(k: int, den: int) -> tuple[tuple[Fraction, ...], ...]:
    """Every way to split ``den/den`` into ``k`` positive parts, as Fractions."""
    out = []
    for cuts in itertools.combinations(range(1, den), k - 1):
        parts = [b - a for a, b in zip((0,) + cuts, cuts + (den,))]
        out.append(tuple(Fraction(x, den) for x in parts))
    return tuple(out)


def _rand_weights(rng: random.Random, k: int) -> list[Fraction]:
    """k positive rationals summing to one, denominators at most 12."""
    return list(rng.choice(_compositions(k, rng.randint(k, _MAX_DEN))))


def _rand_coeffs(rng, k, allow_zero=True):
    if allow_zero and rng.random() < 0.2:
        w = _rand_weights(rng, k - 1) if k > 1 else []
        w.insert(rng.randrange(k), ZERO)
        return w if k > 1 else [ONE]
    return _rand_weights(rng, k)


def _rand_p(rng) -> Fraction:
    return rng.choice(_compositions(2, rng.randint(2, _MAX_DEN)))[0]


@lru_cache(maxsize=None)
def _supports(k: int) -> tuple[tuple[str, ...], ...]:
    return tuple(itertools.permutations(_STATES, k))


_DIST_CACHE: dict[tuple, Dist] = {}


def _rand_dist(rng) -> Dist:
    # same law as sampling a support and then weights; built distributions
    # are shared so their hashes and integer forms are computed once
    k = rng.randint(1, len(_STATES))
    support = rng.choice(_supports(k))
    den = rng.randint(k, _MAX_DEN)
    comps = _compositions(k, den)
    key = (support, den, rng.randrange(len(comps)))
    d = _DIST_CACHE.get(key)
    if d is None:
        d = _DIST_CACHE[key] = Dist._trusted(dict(zip(support, comps[key[2]])))
    return d


def _rand_poly(rng) -> Polytope:
    return Polytope(tuple(_rand_dist(rng) for _ in range(rng.randint(1, 2))))


def _rand_lifted(rng) -> Lifted:
    return BOTTOM if rng.random() < 0.25 else SetValue(_rand_poly(rng))


def _rand_family(rng) -> dict[str, Lifted]:
    return {a: _rand_lifted(rng) for a in _LABELS}


def _show(x) -> str:
    if isinstance(x, Dist):
        return format_dist(x)
    if isinstance(x, Polytope):
        return "{" + "; ".join(format_dist(g) for g in x.generators) + "}"
    if isinstance(x, dict):
        return "[" + ", ".join(f"{a}={_show(v)}" for a, v in sorted(x.items())) + "]"
    return str(x)


@dataclass(frozen=True)
class _Carrier:
    name: str
    sample: Callable
    nary: Callable
    binary: Callable
    equal: Callable
    # arity bound for barycenter instances; set-valued carriers stay small
    max_arity: int


def _carriers(combine: Callable) -> list[_Carrier]:
    return [
        _Carrier("Dist", _rand_dist, combine,
                 lambda p, x, y: combine((p, 1 - p), (x, y)), lambda x, y: x == y, 3),
        _Carrier("Polytope", _rand_poly, minkowski_n, minkowski, hull_equal, 2),
        _Carrier("Lifted", _rand_lifted, blackhole_n, blackhole_combine, lifted_equal, 2),
        _Carrier("LabeledFam", _rand_family, exp_n, exp_combine, family_equal, 2),
    ]


def _check_law(law: str, car: _Carrier, rng: random.Random):
    """Run one random instance; return None on success or a description."""
    if law == "projection":
        k = rng.randint(1, 3)
        xs = [car.sample(rng) for _ in range(k)]
        j = rng.randrange(k)
        coeffs = [ONE if i == j else ZERO for i in range(k)]
        if not car.equal(car.nary(coeffs, xs), xs[j]):
            return f"coeffs={_fmt(coeffs)} args={[_show(x) for x in xs]}"
    elif law == "barycenter":
        n = rng.randint(1, car.max_arity)
        m = rng.randint(1, car.max_arity)
        xs = [car.sample(rng) for _ in range(m)]
        p = _rand_coeffs(rng, n)
        q = [_rand_coeffs(rng, m) for _ in range(n)]
        lhs = car.nary(p, [car.nary(q[i], xs) for i in range(n)])
        r = [sum((p[i] * q[i][j] for i in range(n)), ZERO) for j in range(m)]
        rhs = car.nary(r, xs)
        if not car.equal(lhs, rhs):
            return f"p={_fmt(p)} q={[_fmt(row) for row in q]} args={[_show(x) for x in xs]}"
    elif law == "idempotence":
        p, x = _rand_p(rng), car.sample(rng)
        if not car.equal(car.binary(p, x, x), x):
            return f"p={p} x={_show(x)}"
    elif law == "parametric commutativity":
        p, x, y = _rand_p(rng), car.sample(rng), car.sample(rng)
        if not car.equal(car.binary(p, x, y), car.binary(1 - p, y, x)):
            return f"p={p} x={_show(x)} y={_show(y)}"
    elif law == "parametric associativity":
        p, q = _rand_p(rng), _rand_p(rng)
        x, y, z = car.sample(rng), car.sample(rng), car.sample(rng)
        pq = p * q
        lhs = car.binary(p, car.binary(q, x, y), z)
        rhs = car.binary(pq, x, car.binary(p * (1 - q) / (1 - pq), y, z))
        if not car.equal(lhs, rhs):
            return f"p={p} q={q} x={_show(x)} y={_show(y)} z={_show(z)}"
    return None


def _fmt(coeffs):
    return "(" + ",".join(str(c) for c in coeffs) + ")"


def axioms_report(samples: int, seed: int, combine: Callable = convex_combine) -> AxiomsReport:
    """Check every law on every carrier with ``samples`` random instances each.

    ``combine`` is the n-ary mixture used for the Dist carrier; passing a
    deliberately broken one shows that the check has teeth. Each
    law/carrier cell draws from its own generator seeded from ``seed``,
    so results do not depend on evaluation order.
    """
    if samples < 0:
        raise ValueError("samples must be nonnegative")
    results = []
    for car in _carriers(combine):
        for law in LAWS:
            rng = random.Random(f"{seed}:{law}:{car.name}")
            res = LawResult(law, car.name)
            for _ in range(samples):
                try:
                    bad = _check_law(law, car, rng)
                except Exception as exc:  # a broken combine may also crash
                    bad = f"raised {type(exc).__name__}: {exc}"
                if bad is None:
                    res.passes += 1
                else:
                    res.failures += 1
                    if res.counterexample is None:
                        res.counterexample = bad
            results.append(res)
    return AxiomsReport(samples, seed, results)
