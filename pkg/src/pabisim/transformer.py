"""The belief-state transformer of a PA, one step at a time.

A distribution steps on a label only if every state in its support can.
Its successors are then all mixtures ``sum_s xi(s) * zeta_s`` where each
``zeta_s`` is a convex combination of the listed successors of ``s``. We
represent that (infinite) set by the finitely many mixtures obtained by
choosing one listed successor per support state.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache

from .algebra import BOTTOM, Lifted, SetValue, blackhole_combine, lifted_equal
from .errors import CapacityError, ChoiceError, CoefficientError
from .lifting import Polytope, conv_reduce
from .model import PA, Dist, ZERO, convex_combine, to_rational

DEFAULT_CAP = 10_000


@dataclass(frozen=True)
class BeliefStep:
    source: Dist
    label: str
    successors: Lifted


def can_step(pa: PA, xi: Dist, label: str) -> bool:
    return all(pa.transitions(s, label) for s in xi)


def raw_successor_generators(pa: PA, xi: Dist, label: str, cap: int = DEFAULT_CAP) -> list[Dist]:
    """One mixture per choice tuple, before any reduction (may repeat)."""
    options = [pa.transitions(s, label) for s in xi.support]
    count = math.prod(len(o) for o in options)
    if count > cap:
        raise CapacityError(f"{count} successor generators exceed the cap of {cap}")
    weights = [xi[s] for s in xi.support]
    return [convex_combine(weights, choice) for choice in itertools.product(*options)]


@lru_cache(maxsize=65536)
def _successors(pa: PA, xi: Dist, label: str, cap: int) -> Lifted:
    if not can_step(pa, xi, label):
        return BOTTOM
    return SetValue(conv_reduce(Polytope(tuple(raw_successor_generators(pa, xi, label, cap)))))


def successors(pa: PA, xi: Dist, label: str, cap: int = DEFAULT_CAP) -> Lifted:
    """``BOTTOM`` if ``xi`` cannot step, else the reduced successor polytope."""
    return _successors(pa, xi, label, cap)


def belief_step(pa: PA, xi: Dist, label: str) -> BeliefStep:
    return BeliefStep(xi, label, successors(pa, xi, label))


def step(pa: PA, xi: Dist, label: str, choice: Mapping[str, Sequence]) -> Dist:
    """Resolve the nondeterminism of every support state and mix.

    ``choice[s]`` gives convex coefficients over the listed successors of
    ``s`` (in listing order).
    """
    parts = []
    for s in xi.support:
        if s not in choice:
            raise ChoiceError(f"no choice given for support state {s}")
        targets = pa.transitions(s, label)
        if not targets:
            raise ChoiceError(f"{s} has no {label}-transition")
        coeffs = [to_rational(c) for c in choice[s]]
        if len(coeffs) != len(targets):
            raise ChoiceError(f"{s} has {len(targets)} {label}-successors, got {len(coeffs)} coefficients")
        if any(c < 0 for c in coeffs) or sum(coeffs, ZERO) != 1:
            raise CoefficientError(f"choice for {s} is not a convex combination")
        parts.append(convex_combine(coeffs, targets))
    return convex_combine([xi[s] for s in xi.support], parts)


def successors_by_fold(pa: PA, xi: Dist, label: str) -> Lifted:
    """Successors assembled from the Dirac components with binary black-hole sums.

    Writes ``xi`` as a nested binary mixture of its support states (last
    state peeled off first) and combines the per-state hulls the same way.
    """
    states = xi.support
    acc = _dirac_successors(pa, states[0], label)
    mass = xi[states[0]]
    for s in states[1:]:
        w = xi[s]
        total = mass + w
        acc = blackhole_combine(mass / total, acc, _dirac_successors(pa, s, label))
        mass = total
    return acc


def _dirac_successors(pa, state, label) -> Lifted:
    targets = pa.transitions(state, label)
    if not targets:
        return BOTTOM
    return SetValue(conv_reduce(Polytope(targets)))


def mix_law_check(pa: PA, xi1: Dist, xi2: Dist, p, label: str) -> bool:
    """Successors of ``p*xi1 + (1-p)*xi2`` against the combination of theirs."""
    p = to_rational(p)
    mixed = convex_combine((p, 1 - p), (xi1, xi2))
    lhs = successors(pa, mixed, label)
    rhs = blackhole_combine(p, successors(pa, xi1, label), successors(pa, xi2, label))
    return lifted_equal(lhs, rhs)

