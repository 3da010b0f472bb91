"""Deliberately broken operations used to show the law checks bite.

Never use these outside tests and ``selftest --mutant``.
"""

from __future__ import annotations

from fractions import Fraction

from .model import Dist, ZERO, to_rational


def unnormalized_combine(coefficients, dists):
    """Recursive mixture that forgets to rescale the inner weights.

    The inner combination keeps ``p_i`` instead of ``p_i / (1 - p_n)``.
    Binary mixtures come out right; from three arguments on the weights
    are wrong.
    """
    coeffs = [to_rational(c) for c in coefficients]
    if len(coeffs) == 1:
        return dists[0]
    for c, d in zip(coeffs, dists):
        if c == 1:
            return d
    last = coeffs[-1]
    inner = unnormalized_combine(coeffs[:-1], dists[:-1])
    acc: dict[str, Fraction] = {}
    for s, w in inner.items():
        acc[s] = acc.get(s, ZERO) + (1 - last) * w
    for s, w in dists[-1].items():
        acc[s] = acc.get(s, ZERO) + last * w
    return Dist._trusted({s: w for s, w in acc.items() if w})
