"""Distributions, probabilistic automata and their text format.

All scalars are :class:`fractions.Fraction`; floats are rejected at every
entry point so that no verdict ever depends on rounding.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from fractions import Fraction
from numbers import Rational

from .errors import ArityError, CoefficientError, DistributionError, ParseError, SumError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RATIONAL_RE = re.compile(r"[+-]?\d+(/\d+)?\Z")

ZERO = Fraction(0)
ONE = Fraction(1)


def to_rational(value) -> Fraction:
    """Coerce ``value`` to an exact Fraction.

    Accepts ints, Fractions and strings such as ``"3/4"``. Floats are
    refused outright.
    """
    if type(value) is Fraction:
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_RE.match(text):
            raise ValueError(f"malformed rational {value!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class Dist:
    """A finitely supported probability distribution over state names.

    Entries keep the order in which they were first produced (so a
    mixture prints the way it was built), but equality and hashing only
    look at the mapping. Zero weights are never stored.
    """

    __slots__ = ("_items", "_map", "_hash", "_ints")

    def __init__(self, weights: Mapping[str, object] | Iterable[tuple[str, object]]):
        pairs = weights.items() if isinstance(weights, Mapping) else weights
        acc: dict[str, Fraction] = {}
        for state, w in pairs:
            w = to_rational(w)
            if w < 0:
                raise DistributionError(f"negative weight {w} for {state}")
            if state in acc:
                raise DistributionError(f"duplicate entry for state {state}")
            acc[state] = w
        total = sum(acc.values(), ZERO)
        if total != 1:
            raise DistributionError(f"weights sum to {total}, not 1")
        self._set({s: w for s, w in acc.items() if w})

    def _set(self, mapping):
        self._map = mapping
        self._items = tuple(mapping.items())
        self._hash = None
        self._ints = None

    @classmethod
    def _trusted(cls, mapping: dict[str, Fraction]) -> "Dist":
        # caller guarantees positive weights summing to one
        d = cls.__new__(cls)
        d._set(mapping)
        return d

    @classmethod
    def dirac(cls, state: str) -> "Dist":
        return cls._trusted({state: ONE})

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(self._map)

    def items(self):
        return self._items

    def __getitem__(self, state: str) -> Fraction:
        return self._map.get(state, ZERO)

    def __contains__(self, state) -> bool:
        return state in self._map

    def __iter__(self) -> Iterator[str]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return self._map == other._map

    def __hash__(self):
        if self._hash is None:
            den, nums = self.integer_form()
            self._hash = hash((den, frozenset(nums.items())))
        return self._hash

    def integer_form(self) -> tuple[int, dict[str, int]]:
        """Common denominator and integer numerators of the weights (cached)."""
        if self._ints is None:
            den = math.lcm(*(w.denominator for _, w in self._items))
            self._ints = (den, {s: w.numerator * (den // w.denominator) for s, w in self._items})
        return self._ints

    def sort_key(self):
        """Canonical key; sorting by it fixes every generator order."""
        return tuple(sorted(self._items))

    def is_dirac(self) -> bool:
        return len(self._items) == 1

    def __str__(self):
        return format_dist(self)

    def __repr__(self):
        return f"Dist({format_dist(self)!r})"


def format_dist(d: Dist) -> str:
    """Render ``d`` as a CLI literal, e.g. ``x1:1/2,x2:1/2``."""
    return ",".join(f"{s}:{w}" for s, w in d.items())


def parse_dist(text: str) -> Dist:
    """Parse a CLI distribution literal; a bare state name means Dirac."""
    text = text.strip()
    if IDENT_RE.match(text):
        return Dist.dirac(text)
    entries = _parse_entries(text, None)
    try:
        return Dist(entries)
    except DistributionError as exc:
        raise ParseError(str(exc)) from None


def _parse_entries(text: str, line: int | None) -> list[tuple[str, Fraction]]:
    entries = []
    seen = set()
    for chunk in text.split(","):
        state, sep, weight = chunk.partition(":")
        state, weight = state.strip(), weight.strip()
        if not sep or not IDENT_RE.match(state):
            raise ParseError(f"malformed entry {chunk.strip()!r}", line)
        try:
            w = to_rational(weight)
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        if w < 0:
            raise ParseError(f"negative weight in {chunk.strip()!r}", line)
        if state in seen:
            raise ParseError(f"duplicate entry for state {state}", line)
        seen.add(state)
        entries.append((state, w))
    total = sum((w for _, w in entries), ZERO)
    if total != 1:
        raise SumError(f"distribution mass is {total}, expected 1", line)
    return entries


def convex_combine(coefficients: Sequence, dists: Sequence[Dist]) -> Dist:
    """Pointwise mixture ``sum_i coefficients[i] * dists[i]``."""
    if len(coefficients) != len(dists) or not dists:
        raise ArityError(f"{len(coefficients)} coefficients for {len(dists)} distributions")
    coeffs = [to_rational(c) for c in coefficients]
    if any(c.numerator < 0 for c in coeffs):
        raise CoefficientError("negative coefficient")
    cden = math.lcm(*(c.denominator for c in coeffs))
    cnum = [c.numerator * (cden // c.denominator) for c in coeffs]
    if sum(cnum) != cden:
        raise CoefficientError(f"coefficients sum to {sum(coeffs, ZERO)}, not 1")
    # integer accumulation over one common denominator, reduced once at the end
    live = [(n, d.integer_form()) for n, d in zip(cnum, dists) if n]
    dden = math.lcm(*(den for _, (den, _) in live))
    acc: dict[str, int] = {}
    for n, (den, nums) in live:
        f = n * (dden // den)
        for s, x in nums.items():
            acc[s] = acc.get(s, 0) + f * x
    total = cden * dden
    g = math.gcd(total, *acc.values())
    out = Dist._trusted({s: Fraction(x, total) for s, x in acc.items()})
    out._ints = (total // g, {s: x // g for s, x in acc.items()})
    return out


class PA:
    """A probabilistic automaton with finitely many listed transitions.

    ``transitions`` maps ``(state, label)`` to the tuple of target
    distributions in source order; missing keys mean "no transition".
    """

    __slots__ = ("states", "labels", "_trans", "_hash")

    def __init__(self, states: Iterable[str], labels: Iterable[str],
                 transitions: Mapping[tuple[str, str], Iterable[Dist]]):
        self.states = tuple(sorted(set(states)))
        self.labels = tuple(sorted(set(labels)))
        if not self.states:
            raise ParseError("an automaton needs at least one state")
        if not self.labels:
            raise ParseError("empty label set")
        known = set(self.states)
        labels_ok = set(self.labels)
        trans = {}
        for (s, a), targets in transitions.items():
            if s not in known or a not in labels_ok:
                raise ParseError(f"transition ({s}, {a}) outside the automaton")
            uniq = []
            for d in targets:
                if not set(d.support) <= known:
                    raise ParseError(f"distribution {d} leaves the state set")
                if d not in uniq:
                    uniq.append(d)
            if uniq:
                trans[(s, a)] = tuple(uniq)
        self._trans = trans
        self._hash = None

    def transitions(self, state: str, label: str) -> tuple[Dist, ...]:
        return self._trans.get((state, label), ())

    @property
    def transition_map(self) -> dict[tuple[str, str], tuple[Dist, ...]]:
        return dict(self._trans)

    @property
    def num_transitions(self) -> int:
        return sum(len(v) for v in self._trans.values())

    def enabled(self, state: str) -> tuple[str, ...]:
        return tuple(a for a in self.labels if (state, a) in self._trans)

    def __eq__(self, other):
        if not isinstance(other, PA):
            return NotImplemented
        return (self.states == other.states and self.labels == other.labels
                and self._trans == other._trans)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.states, self.labels,
                               frozenset((k, frozenset(v)) for k, v in self._trans.items())))
        return self._hash

    def __repr__(self):
        return (f"PA(states={len(self.states)}, labels={len(self.labels)}, "
                f"transitions={self.num_transitions})")


def parse_pa(text: str) -> PA:
    """Parse the line-oriented automaton format."""
    states: dict[str, None] = {}
    labels: dict[str, None] = {}
    trans: dict[tuple[str, str], list[Dist]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0] in " \t":
            if current is None:
                raise ParseError("transition before any 'state' header", lineno)
            label, arrow, rest = line.strip().partition("->")
            label = label.strip()
            if not arrow or not IDENT_RE.match(label):
                raise ParseError(f"malformed transition {line.strip()!r}", lineno)
            entries = _parse_entries(rest, lineno)
            for s, _ in entries:
                states.setdefault(s, None)
            labels.setdefault(label, None)
            d = Dist._trusted({s: w for s, w in entries if w})
            bucket = trans.setdefault((current, label), [])
            if d not in bucket:
                bucket.append(d)
            continue
        keyword, *args = line.split()
        if keyword == "labels":
            if not args:
                raise ParseError("'labels' needs at least one label", lineno)
            for a in args:
                if not IDENT_RE.match(a):
                    raise ParseError(f"bad label {a!r}", lineno)
                labels.setdefault(a, None)
        elif keyword == "state":
            if len(args) != 1 or not IDENT_RE.match(args[0]):
                raise ParseError(f"malformed state header {line!r}", lineno)
            current = args[0]
            states.setdefault(current, None)
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno)
    if not labels:
        raise ParseError("empty label set")
    return PA(states, labels, trans)


def serialize_pa(pa: PA) -> str:
    """Canonical text for ``pa``; ``parse_pa`` inverts it exactly."""
    out = []
    used = {a for (_, a) in pa.transition_map}
    if used != set(pa.labels):
        out.append("labels " + " ".join(pa.labels))
    for s in pa.states:
        out.append(f"state {s}")
        for a in pa.labels:
            for d in pa.transitions(s, a):
                body = ", ".join(f"{t}:{w}" for t, w in d.items())
                out.append(f"  {a} -> {body}")
    return "\n".join(out) + "\n"


def load_pa(path) -> PA:
    with open(path, encoding="utf-8") as fh:
        return parse_pa(fh.read())
