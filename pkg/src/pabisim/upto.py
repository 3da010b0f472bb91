"""Bisimulation up-to for the belief-state transformer.

A certificate is a finite relation ``R`` on distributions together with
a closure ``f``; it is accepted when every pair can answer every move of
its partner inside ``f(R)``. The supported closures are ``R`` itself,
its convex hull, and the convex hull of its equivalence closure, each
optionally widened by the diagonal. All of them sit inside the
congruence closure of ``R``, so acceptance proves the pairs
distribution bisimilar.

Moves are checked on the generators of the successor polytopes only.
If each generator ``g_k`` is answered by ``d_k`` with ``(g_k, d_k)`` in
``f(R)``, then any mixture ``sum l_k g_k`` is answered by
``sum l_k d_k`` and the resulting pair lies in the convex hull of
``f(R)``, which is still inside the congruence closure.
"""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BOTTOM
from .errors import InputError, ParseError
from .lifting import Polytope, conv_member
from .model import PA, Dist, ZERO, format_dist, to_rational
from .ratlp import solve
from .transformer import can_step, successors

PLAIN = "plain"
CVX = "cvx"
CVX_E = "cvx_e"
BASES = (PLAIN, CVX, CVX_E)

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class TechniqueConfig:
    base: str = CVX_E
    identity_slack: bool = True

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown technique {self.base!r}; expected one of {BASES}")


@dataclass(frozen=True)
class Certificate:
    pairs: tuple[tuple[Dist, Dist], ...]
    config: TechniqueConfig = TechniqueConfig(CVX, False)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(dict.fromkeys(tuple(p) for p in self.pairs)))


@dataclass(frozen=True)
class Obligation:
    pair_index: int
    label: str
    side: str
    generator: Dist | None
    reason: str

    def describe(self, cert: Certificate | None = None) -> str:
        where = f"pair {self.pair_index}"
        if cert is not None:
            l, r = cert.pairs[self.pair_index]
            where += f" ({format_dist(l)} | {format_dist(r)})"
        move = f" move to {format_dist(self.generator)}" if self.generator is not None else ""
        return f"{where}, label {self.label}, {self.side} spoiler{move}: {self.reason}"


@dataclass(frozen=True)
class Verdict:
    obligations: tuple[Obligation, ...] = ()

    @property
    def accepted(self) -> bool:
        return not self.obligations

    def __bool__(self):
        return self.accepted

    def __str__(self):
        return "Accepted" if self.accepted else "Rejected"


@dataclass(frozen=True)
class ClosureWitness:
    """How a pair decomposes inside ``f(R)``.

    ``weights`` pairs each used generator pair with its coefficient;
    ``diagonal`` is ``(mass, phi)`` for the identity part, if any;
    ``defender`` is the answering point when one was solved for.
    """

    weights: tuple[tuple[tuple[Dist, Dist], Fraction], ...]
    diagonal: tuple[Fraction, Dist] | None = None
    defender: Dist | None = None


# ------------------------------------------------------------ closures


def equivalence_closure(pairs: Iterable[tuple[Dist, Dist]]) -> list[tuple[Dist, Dist]]:
    """All ordered pairs within the classes generated by ``pairs``."""
    parent: dict[Dist, Dist] = {}

    def find(x):
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[rv] = ru
    classes: dict[Dist, list[Dist]] = {}
    for x in parent:
        classes.setdefault(find(x), []).append(x)
    out = []
    for members in sorted((sorted(c, key=Dist.sort_key) for c in classes.values()),
                          key=lambda c: c[0].sort_key()):
        out.extend((u, v) for u in members for v in members)
    return out


def closure_pairs(pairs: Sequence[tuple[Dist, Dist]], config: TechniqueConfig):
    if config.base == CVX_E:
        return equivalence_closure(pairs)
    return list(dict.fromkeys(pairs))


def _contained(d: Dist, support) -> bool:
    return all(s in support for s in d)


def _solve_membership(left, right, gens, slack, defender=None, defender_side=None):
    """One LP: ``(left, right) = sum lam_j gens_j + diag`` with an optional free side.

    When ``defender`` (a Polytope) is given, the side named by
    ``defender_side`` is not fixed but ranges over the defender's hull.
    """
    fixed_left = defender_side != LEFT
    fixed_right = defender_side != RIGHT
    lsupp = set(left) if fixed_left else set(defender.support())
    rsupp = set(right) if fixed_right else set(defender.support())
    usable = [(u, v) for u, v in gens if _contained(u, lsupp) and _contained(v, rsupp)]
    diag_states = sorted(lsupp & rsupp) if slack else []
    dgens = defender.generators if defender is not None else ()

    states = sorted(lsupp | rsupp)
    nl, nd = len(usable), len(diag_states)
    nvars = nl + nd + len(dgens)
    rows = []
    for s in states:
        coeffs = [u[s] for u, _ in usable] + [int(t == s) for t in diag_states]
        if fixed_left:
            rows.append((coeffs + [0] * len(dgens), left[s]))
        else:
            rows.append((coeffs + [-g[s] for g in dgens], ZERO))
    for s in states:
        coeffs = [v[s] for _, v in usable] + [int(t == s) for t in diag_states]
        if fixed_right:
            rows.append((coeffs + [0] * len(dgens), right[s]))
        else:
            rows.append((coeffs + [-g[s] for g in dgens], ZERO))
    rows.append(([1] * (nl + nd) + [0] * len(dgens), 1))
    if dgens:
        rows.append(([0] * (nl + nd) + [1] * len(dgens), 1))
    out = solve(nvars, rows)
    if not out:
        return None
    x = out.witness
    weights = tuple((usable[j], x[j]) for j in range(nl) if x[j])
    mass = sum(x[nl:nl + nd], ZERO)
    diagonal = None
    if mass:
        diagonal = (mass, Dist._trusted({s: x[nl + i] / mass
                                         for i, s in enumerate(diag_states) if x[nl + i]}))
    point = None
    if dgens:
        acc = {}
        for g, c in zip(dgens, x[nl + nd:]):
            if c:
                for s, w in g.items():
                    acc[s] = acc.get(s, ZERO) + c * w
        point = Dist._trusted(acc)
    return ClosureWitness(weights, diagonal, point)


def closure_member(left: Dist, right: Dist, relation: Sequence[tuple[Dist, Dist]],
                   config: TechniqueConfig) -> ClosureWitness | None:
    """Decide ``(left, right) in f(R)`` for the closure selected by ``config``."""
    if config.base == PLAIN:
        if (left, right) in set(relation):
            return ClosureWitness((((left, right), Fraction(1)),))
        if config.identity_slack and left == right:
            return ClosureWitness((), (Fraction(1), left))
        return None
    return _solve_membership(left, right, closure_pairs(relation, config), config.identity_slack)


# ------------------------------------------------------------ checking


def _validate(pa: PA, dists: Iterable[Dist]):
    known = set(pa.states)
    for d in dists:
        missing = [s for s in d if s not in known]
        if missing:
            raise InputError(f"distribution {format_dist(d)} mentions unknown states {missing}")


def _answer(g: Dist, defender: Polytope, side: str, gens, config: TechniqueConfig,
            relation) -> str | None:
    """Why spoiler generator ``g`` cannot be answered, or None if it can."""
    if config.base == PLAIN:
        if side == LEFT:
            cands = [v for u, v in relation if u == g]
        else:
            cands = [u for u, v in relation if v == g]
        if config.identity_slack:
            cands.append(g)
        if any(conv_member(c, defender) is not None for c in cands):
            return None
        return "no answer related by R"
    if side == LEFT:
        w = _solve_membership(g, None, gens, config.identity_slack, defender, RIGHT)
    else:
        w = _solve_membership(None, g, gens, config.identity_slack, defender, LEFT)
    return None if w is not None else f"no answer in {config.base} closure"


def _pair_obligations(pa: PA, index: int, left: Dist, right: Dist, gens, config, relation):
    out = []
    for a in pa.labels:
        sl, sr = successors(pa, left, a), successors(pa, right, a)
        if (sl is BOTTOM) != (sr is BOTTOM):
            side = RIGHT if sl is BOTTOM else LEFT
            out.append(Obligation(index, a, side, None, f"only the {side} side can step"))
            continue
        if sl is BOTTOM:
            continue
        for side, spoil, defend in ((LEFT, sl.poly, sr.poly), (RIGHT, sr.poly, sl.poly)):
            if config.base == PLAIN and len(spoil) > 1:
                # a finite relation cannot contain infinitely many successor pairs
                for g in spoil.generators:
                    out.append(Obligation(index, a, side, g,
                                          "infinitely many successors; plain R is finite"))
                continue
            for g in spoil.generators:
                reason = _answer(g, defend, side, gens, config, relation)
                if reason is not None:
                    out.append(Obligation(index, a, side, g, reason))
    return out


def check_certificate(pa: PA, cert: Certificate) -> Verdict:
    """Is ``cert.pairs`` a bisimulation up to the configured closure?"""
    _validate(pa, (d for pair in cert.pairs for d in pair))
    relation = list(cert.pairs)
    gens = closure_pairs(relation, cert.config)
    obligations = []
    for i, (l, r) in enumerate(relation):
        obligations.extend(_pair_obligations(pa, i, l, r, gens, cert.config, relation))
    return Verdict(tuple(obligations))


# ------------------------------------------------------------ refutation


@dataclass(frozen=True)
class Refutation:
    """A modal formula true on exactly one side, with a readable trace."""

    formula: tuple
    holds_left: bool
    trace: tuple[str, ...]


def format_formula(f: tuple) -> str:
    kind = f[0]
    if kind == "can":
        return f"can({f[1]})"
    if kind == "dead":
        return f"dead({f[1]})"
    inner = format_formula(f[2])
    return f"<{f[1]}>{inner}" if kind == "dia" else f"[{f[1]}]{inner}"


def evaluate(pa: PA, d: Dist, formula: tuple) -> bool:
    """Truth of ``formula`` at ``d`` in the belief-state transformer.

    Formulas are ``("can", a)``, ``("dead", a)``, ``("dia", a, f)`` and
    ``("box", a, f)``. Each of them, and its negation, is preserved by
    mixing, so quantifying over successor generators is exact.
    """
    kind, a = formula[0], formula[1]
    if kind in ("can", "dead"):
        return can_step(pa, d, a) == (kind == "can")
    succ = successors(pa, d, a)
    if succ is BOTTOM:
        return kind == "box"
    results = (evaluate(pa, g, formula[2]) for g in succ.poly.generators)
    return any(results) if kind == "dia" else all(results)


class _Theories:
    """Depth-bounded theories of distributions, with interned formulas."""

    FORMULA_BUDGET = 200_000

    def __init__(self, pa: PA):
        self.pa = pa
        self.ids: dict[tuple, int] = {}
        self.formulas: list[tuple] = []
        self.by_depth: list[list[int]] = [[]]
        self.cache: dict[tuple[Dist, int], frozenset[int]] = {}

    def _intern(self, f) -> int:
        i = self.ids.get(f)
        if i is None:
            i = self.ids[f] = len(self.formulas)
            self.formulas.append(f)
        return i

    def upto(self, k: int) -> list[int] | None:
        """Ids of all formulas of modal depth at most ``k``."""
        while len(self.by_depth) <= k:
            d = len(self.by_depth)
            lits = [self._intern((kind, a)) for a in self.pa.labels for kind in ("can", "dead")]
            prev = self.by_depth[d - 1]
            if len(prev) * 2 * len(self.pa.labels) > self.FORMULA_BUDGET:
                return None
            mods = [self._intern((kind, a, i)) for a in self.pa.labels
                    for kind in ("dia", "box") for i in prev]
            self.by_depth.append(lits + mods)
        return self.by_depth[k]

    def theory(self, d: Dist, k: int) -> frozenset[int]:
        key = (d, k)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out = set()
        for a in self.pa.labels:
            out.add(self._intern(("can" if can_step(self.pa, d, a) else "dead", a)))
        if k > 1:
            below = self.upto(k - 1)
            for a in self.pa.labels:
                succ = successors(self.pa, d, a)
                if succ is BOTTOM:
                    out.update(self._intern(("box", a, i)) for i in below)
                    continue
                ths = [self.theory(g, k - 1) for g in succ.poly.generators]
                union = frozenset().union(*ths)
                inter = frozenset.intersection(*ths)
                out.update(self._intern(("dia", a, i)) for i in union)
                out.update(self._intern(("box", a, i)) for i in inter)
        res = frozenset(out)
        self.cache[key] = res
        return res

    def expand(self, i: int) -> tuple:
        f = self.formulas[i]
        if f[0] in ("dia", "box"):
            return (f[0], f[1], self.expand(f[2]))
        return f


def _depth(f: tuple) -> int:
    return 1 if f[0] in ("can", "dead") else 1 + _depth(f[2])


def refute_bounded(pa: PA, xi: Dist, zeta: Dist, depth: int) -> Refutation | None:
    """Find a modal formula of depth at most ``depth`` separating the two.

    The formulas range over ``can(a)``, ``dead(a)``, ``<a>f`` and ``[a]f``.
    A separating formula is a genuine proof of non-bisimilarity; failing
    to find one proves nothing.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    _validate(pa, (xi, zeta))
    th = _Theories(pa)
    for k in range(1, depth + 1):
        if k > 1 and th.upto(k - 1) is None:
            return None
        left, right = th.theory(xi, k), th.theory(zeta, k)
        if left != right:
            diff = [th.expand(i) for i in left ^ right]
            best = min(diff, key=lambda f: (_depth(f), format_formula(f)))
            holds_left = evaluate(pa, xi, best)
            return Refutation(best, holds_left, tuple(_explain(pa, xi, zeta, best, holds_left)))
    return None


def _explain(pa, xi, zeta, formula, holds_left):
    sat, unsat = (xi, zeta) if holds_left else (zeta, xi)
    sat_side, unsat_side = (LEFT, RIGHT) if holds_left else (RIGHT, LEFT)
    lines = [f"{format_formula(formula)} holds on the {sat_side} ({format_dist(sat)}) "
             f"but not on the {unsat_side} ({format_dist(unsat)})"]
    kind, a = formula[0], formula[1]
    if kind in ("can", "dead"):
        lines.append(f"can-step mismatch on label {a}")
        return lines
    # the spoiler plays on the side where some successor separates
    if kind == "dia":
        mover, other, inner, want = sat, unsat, formula[2], True
    else:
        mover, other, inner, want = unsat, sat, formula[2], False
    succ = successors(pa, mover, a)
    g = next(g for g in succ.poly.generators if evaluate(pa, g, inner) == want)
    verdict = "satisfies" if want else "violates"
    lines.append(f"spoiler: {format_dist(mover)} --{a}--> {format_dist(g)}, which {verdict} "
                 f"{format_formula(inner)}")
    resp = successors(pa, other, a)
    if resp is BOTTOM:
        lines.append(f"defender: {format_dist(other)} cannot step {a}")
    else:
        opposite = "violates" if want else "satisfies"
        lines.append(f"defender: every {a}-successor of {format_dist(other)} {opposite} "
                     f"{format_formula(inner)} (all {len(resp.poly)} generators checked; "
                     "the property is preserved by mixing)")
    return lines


# ------------------------------------------------------------ search

PROVEN = "proven"
REFUTED = "refuted"
UNKNOWN = "unknown"

_FILTER_DEPTH = 3


@dataclass(frozen=True)
class SearchResult:
    status: str
    certificate: Certificate | None = None
    refutation: Refutation | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)


def _profile(pa: PA, d: Dist) -> tuple[bool, ...]:
    return tuple(can_step(pa, d, a) for a in pa.labels)


def _plausible(pa: PA, l: Dist, r: Dist, depth: int) -> bool:
    return _profile(pa, l) == _profile(pa, r) and refute_bounded(pa, l, r, depth) is None


def _pick_defender(pa: PA, g: Dist, defender: Polytope, side: str, depth: int) -> Dist:
    for d in defender.generators:
        pair = (g, d) if side == LEFT else (d, g)
        if _plausible(pa, *pair, depth):
            return d
    return defender.generators[0]


def _peel(pa: PA, left: Dist, right: Dist, gens, slack: bool, depth: int):
    """Strip the largest known part off ``(left, right)``; return what is left.

    Repeatedly subtracts the biggest multiple of a closure pair (or of the
    shared diagonal) that both sides contain, as long as the remainder
    still looks bisimilar. Returns the remaining pair, normalised.
    """
    for _ in range(8):
        best = None
        cands = list(gens)
        if slack:
            common = {s: min(left[s], right[s]) for s in left if s in right}
            mass = sum(common.values(), ZERO)
            if mass:
                phi = Dist._trusted({s: w / mass for s, w in common.items()})
                cands.append((phi, phi))
        for u, v in cands:
            if not (_contained(u, left) and _contained(v, right)):
                continue
            lam = min([left[s] / u[s] for s in u] + [right[s] / v[s] for s in v])
            if not 0 < lam < 1:
                continue
            rl = _residual(left, u, lam)
            rr = _residual(right, v, lam)
            if best is not None and lam <= best[0]:
                continue
            if _plausible(pa, rl, rr, depth):
                best = (lam, rl, rr)
        if best is None:
            return left, right
        _, left, right = best
    return left, right


def _residual(d: Dist, u: Dist, lam: Fraction) -> Dist:
    rest = 1 - lam
    acc = {}
    for s, w in d.items():
        x = (w - lam * u[s]) / rest
        if x:
            acc[s] = x
    return Dist._trusted(acc)


def search_witness(pa: PA, xi: Dist, zeta: Dist, max_pairs: int = 32, max_depth: int = 5,
                   config: TechniqueConfig = TechniqueConfig()) -> SearchResult:
    """Look for a certificate containing ``(xi, zeta)``, or a refutation.

    Pairs are processed first-in first-out. Whenever a move of a pair
    cannot be answered inside the current closure, the spoiler's move is
    paired with the first defender generator that is not trivially
    distinguishable from it, the largest known part is peeled off, and
    the remainder becomes a new pair.
    """
    if max_pairs < 1 or max_depth < 1:
        raise ValueError("budgets must be at least 1")
    _validate(pa, (xi, zeta))
    ref = refute_bounded(pa, xi, zeta, max_depth)
    if ref is not None:
        return SearchResult(REFUTED, refutation=ref)

    filter_depth = min(_FILTER_DEPTH, max_depth)
    pairs = [(xi, zeta)]
    depth = {(xi, zeta): 0}
    queue = deque([0])
    notes = []
    while queue:
        i = queue.popleft()
        l, r = pairs[i]
        for _ in range(2):
            gens = closure_pairs(pairs, config)
            obs = _pair_obligations(pa, i, l, r, gens, config, pairs)
            if not obs:
                break
            for ob in obs:
                if ob.generator is None:
                    notes.append(f"pair {i}: {ob.reason} on {ob.label}")
                    continue
                gens = closure_pairs(pairs, config)
                sl, sr = successors(pa, l, ob.label), successors(pa, r, ob.label)
                spoil, defend = (sl, sr) if ob.side == LEFT else (sr, sl)
                if config.base != PLAIN and _answer(ob.generator, defend.poly, ob.side,
                                                    gens, config, pairs) is None:
                    continue
                d = _pick_defender(pa, ob.generator, defend.poly, ob.side, filter_depth)
                new = (ob.generator, d) if ob.side == LEFT else (d, ob.generator)
                if config.base != PLAIN:
                    new = _peel(pa, *new, gens, config.identity_slack, filter_depth)
                if new in depth or (config.base != PLAIN and closure_member(*new, pairs, config)):
                    continue
                if depth[(l, r)] + 1 > max_depth:
                    notes.append(f"depth budget reached at pair {i}")
                    continue
                if len(pairs) >= max_pairs:
                    notes.append("pair budget reached")
                    continue
                depth[new] = depth[(l, r)] + 1
                pairs.append(new)
                queue.append(len(pairs) - 1)
    cert = Certificate(tuple(pairs), config)
    if check_certificate(pa, cert).accepted:
        return SearchResult(PROVEN, certificate=cert)
    return SearchResult(UNKNOWN, notes=tuple(dict.fromkeys(notes)))


# ------------------------------------------------------------ file format


def _dist_from_json(obj, where: str) -> Dist:
    if not isinstance(obj, dict) or not obj:
        raise ParseError(f"{where}: expected a nonempty object of state weights")
    try:
        return Dist((s, to_rational(str(w))) for s, w in obj.items())
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def _dist_to_json(d: Dist) -> dict[str, str]:
    return {s: str(w) for s, w in d.items()}


def parse_certificate(text: str) -> Certificate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"certificate is not valid JSON: {exc}") from None
    try:
        tech = doc.get("technique", {})
        config = TechniqueConfig(tech.get("base", CVX), bool(tech.get("identity_slack", False)))
        raw = doc["pairs"]
    except (AttributeError, KeyError, ValueError) as exc:
        raise ParseError(f"malformed certificate: {exc}") from None
    pairs = []
    for n, item in enumerate(raw):
        if not isinstance(item, dict) or "left" not in item or "right" not in item:
            raise ParseError(f"pair {n}: expected keys 'left' and 'right'")
        pairs.append((_dist_from_json(item["left"], f"pair {n} left"),
                      _dist_from_json(item["right"], f"pair {n} right")))
    return Certificate(tuple(pairs), config)


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "technique": {"base": cert.config.base, "identity_slack": cert.config.identity_slack},
        "pairs": [{"left": _dist_to_json(l), "right": _dist_to_json(r)} for l, r in cert.pairs],
    }


def dump_certificate(cert: Certificate) -> str:
    return json.dumps(certificate_to_json(cert), indent=2) + "\n"


def load_certificate(path) -> Certificate:
    with open(path, encoding="utf-8") as fh:
        return parse_certificate(fh.read())
