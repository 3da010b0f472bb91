import random
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from oracles import coupling_exists, hull_member
from pabisim.lifting import (Polytope, conv_member, conv_reduce, convex_steps, hull_equal,
                             lift_related, lift_related_partition)
from pabisim.model import Dist, convex_combine, parse_dist

D = parse_dist


def test_identity_coupling():
    assert lift_related({("x", "x")}, D("x"), D("x")) == {("x", "x"): 1}


def test_coupling_examples():
    left, right = D("x1:1/2,x2:1/2"), D("y1:1/4,y2:3/4")
    assert lift_related({("x1", "y1"), ("x2", "y2")}, left, right) is None
    got = lift_related({("x1", "y1"), ("x1", "y2"), ("x2", "y2")}, left, right)
    assert got == {("x1", "y1"): F(1, 4), ("x1", "y2"): F(1, 4), ("x2", "y2"): F(1, 2)}


def test_partition_lifting_examples():
    blocks = [("x1", "y1"), ("x2", "y2")]
    assert lift_related_partition(blocks, D("x1:1/2,x2:1/2"), D("y1:1/2,y2:1/2"))
    assert not lift_related_partition(blocks, D("x1:1/2,x2:1/2"), D("y1:1/4,y2:3/4"))


def test_conv_member_examples(fig1):
    assert conv_member(D("y1:1/4,y2:1/4,y3:1/2"), convex_steps(fig1, "y0", "a")) == (F(1, 2), F(1, 2))
    assert conv_member(D("x"), Polytope((D("x"),))) == (1,)
    assert conv_member(D("x1:1/2,x3:1/2"), Polytope((D("x1"), D("x2")))) is None


def test_conv_reduce_examples():
    assert conv_reduce(Polytope((D("x1"), D("x2"), D("x1:1/2,x2:1/2")))).generators == (D("x1"), D("x2"))
    assert conv_reduce(Polytope((D("x1"),))).generators == (D("x1"),)
    got = conv_reduce(Polytope((D("x1:1/2,x2:1/2"), D("x1:1/4,x2:3/4"), D("x1:3/4,x2:1/4"))))
    assert set(got.generators) == {D("x1:1/4,x2:3/4"), D("x1:3/4,x2:1/4")}


def test_convex_steps_examples(fig1):
    assert convex_steps(fig1, "y0", "a").generators == (D("y1:1/2,y2:1/2"), D("y3"))
    assert convex_steps(fig1, "x1", "a").generators == (D("x1:1/2,x2:1/2"), D("x3:1/2,x2:1/2"))
    assert convex_steps(fig1, "x3", "a") is None


def _random_dist(rng, states):
    support = rng.sample(states, rng.randint(1, len(states)))
    den = rng.randint(len(support), 12)
    cuts = sorted(rng.sample(range(1, den), len(support) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return Dist({s: F(p, den) for s, p in zip(support, parts)})


def _random_partition(rng, states):
    blocks = {}
    for s in states:
        blocks.setdefault(rng.randrange(3), []).append(s)
    return list(blocks.values())


def test_partition_lifting_agrees_with_coupling_lp():
    rng = random.Random(3)
    states = ["s0", "s1", "s2", "s3", "s4"]
    agree_true = 0
    for _ in range(200):
        part = _random_partition(rng, states)
        left = _random_dist(rng, states)
        if rng.random() < 0.5:
            # shuffle mass inside blocks so that a lifting exists
            right = {}
            for block in part:
                mass = sum(left[s] for s in block)
                if mass:
                    t = rng.choice(block)
                    right[t] = right.get(t, 0) + mass
            right = Dist(right)
        else:
            right = _random_dist(rng, states)
        rel = {(s, t) for b in part for s in b for t in b}
        coupling = lift_related(rel, left, right)
        expected = lift_related_partition(part, left, right)
        assert (coupling is not None) == expected
        if len(left) * len(right) <= 9:
            # the enumeration oracle is exponential; keep it to small supports
            assert expected == coupling_exists(rel, left, right)
        if coupling is not None:
            agree_true += 1
            _assert_coupling(coupling, rel, left, right)
    assert agree_true >= 50


def _assert_coupling(coupling, rel, left, right):
    assert all(w > 0 for w in coupling.values())
    assert all(p in rel for p in coupling)
    for s in set(left) | {p[0] for p in coupling}:
        assert sum(w for (a, _), w in coupling.items() if a == s) == left[s]
    for t in set(right) | {p[1] for p in coupling}:
        assert sum(w for (_, b), w in coupling.items() if b == t) == right[t]


@st.composite
def weights(draw, k):
    if k == 1:
        return [F(1)]
    den = draw(st.integers(k, 12))
    cuts = sorted(draw(st.lists(st.integers(1, den - 1), min_size=k - 1, max_size=k - 1, unique=True)))
    return [F(b - a, den) for a, b in zip([0] + cuts, cuts + [den])]


@st.composite
def dists(draw, states=("s0", "s1", "s2", "s3")):
    support = draw(st.lists(st.sampled_from(states), min_size=1, max_size=len(states), unique=True))
    return Dist(zip(support, draw(weights(len(support)))))


@settings(max_examples=150, deadline=None)
@given(st.sets(st.tuples(st.sampled_from("abc"), st.sampled_from("abc"))), dists(("a", "b", "c")),
       dists(("a", "b", "c")))
def test_coupling_sound_and_symmetric(rel, left, right):
    got = lift_related(rel, left, right)
    assert (got is not None) == coupling_exists(rel, left, right)
    if got is not None:
        _assert_coupling(got, rel, left, right)
    inverse = {(t, s) for s, t in rel}
    assert (lift_related(inverse, right, left) is not None) == (got is not None)


@settings(max_examples=150, deadline=None)
@given(st.lists(dists(), min_size=1, max_size=5), dists())
def test_conv_member_matches_oracle(gens, point):
    poly = Polytope(tuple(gens))
    got = conv_member(point, poly)
    assert (got is not None) == hull_member(point, poly.generators)
    if got is not None:
        assert all(c >= 0 for c in got) and sum(got) == 1
        assert convex_combine(got, poly.generators) == point


@settings(max_examples=150, deadline=None)
@given(st.lists(dists(), min_size=1, max_size=7))
def test_conv_reduce_preserves_hull(gens):
    poly = Polytope(tuple(gens))
    red = conv_reduce(poly)
    assert set(red.generators) <= set(poly.generators)
    for g in poly.generators:
        assert hull_member(g, red.generators)
    # minimal: no kept generator lies in the hull of the other kept ones
    for g in red.generators:
        others = [h for h in red.generators if h != g]
        assert not others or not hull_member(g, others)
    assert conv_reduce(red) == red
    assert conv_reduce(Polytope(tuple(reversed(gens)))) == red
    assert hull_equal(red, poly)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_convex_steps_closed_under_mixing(data):
    from pabisim.model import load_pa
    from conftest import FIGURES
    pa = load_pa(FIGURES / "fig1.pa")
    s = data.draw(st.sampled_from([s for s in pa.states if pa.transitions(s, "a")]))
    poly = convex_steps(pa, s, "a")
    coeffs = data.draw(weights(len(poly)))
    assert conv_member(convex_combine(coeffs, poly.generators), poly) is not None
