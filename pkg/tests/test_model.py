from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pabisim.errors import ArityError, CoefficientError, DistributionError, ParseError, SumError
from pabisim.model import PA, Dist, convex_combine, format_dist, parse_dist, parse_pa, serialize_pa, to_rational


def test_fig1_shape(fig1):
    assert fig1.states == ("x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3")
    assert fig1.labels == ("a",)
    # ten (state, label, distribution) triples over eight distinct targets
    assert fig1.num_transitions == 10
    assert len({d for ds in fig1.transition_map.values() for d in ds}) == 8


def test_self_loop():
    pa = parse_pa("state s\n  a -> s:1\n")
    assert pa.states == ("s",) and pa.labels == ("a",)
    assert pa.transitions("s", "a") == (Dist.dirac("s"),)


def test_sum_error_carries_line():
    with pytest.raises(SumError) as info:
        parse_pa("state s\n  a -> s:1/2\n")
    assert info.value.line == 2


@pytest.mark.parametrize("text", [
    "state s\n  a -> s:1/0\n",
    "state s\n  a -> s:0.5, t:0.5\n",
    "state s\n  a -> s:1/2, s:1/2\n",
    "state s\n  a -> s:-1, t:2\n",
    "state s\n",
    "bogus line\n",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_pa(text)


def test_implicit_states_sorted_and_order_kept():
    pa = parse_pa("state b\n  a -> c:1\n  a -> a:1/3, c:2/3\n")
    assert pa.states == ("a", "b", "c")
    assert [format_dist(d) for d in pa.transitions("b", "a")] == ["c:1", "a:1/3,c:2/3"]


def test_duplicate_transitions_collapse():
    pa = parse_pa("state s\n  a -> s:1\n  a -> s:1\n")
    assert pa.num_transitions == 1


def test_comments_and_unused_labels_roundtrip():
    text = "labels a b  # b is never used\nstate s # hi\n  a -> s:1\n"
    pa = parse_pa(text)
    assert pa.labels == ("a", "b")
    assert parse_pa(serialize_pa(pa)) == pa


def test_roundtrip_fig1(fig1):
    assert parse_pa(serialize_pa(fig1)) == fig1


def test_one_state_serializes_to_two_lines():
    out = serialize_pa(parse_pa("state s\n  a -> s:1\n"))
    assert out.splitlines() == ["state s", "  a -> s:1"]


def test_rationals_printed_exactly():
    out = serialize_pa(parse_pa("state s\n  a -> s:1/2, t:1/4, u:1/4\n"))
    assert "s:1/2, t:1/4, u:1/4" in out


def test_dist_invariants():
    d = Dist({"a": F(1, 2), "b": F(1, 2), "c": 0})
    assert d.support == ("a", "b")
    assert d == Dist([("b", "1/2"), ("a", "1/2")])
    assert hash(d) == hash(Dist({"b": F(1, 2), "a": F(1, 2)}))
    with pytest.raises(DistributionError):
        Dist({"a": F(1, 3)})
    with pytest.raises(TypeError):
        to_rational(0.5)


def test_parse_dist_literal():
    assert parse_dist("x1") == Dist.dirac("x1")
    assert parse_dist("x1:1/2,x2:1/2") == Dist({"x1": F(1, 2), "x2": F(1, 2)})
    with pytest.raises(SumError):
        parse_dist("x1:1/2")


def test_convex_combine_examples():
    y1, y2 = Dist.dirac("y1"), Dist.dirac("y2")
    assert convex_combine([F(1, 2), F(1, 2)], [y1, y2]) == Dist({"y1": F(1, 2), "y2": F(1, 2)})
    phi, psi = parse_dist("a:1/2,b:1/2"), parse_dist("c")
    assert convex_combine([0, 1], [phi, psi]) == psi
    a, b, c = (Dist.dirac(s) for s in "abc")
    third = F(1, 3)
    flat = convex_combine([third] * 3, [a, b, c])
    nested = convex_combine([F(2, 3), third], [convex_combine([F(1, 2), F(1, 2)], [a, b]), c])
    assert flat == nested == Dist({"a": third, "b": third, "c": third})


def test_convex_combine_errors():
    a = Dist.dirac("a")
    with pytest.raises(CoefficientError):
        convex_combine([F(1, 2)], [a])
    with pytest.raises(CoefficientError):
        convex_combine([F(3, 2), F(-1, 2)], [a, a])
    with pytest.raises(ArityError):
        convex_combine([1], [a, a])
    with pytest.raises(ArityError):
        convex_combine([], [])


def test_pa_rejects_foreign_targets():
    with pytest.raises(ParseError):
        PA(["s"], ["a"], {("s", "a"): [Dist.dirac("t")]})


# ---- properties

STATES = ["s0", "s1", "s2", "s3"]


@st.composite
def weights(draw, k):
    if k == 1:
        return [F(1)]
    den = draw(st.integers(k, 24))
    cuts = sorted(draw(st.lists(st.integers(1, den - 1), min_size=k - 1, max_size=k - 1, unique=True))) if k > 1 else []
    return [F(b - a, den) for a, b in zip([0] + cuts, cuts + [den])]


@st.composite
def dists(draw):
    support = draw(st.lists(st.sampled_from(STATES), min_size=1, max_size=4, unique=True))
    return Dist(zip(support, draw(weights(len(support)))))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_barycenter_on_dists(data):
    n = data.draw(st.integers(1, 4))
    m = data.draw(st.integers(1, 4))
    xs = [data.draw(dists()) for _ in range(m)]
    p = data.draw(weights(n))
    q = [data.draw(weights(m)) for _ in range(n)]
    lhs = convex_combine(p, [convex_combine(q[i], xs) for i in range(n)])
    rhs = convex_combine([sum(p[i] * q[i][j] for i in range(n)) for j in range(m)], xs)
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_nary_equals_nested_binary(data):
    n = data.draw(st.integers(2, 5))
    xs = [data.draw(dists()) for _ in range(n)]
    p = data.draw(weights(n))
    rest = 1 - p[-1]
    inner = convex_combine([c / rest for c in p[:-1]], xs[:-1])
    assert convex_combine(p, xs) == convex_combine([rest, p[-1]], [inner, xs[-1]])


@st.composite
def pas(draw):
    states = STATES[: draw(st.integers(1, 4))]
    trans = {}
    for s in states:
        for a in ("a", "b"):
            k = draw(st.integers(0, 2))
            ds = [draw(dists().filter(lambda d: all(t in states for t in d))) for _ in range(k)]
            if ds:
                trans[(s, a)] = ds
    return PA(states, ["a", "b"], trans)


@settings(max_examples=100, deadline=None)
@given(pas())
def test_roundtrip_random(pa):
    text = serialize_pa(pa)
    assert parse_pa(text) == pa
    assert serialize_pa(parse_pa(text)) == text
    for (s, a), ds in pa.transition_map.items():
        for d in ds:
            assert sum(w for _, w in d.items()) == 1
