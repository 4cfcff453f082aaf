import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlshape.hoa import (EPSILON_AP, Guard, HoaSemanticError, HoaSyntaxError,
                          HoaUnsupportedError, eval_guard, format_guard, parse_hoa,
                          read_hoa, serialize_hoa)

from conftest import DATA, HOA_FIXTURES

GOLDEN = Path(__file__).parent / "golden"

MINIMAL = """HOA: v1
States: 1
Start: 0
AP: 0
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0 {0}
--END--
"""


def doc_with_guard(text: str, n_aps: int = 4) -> str:
    aps = " ".join(f'"p{i}"' for i in range(n_aps))
    return (f"HOA: v1\nStates: 1\nStart: 0\nAP: {n_aps} {aps}\nAcceptance: 1 Inf(0)\n"
            f"--BODY--\nState: 0\n[{text}] 0\n--END--\n")


def python_truth(text: str, labels: set[int]) -> bool:
    """Evaluate HOA guard text with Python's own operators; shares no code
    with the parser."""
    expr = re.sub(r"\d+", lambda m: str(int(m.group()) in labels), text)
    expr = expr.replace("t", "True").replace("f", "False")
    expr = expr.replace("&", " and ").replace("|", " or ").replace("!", " not ")
    return eval(expr)


# --------------------------------------------------------------------------
# parsing

def test_minimal_document():
    doc = parse_hoa(MINIMAL)
    assert doc.n_states == 1
    assert doc.aps == ()
    assert len(list(doc.edges())) == 1
    assert doc.n_accepting_edges() == 1


def test_rendezvous_counts():
    doc = read_hoa(DATA / "rendezvous.hoa")
    assert doc.n_states == 7
    assert doc.n_accepting_edges() == 5


def test_flags_counts():
    doc = read_hoa(DATA / "flags.hoa")
    assert (doc.n_states, doc.n_accepting_edges()) == (7, 6)


def test_phi3_single_accepting_edge():
    doc = read_hoa(DATA / "motivating_phi3.hoa")
    assert doc.n_accepting_edges() == 1
    assert EPSILON_AP in doc.aps


def test_comments_and_unknown_lowercase_headers_ignored():
    text = MINIMAL.replace("States: 1", "/* hi */ States: 1\nx-tool-thing: 3 \"q\"")
    assert parse_hoa(text).n_states == 1


@pytest.mark.parametrize("text, exc", [
    (MINIMAL.replace("Acceptance: 1 Inf(0)", "Acceptance: 2 Inf(0)&Inf(1)"), HoaUnsupportedError),
    (MINIMAL.replace("Acceptance: 1 Inf(0)", "Acceptance: 1 Fin(0)"), HoaUnsupportedError),
    (MINIMAL.replace("Start: 0", "Start: 0\nStart: 0"), HoaUnsupportedError),
    (MINIMAL.replace("AP: 0", "AP: 0\nAlias: @x t"), HoaUnsupportedError),
    (MINIMAL.replace("[t] 0 {0}", "0 {0}"), HoaUnsupportedError),
    (MINIMAL.replace("State: 0", "State: 0 {0}"), HoaUnsupportedError),
    (MINIMAL.replace("[t] 0 {0}", "[t] 0&0 {0}"), HoaUnsupportedError),
    (MINIMAL.replace("[t] 0 {0}", "[t] 3 {0}"), HoaSemanticError),
    (MINIMAL.replace("[t] 0 {0}", "[t] 0 {1}"), HoaSemanticError),
    (MINIMAL.replace("[t] 0 {0}", "[0] 0 {0}"), HoaSemanticError),
    (MINIMAL.replace("--END--", ""), HoaSyntaxError),
    (MINIMAL.replace("HOA: v1", "HOA: v2"), HoaUnsupportedError),
    (MINIMAL.replace("[t] 0", "[t&] 0"), HoaSyntaxError),
])
def test_rejections(text, exc):
    with pytest.raises(exc):
        parse_hoa(text)


def test_error_carries_position():
    with pytest.raises(HoaSyntaxError) as info:
        parse_hoa(MINIMAL.replace("[t] 0", "[t&] 0"))
    assert info.value.line == 8


# --------------------------------------------------------------------------
# round trip

@pytest.mark.parametrize("name", HOA_FIXTURES)
def test_golden_round_trip(name):
    doc = read_hoa(DATA / name)
    text = serialize_hoa(doc)
    expected = (GOLDEN / name).read_text()
    assert text == expected
    again = parse_hoa(text)
    assert again == doc
    assert serialize_hoa(again) == text


def test_minimal_serialization_is_canonical():
    text = serialize_hoa(parse_hoa(MINIMAL))
    assert text.splitlines()[:4] == ["HOA: v1", "States: 1", "Start: 0", "AP: 0"]
    assert parse_hoa(text) == parse_hoa(MINIMAL)


# --------------------------------------------------------------------------
# guards

def guards(n_aps=4):
    leaf = st.one_of(st.just(Guard.true()), st.just(Guard.false()),
                     st.integers(0, n_aps - 1).map(Guard.ap))
    return st.recursive(leaf, lambda sub: st.one_of(
        sub.map(Guard.not_),
        st.lists(sub, min_size=2, max_size=3).map(lambda gs: Guard.and_(*gs)),
        st.lists(sub, min_size=2, max_size=3).map(lambda gs: Guard.or_(*gs))), max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(guards())
def test_guard_eval_matches_python_truth_table(g):
    text = format_guard(g)
    parsed = parse_hoa(doc_with_guard(text)).states[0].edges[0].guard
    assert parsed == g
    for bits in range(16):
        labels = {i for i in range(4) if bits >> i & 1}
        assert eval_guard(parsed, labels) == python_truth(text, labels)


def _dnf(table: int, n: int) -> str:
    terms = []
    for row in range(1 << n):
        if table >> row & 1:
            terms.append("&".join(str(i) if row >> i & 1 else f"!{i}" for i in range(n)) or "t")
    return "|".join(terms) or "f"


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_every_boolean_function_small(n):
    """All 2^(2^n) functions over n <= 3 APs, through text."""
    for table in range(1 << (1 << n)):
        g = parse_hoa(doc_with_guard(_dnf(table, n), max(n, 1))).states[0].edges[0].guard
        for row in range(1 << n):
            labels = {i for i in range(n) if row >> i & 1}
            assert eval_guard(g, labels) == bool(table >> row & 1)


def shannon_trees(n: int) -> list[Guard]:
    """Guard tree for every boolean function over APs 0..n-1, indexed by its
    truth table (bit ``row`` is the value on label set ``row``)."""
    trees = [Guard.false(), Guard.true()]
    for v in range(n):
        half = 1 << v
        hi_var, lo_var = Guard.ap(v), Guard.not_(Guard.ap(v))
        trees = [Guard.or_(Guard.and_(lo_var, trees[t & ((1 << half) - 1)]),
                           Guard.and_(hi_var, trees[t >> half]))
                 for t in range(1 << (2 * half))]
    return trees


def test_every_boolean_function_four_aps():
    """All 65536 functions over 4 APs."""
    trees = shannon_trees(4)
    label_sets = [frozenset(i for i in range(4) if row >> i & 1) for row in range(16)]
    for table, g in enumerate(trees):
        got = [eval_guard(g, ls) for ls in label_sets]
        assert got == [bool(table >> k & 1) for k in range(16)]


@pytest.mark.parametrize("text", ["t", "f", "0", "!0", "0&1", "0|1", "!(0&1)", "0&1|2",
                                  "(0|1)&2", "!(0|1)&!2", "0&(1|2)&!3", "((0))", "!!0"])
def test_guard_examples(text):
    g = parse_hoa(doc_with_guard(text)).states[0].edges[0].guard
    for bits in range(16):
        labels = {i for i in range(4) if bits >> i & 1}
        assert eval_guard(g, labels) == python_truth(text, labels)
    again = parse_hoa(doc_with_guard(format_guard(g))).states[0].edges[0].guard
    assert again == g
