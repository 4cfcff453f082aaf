"""Reader and writer for a subset of the HOA v1 automaton format.

Supported subset: one start state, ``Acceptance: 1 Inf(0)``, explicit
``[guard]`` labels on every edge, and acceptance marks on edges only.
Aliases, alternation, state labels, state-based acceptance and generalized
conditions are rejected with :class:`HoaUnsupportedError`.

An LDBA epsilon move is written as an edge whose guard is the single atomic
proposition named ``__eps__``; see :mod:`ltlshape.automaton`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

EPSILON_AP = "__eps__"


class HoaError(ValueError):
    """Base class for HOA errors; carries a 1-based source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class HoaSyntaxError(HoaError):
    pass


class HoaUnsupportedError(HoaError):
    pass


class HoaSemanticError(HoaError):
    pass


# --------------------------------------------------------------------------
# guards

@dataclass(frozen=True)
class Guard:
    """Boolean formula over atomic-proposition indices.

    ``kind`` is one of ``"true"``, ``"false"``, ``"ap"``, ``"not"``,
    ``"and"``, ``"or"``. And/Or nodes are n-ary.
    """

    kind: str
    index: int = -1
    children: tuple["Guard", ...] = ()

    @staticmethod
    def true() -> "Guard":
        return Guard("true")

    @staticmethod
    def false() -> "Guard":
        return Guard("false")

    @staticmethod
    def ap(index: int) -> "Guard":
        return Guard("ap", index=index)

    @staticmethod
    def not_(g: "Guard") -> "Guard":
        return Guard("not", children=(g,))

    @staticmethod
    def and_(*gs: "Guard") -> "Guard":
        return Guard("and", children=tuple(gs))

    @staticmethod
    def or_(*gs: "Guard") -> "Guard":
        return Guard("or", children=tuple(gs))

    def ap_indices(self) -> set[int]:
        if self.kind == "ap":
            return {self.index}
        out: set[int] = set()
        for c in self.children:
            out |= c.ap_indices()
        return out

    def __str__(self) -> str:
        return format_guard(self)


def eval_guard(g: Guard, labels: Iterable[int]) -> bool:
    """Evaluate ``g`` where AP ``i`` is true iff ``i`` is in ``labels``."""
    if not isinstance(labels, (set, frozenset)):
        labels = set(labels)
    return _eval(g, labels)


def _eval(g: Guard, labels) -> bool:
    k = g.kind
    if k == "ap":
        return g.index in labels
    if k == "and":
        for c in g.children:
            if not _eval(c, labels):
                return False
        return True
    if k == "or":
        for c in g.children:
            if _eval(c, labels):
                return True
        return False
    if k == "not":
        return not _eval(g.children[0], labels)
    if k == "true":
        return True
    if k == "false":
        return False
    raise ValueError(f"unknown guard kind {k!r}")


def format_guard(g: Guard) -> str:
    k = g.kind
    if k == "true":
        return "t"
    if k == "false":
        return "f"
    if k == "ap":
        return str(g.index)
    if k == "not":
        c = g.children[0]
        inner = format_guard(c)
        return "!" + (f"({inner})" if c.kind in ("and", "or") else inner)
    sep = "&" if k == "and" else "|"
    parts = []
    for c in g.children:
        s = format_guard(c)
        # and-under-or binds tighter and needs no parens; everything else
        # that is n-ary keeps its own node through parentheses
        if c.kind in ("and", "or") and not (k == "or" and c.kind == "and"):
            s = f"({s})"
        parts.append(s)
    return sep.join(parts)


# --------------------------------------------------------------------------
# document model

@dataclass(frozen=True)
class HoaEdge:
    guard: Guard
    target: int
    acc_sets: tuple[int, ...] = ()

    @property
    def accepting(self) -> bool:
        return 0 in self.acc_sets


@dataclass(frozen=True)
class HoaState:
    index: int
    name: Optional[str] = None
    edges: tuple[HoaEdge, ...] = ()


@dataclass(frozen=True)
class HoaDocument:
    n_states: int
    aps: tuple[str, ...]
    start: int
    states: tuple[HoaState, ...]
    name: Optional[str] = None
    tool: tuple[str, ...] = ()
    properties: tuple[str, ...] = ()
    acceptance: str = field(default="Inf(0)")

    def edges(self) -> Iterator[tuple[int, HoaEdge]]:
        for st in self.states:
            for e in st.edges:
                yield st.index, e

    def n_accepting_edges(self) -> int:
        return sum(1 for _, e in self.edges() if e.accepting)


# --------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>/\*.*?\*/)
  | (?P<marker>--[A-Z]+--)
  | (?P<header>[A-Za-z_][A-Za-z0-9_-]*:)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<alias>@[A-Za-z0-9_-]+)
  | (?P<punct>[\[\]{}()!&|])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text.startswith("/*", pos):
                raise HoaSyntaxError("unterminated comment", line, pos - line_start + 1)
            raise HoaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = m.start() + s.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, msg: str, tok: Optional[_Tok] = None, cls=HoaSyntaxError):
        tok = tok or self.cur
        raise cls(msg, tok.line, tok.col)

    def expect(self, kind: str, text: Optional[str] = None) -> _Tok:
        t = self.cur
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or t.kind
            self.fail(f"expected {want!r}, got {got!r}")
        return self.advance()

    def expect_int(self) -> int:
        return int(self.expect("int").text)

    # header ---------------------------------------------------------------
    def parse(self) -> HoaDocument:
        first = self.cur
        if first.kind != "header" or first.text != "HOA:":
            self.fail("document must start with 'HOA:'")
        self.advance()
        version = self.cur
        if version.kind != "ident" or version.text != "v1":
            self.fail("only HOA version v1 is supported", version, HoaUnsupportedError)
        self.advance()

        n_states = None
        start = None
        aps = None
        acc_seen = False
        name = None
        tool: tuple[str, ...] = ()
        props: list[str] = []
        acc_tok = None
        while True:
            t = self.cur
            if t.kind == "marker":
                if t.text != "--BODY--":
                    self.fail(f"unexpected {t.text}", t, HoaUnsupportedError)
                self.advance()
                break
            if t.kind != "header":
                self.fail(f"expected header item, got {t.text or t.kind!r}")
            self.advance()
            key = t.text[:-1]
            if key == "States":
                if n_states is not None:
                    self.fail("duplicate States header", t, HoaSemanticError)
                n_states = self.expect_int()
            elif key == "Start":
                if start is not None:
                    self.fail("multiple start states are not supported", t, HoaUnsupportedError)
                start = (self.expect_int(), t)
                if self.cur.kind == "punct" and self.cur.text == "&":
                    self.fail("alternating start states are not supported", self.cur, HoaUnsupportedError)
            elif key == "AP":
                if aps is not None:
                    self.fail("duplicate AP header", t, HoaSemanticError)
                count_tok = self.cur
                count = self.expect_int()
                names = []
                while self.cur.kind == "string":
                    names.append(_unquote(self.advance().text))
                if len(names) != count:
                    self.fail(f"AP declares {count} propositions but lists {len(names)}",
                              count_tok, HoaSemanticError)
                if len(set(names)) != len(names):
                    self.fail("duplicate AP name", count_tok, HoaSemanticError)
                aps = tuple(names)
            elif key == "Acceptance":
                acc_tok = t
                self._parse_acceptance(t)
                acc_seen = True
            elif key == "acc-name":
                nm = self.expect("ident")
                if nm.text != "Buchi":
                    self.fail(f"acc-name {nm.text!r} is not supported", nm, HoaUnsupportedError)
            elif key == "name":
                name = _unquote(self.expect("string").text)
            elif key == "tool":
                parts = [_unquote(self.expect("string").text)]
                if self.cur.kind == "string":
                    parts.append(_unquote(self.advance().text))
                tool = tuple(parts)
            elif key == "properties":
                while self.cur.kind == "ident":
                    props.append(self.advance().text)
            elif key == "Alias":
                self.fail("aliases are not supported", t, HoaUnsupportedError)
            elif key[0].isupper():
                self.fail(f"header {key!r} is not supported", t, HoaUnsupportedError)
            else:
                # lowercase headers are informational in HOA and may be skipped
                while self.cur.kind not in ("header", "marker", "eof"):
                    self.advance()

        if n_states is None:
            self.fail("missing States header", first, HoaSemanticError)
        if start is None:
            self.fail("missing Start header; exactly one start state is required",
                      first, HoaUnsupportedError)
        if aps is None:
            self.fail("missing AP header", first, HoaSemanticError)
        if not acc_seen:
            self.fail("missing Acceptance header", first, HoaSemanticError)
        del acc_tok
        start_idx, start_tok = start
        if start_idx >= n_states:
            self.fail(f"start state {start_idx} out of range", start_tok, HoaSemanticError)

        states = self._parse_body(n_states, len(aps))
        return HoaDocument(
            n_states=n_states,
            aps=aps,
            start=start_idx,
            states=states,
            name=name,
            tool=tool,
            properties=tuple(props),
        )

    def _parse_acceptance(self, header: _Tok) -> None:
        n_tok = self.cur
        n_sets = self.expect_int()
        toks = []
        while self.cur.kind not in ("header", "marker", "eof"):
            toks.append(self.advance())
        cond = "".join(t.text for t in toks)
        if n_sets != 1 or cond != "Inf(0)":
            self.fail(f"acceptance '{n_sets} {cond}' is not supported; only '1 Inf(0)'",
                      n_tok, HoaUnsupportedError)

    # body -----------------------------------------------------------------
    def _parse_body(self, n_states: int, n_aps: int) -> tuple[HoaState, ...]:
        blocks: dict[int, HoaState] = {}
        while True:
            t = self.cur
            if t.kind == "marker":
                if t.text == "--END--":
                    self.advance()
                    break
                self.fail(f"unexpected {t.text}", t, HoaUnsupportedError)
            if t.kind == "eof":
                self.fail("missing --END--")
            if t.kind != "header" or t.text != "State:":
                self.fail(f"expected 'State:', got {t.text or t.kind!r}")
            self.advance()
            if self.cur.kind == "punct" and self.cur.text == "[":
                self.fail("state labels are not supported", self.cur, HoaUnsupportedError)
            idx_tok = self.cur
            idx = self.expect_int()
            if idx >= n_states:
                self.fail(f"state {idx} out of range (States: {n_states})", idx_tok, HoaSemanticError)
            if idx in blocks:
                self.fail(f"state {idx} defined twice", idx_tok, HoaSemanticError)
            sname = None
            if self.cur.kind == "string":
                sname = _unquote(self.advance().text)
            if self.cur.kind == "punct" and self.cur.text == "{":
                self.fail("state-based acceptance is not supported", self.cur, HoaUnsupportedError)
            edges = []
            while not (self.cur.kind in ("header", "marker", "eof")):
                edges.append(self._parse_edge(n_states, n_aps))
            blocks[idx] = HoaState(idx, sname, tuple(edges))
        if self.cur.kind != "eof":
            self.fail("trailing content after --END--", cls=HoaUnsupportedError)
        return tuple(blocks.get(i, HoaState(i)) for i in range(n_states))

    def _parse_edge(self, n_states: int, n_aps: int) -> HoaEdge:
        t = self.cur
        if not (t.kind == "punct" and t.text == "["):
            self.fail("implicit edge labels are not supported", t, HoaUnsupportedError)
        self.advance()
        g = self._parse_or(n_aps)
        self.expect("punct", "]")
        dst_tok = self.cur
        dst = self.expect_int()
        if dst >= n_states:
            self.fail(f"destination state {dst} out of range", dst_tok, HoaSemanticError)
        if self.cur.kind == "punct" and self.cur.text == "&":
            self.fail("alternating transitions are not supported", self.cur, HoaUnsupportedError)
        acc: list[int] = []
        if self.cur.kind == "punct" and self.cur.text == "{":
            self.advance()
            while self.cur.kind == "int":
                at = self.advance()
                if int(at.text) != 0:
                    self.fail(f"acceptance set {at.text} not declared", at, HoaSemanticError)
                acc.append(0)
            self.expect("punct", "}")
        return HoaEdge(g, dst, tuple(sorted(set(acc))))

    def _parse_or(self, n_aps: int) -> Guard:
        parts = [self._parse_and(n_aps)]
        while self.cur.kind == "punct" and self.cur.text == "|":
            self.advance()
            parts.append(self._parse_and(n_aps))
        return parts[0] if len(parts) == 1 else Guard.or_(*parts)

    def _parse_and(self, n_aps: int) -> Guard:
        parts = [self._parse_unary(n_aps)]
        while self.cur.kind == "punct" and self.cur.text == "&":
            self.advance()
            parts.append(self._parse_unary(n_aps))
        return parts[0] if len(parts) == 1 else Guard.and_(*parts)

    def _parse_unary(self, n_aps: int) -> Guard:
        t = self.cur
        if t.kind == "punct" and t.text == "!":
            self.advance()
            return Guard.not_(self._parse_unary(n_aps))
        if t.kind == "punct" and t.text == "(":
            self.advance()
            g = self._parse_or(n_aps)
            self.expect("punct", ")")
            return g
        if t.kind == "int":
            self.advance()
            i = int(t.text)
            if i >= n_aps:
                self.fail(f"atomic proposition {i} out of range (AP: {n_aps})", t, HoaSemanticError)
            return Guard.ap(i)
        if t.kind == "ident" and t.text == "t":
            self.advance()
            return Guard.true()
        if t.kind == "ident" and t.text == "f":
            self.advance()
            return Guard.false()
        if t.kind == "alias":
            self.fail("aliases are not supported", t, HoaUnsupportedError)
        self.fail(f"unexpected {t.text or t.kind!r} in guard")


def parse_hoa(text: str) -> HoaDocument:
    """Parse HOA text, raising a :class:`HoaError` subclass on failure."""
    return _Parser(text).parse()


def read_hoa(path) -> HoaDocument:
    with open(path, encoding="utf-8") as f:
        return parse_hoa(f.read())


def serialize_hoa(doc: HoaDocument) -> str:
    """Canonical text form. Header order is fixed; comments are not kept."""
    lines = ["HOA: v1"]
    if doc.name is not None:
        lines.append(f"name: {_quote(doc.name)}")
    if doc.tool:
        lines.append("tool: " + " ".join(_quote(t) for t in doc.tool))
    lines.append(f"States: {doc.n_states}")
    lines.append(f"Start: {doc.start}")
    lines.append(f"AP: {len(doc.aps)}" + "".join(" " + _quote(a) for a in doc.aps))
    lines.append("acc-name: Buchi")
    lines.append("Acceptance: 1 Inf(0)")
    if doc.properties:
        lines.append("properties: " + " ".join(doc.properties))
    lines.append("--BODY--")
    for st in doc.states:
        head = f"State: {st.index}"
        if st.name is not None:
            head += f" {_quote(st.name)}"
        lines.append(head)
        for e in st.edges:
            s = f"[{format_guard(e.guard)}] {e.target}"
            if e.acc_sets:
                s += " {" + " ".join(str(a) for a in e.acc_sets) + "}"
            lines.append(s)
    lines.append("--END--")
    return "\n".join(lines) + "\n"
