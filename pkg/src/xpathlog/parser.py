"""Lexer and recursive-descent parser for XPathLog programs and queries."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import XPathLogSyntaxError
from .functions import FUNCTIONS
from .syntax import (
    ANY_TEST,
    COMPARE_OPS,
    NODE_TEST,
    RESERVED_VARS,
    TEXT_TEST,
    And,
    Arith,
    Bind,
    Compare,
    Const,
    Context,
    ContextFn,
    Document,
    Filter,
    Func,
    Lit,
    NameTest,
    Not,
    Path,
    Pred,
    Query,
    Root,
    Rule,
    Step,
    StratumBreak,
    Var,
    walk,
)
from .xtree import Axis


@dataclass(frozen=True)
class Token:
    kind: str  # NAME VAR STRING NUMBER SYM END STRATUM EOF
    text: str
    line: int
    col: int


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*(?:[.:\-][A-Za-z0-9_]+)*"
_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<stratum>%%[ \t]*stratum\b[^\n]*)
  | (?P<comment>%[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>""" + _IDENT + r""")
  | (?P<sym>\?-|:-|::|->|//|\.\.|!=|<=|>=|[/\.@\[\]\(\),=<>+\-*|])
    """,
    re.VERBOSE,
)

_AXES = {a.value: a for a in Axis}
_POSITIONAL_AXES = {Axis.CHILD, Axis.FOLLOWING_SIBLING, Axis.PRECEDING_SIBLING}
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "'": "'", "\\": "\\"}


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), text[1:-1])


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    depth = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise XPathLogSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "stratum":
            tokens.append(Token("STRATUM", lexeme, line, col))
        elif kind == "string":
            tokens.append(Token("STRING", lexeme, line, col))
        elif kind == "number":
            tokens.append(Token("NUMBER", lexeme, line, col))
        elif kind == "ident":
            tok = "VAR" if lexeme[0].isupper() or lexeme[0] == "_" else "NAME"
            tokens.append(Token(tok, lexeme, line, col))
        elif kind == "sym":
            if lexeme in "[(":
                depth += 1
            elif lexeme in "])":
                depth = max(depth - 1, 0)
            elif lexeme == "." and depth == 0:
                # inside brackets "." is always the context step
                nxt = text[m.end():m.end() + 1]
                if nxt == "" or nxt.isspace() or nxt == "%":
                    tokens.append(Token("END", ".", line, col))
                    pos = m.end()
                    continue
            tokens.append(Token("SYM", lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_sym(self, *texts: str) -> bool:
        return self.tok.kind == "SYM" and self.tok.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept_sym(self, text: str) -> bool:
        if self.at_sym(text):
            self.i += 1
            return True
        return False

    def error(self, expected: str, message: str | None = None) -> XPathLogSyntaxError:
        t = self.tok
        found = t.text or "end of input"
        return XPathLogSyntaxError(message or f"expected {expected}, found {found!r}", t.line, t.col, expected)

    def expect_sym(self, text: str) -> Token:
        if not self.at_sym(text):
            raise self.error(f"'{text}'")
        return self.advance()

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(what)
        return self.advance()

    # -- statements -------------------------------------------------------

    def statements(self) -> list[object]:
        out: list[object] = []
        while not self.at("EOF"):
            if self.at("STRATUM"):
                self.advance()
                out.append(StratumBreak())
                continue
            out.append(self.statement())
        return out

    def statement(self) -> Rule | Query:
        start = self.tok
        if self.accept_sym("?-"):
            body = self.literals()
            self.expect("END", "'.'")
            self._no_positions(body, start)
            return Query(tuple(body))
        head = [self.atom()]
        while self.accept_sym(","):
            head.append(self.atom())
        body: list[object] = []
        if self.accept_sym(":-"):
            body = self.literals()
            self._no_positions(body, start)
        self.expect("END", "'.'")
        return Rule(tuple(head), tuple(body))

    def _no_positions(self, items: list[object], where: Token) -> None:
        for item in items:
            for sub in walk(item):
                if isinstance(sub, Step) and sub.index is not None:
                    raise XPathLogSyntaxError(
                        f"positional axis {sub.axis.value}({sub.index}) is only allowed in rule heads",
                        where.line, where.col, "axis without position",
                    )

    def literals(self) -> list[object]:
        out = [self.literal()]
        while self.accept_sym(","):
            out.append(self.literal())
        return out

    def literal(self) -> object:
        if self.at("NAME", "not"):
            self.advance()
            return Not(self.atom())
        return self.atom()

    def atom(self) -> object:
        t = self.tok
        node = self.comparison(top=True)
        if isinstance(node, Func):
            if not FUNCTIONS[node.name].boolean:
                raise XPathLogSyntaxError(f"{node.name}() is not a condition", t.line, t.col, "atom")
            return Pred(node.name, node.args)
        if not isinstance(node, (Path, Compare, Pred)):
            raise XPathLogSyntaxError("expected a path, predicate or comparison", t.line, t.col, "atom")
        return node

    # -- qualifiers -------------------------------------------------------

    def qualifier(self) -> object:
        items = [self.qual_not()]
        while self.at("NAME", "and"):
            self.advance()
            items.append(self.qual_not())
        if self.at("NAME", "or"):
            raise self.error("'and' or ']'", "disjunction is not supported in qualifiers")
        return items[0] if len(items) == 1 else And(tuple(items))

    def qual_not(self) -> object:
        if self.at("NAME", "not"):
            self.advance()
            return Not(self.qual_not())
        if self.at_sym("("):
            grouped = self._grouped_qualifier()
            if grouped is not None:
                return grouped
        t = self.tok
        node = self.comparison(top=False)
        if isinstance(node, Lit) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Compare("=", ContextFn("position"), node)
        if node == ContextFn("last"):
            return Compare("=", ContextFn("position"), node)
        if isinstance(node, Func):
            if not FUNCTIONS[node.name].boolean:
                raise XPathLogSyntaxError(f"{node.name}() is not a condition", t.line, t.col, "qualifier")
            return Pred(node.name, node.args)
        if not isinstance(node, (Path, Compare, Pred)):
            raise XPathLogSyntaxError("expected a condition", t.line, t.col, "qualifier")
        return node

    def _grouped_qualifier(self) -> object | None:
        # "(cond and cond)" or "not(x = 1)"; falls back to a parenthesized term
        start = self.i
        self.advance()
        try:
            inner = self.qualifier()
            self.expect_sym(")")
        except XPathLogSyntaxError:
            self.i = start
            return None
        if self.at_sym(*COMPARE_OPS, "+", "-", "*") or self.at("NAME", "div") or self.at("NAME", "mod"):
            self.i = start
            return None
        return inner

    # -- terms ------------------------------------------------------------

    def comparison(self, top: bool) -> object:
        lhs = self.additive(top)
        if self.at_sym(*COMPARE_OPS):
            op = self.advance().text
            rhs = self.additive(top)
            self._term_only(lhs)
            self._term_only(rhs)
            return Compare(op, lhs, rhs)
        return lhs

    def _term_only(self, node: object) -> None:
        if isinstance(node, Pred):
            raise self.error("term", f"predicate {node.name}() cannot be used as a value")

    def additive(self, top: bool) -> object:
        node = self.multiplicative(top)
        while self.at_sym("+", "-"):
            op = self.advance().text
            rhs = self.multiplicative(top)
            self._term_only(node)
            self._term_only(rhs)
            node = Arith(op, node, rhs)
        return node

    def multiplicative(self, top: bool) -> object:
        node = self.unary(top)
        while self.at_sym("*") or self.at("NAME", "div") or self.at("NAME", "mod"):
            op = self.advance().text
            rhs = self.unary(top)
            self._term_only(node)
            self._term_only(rhs)
            node = Arith(op, node, rhs)
        return node

    def unary(self, top: bool) -> object:
        if self.at_sym("-"):
            self.advance()
            if self.at("NUMBER"):
                return Lit(-self._number(self.advance()))
            return Arith("-", Lit(0), self.unary(top))
        return self.primary(top)

    @staticmethod
    def _number(t: Token) -> int | float:
        return float(t.text) if "." in t.text else int(t.text)

    def primary(self, top: bool) -> object:
        t = self.tok
        if t.kind == "STRING":
            self.advance()
            return Lit(_unquote(t.text))
        if t.kind == "NUMBER":
            self.advance()
            return Lit(self._number(t))
        if self.at_sym("("):
            self.advance()
            node = self.additive(top)
            self.expect_sym(")")
            return node
        if t.kind == "NAME" and self.peek().kind == "SYM" and self.peek().text == "(":
            if t.text in ("position", "last"):
                self.advance()
                self.expect_sym("(")
                self.expect_sym(")")
                return ContextFn(t.text)
            if not (t.text in ("text", "node", "document") or self._axis_ahead()):
                return self.call(top)
        if t.kind in ("NAME", "VAR") or self.at_sym("/", "//", "@", ".", "..", "*"):
            return self.path(top)
        raise self.error("expression")

    def call(self, top: bool = True) -> object:
        name_tok = self.advance()
        name = name_tok.text
        self.expect_sym("(")
        args: list[object] = []
        if not self.at_sym(")"):
            args.append(self.additive(top))
            while self.accept_sym(","):
                args.append(self.additive(top))
        self.expect_sym(")")
        for a in args:
            self._term_only(a)
        fn = FUNCTIONS.get(name)
        if fn is None:
            return Pred(name, tuple(args))
        if len(args) < fn.min_args or (fn.max_args is not None and len(args) > fn.max_args):
            raise XPathLogSyntaxError(
                f"{name}() takes {fn.min_args}..{fn.max_args or 'n'} arguments, got {len(args)}",
                name_tok.line, name_tok.col, "argument list",
            )
        return Func(name, tuple(args))

    # -- paths ------------------------------------------------------------

    def _axis_ahead(self) -> bool:
        t = self.tok
        if t.kind != "NAME" or t.text not in _AXES:
            return False
        nxt = self.peek()
        if nxt.kind == "SYM" and nxt.text == "::":
            return True
        return (
            nxt.kind == "SYM" and nxt.text == "("
            and self.peek(2).kind == "NUMBER"
            and self.peek(3).kind == "SYM" and self.peek(3).text == ")"
            and self.peek(4).kind == "SYM" and self.peek(4).text == "::"
        )

    def _step_ahead(self) -> bool:
        t = self.tok
        return t.kind in ("NAME", "VAR") or self.at_sym("@", ".", "..", "*")

    def path(self, top: bool) -> Path:
        if self.accept_sym("/"):
            return Path(Root(), tuple(self.relative()) if self._step_ahead() else ())
        if self.accept_sym("//"):
            return Path(Root(), (Step(Axis.DESCENDANT_OR_SELF, NODE_TEST), *self.relative()))
        t = self.tok
        entry: object | None = None
        if t.kind == "VAR" and (top or not (self.peek().kind == "SYM" and self.peek().text in ("->", "[", "/", "//"))):
            # inside qualifiers `S->V` / `S/...` is a name-variable child step
            entry = Var(self._var_name(self.advance()))
        elif t.kind == "NAME" and t.text == "document" and self.peek().text == "(":
            self.advance()
            self.expect_sym("(")
            src = self.expect("STRING", "document source string")
            self.expect_sym(")")
            entry = Document(_unquote(src.text))
        elif top and t.kind == "NAME" and not self._axis_ahead() and t.text not in ("text", "node"):
            entry = Const(self.advance().text)
        if entry is None:
            return Path(Context(), tuple(self.relative()))
        steps: list[Step] = []
        ops = self.ops()
        if ops:
            steps.append(Step(Axis.SELF, NODE_TEST, tuple(ops)))
        if self.at_sym("/", "//"):
            steps.extend(self.continuation())
        return Path(entry, tuple(steps))

    def continuation(self) -> list[Step]:
        steps: list[Step] = []
        while self.at_sym("/", "//"):
            if self.advance().text == "//":
                steps.append(Step(Axis.DESCENDANT_OR_SELF, NODE_TEST))
            steps.append(self.step())
        return steps

    def relative(self) -> list[Step]:
        return [self.step(), *self.continuation()]

    def _var_name(self, t: Token) -> str:
        if t.text in RESERVED_VARS:
            raise XPathLogSyntaxError(f"{t.text} is a reserved variable name", t.line, t.col, "variable")
        return t.text

    def step(self) -> Step:
        index: int | None = None
        if self.accept_sym("."):
            return Step(Axis.SELF, NODE_TEST, tuple(self.ops()))
        if self.accept_sym(".."):
            return Step(Axis.PARENT, NODE_TEST, tuple(self.ops()))
        if self.accept_sym("@"):
            axis = Axis.ATTRIBUTE
        elif self._axis_ahead():
            axis_tok = self.advance()
            axis = _AXES[axis_tok.text]
            if self.accept_sym("("):
                index = int(self.expect("NUMBER", "position").text)
                self.expect_sym(")")
                if axis not in _POSITIONAL_AXES:
                    raise XPathLogSyntaxError(
                        f"axis {axis.value} takes no position", axis_tok.line, axis_tok.col, "axis"
                    )
            self.expect_sym("::")
        else:
            axis = Axis.CHILD
        test = self.node_test()
        return Step(axis, test, tuple(self.ops()), index)

    def node_test(self) -> object:
        t = self.tok
        if self.accept_sym("*"):
            return ANY_TEST
        if t.kind == "VAR":
            self.advance()
            return Var(self._var_name(t))
        if t.kind == "NAME":
            self.advance()
            if t.text in ("text", "node") and self.at_sym("("):
                self.advance()
                self.expect_sym(")")
                return TEXT_TEST if t.text == "text" else NODE_TEST
            return NameTest(t.text)
        raise self.error("node test")

    def ops(self) -> list[object]:
        ops: list[object] = []
        while True:
            if self.accept_sym("["):
                ops.append(Filter(self.qualifier()))
                self.expect_sym("]")
            elif self.accept_sym("->"):
                ops.append(Bind(self.bind_target()))
            else:
                return ops

    def bind_target(self) -> object:
        t = self.tok
        if t.kind == "VAR":
            self.advance()
            return Var(self._var_name(t))
        if t.kind == "STRING":
            self.advance()
            return Lit(_unquote(t.text))
        if t.kind == "NUMBER":
            self.advance()
            return Lit(self._number(t))
        if self.at_sym("-") and self.peek().kind == "NUMBER":
            self.advance()
            return Lit(-self._number(self.advance()))
        raise self.error("variable or literal after '->'")


def parse_statements(text: str) -> list[object]:
    """Rules, queries and stratum breaks, in source order."""
    return Parser(text).statements()


def parse_query(text: str) -> list[object]:
    """Parse ``?- L1, ..., Ln.`` (the ``?-`` prefix and final dot are optional)."""
    body = text.strip()
    if not body.startswith("?-"):
        body = "?- " + body
    if not body.endswith(".") or body.endswith(".."):
        body += " ."
    items = parse_statements(body)
    if len(items) != 1 or not isinstance(items[0], Query):
        raise XPathLogSyntaxError("expected exactly one query", 1, 1, "query")
    return list(items[0].body)


def parse_atom(text: str) -> object:
    """Parse a single atom as it may appear in a head or body."""
    p = Parser(text.strip().rstrip(".") + " .")
    node = p.atom()
    p.expect("END", "end of atom")
    if not p.at("EOF"):
        raise p.error("end of input")
    return node
