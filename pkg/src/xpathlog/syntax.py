"""AST node classes and the pretty-printer.

Abbreviations are expanded by the parser, so the printer always writes
explicit axes; ``parse(to_text(x)) == x`` holds for every parsed AST.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Union

from .xtree import Axis


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Union[str, int, float]


@dataclass(frozen=True)
class Root:
    pass


@dataclass(frozen=True)
class Context:
    pass


@dataclass(frozen=True)
class Document:
    source: str


@dataclass(frozen=True)
class NameTest:
    name: str


@dataclass(frozen=True)
class KindTest:
    kind: str  # "text", "node" or "*"


TEXT_TEST = KindTest("text")
NODE_TEST = KindTest("node")
ANY_TEST = KindTest("*")


@dataclass(frozen=True)
class Filter:
    qual: "Qual"


@dataclass(frozen=True)
class Bind:
    target: Union[Var, Lit]


@dataclass(frozen=True)
class Step:
    axis: Axis
    test: Union[NameTest, KindTest, Var]
    ops: tuple[Union[Filter, Bind], ...] = ()
    index: int | None = None

    @property
    def filters(self) -> list["Qual"]:
        return [op.qual for op in self.ops if isinstance(op, Filter)]

    @property
    def binds(self) -> list[Union[Var, Lit]]:
        return [op.target for op in self.ops if isinstance(op, Bind)]


Entry = Union[Root, Context, Document, Const, Var]


@dataclass(frozen=True)
class Path:
    entry: Entry
    steps: tuple[Step, ...] = ()


@dataclass(frozen=True)
class Func:
    name: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Arith:
    op: str
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class ContextFn:
    name: str  # "position" or "last"


Term = Union[Lit, Path, Func, Arith, ContextFn]


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Not:
    item: "Qual"


@dataclass(frozen=True)
class And:
    items: tuple["Qual", ...]


Qual = Union[Path, Compare, Pred, Not, And]
Atom = Union[Path, Compare, Pred]
Literal = Union[Atom, Not]


@dataclass(frozen=True)
class Rule:
    head: tuple[Atom, ...]
    body: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class Query:
    body: tuple[Literal, ...]


@dataclass(frozen=True)
class StratumBreak:
    pass


@dataclass(frozen=True)
class Program:
    strata: tuple[tuple[Rule, ...], ...]

    @property
    def rules(self) -> list[Rule]:
        return [r for stratum in self.strata for r in stratum]


COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=")
RESERVED_VARS = frozenset({"Pos", "Size"})


def var_path(name: str) -> Path:
    return Path(Var(name))


# -- traversal ---------------------------------------------------------------


def children_of(node: object) -> Iterator[object]:
    if isinstance(node, Path):
        if isinstance(node.entry, Var):
            yield node.entry
        yield from node.steps
    elif isinstance(node, Step):
        if isinstance(node.test, Var):
            yield node.test
        for op in node.ops:
            yield op.qual if isinstance(op, Filter) else op.target
    elif isinstance(node, (Compare, Arith)):
        yield node.lhs
        yield node.rhs
    elif isinstance(node, (Pred, Func)):
        yield from node.args
    elif isinstance(node, Not):
        yield node.item
    elif isinstance(node, And):
        yield from node.items
    elif isinstance(node, (Rule,)):
        yield from node.head
        yield from node.body
    elif isinstance(node, Query):
        yield from node.body


def walk(node: object) -> Iterator[object]:
    yield node
    for child in children_of(node):
        yield from walk(child)


def variables(*nodes: object) -> list[str]:
    """Variable names in first-occurrence order."""
    seen: dict[str, None] = {}
    for node in nodes:
        for sub in walk(node):
            if isinstance(sub, Var):
                seen.setdefault(sub.name, None)
    return list(seen)


def uses_context_functions(node: object) -> bool:
    return any(isinstance(sub, ContextFn) for sub in walk(node))


# -- printing ----------------------------------------------------------------


def _lit(v: object) -> str:
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _test(t: object) -> str:
    if isinstance(t, NameTest):
        return t.name
    if isinstance(t, Var):
        return t.name
    return "*" if t.kind == "*" else f"{t.kind}()"


def _step(s: Step) -> str:
    axis = s.axis.value if s.index is None else f"{s.axis.value}({s.index})"
    out = f"{axis}::{_test(s.test)}"
    for op in s.ops:
        out += f"[{to_text(op.qual)}]" if isinstance(op, Filter) else f"->{to_text(op.target)}"
    return out


def _term(t: object) -> str:
    text = to_text(t)
    return f"({text})" if isinstance(t, Arith) else text


def to_text(node: object) -> str:
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Lit):
        return _lit(node.value)
    if isinstance(node, Path):
        steps = "/".join(_step(s) for s in node.steps)
        e = node.entry
        if isinstance(e, Root):
            return "/" + steps
        if isinstance(e, Context):
            return steps
        head = f"document({_lit(e.source)})" if isinstance(e, Document) else e.name
        return head + "".join("/" + _step(s) for s in node.steps)
    if isinstance(node, Step):
        return _step(node)
    if isinstance(node, Compare):
        return f"{_term(node.lhs)} {node.op} {_term(node.rhs)}"
    if isinstance(node, Arith):
        return f"{_term(node.lhs)} {node.op} {_term(node.rhs)}"
    if isinstance(node, (Pred, Func)):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, ContextFn):
        return f"{node.name}()"
    if isinstance(node, Not):
        inner = to_text(node.item)
        return f"not({inner})" if isinstance(node.item, And) else f"not {inner}"
    if isinstance(node, And):
        return " and ".join(to_text(i) for i in node.items)
    if isinstance(node, Rule):
        head = ", ".join(to_text(a) for a in node.head)
        if not node.body:
            return head + "."
        return f"{head} :- {', '.join(to_text(b) for b in node.body)}."
    if isinstance(node, Query):
        return f"?- {', '.join(to_text(b) for b in node.body)}."
    if isinstance(node, Program):
        return "\n%% stratum\n".join(
            "\n".join(to_text(r) for r in stratum) for stratum in node.strata
        ) + "\n"
    raise TypeError(f"cannot print {node!r}")
