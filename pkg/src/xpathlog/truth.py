"""Reference semantics under a fixed variable assignment.

Every variable is looked up in ``beta``; nothing is propagated or joined.
This module deliberately shares no code with :mod:`xpathlog.evaluate`, so the
two can be cross-checked against each other.
"""

from __future__ import annotations

from itertools import product
from typing import Mapping

from .errors import UnboundVariable, XPathLogError
from .functions import FUNCTIONS, arithmetic, call, compare
from .syntax import (
    And,
    Arith,
    Bind,
    Compare,
    Const,
    Context,
    ContextFn,
    Document,
    Func,
    KindTest,
    Lit,
    NameTest,
    Not,
    Path,
    Pred,
    Root,
    Step,
    Var,
)
from .xmlio import document_root
from .xtree import ROOT, TEXT, Node, Value, XStructure

Assignment = Mapping[str, Value]
Frame = tuple[int, int] | None  # (position, size) of the innermost filter


class Truth:
    def __init__(self, s: XStructure, root: Node = ROOT, base_dir=None) -> None:
        self.s = s
        self.root = root
        self.base_dir = base_dir

    def lookup(self, beta: Assignment, name: str) -> Value:
        if name not in beta:
            raise UnboundVariable(name)
        return beta[name]

    # S: expressions to value lists

    def results(self, e: object, x: Value, beta: Assignment, frame: Frame = None, root: Node | None = None) -> list[Value]:
        root = self.root if root is None else root
        if isinstance(e, Lit):
            return [e.value]
        if isinstance(e, ContextFn):
            if frame is None:
                raise UnboundVariable(f"{e.name}()")
            return [frame[0] if e.name == "position" else frame[1]]
        if isinstance(e, Arith):
            out = []
            for a in self.results(e.lhs, x, beta, frame, root):
                for b in self.results(e.rhs, x, beta, frame, root):
                    v = arithmetic(e.op, self.s.literal_value(a), self.s.literal_value(b))
                    if v is not None:
                        out.append(v)
            return out
        if isinstance(e, Func):
            lists = [self.results(a, x, beta, frame, root) for a in e.args]
            return [v for combo in product(*lists) if (v := call(self.s, e.name, x, list(combo))) is not None]
        if isinstance(e, Path):
            return self.path(e, x, beta, frame, root)
        raise TypeError(e)

    def path(self, p: Path, x: Value, beta: Assignment, frame: Frame, root: Node) -> list[Value]:
        entry = p.entry
        if isinstance(entry, Context):
            current = [x]
        elif isinstance(entry, Root):
            current = [root]
        elif isinstance(entry, Document):
            root = document_root(self.s, entry.source, self.base_dir)
            current = [root]
        elif isinstance(entry, Const):
            if entry.name not in self.s.constants:
                raise XPathLogError(f"unknown constant {entry.name}")
            current = [self.s.constants[entry.name]]
        else:
            current = [self.lookup(beta, entry.name)]
        for step in p.steps:
            current = [v for y in current for v in self.step(step, y, beta, root)]
        return current

    def test(self, t: object, v: Value, n: str, beta: Assignment) -> bool:
        if isinstance(t, Var):
            return n == self.lookup(beta, t.name)
        if isinstance(t, NameTest):
            return n == t.name
        assert isinstance(t, KindTest)
        if t.kind == "node":
            return isinstance(v, Node)
        if t.kind == "text":
            return not isinstance(v, Node)
        return n != TEXT and v != ROOT

    def step(self, step: Step, y: Value, beta: Assignment, root: Node) -> list[Value]:
        if not isinstance(y, Node) or y not in self.s:
            return []
        listing = [v for v, n in self.s.axis_members(step.axis, y) if self.test(step.test, v, n, beta)]
        for op in step.ops:
            if isinstance(op, Bind):
                if isinstance(op.target, Var):
                    want = self.lookup(beta, op.target.name)
                    listing = [v for v in listing if v == want]
                else:
                    listing = [v for v in listing if compare(self.s, "=", v, op.target.value)]
            else:
                size = len(listing)
                kept = []
                # proximity position: k from the end in document order for
                # backward axes, whose member lists run in reverse document order
                for k, v in enumerate(listing, 1):
                    pos = k
                    if self.holds(op.qual, v, beta, (pos, size), root):
                        kept.append(v)
                listing = kept
        return listing

    # Q: qualifiers to truth values

    def holds(self, q: object, y: Value, beta: Assignment, frame: Frame = None, root: Node | None = None) -> bool:
        root = self.root if root is None else root
        if isinstance(q, Path):
            return bool(self.path(q, y, beta, frame, root))
        if isinstance(q, And):
            return all(self.holds(i, y, beta, frame, root) for i in q.items)
        if isinstance(q, Not):
            return not self.holds(q.item, y, beta, frame, root)
        if isinstance(q, Compare):
            left = self.results(q.lhs, y, beta, frame, root)
            right = self.results(q.rhs, y, beta, frame, root)
            return any(compare(self.s, q.op, a, b) for a in left for b in right)
        if isinstance(q, Pred):
            lists = [self.results(a, y, beta, frame, root) for a in q.args]
            if q.name in FUNCTIONS:
                return any(call(self.s, q.name, y, list(combo)) for combo in product(*lists))
            return any(
                len(fact) == len(lists)
                and all(any(compare(self.s, "=", v, f) for v in vs) for vs, f in zip(lists, fact))
                for fact in self.s.facts(q.name)
            )
        raise TypeError(q)


def eval_results(s: XStructure, e: object, x: Value, beta: Assignment) -> list[Value]:
    """Result list of ``e`` at ``x`` under the total assignment ``beta``."""
    return Truth(s).results(e, x, beta)


def eval_truth(s: XStructure, atom: object, beta: Assignment, root: Node = ROOT) -> bool:
    """Whether ``atom`` holds at the root under ``beta``."""
    return Truth(s, root).holds(atom, root, beta)
