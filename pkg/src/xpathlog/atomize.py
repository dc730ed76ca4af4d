"""Flattening of definite atoms into single-step atoms.

A flat step ``host[axis::test->result]`` has atomic host and result terms.
Intermediate nodes get fresh local variables ``_X1, _X2, ...`` that never
collide with the variables of the enclosing rule.  The output order binds
every local variable before it is used as a host.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .errors import NotAtomizable
from .syntax import (
    NODE_TEST,
    And,
    Bind,
    Compare,
    Const,
    Context,
    KindTest,
    Lit,
    NameTest,
    Path,
    Pred,
    Root,
    Step,
    Var,
    to_text,
    var_path,
    variables,
)
from .xtree import Axis

Term = Union[Var, Const, Lit, Root]


@dataclass(frozen=True)
class FlatStep:
    host: Term
    axis: Axis
    test: Union[NameTest, KindTest, Var]
    result: Term
    index: int | None = None

    def to_ast(self) -> Path:
        return Path(self.host, (Step(self.axis, self.test, (Bind(self.result),), self.index),))

    def __str__(self) -> str:
        test = self.test.name if isinstance(self.test, (NameTest, Var)) else _kind(self.test)
        if self.axis is Axis.ATTRIBUTE and self.index is None:
            where = f"@{test}"
        elif self.axis is Axis.CHILD and self.index is None:
            where = test
        else:
            axis = self.axis.value if self.index is None else f"{self.axis.value}({self.index})"
            where = f"{axis}::{test}"
        return f"{_show(self.host)}[{where}->{_show(self.result)}]"


@dataclass(frozen=True)
class FlatPred:
    name: str
    args: tuple[Term, ...]

    def to_ast(self) -> Pred:
        return Pred(self.name, tuple(_term_ast(a) for a in self.args))

    def __str__(self) -> str:
        return f"{self.name}({', '.join(_show(a) for a in self.args)})"


@dataclass(frozen=True)
class FlatCompare:
    op: str
    lhs: Term
    rhs: Term

    def to_ast(self) -> Compare:
        return Compare(self.op, _term_ast(self.lhs), _term_ast(self.rhs))

    def __str__(self) -> str:
        return f"{_show(self.lhs)} {self.op} {_show(self.rhs)}"


FlatAtom = Union[FlatStep, FlatPred, FlatCompare]


def _kind(t: KindTest) -> str:
    return "*" if t.kind == "*" else f"{t.kind}()"


def _show(t: Term) -> str:
    if isinstance(t, Root):
        return "root"
    return to_text(t)


def _term_ast(t: Term) -> object:
    if isinstance(t, Var):
        return var_path(t.name)
    if isinstance(t, Lit):
        return t
    return Path(t)


class Fresh:
    """Generator of ``_X<n>`` names avoiding a set of taken names."""

    def __init__(self, taken: Iterable[str] = ()) -> None:
        self.taken = set(taken)
        self.n = 0
        self.made: list[str] = []

    def __call__(self) -> Var:
        while True:
            self.n += 1
            name = f"_X{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                self.made.append(name)
                return Var(name)


class _Atomizer:
    def __init__(self, fresh: Fresh) -> None:
        self.fresh = fresh
        self.out: list[FlatAtom] = []

    def path(self, p: Path, host: Term) -> Term:
        entry = p.entry
        if isinstance(entry, Root):
            current: Term = Root()
        elif isinstance(entry, (Var, Const)):
            current = entry
        elif isinstance(entry, Context):
            current = host
        else:
            raise NotAtomizable(f"entry {to_text(p)}")
        steps = list(p.steps)
        i = 0
        while i < len(steps):
            step = steps[i]
            nxt = steps[i + 1] if i + 1 < len(steps) else None
            if (
                step.axis is Axis.DESCENDANT_OR_SELF
                and step.test == NODE_TEST
                and not step.ops
                and nxt is not None
                and nxt.axis is Axis.CHILD
                and nxt.index is None
            ):
                step = Step(Axis.DESCENDANT, nxt.test, nxt.ops)
                i += 1
            current = self.step(step, current, last=i == len(steps) - 1)
            i += 1
        return current

    def step(self, step: Step, host: Term, last: bool) -> Term:
        if step.axis is Axis.SELF and step.test == NODE_TEST and not step.binds and step.index is None:
            for q in step.filters:
                self.qual(q, host)
            return host
        binds = step.binds
        var_binds = [b for b in binds if isinstance(b, Var)]
        if var_binds:
            result: Term = var_binds[0]
        elif last and len(step.ops) == 1 and binds:
            result = binds[0]
        else:
            result = self.fresh()
        self.out.append(FlatStep(host, step.axis, step.test, result, step.index))
        for op in step.ops:
            if isinstance(op, Bind):
                if op.target != result:
                    self.out.append(FlatCompare("=", result, op.target))
            else:
                self.qual(op.qual, result)
        return result

    def qual(self, q: object, host: Term) -> None:
        if isinstance(q, And):
            for item in q.items:
                self.qual(item, host)
        elif isinstance(q, Path):
            self.path(q, host)
        elif isinstance(q, Compare):
            lhs = self.term(q.lhs, host)
            rhs = self.term(q.rhs, host)
            self.out.append(FlatCompare(q.op, lhs, rhs))
        elif isinstance(q, Pred):
            self.out.append(FlatPred(q.name, tuple(self.term(a, host) for a in q.args)))
        else:
            raise NotAtomizable(type(q).__name__)

    def term(self, t: object, host: Term) -> Term:
        if isinstance(t, Lit):
            return t
        if isinstance(t, Path):
            if not t.steps and isinstance(t.entry, (Var, Const)):
                return t.entry
            if not t.steps and isinstance(t.entry, Context):
                return host
            return self.path(t, host)
        raise NotAtomizable(type(t).__name__)


def atomize(atom: object, fresh: Fresh | None = None) -> list[FlatAtom]:
    """Resolve ``atom`` into flat atoms in birth-before-use order."""
    fresh = fresh or Fresh(variables(atom))
    a = _Atomizer(fresh)
    if isinstance(atom, Path):
        a.path(atom, Root())
    else:
        a.qual(atom, Root())
    return a.out


def atomize_all(atoms: Iterable[object], taken: Iterable[str] = ()) -> list[FlatAtom]:
    """Atomize a conjunction with one shared fresh-variable counter."""
    atoms = list(atoms)
    fresh = Fresh(set(taken) | set(variables(*atoms)))
    out: list[FlatAtom] = []
    for atom in atoms:
        out.extend(atomize(atom, fresh))
    return out


def render(flat: Iterable[FlatAtom]) -> str:
    return ", ".join(str(f) for f in flat)
