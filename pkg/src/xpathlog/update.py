"""Constructive head semantics: insertion plans and the batch extension operator.

A plan is the atomized head with the body assignment substituted.  Local
variables stay symbolic (:class:`Local`) until the atom that gives birth to
them creates a fresh node.

Positional insertions inside one batch are resolved against the child lists
as they were when the batch first touched each host, so ``child(i)`` always
means "after the i-th *original* child" no matter what else the batch did.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .atomize import FlatAtom, FlatCompare, FlatPred, FlatStep, Fresh, atomize
from .errors import (
    HostUnknown,
    IndexOutOfRange,
    InsertionError,
    UnboundHeadVariable,
    UnsupportedFusion,
)
from .syntax import Const, KindTest, Lit, NameTest, Root, Var, variables
from .xtree import ROOT, TEXT, Axis, Edge, Name, Node, Value, XStructure, show


@dataclass(frozen=True)
class Local:
    """A head-only variable, bound when its birth atom creates a node."""

    name: str

    def __str__(self) -> str:
        return self.name


Ground = Union[Value, Local, Const]


@dataclass(frozen=True)
class InsertStep:
    host: Ground
    axis: Axis
    name: Ground  # a Name, TEXT, or a Local standing for one (never in practice)
    result: Ground
    index: int | None = None

    def __str__(self) -> str:
        axis = self.axis.value if self.index is None else f"{self.axis.value}({self.index})"
        return f"{_show(self.host)}[{axis}::{_show(self.name)}->{_show(self.result)}]"


@dataclass(frozen=True)
class InsertPred:
    name: str
    args: tuple[Ground, ...]

    def __str__(self) -> str:
        return f"{self.name}({', '.join(_show(a) for a in self.args)})"


@dataclass(frozen=True)
class InsertEqual:
    lhs: Ground
    rhs: Ground

    def __str__(self) -> str:
        return f"{_show(self.lhs)} = {_show(self.rhs)}"


InsertionAtom = Union[InsertStep, InsertPred, InsertEqual]
Plan = list[InsertionAtom]


def _show(v: object) -> str:
    if isinstance(v, (Local, Const)):
        return v.name
    return show(v)


# -- instantiation -----------------------------------------------------------


def instantiate_head(head: Sequence[object], beta: Mapping[str, Value]) -> Plan:
    """Atomize ``head`` and substitute ``beta``; head-only variables stay local."""
    fresh = Fresh(set(variables(*head)) | set(beta))
    flat: list[FlatAtom] = []
    for atom in head:
        flat.extend(atomize(atom, fresh))
    locals_ = set(fresh.made)
    flat = _substitute_equalities(flat, locals_)

    def ground(t: object) -> Ground:
        if isinstance(t, Var):
            if t.name in locals_:
                return Local(t.name)
            if t.name not in beta:
                raise UnboundHeadVariable(t.name)
            return beta[t.name]
        if isinstance(t, Lit):
            return t.value
        if isinstance(t, Root):
            return ROOT
        if isinstance(t, Const):
            return t
        raise TypeError(t)

    plan: Plan = []
    for f in flat:
        if isinstance(f, FlatStep):
            test = f.test
            if isinstance(test, NameTest):
                name: Ground = Name(test.name)
            elif isinstance(test, KindTest):
                if test.kind != "text":
                    raise InsertionError(f"cannot insert under node test {test.kind}")
                name = TEXT
            else:
                bound = ground(test)
                name = Name(bound) if isinstance(bound, str) else bound
            plan.append(InsertStep(ground(f.host), f.axis, name, ground(f.result), f.index))
        elif isinstance(f, FlatPred):
            plan.append(InsertPred(f.name, tuple(ground(a) for a in f.args)))
        elif isinstance(f, FlatCompare):
            if f.op != "=":
                raise InsertionError(f"comparison {f.op} in a head")
            plan.append(InsertEqual(ground(f.lhs), ground(f.rhs)))
    return plan


def _substitute_equalities(flat: list[FlatAtom], locals_: set[str]) -> list[FlatAtom]:
    # "local = term" in a head names the local's value instead of fusing nodes
    subst: dict[str, object] = {}

    def find(t: object) -> object:
        while isinstance(t, Var) and t.name in subst:
            t = subst[t.name]
        return t

    kept: list[FlatAtom] = []
    for f in flat:
        if isinstance(f, FlatCompare) and f.op == "=":
            lhs, rhs = find(f.lhs), find(f.rhs)
            if lhs == rhs:
                continue
            if isinstance(rhs, Var) and rhs.name in locals_:
                subst[rhs.name] = lhs
                continue
            if isinstance(lhs, Var) and lhs.name in locals_:
                subst[lhs.name] = rhs
                continue
        kept.append(f)
    if not subst:
        return kept
    out: list[FlatAtom] = []
    for f in kept:
        if isinstance(f, FlatStep):
            test = find(f.test) if isinstance(f.test, Var) else f.test
            out.append(FlatStep(find(f.host), f.axis, test, find(f.result), f.index))
        elif isinstance(f, FlatPred):
            out.append(FlatPred(f.name, tuple(find(a) for a in f.args)))
        else:
            out.append(FlatCompare(f.op, find(f.lhs), find(f.rhs)))
    return out


# -- the extension operator ---------------------------------------------------


class Batch:
    """One application of the extension operator to ``s`` (mutated in place)."""

    def __init__(self, s: XStructure) -> None:
        self.s = s
        self.original: dict[int, list[Edge]] = {}
        # last edge placed into each (host, slot), so later atoms follow it
        self.cursor: dict[tuple[int, int], Edge] = {}

    def touch(self, x: Node) -> list[Edge]:
        if x.id not in self.original:
            self.original[x.id] = list(self.s.children(x))
        return self.original[x.id]

    def insert_child(self, x: Node, name: str, value: Value, index: int | None) -> None:
        orig = self.touch(x)
        if index is None or index > len(orig):
            self.s.add_child(x, name, value)
            return
        if index < 0:
            raise IndexOutOfRange(f"child({index}) on {x}")
        current = self.s.children(x)
        anchor = self.cursor.get((x.id, index))
        if anchor is None and index > 0:
            anchor = orig[index - 1]
        at = 0 if anchor is None else _position(current, anchor) + 1
        self.cursor[(x.id, index)] = self.s.add_child(x, name, value, at=at)

    def insert_sibling(self, h: Node, axis: Axis, name: str, value: Value, j: int | None) -> None:
        parents = self.s.parents(h)
        if not parents:
            raise HostUnknown(f"{h} has no parent for a sibling insertion")
        if len(parents) > 1:
            warnings.warn(f"{h} has {len(parents)} parents; inserting sibling under {parents[0]}", stacklevel=3)
        p = parents[0]
        orig = self.touch(p)
        following = axis is Axis.FOLLOWING_SIBLING
        at = [i for i, (v, _) in enumerate(orig, 1) if v == h]
        k = (at[0] if following else at[-1]) if at else None
        if k is None or j is None and not following:
            # place next to the host's current occurrences, which this batch
            # may already have added to (or created)
            current = [i for i, (v, _) in enumerate(self.s.children(p)) if v == h]
            self.s.add_child(p, name, value, at=current[0] + 1 if following else current[-1])
            return
        if j is None:
            j = len(orig) - k + 1
        if j < 1:
            raise IndexOutOfRange(f"{axis.value}({j}) on {h}")
        slot = k + j - 1 if following else k - j
        if slot < 0:
            raise IndexOutOfRange(f"{axis.value}({j}) on {h}: only {k - 1} preceding siblings")
        self.insert_child(p, name, value, slot)


def _position(edges: list[Edge], edge: Edge) -> int:
    for i, e in enumerate(edges):
        if e is edge:
            return i
    raise InsertionError("anchor edge vanished during a batch")


def apply_plan(s: XStructure, plan: Iterable[InsertionAtom], batch: Batch | None = None) -> XStructure:
    """Execute ``plan`` against ``s`` in order, creating nodes for locals."""
    batch = batch or Batch(s)
    env: dict[str, Value] = {}

    def value(t: Ground, what: str) -> Value:
        if isinstance(t, Local):
            if t.name not in env:
                raise UnboundHeadVariable(t.name)
            return env[t.name]
        if isinstance(t, Const):
            if t.name not in s.constants:
                raise HostUnknown(f"unknown constant {t.name} as {what}")
            return s.constants[t.name]
        return t

    for atom in plan:
        if isinstance(atom, InsertPred):
            s.assert_predicate(atom.name, [value(a, "argument") for a in atom.args])
        elif isinstance(atom, InsertEqual):
            _equate(s, atom, env, value)
        else:
            host = value(atom.host, "host")
            if not isinstance(host, Node) or host not in s:
                raise HostUnknown(f"host {_show(host)} is not a node")
            name = value(atom.name, "name")
            result = atom.result
            if isinstance(result, Local) and result.name not in env:
                if name == TEXT:
                    raise UnboundHeadVariable(result.name)
                env[result.name] = s.alloc_node(tag=str(name))
            target = value(result, "result")
            _insert(s, batch, host, atom.axis, str(name), target, atom.index)
    return s


def _equate(s: XStructure, atom: InsertEqual, env: dict[str, Value], value) -> None:
    sides = [atom.lhs, atom.rhs]
    for a, b in (sides, sides[::-1]):
        if isinstance(a, Local) and a.name not in env and not (isinstance(b, Local) and b.name not in env):
            env[a.name] = value(b, "value")
            return
    lhs, rhs = value(atom.lhs, "value"), value(atom.rhs, "value")
    if lhs == rhs:
        return
    raise UnsupportedFusion(f"cannot make {_show(lhs)} equal to {_show(rhs)}")


def _insert(s: XStructure, batch: Batch, host: Node, axis: Axis, name: str, target: Value, index: int | None) -> None:
    if axis is Axis.ATTRIBUTE:
        if host == ROOT:
            raise HostUnknown("the root carries no attributes")
        s.add_attribute(host, name, target)
    elif axis is Axis.CHILD:
        batch.insert_child(host, name, target, index)
    elif axis in (Axis.FOLLOWING_SIBLING, Axis.PRECEDING_SIBLING):
        if not isinstance(target, Node) and name != TEXT:
            raise InsertionError(f"sibling {name} must be a node")
        batch.insert_sibling(host, axis, name, target, index)
    else:
        raise InsertionError(f"cannot insert along {axis.value}")


def extend(s: XStructure, atoms: Iterable[InsertionAtom]) -> XStructure:
    """Apply a set of ground atoms as one batch."""
    return apply_plan(s, atoms, Batch(s))


def apply_plans(s: XStructure, plans: Iterable[Plan]) -> XStructure:
    """Apply several plans in order within a single batch."""
    batch = Batch(s)
    for plan in plans:
        apply_plan(s, plan, batch)
    return s
