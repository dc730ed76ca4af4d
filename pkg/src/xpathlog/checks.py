"""Static checks: definite (head-admissible) atoms, query safety, program assembly."""

from __future__ import annotations

from .errors import (
    DefinitenessError,
    HeadNotDefinite,
    SafetyError,
    UnsafeHeadVariable,
    XPathLogSyntaxError,
)
from .functions import FUNCTIONS
from .parser import parse_statements
from .syntax import (
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
    KindTest,
    Lit,
    NameTest,
    Not,
    Path,
    Pred,
    Program,
    Query,
    Root,
    Rule,
    Step,
    StratumBreak,
    Var,
    to_text,
    variables,
)
from .xtree import Axis

_DEFINITE_AXES = {Axis.CHILD, Axis.ATTRIBUTE, Axis.FOLLOWING_SIBLING, Axis.PRECEDING_SIBLING}


# -- definiteness ------------------------------------------------------------


def check_definite(atom: object) -> None:
    """Raise DefinitenessError unless ``atom`` may appear in a rule head."""
    if isinstance(atom, Not):
        raise DefinitenessError("negation")
    if isinstance(atom, Path):
        if isinstance(atom.entry, (Context, Document)):
            raise DefinitenessError("path must start at /, a variable or a constant")
        _definite_path(atom)
    elif isinstance(atom, (Compare, Pred)):
        _definite_qual(atom)
    else:
        raise DefinitenessError(type(atom).__name__)


def _definite_path(path: Path) -> None:
    if isinstance(path.entry, Document):
        raise DefinitenessError("document()")
    for step in path.steps:
        _definite_step(step)


def _definite_step(step: Step) -> None:
    if step.axis is Axis.SELF:
        # `V[q]` is parsed as a self::node() step carrying the qualifier
        if step.test != KindTest("node") or step.binds:
            raise DefinitenessError("self axis")
    elif step.axis not in _DEFINITE_AXES:
        raise DefinitenessError(step.axis.value)
    test = step.test
    if isinstance(test, KindTest) and step.axis is not Axis.SELF:
        if test.kind != "text" or step.axis is not Axis.CHILD:
            raise DefinitenessError(f"node test {to_text(step)}")
    for op in step.ops:
        if isinstance(op, Filter):
            _definite_qual(op.qual)


def _definite_qual(q: object) -> None:
    if isinstance(q, And):
        for item in q.items:
            _definite_qual(item)
    elif isinstance(q, Path):
        _definite_path(q)
    elif isinstance(q, Compare):
        if q.op != "=":
            raise DefinitenessError(f"comparison {q.op}")
        _definite_term(q.lhs)
        _definite_term(q.rhs)
    elif isinstance(q, Pred):
        if q.name in FUNCTIONS:
            raise DefinitenessError(f"function {q.name}()")
        for a in q.args:
            _definite_term(a)
    elif isinstance(q, Not):
        raise DefinitenessError("negation")
    else:
        raise DefinitenessError(type(q).__name__)


def _definite_term(t: object) -> None:
    if isinstance(t, Lit):
        return
    if isinstance(t, Path):
        _definite_path(t)
    elif isinstance(t, ContextFn):
        raise DefinitenessError(f"context function {t.name}()")
    elif isinstance(t, (Func, Arith)):
        raise DefinitenessError("function application")
    else:
        raise DefinitenessError(type(t).__name__)


# -- safety ------------------------------------------------------------------


class _Safety:
    """Left-to-right walk tracking which variables already have a safe occurrence."""

    def __init__(self, safe: set[str]) -> None:
        self.safe = safe

    def need(self, name: str, where: object) -> None:
        if name not in self.safe:
            raise SafetyError(name, to_text(where))

    def gen(self, name: str, where: object, negated: bool) -> None:
        # a positive occurrence outside comparisons is safe by itself
        if negated:
            self.need(name, where)
        else:
            self.safe.add(name)

    def path(self, p: Path, negated: bool) -> None:
        if isinstance(p.entry, Var):
            self.gen(p.entry.name, p, negated)
        for step in p.steps:
            if isinstance(step.test, Var):
                self.gen(step.test.name, step, negated)
            for op in step.ops:
                if isinstance(op, Bind):
                    if isinstance(op.target, Var):
                        self.gen(op.target.name, step, negated)
                else:
                    self.qual(op.qual, negated)

    def qual(self, q: object, negated: bool) -> None:
        if isinstance(q, And):
            for item in q.items:
                self.qual(item, negated)
        elif isinstance(q, Not):
            self.qual(q.item, True)
        elif isinstance(q, Path):
            self.path(q, negated)
        elif isinstance(q, Pred):
            if q.name in FUNCTIONS:
                for a in q.args:
                    self.strict(a, q)
            else:
                for a in q.args:
                    self.term(a, q, negated)
        elif isinstance(q, Compare):
            self.compare(q, negated)
        else:
            raise TypeError(q)

    def compare(self, q: Compare, negated: bool) -> None:
        if q.op != "=":
            self.strict(q.lhs, q)
            self.strict(q.rhs, q)
            return
        unbound = [
            side for side in (q.lhs, q.rhs)
            if _bare_var(side) is not None and _bare_var(side) not in self.safe
        ]
        if negated or len(unbound) == 2:
            # equality cannot bind both sides at once, nor bind under negation
            for side in (q.lhs, q.rhs):
                self.term(side, q, negated=True)
            return
        if unbound:
            other = q.rhs if unbound[0] is q.lhs else q.lhs
            self.term(other, q, negated)
            self.safe.add(_bare_var(unbound[0]))
            return
        self.term(q.lhs, q, negated)
        self.term(q.rhs, q, negated)

    def term(self, t: object, where: object, negated: bool) -> None:
        if isinstance(t, Path):
            self.path(t, negated)
        elif isinstance(t, (Func, Arith)):
            self.strict(t, where)

    def strict(self, t: object, where: object) -> None:
        # comparison operands and function arguments: every variable must be safe already
        for name in variables(t):
            self.need(name, where)


def _bare_var(t: object) -> str | None:
    if isinstance(t, Path) and isinstance(t.entry, Var) and not t.steps:
        return t.entry.name
    return None


def check_safety(literals: list[object] | tuple[object, ...], bound: set[str] | None = None) -> None:
    """Raise SafetyError for the first variable occurrence that is not safe."""
    checker = _Safety(set(bound or ()))
    for lit in literals:
        if isinstance(lit, Not):
            checker.qual(lit.item, True)
        else:
            checker.qual(lit, False)


def is_safe(literals: list[object] | tuple[object, ...]) -> bool:
    try:
        check_safety(literals)
    except SafetyError:
        return False
    return True


# -- programs ----------------------------------------------------------------


def check_rule(rule: Rule) -> None:
    for atom in rule.head:
        try:
            check_definite(atom)
        except DefinitenessError as exc:
            raise HeadNotDefinite(to_text(rule), exc.construct) from None
    body_vars = set(variables(*rule.body))
    for name in variables(*rule.head):
        if name not in body_vars:
            raise UnsafeHeadVariable(name)
    check_safety(rule.body)


def assemble(items: list[object]) -> Program:
    strata: list[list[Rule]] = [[]]
    for item in items:
        if isinstance(item, StratumBreak):
            if strata[-1]:
                strata.append([])
        elif isinstance(item, Rule):
            check_rule(item)
            strata[-1].append(item)
        elif isinstance(item, Query):
            raise XPathLogSyntaxError("queries are not allowed in a program", 0, 0, "rule")
    if len(strata) > 1 and not strata[-1]:
        strata.pop()
    return Program(tuple(tuple(s) for s in strata))


def parse_program(text: str) -> Program:
    return assemble(parse_statements(text))
