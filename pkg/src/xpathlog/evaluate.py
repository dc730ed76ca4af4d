"""Answer semantics: expressions evaluate to annotated result lists, qualifiers to binding sets.

An annotated result list is a list of ``(value, BindingSet)`` pairs: each
selected value together with the variable assignments that select it.
Query answers are computed literal by literal, each literal seeing the
bindings of its predecessors restricted to its own variables.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product
from pathlib import Path as FsPath
from typing import Sequence

from .bindings import BindingSet, natural_join, subsume_minus, union_all
from .checks import check_safety
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
    Filter,
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
    variables,
)
from .xmlio import AttrTypes, document_root
from .xtree import ROOT, TEXT, Name, Node, Value, XStructure

Result = list[tuple[Value, BindingSet]]


@dataclass(frozen=True)
class EvalContext:
    structure: XStructure
    root: Node = ROOT
    depth: int = 0
    base_dir: FsPath | None = None
    attr_types: AttrTypes | None = None

    @property
    def pos_var(self) -> str:
        return f"$Pos{self.depth}"

    @property
    def size_var(self) -> str:
        return f"$Size{self.depth}"


def value_key(v: Value) -> tuple:
    if isinstance(v, Node):
        return (0, v.id, "")
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (1, v, "")
    return (2, 0, str(v))


def res(result: Result) -> list[Value]:
    return [v for v, _ in result]


def bdgs(result: Result, x: Value) -> BindingSet:
    return union_all(b for v, b in result if v == x)


# -- expressions -------------------------------------------------------------


def eval_expr(ctx: EvalContext, e: object, x: Value, bindings: BindingSet) -> Result:
    """Evaluate a path or term at context value ``x``."""
    if isinstance(e, Path):
        return _path(ctx, e, x, bindings)
    if isinstance(e, Lit):
        return [(e.value, bindings)] if bindings else []
    if isinstance(e, Func):
        return _func(ctx, e, x, bindings)
    if isinstance(e, Arith):
        out: Result = []
        for (a, xa), (b, xb) in product(eval_expr(ctx, e.lhs, x, bindings), eval_expr(ctx, e.rhs, x, bindings)):
            v = arithmetic(e.op, ctx.structure.literal_value(a), ctx.structure.literal_value(b))
            joined = natural_join(xa, xb)
            if v is not None and joined:
                out.append((v, joined))
        return out
    if isinstance(e, ContextFn):
        var = ctx.pos_var if e.name == "position" else ctx.size_var
        if var not in bindings.schema:
            raise UnboundVariable(f"{e.name}()")
        values = sorted({bindings.value(r, var) for r in bindings.rows})
        return [(v, bindings.restrict(var, v)) for v in values]
    raise TypeError(f"not an expression: {e!r}")


def _func(ctx: EvalContext, f: Func, x: Value, bindings: BindingSet) -> Result:
    args = [eval_expr(ctx, a, x, bindings) for a in f.args]
    out: Result = []
    for combo in product(*args):
        v = call(ctx.structure, f.name, x, [c[0] for c in combo])
        if v is None:
            continue
        joined = bindings
        for _, xi in combo:
            joined = natural_join(joined, xi)
        if joined:
            out.append((v, joined))
    return out


def _entry(ctx: EvalContext, p: Path, x: Value, bindings: BindingSet) -> tuple[EvalContext, Result]:
    e = p.entry
    s = ctx.structure
    if isinstance(e, Context):
        return ctx, [(x, bindings)]
    if isinstance(e, Root):
        return ctx, [(ctx.root, bindings)]
    if isinstance(e, Document):
        root = document_root(s, e.source, ctx.base_dir, ctx.attr_types)
        return replace(ctx, root=root), [(root, bindings)]
    if isinstance(e, Const):
        if e.name not in s.constants:
            raise XPathLogError(f"unknown constant {e.name}")
        return ctx, [(s.constants[e.name], bindings)]
    if isinstance(e, Var):
        if e.name in bindings.schema:
            values = sorted({bindings.value(r, e.name) for r in bindings.rows}, key=value_key)
            return ctx, [(v, bindings.restrict(e.name, v)) for v in values]
        # unbound: range over the element nodes of the database
        return ctx, [(n, bindings.extend(e.name, n)) for n in s.element_nodes()]
    raise TypeError(e)


def _path(ctx: EvalContext, p: Path, x: Value, bindings: BindingSet) -> Result:
    if not bindings:
        return []
    ctx, current = _entry(ctx, p, x, bindings)
    for step in p.steps:
        nxt: Result = []
        for y, xi in current:
            nxt.extend(_step(ctx, step, y, xi))
        current = nxt
        if not current:
            break
    return current


def _matches(test: object, v: Value, n: str) -> bool:
    if isinstance(test, NameTest):
        return n == test.name
    kind = test.kind
    if kind == "node":
        return isinstance(v, Node)
    if kind == "text":
        return not isinstance(v, Node)
    # "*": element children and attributes; the pseudo-root is not an element
    return n != TEXT and v != ROOT


def _step(ctx: EvalContext, step: Step, x: Value, bindings: BindingSet) -> Result:
    s = ctx.structure
    if not isinstance(x, Node) or x not in s:
        return []
    test = step.test
    members = s.axis_members(step.axis, x)
    result: Result
    if isinstance(test, NameTest):
        result = [(v, bindings) for v, n in members if n == test.name]
    elif isinstance(test, KindTest):
        result = [(v, bindings) for v, n in members if _matches(test, v, n)]
    else:
        result = []
        for v, n in members:
            if test.name in bindings.schema:
                xi = bindings.restrict(test.name, n)
            else:
                xi = bindings.extend(test.name, Name(n))
            if xi:
                result.append((v, xi))
    for op in step.ops:
        if isinstance(op, Bind):
            target = op.target
            if isinstance(target, Var):
                result = [(y, b) for y, xi in result if (b := xi.extend(target.name, y))]
            else:
                result = [(y, xi) for y, xi in result if compare(s, "=", y, target.value)]
        else:
            result = _filter(ctx, op.qual, result)
        if not result:
            break
    return result


def _own_context_fns(q: object) -> bool:
    # context functions of this qualifier level; nested step filters have their own
    if isinstance(q, ContextFn):
        return True
    if isinstance(q, Step):
        return False
    if isinstance(q, Path):
        return False
    if isinstance(q, (Compare, Arith)):
        return _own_context_fns(q.lhs) or _own_context_fns(q.rhs)
    if isinstance(q, (Pred, Func)):
        return any(_own_context_fns(a) for a in q.args)
    if isinstance(q, Not):
        return _own_context_fns(q.item)
    if isinstance(q, And):
        return any(_own_context_fns(i) for i in q.items)
    return False


def _filter(ctx: EvalContext, q: object, listing: Result) -> Result:
    inner = replace(ctx, depth=ctx.depth + 1)
    out: Result = []
    if not _own_context_fns(q):
        for y, xi in listing:
            r = eval_qualifier(inner, q, y, xi)
            if r:
                out.append((y, r))
        return out
    pos_var, size_var = inner.pos_var, inner.size_var
    for k, (y, xi) in enumerate(listing):
        rows = []
        for beta in xi.rows:
            # L' = entries of the list whose bindings contain beta
            members = [j for j, (_, xj) in enumerate(listing) if xj.schema == xi.schema and beta in xj.rows]
            size = len(members)
            # backward axes list nearest-first already, so list order is proximity order
            pos = members.index(k) + 1
            rows.append({**dict(zip(xi.schema, beta)), pos_var: pos, size_var: size})
        extended = BindingSet.from_dicts(rows, list(xi.schema) + [pos_var, size_var])
        r = eval_qualifier(inner, q, y, extended).drop([pos_var, size_var])
        if r:
            out.append((y, r))
    return out


# -- qualifiers --------------------------------------------------------------


def _bare_var(t: object) -> str | None:
    if isinstance(t, Path) and isinstance(t.entry, Var) and not t.steps:
        return t.entry.name
    return None


def eval_qualifier(ctx: EvalContext, q: object, y: Value, bindings: BindingSet) -> BindingSet:
    """Bindings (extending ``bindings``) under which ``q`` holds at ``y``."""
    if not bindings:
        return bindings
    if isinstance(q, Path):
        return union_all((xi for _, xi in _path(ctx, q, y, bindings)), bindings.schema)
    if isinstance(q, And):
        acc = eval_qualifier(ctx, q.items[0], y, bindings)
        for item in q.items[1:]:
            if not acc:
                break
            acc = natural_join(acc, eval_qualifier(ctx, item, y, acc))
        return acc
    if isinstance(q, Not):
        if not variables(q.item) and not _own_context_fns(q.item):
            hit = eval_qualifier(ctx, q.item, y, BindingSet.true())
            return BindingSet.empty(bindings.schema) if hit else bindings
        return subsume_minus(bindings, eval_qualifier(ctx, q.item, y, bindings))
    if isinstance(q, Compare):
        return _compare(ctx, q, y, bindings)
    if isinstance(q, Pred):
        if q.name in FUNCTIONS:
            hits = _func(ctx, Func(q.name, q.args), y, bindings)
            return union_all((xi for v, xi in hits if v), bindings.schema)
        return _predicate(ctx, q, y, bindings)
    raise TypeError(f"not a qualifier: {q!r}")


def _compare(ctx: EvalContext, q: Compare, y: Value, bindings: BindingSet) -> BindingSet:
    s = ctx.structure
    if q.op == "=":
        for var, other in ((_bare_var(q.lhs), q.rhs), (_bare_var(q.rhs), q.lhs)):
            if var is not None and var not in bindings.schema:
                # assignment: bind the variable to each value of the other side
                return union_all(
                    (xi.extend(var, v) for v, xi in eval_expr(ctx, other, y, bindings)),
                    bindings.schema + (var,),
                )
    for side in (q.lhs, q.rhs):
        var = _bare_var(side)
        if var is not None and var not in bindings.schema:
            raise UnboundVariable(var)
    left = eval_expr(ctx, q.lhs, y, bindings)
    right = eval_expr(ctx, q.rhs, y, bindings)
    parts = [
        natural_join(xa, xb)
        for a, xa in left
        for b, xb in right
        if compare(s, q.op, a, b)
    ]
    return union_all(parts, bindings.schema)


def _predicate(ctx: EvalContext, q: Pred, y: Value, bindings: BindingSet) -> BindingSet:
    s = ctx.structure
    n = len(q.args)
    generators: dict[int, str] = {}
    evaluated: dict[int, Result] = {}
    for i, arg in enumerate(q.args):
        var = _bare_var(arg)
        if var is not None and var not in bindings.schema:
            generators[i] = var
        else:
            evaluated[i] = eval_expr(ctx, arg, y, bindings)
    gen_vars = sorted(set(generators.values()))
    parts: list[BindingSet] = []
    for fact in s.facts(q.name):
        if len(fact) != n:
            continue
        assignment: dict[str, Value] = {}
        consistent = True
        for i, var in generators.items():
            if assignment.setdefault(var, fact[i]) != fact[i]:
                consistent = False
                break
        if not consistent:
            continue
        choices = []
        for i, listing in evaluated.items():
            matching = [xi for v, xi in listing if compare(s, "=", v, fact[i])]
            if not matching:
                break
            choices.append(matching)
        else:
            base = bindings
            for var in gen_vars:
                base = base.extend(var, assignment[var])
            for combo in product(*choices):
                joined = base
                for xi in combo:
                    joined = natural_join(joined, xi)
                if joined:
                    parts.append(joined)
    return union_all(parts, bindings.schema + tuple(gen_vars))


# -- queries -----------------------------------------------------------------


def answers(ctx: EvalContext, literals: Sequence[object], check: bool = True) -> BindingSet:
    """Answer relation of a conjunctive query; ``{true}``/empty when variable-free."""
    if check:
        check_safety(literals)
    acc = BindingSet.true()
    for lit in literals:
        own = variables(lit)
        partial = eval_qualifier(ctx, lit, ctx.root, acc.project(own))
        acc = natural_join(acc, partial)
        if not acc:
            return BindingSet.empty(variables(*literals))
    return acc
