"""Seeded random generators for structures, expressions, atoms and programs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product

from xpathlog.syntax import (
    ANY_TEST,
    NODE_TEST,
    TEXT_TEST,
    And,
    Arith,
    Bind,
    Compare,
    Context,
    ContextFn,
    Filter,
    Func,
    Lit,
    NameTest,
    Not,
    Path,
    Pred,
    Root,
    Rule,
    Step,
    Var,
    var_path,
)
from xpathlog.xtree import ROOT, TEXT, Axis, Name, Node, XStructure

NAMES = ("a", "b", "c")
ATTRS = ("p", "q")
LITS = (1, 2, "x", "y")


def structure(
    rng: random.Random,
    max_nodes: int = 10,
    shared: bool = True,
    refs: bool = True,
    texts: bool = True,
    facts: bool = True,
) -> XStructure:
    """Random X-Structure: a forest, optionally with shared subelements (a DAG)."""
    s = XStructure()
    nodes: list[Node] = []
    for i in range(rng.randint(min(3, max_nodes), max_nodes)):
        node = s.alloc_node(tag=None)
        name = rng.choice(NAMES)
        if not nodes or rng.random() < 0.15:
            s.add_root(node, name)
        else:
            s.add_child(rng.choice(nodes), name, node)
        if shared and len(nodes) > 1 and rng.random() < 0.15:
            s.add_child(rng.choice(nodes), rng.choice(NAMES), node)
        nodes.append(node)
    for node in nodes:
        if texts and rng.random() < 0.35:
            at = rng.randint(0, len(s.children(node)))
            s.add_child(node, TEXT, rng.choice(LITS), at=at)
        if rng.random() < 0.4:
            value = rng.choice(nodes) if refs and rng.random() < 0.3 else rng.choice(LITS)
            s.add_attribute(node, rng.choice(ATTRS), value)
    if facts:
        pool = nodes + list(LITS)
        for _ in range(rng.randint(0, 4)):
            s.assert_predicate("r", [rng.choice(pool)])
        for _ in range(rng.randint(0, 4)):
            s.assert_predicate("e", [rng.choice(pool), rng.choice(pool)])
    return s


def names_in(s: XStructure) -> list[Name]:
    found = {Name(n) for x in [ROOT, *s.nodes.values()] for _, n in s.children(x)}
    found |= {Name(n) for x in s.nodes.values() for _, n in s.attributes(x)}
    return sorted(found)


def literals_in(s: XStructure) -> list:
    found: set = set(LITS)
    for x in s.nodes.values():
        found.update(v for v, _ in s.children(x) if not isinstance(v, Node))
        found.update(v for v, _ in s.attributes(x) if not isinstance(v, Node))
    return sorted(found, key=repr)


# -- query-side expressions -------------------------------------------------------

_QUERY_AXES = [
    (Axis.CHILD, 6),
    (Axis.ATTRIBUTE, 2),
    (Axis.DESCENDANT, 1),
    (Axis.DESCENDANT_OR_SELF, 1),
    (Axis.PARENT, 1),
    (Axis.ANCESTOR, 1),
    (Axis.SELF, 1),
    (Axis.FOLLOWING_SIBLING, 1),
    (Axis.PRECEDING_SIBLING, 1),
]


@dataclass
class ExprGen:
    """Safe-by-construction expressions with at most ``max_vars`` variables.

    Tracks which variables are bound so far (left to right), so comparisons
    and negations only mention bound variables.  ``roles`` records how each
    variable first occurs: ``entry``, ``name`` or ``value``.
    """

    rng: random.Random
    max_vars: int = 2
    context_fns: bool = True
    negation: bool = True
    functions: bool = True
    compare_ops: tuple[str, ...] = ("=", "=", "!=", "<", ">=")
    bound: set[str] = field(default_factory=set)
    roles: dict[str, set[str]] = field(default_factory=dict)

    def fresh_or_bound(self, negated: bool, role: str) -> str | None:
        pool = ["X", "Y", "Z"][: self.max_vars]
        if not pool:
            return None
        if negated:
            return self.rng.choice(sorted(self.bound)) if self.bound else None
        name = self.rng.choice(pool)
        self.bound.add(name)
        self.roles.setdefault(name, set()).add(role)
        return name

    def expression(self) -> Path:
        self.bound = set()
        self.roles = {}
        if self.max_vars and self.rng.random() < 0.25:
            entry: object = Var(self.fresh_or_bound(False, "entry"))
        else:
            entry = Root()
        n = self.rng.randint(1, 3)
        steps = tuple(self.step(depth=self.rng.randint(1, 2), negated=False, down=i == 0) for i in range(n))
        return Path(entry, steps)

    def axis(self, down: bool = False) -> Axis:
        if down:
            return self.rng.choice([Axis.CHILD, Axis.CHILD, Axis.DESCENDANT, Axis.DESCENDANT_OR_SELF])
        axes, weights = zip(*_QUERY_AXES)
        return self.rng.choices(axes, weights)[0]

    def step(self, depth: int, negated: bool, down: bool = False) -> Step:
        rng = self.rng
        axis = self.axis(down)
        r = rng.random()
        if r < 0.1:
            var = self.fresh_or_bound(negated, "name")
            test: object = Var(var) if var else NODE_TEST
        elif r < 0.35:
            test = rng.choice([NODE_TEST, ANY_TEST, TEXT_TEST])
        else:
            test = NameTest(rng.choice(ATTRS if axis is Axis.ATTRIBUTE else NAMES))
        ops: list[object] = []
        if rng.random() < 0.3:
            if rng.random() < 0.85:
                var = self.fresh_or_bound(negated, "value")
                if var:
                    ops.append(Bind(Var(var)))
            else:
                ops.append(Bind(Lit(rng.choice(LITS))))
        if depth > 0 and rng.random() < 0.3:
            ops.append(Filter(self.qual(depth - 1, negated)))
            if rng.random() < 0.15:
                ops.append(Filter(self.qual(depth - 1, negated)))
        return Step(axis, test, tuple(ops))

    def relative(self, depth: int, negated: bool) -> Path:
        n = self.rng.randint(1, 2)
        return Path(Context(), tuple(self.step(depth, negated, down=i == 0 and self.rng.random() < 0.5) for i in range(n)))

    def term(self, depth: int, negated: bool) -> object:
        r = self.rng.random()
        if r < 0.3:
            return Lit(self.rng.choice(LITS))
        if r < 0.4 and self.bound:
            return var_path(self.rng.choice(sorted(self.bound)))
        if r < 0.5 and self.context_fns:
            return self.rng.choice([ContextFn("position"), ContextFn("last"), Arith("+", ContextFn("position"), Lit(1))])
        if r < 0.55 and self.functions:
            return Func("string-length", (self.relative(0, True),))
        return self.relative(depth, negated)

    def qual(self, depth: int, negated: bool) -> object:
        rng = self.rng
        r = rng.random()
        if r < 0.3:
            return self.relative(depth, negated)
        if r < 0.45 and self.context_fns:
            k = rng.randint(1, 3)
            return rng.choice([
                Compare("=", ContextFn("position"), Lit(k)),
                Compare("<", ContextFn("position"), Lit(k)),
                Compare("=", ContextFn("position"), ContextFn("last")),
            ])
        if r < 0.7:
            op = rng.choice(self.compare_ops)
            # only "=" may bind variables in its operands
            strict = negated or op != "="
            return Compare(op, self.term(depth, strict), self.term(depth, strict))
        if r < 0.8 and self.negation:
            saved = set(self.bound)
            item = self.qual(depth, True)
            self.bound = saved
            return Not(item)
        if r < 0.87 and self.functions:
            return Pred(rng.choice(["contains", "starts-with"]), (self.relative(0, True), Lit(rng.choice(["x", "1", ""]))))
        if r < 0.93:
            return Pred("r", (self.relative(depth, negated),))
        items: list[object] = []
        for q in (self.qual(depth, negated), self.qual(depth, negated)):
            items.extend(q.items if isinstance(q, And) else [q])
        return And(tuple(items))


def candidate_assignments(s: XStructure, roles: dict[str, set[str]]):
    """Every assignment of the expression's variables over role-appropriate domains."""
    nodes = list(s.nodes.values())
    values = [ROOT, *nodes, *literals_in(s)]
    names = names_in(s)
    domains = []
    order = sorted(roles)
    for v in order:
        r = roles[v]
        if "name" in r and len(r) == 1:
            domains.append(names)
        elif "entry" in r:
            domains.append(nodes)
        elif "name" in r:
            domains.append([])  # a name never equals a node or literal value bound elsewhere
        else:
            domains.append(values)
    for combo in product(*domains):
        yield dict(zip(order, combo))


# -- definite atoms -------------------------------------------------------------------


@dataclass
class AtomGen:
    """Random well-typed definite atoms (at most 4 steps, at most 2 qualifiers).

    Every variable has a kind: ``node`` (entries and element binds), ``name``
    (variable node tests), ``attr`` (attribute values) or ``text``.  A bind
    after a variable node test is a ``node`` only while that name variable
    avoids ``text()``, which ``ground_assignment`` guarantees.  Variables
    are only reused within their kind, so a typed assignment always exists.
    """

    rng: random.Random
    positional: bool = False
    text: bool = True
    name_vars: bool = True
    prefix: str = "V"
    compares: bool = True
    preds: bool = True
    sibling: bool = True
    max_steps: int = 4
    max_quals: int = 2
    steps_left: int = 0
    quals_left: int = 0
    kinds: dict[str, str] = field(default_factory=dict)

    def var(self, kind: str, reuse: bool = True) -> str:
        same = [v for v, k in self.kinds.items() if k == kind]
        if reuse and same and self.rng.random() < 0.25:
            return self.rng.choice(same)
        name = f"{self.prefix}{len(self.kinds) + 1}"
        self.kinds[name] = kind
        return name

    def atom(self, entry_var: bool | None = None) -> Path:
        self.steps_left = self.rng.randint(1, self.max_steps)
        self.quals_left = self.max_quals
        self.kinds = {}
        if entry_var is None:
            entry_var = self.rng.random() < 0.5
        entry: object = Var(self.var("node")) if entry_var else Root()
        return self.path(entry)

    def path(self, entry: object, bare_end: bool = False) -> Path:
        steps: list[Step] = []
        while self.steps_left > 0:
            self.steps_left -= 1
            last = self.steps_left == 0 or self.rng.random() < 0.3
            step = self.step(last, from_root=isinstance(entry, Root) and not steps)
            steps.append(step)
            if step.axis is Axis.ATTRIBUTE or step.test == TEXT_TEST or last:
                break
        if not steps:
            steps.append(Step(Axis.CHILD, NameTest(self.rng.choice(NAMES))))
        if bare_end:
            # comparison operands end without a bind, so their value is free
            end = steps[-1]
            if end.test == TEXT_TEST:
                end = Step(Axis.ATTRIBUTE, NameTest(self.rng.choice(ATTRS)))
            steps[-1] = Step(end.axis, end.test, tuple(op for op in end.ops if isinstance(op, Filter)), end.index)
        return Path(entry, tuple(steps))

    def step(self, last: bool, from_root: bool = False) -> Step:
        rng = self.rng
        r = rng.random()
        index = None
        ops: list[object] = []
        if last and not from_root and r < 0.25:
            axis, test = Axis.ATTRIBUTE, NameTest(rng.choice(ATTRS))
            if rng.random() < 0.35:
                ops.append(Bind(Var(self.var("attr")) if rng.random() < 0.7 else Lit(rng.choice(LITS))))
            return Step(axis, test, tuple(ops))
        if last and self.text and r < 0.35:
            target = Var(self.var("text")) if rng.random() < 0.5 else Lit(rng.choice(LITS))
            return Step(Axis.CHILD, TEXT_TEST, (Bind(target),))
        axis = Axis.CHILD
        if self.sibling and not from_root and rng.random() < 0.15:
            axis = rng.choice([Axis.FOLLOWING_SIBLING, Axis.PRECEDING_SIBLING])
        test = Var(self.var("name")) if self.name_vars and rng.random() < 0.1 else NameTest(rng.choice(NAMES))
        if self.positional and axis is Axis.CHILD and rng.random() < 0.3:
            index = rng.randint(0, 3)
        if rng.random() < 0.35:
            # a node is never its own sibling, so sibling binds stay fresh
            ops.append(Bind(Var(self.var("node", reuse=axis is Axis.CHILD))))
        if self.quals_left > 0 and rng.random() < 0.4:
            self.quals_left -= 1
            ops.append(Filter(self.qual()))
        return Step(axis, test, tuple(ops), index)

    def relative(self, bare_end: bool = False) -> Path:
        saved = self.steps_left
        self.steps_left = self.rng.randint(1, 2)
        p = self.path(Context(), bare_end)
        self.steps_left = saved
        return p

    def qual(self) -> object:
        r = self.rng.random()
        if r < 0.45 or not (self.compares or self.preds):
            return self.relative()
        if r < 0.8 and self.compares:
            lhs = self.relative(bare_end=True)
            k = self.rng.random()
            end = lhs.steps[-1]
            nodes = [v for v, kind in self.kinds.items() if kind == "node"]
            if k < 0.4 and end.axis is Axis.ATTRIBUTE:
                rhs: object = Lit(self.rng.choice(LITS))
            elif k < 0.7 and nodes and not _has_sibling_step(lhs):
                rhs = var_path(self.rng.choice(nodes))
            else:
                rhs = self.relative(bare_end=True)
            return Compare("=", lhs, rhs)
        if self.preds:
            return Pred("r", (self.relative(),))
        return self.relative()


def _has_sibling_step(p: Path) -> bool:
    from xpathlog.syntax import walk

    return any(isinstance(n, Step) and n.axis in (Axis.PRECEDING_SIBLING, Axis.FOLLOWING_SIBLING) for n in walk(p))


def ground_assignment(rng: random.Random, s: XStructure, kinds: dict[str, str]) -> dict | None:
    """A typed total assignment for the variables of a generated atom.

    Node variables get distinct nodes so they never alias by accident; None
    when the structure is too small for that.
    """
    nodes = list(s.nodes.values())
    node_vars = [v for v, k in kinds.items() if k == "node"]
    if len(node_vars) > len(nodes):
        return None
    picks = iter(rng.sample(nodes, len(node_vars)))
    beta: dict[str, object] = {}
    for v, kind in kinds.items():
        if kind == "name":
            beta[v] = Name(rng.choice(NAMES))
        elif kind == "node":
            beta[v] = next(picks)
        elif kind == "attr" and rng.random() < 0.3:
            beta[v] = rng.choice(nodes)
        else:
            beta[v] = rng.choice(LITS)
    return beta


# -- programs ---------------------------------------------------------------------------


def datalog_program(rng: random.Random, max_rules: int = 5, max_body: int = 3) -> tuple[list[tuple], list[tuple]]:
    """Facts and rules over predicates p0..p2 as plain tuples.

    A fact is ``(pred, args)``; a rule is ``(head, body)`` where atoms are
    ``(pred, args)`` and each arg is a variable name (str starting uppercase)
    or an int constant.
    """
    preds = {f"p{i}": rng.randint(1, 2) for i in range(3)}
    consts = [1, 2, 3]
    facts = []
    for _ in range(rng.randint(1, 6)):
        p = rng.choice(sorted(preds))
        facts.append((p, tuple(rng.choice(consts) for _ in range(preds[p]))))
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        body = []
        body_vars: list[str] = []
        for _ in range(rng.randint(1, max_body)):
            p = rng.choice(sorted(preds))
            args = []
            for _ in range(preds[p]):
                if rng.random() < 0.8:
                    v = rng.choice(["X", "Y", "Z"])
                    args.append(v)
                    body_vars.append(v)
                else:
                    args.append(rng.choice(consts))
            body.append((p, tuple(args)))
        hp = rng.choice(sorted(preds))
        head_args = tuple(rng.choice(body_vars) if body_vars and rng.random() < 0.85 else rng.choice(consts) for _ in range(preds[hp]))
        rules.append(((hp, head_args), body))
    return facts, rules


def datalog_text(facts: list[tuple], rules: list[tuple]) -> str:
    def atom(p: str, args: tuple) -> str:
        return f"{p}({', '.join(str(a) for a in args)})"

    lines = [atom(*f) + "." for f in facts]
    lines += [f"{atom(*h)} :- {', '.join(atom(*b) for b in body)}." for h, body in rules]
    return "\n".join(lines)


def positive_rule(rng: random.Random) -> Rule:
    """A safe, positive, context-function-free rule whose head adds no text.

    Head variables are mapped onto body variables of a compatible kind;
    intermediate head steps without a variable create elements.
    """
    from xpathlog.checks import check_rule
    from xpathlog.errors import XPathLogError

    while True:
        # no name variables in bodies: one matching text() would bind a literal
        body_gen = AtomGen(rng, name_vars=False, compares=True, preds=False, sibling=False, max_steps=3, max_quals=1)
        body = body_gen.atom(entry_var=False)
        # start with "//" so bodies match somewhere in small structures
        first = body.steps[0]
        body = Path(Root(), (Step(Axis.DESCENDANT, first.test, first.ops), *body.steps[1:]))
        head_gen = AtomGen(rng, text=False, name_vars=False, prefix="H", compares=False, preds=False, sibling=False, max_steps=2, max_quals=1)
        head = head_gen.atom(entry_var=rng.random() < 0.8)
        pools = {
            "node": [v for v, k in body_gen.kinds.items() if k == "node"],
            "attr": [v for v, k in body_gen.kinds.items() if k != "name"],
        }
        rename = {v: rng.choice(pools[k]) for v, k in head_gen.kinds.items() if pools.get(k)}
        rule = Rule((_rename(head, rename),), (body,))
        try:
            check_rule(rule)
        except XPathLogError:
            continue
        return rule


def var_free_paths(rng: random.Random, n: int) -> list[Path]:
    """Variable-, negation- and context-free query expressions without dereferencing."""
    out: list[Path] = []
    while len(out) < n:
        g = ExprGen(rng, max_vars=0, context_fns=False, negation=False, functions=False, compare_ops=("=",))
        e = g.expression()
        if not any(_derefs(p) for p in _paths(e)):
            out.append(e)
    return out


def _paths(e: object) -> list[Path]:
    from xpathlog.syntax import walk

    return [p for p in walk(e) if isinstance(p, Path)]


def _derefs(p: Path) -> bool:
    # an attribute step with anything after it navigates through a reference
    return any(s.axis is Axis.ATTRIBUTE for s in p.steps[:-1])


def _rename(node: object, m: dict[str, str]) -> object:
    from dataclasses import fields, is_dataclass, replace

    if isinstance(node, Var):
        return Var(m.get(node.name, node.name))
    if isinstance(node, tuple):
        return tuple(_rename(x, m) for x in node)
    if is_dataclass(node) and not isinstance(node, type):
        return replace(node, **{f.name: _rename(getattr(node, f.name), m) for f in fields(node)})
    return node


# -- XPath-comparable documents and expressions -------------------------------


def xml_document(rng: random.Random, max_elements: int = 12) -> str:
    """A single tree; text only at leaves, so string-values stay comparable."""
    count = [0]

    def element(depth: int) -> str:
        count[0] += 1
        name = rng.choice(NAMES)
        attrs = "".join(f' {a}="{rng.choice(LITS)}"' for a in ATTRS if rng.random() < 0.4)
        kids = []
        if depth < 4:
            for _ in range(rng.randint(0, 3)):
                if count[0] >= max_elements:
                    break
                kids.append(element(depth + 1))
        if not kids and rng.random() < 0.6:
            kids.append(str(rng.choice(LITS)))
        return f"<{name}{attrs}>{''.join(kids)}</{name}>"

    return element(0)


@dataclass
class XPathGen:
    """Variable-free expressions that also read as XPath 1.0.

    Text and attribute steps only end a path, ``node()`` and ``text()`` never
    follow the attribute axis, and comparisons take a literal on one side.
    """

    rng: random.Random
    absolute_quals: bool = True

    def expression(self) -> Path:
        n = self.rng.randint(1, 3)
        return Path(Root(), self.steps(n, depth=2, first_down=True))

    def steps(self, n: int, depth: int, first_down: bool = False) -> tuple[Step, ...]:
        out = []
        for i in range(n):
            last = i == n - 1
            out.append(self.step(depth, down=first_down and i == 0, last=last))
        return tuple(out)

    def step(self, depth: int, down: bool, last: bool) -> Step:
        rng = self.rng
        if down:
            axis = rng.choice([Axis.CHILD, Axis.DESCENDANT, Axis.DESCENDANT_OR_SELF])
        else:
            axes, weights = zip(*_QUERY_AXES)
            axis = rng.choices(axes, weights)[0]
            if axis is Axis.ATTRIBUTE and not last:
                axis = Axis.CHILD
        r = rng.random()
        if axis is Axis.ATTRIBUTE:
            test: object = ANY_TEST if r < 0.3 else NameTest(rng.choice(ATTRS))
        elif r < 0.15 and last and axis in (Axis.CHILD, Axis.DESCENDANT, Axis.DESCENDANT_OR_SELF):
            test = TEXT_TEST
        elif r < 0.4:
            test = rng.choice([NODE_TEST, ANY_TEST])
        else:
            test = NameTest(rng.choice(NAMES))
        ops: list[object] = []
        if depth > 0 and test is not TEXT_TEST and axis is not Axis.ATTRIBUTE:
            while rng.random() < 0.35 and len(ops) < 2:
                ops.append(Filter(self.qual(depth - 1)))
        return Step(axis, test, tuple(ops))

    def qual(self, depth: int) -> object:
        rng = self.rng
        r = rng.random()
        if r < 0.25:
            return Path(Context(), self.steps(rng.randint(1, 2), depth))
        if r < 0.45:
            k = rng.randint(1, 3)
            return rng.choice([
                Compare("=", ContextFn("position"), Lit(k)),
                Compare("<", ContextFn("position"), Lit(k)),
                Compare(">", ContextFn("position"), Lit(1)),
                Compare("=", ContextFn("position"), ContextFn("last")),
                Compare("=", ContextFn("position"), Arith("-", ContextFn("last"), Lit(1))),
            ])
        if r < 0.65:
            end = rng.choice([Step(Axis.CHILD, TEXT_TEST, ()), Step(Axis.ATTRIBUTE, NameTest(rng.choice(ATTRS)), ())])
            lead = self.steps(rng.randint(0, 1), 0)
            lead = tuple(s for s in lead if s.axis is not Axis.ATTRIBUTE and s.test is not TEXT_TEST)
            return Compare(rng.choice(["=", "!="]), Path(Context(), (*lead, end)), Lit(rng.choice(LITS)))
        if r < 0.72:
            arg = Path(Context(), (Step(Axis.CHILD, TEXT_TEST, ()),))
            return Pred(rng.choice(["contains", "starts-with"]), (arg, Lit(rng.choice(["x", "1", "2"]))))
        if r < 0.82:
            return Not(self.qual(depth))
        if r < 0.9 and self.absolute_quals:
            return Path(Root(), self.steps(rng.randint(1, 2), 0, first_down=True))
        items: list[object] = []
        for q in (self.qual(depth), self.qual(depth)):
            items.extend(q.items if isinstance(q, And) else [q])
        return And(tuple(items))
