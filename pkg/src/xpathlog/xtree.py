"""The X-Structure store: nodes, ordered child edges, attribute edges, predicate facts.

Values are plain Python objects: ``Node`` for element nodes, ``Name`` for
element/attribute names, and ``str``/``int``/``float`` for literals.  ``Name``
subclasses ``str`` so that a name bound to a variable joins with an equal
string literal (e.g. ``@type->T`` feeding ``//T``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import CyclicDescent, NodeUnknown


class Name(str):
    """An element or attribute name; ``TEXT`` is the reserved text-child name."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"Name({str(self)!r})"


TEXT = Name("text()")


@dataclass(frozen=True)
class Node:
    id: int
    label: str | None = field(default=None, compare=False, hash=False)

    def __str__(self) -> str:
        return self.label if self.label else f"n{self.id}"

    def __repr__(self) -> str:
        return f"Node({self.id}, {str(self)!r})"


Literal = Union[str, int, float]
Value = Union[Node, Name, str, int, float]

#: The engine pseudo-root: parent of every document root and free element.
ROOT = Node(0, "root")
ROOT_NAME = Name("root")


class Axis(str, Enum):
    CHILD = "child"
    ATTRIBUTE = "attribute"
    PARENT = "parent"
    ANCESTOR = "ancestor"
    DESCENDANT = "descendant"
    DESCENDANT_OR_SELF = "descendant-or-self"
    PRECEDING_SIBLING = "preceding-sibling"
    FOLLOWING_SIBLING = "following-sibling"
    SELF = "self"

    @property
    def backward(self) -> bool:
        return self in (Axis.PRECEDING_SIBLING, Axis.ANCESTOR)


_INT = re.compile(r"[+-]?\d+")
_FLOAT = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")


def parse_literal(text: str) -> Literal:
    """Type a raw string: integer, then float, else the string itself."""
    stripped = text.strip()
    if _INT.fullmatch(stripped):
        return int(stripped)
    if _FLOAT.fullmatch(stripped):
        return float(stripped)
    return text


def show(v: object) -> str:
    """Printed form of a value as used in answers and traces."""
    if isinstance(v, Node):
        return str(v)
    if isinstance(v, Name):
        return str(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, float) and v.is_integer():
        return repr(v)
    return str(v)


Edge = tuple  # (value, name) pair; identity matters for positional insertion


class XStructure:
    """Mutable edge-labeled graph; readers treat it as a value."""

    def __init__(self) -> None:
        self._next = 1
        self.nodes: dict[int, Node] = {}
        self._children: dict[int, list[Edge]] = {ROOT.id: []}
        self._attrs: dict[int, list[Edge]] = {}
        self._attr_keys: dict[int, set[tuple[str, Value]]] = {}
        self._parents: dict[int, set[int]] = {}
        self._tags: dict[int, Name] = {ROOT.id: ROOT_NAME}
        self.predicates: dict[str, dict[tuple, None]] = {}
        self.constants: dict[str, Node] = {}
        self.documents: dict[str, Node] = {}
        # ID attribute strings of loaded elements, used when exporting references
        self.id_strings: dict[int, str] = {}

    # -- allocation -------------------------------------------------------

    def alloc_node(self, hint: str | None = None, tag: str | None = None) -> Node:
        node = Node(self._next, hint)
        self._next += 1
        self.nodes[node.id] = node
        self._children[node.id] = []
        self._attrs[node.id] = []
        self._attr_keys[node.id] = set()
        self._parents[node.id] = set()
        if tag is not None:
            self._tags[node.id] = Name(tag)
        return node

    def __contains__(self, v: object) -> bool:
        return isinstance(v, Node) and (v.id in self.nodes or v.id == ROOT.id)

    def _check(self, x: object) -> Node:
        if not isinstance(x, Node) or x.id not in self._children:
            raise NodeUnknown(x)
        return x

    # -- mutation ---------------------------------------------------------

    def add_child(self, x: Node, name: str, value: Value, at: int | None = None) -> Edge:
        """Append (or insert at list index ``at``) a child edge and return it."""
        self._check(x)
        name = Name(name)
        if isinstance(value, Node):
            self._check(value)
            self._parents[value.id].add(x.id)
            self._tags.setdefault(value.id, name)
        edge = (value, name)
        lst = self._children[x.id]
        if at is None:
            lst.append(edge)
        else:
            lst.insert(at, edge)
        return edge

    def add_root(self, node: Node, name: str) -> Edge:
        return self.add_child(ROOT, name, node)

    def add_attribute(self, x: Node, name: str, value: Value) -> bool:
        """Add an attribute value; returns False if it was already present."""
        self._check(x)
        if x.id == ROOT.id:
            raise NodeUnknown(x)
        if isinstance(value, Node):
            self._check(value)
        key = (str(name), value)
        keys = self._attr_keys[x.id]
        if key in keys:
            return False
        keys.add(key)
        self._attrs[x.id].append((value, Name(name)))
        return True

    def assert_predicate(self, p: str, args: Iterable[Value]) -> bool:
        facts = self.predicates.setdefault(p, {})
        t = tuple(args)
        if t in facts:
            return False
        facts[t] = None
        return True

    # -- reads ------------------------------------------------------------

    @property
    def roots(self) -> list[Node]:
        return [v for v, _ in self._children[ROOT.id]]

    def children(self, x: Node) -> list[Edge]:
        return self._children[self._check(x).id]

    def attributes(self, x: Node) -> list[Edge]:
        self._check(x)
        return self._attrs.get(x.id, [])

    def attribute_values(self, x: Node, name: str) -> list[Value]:
        return [v for v, n in self.attributes(x) if n == name]

    def parents(self, x: Node) -> list[Node]:
        self._check(x)
        return [self._node(p) for p in sorted(self._parents.get(x.id, ()))]

    def _node(self, i: int) -> Node:
        return ROOT if i == ROOT.id else self.nodes[i]

    def name_of(self, x: Node) -> Name:
        return self._tags.get(x.id, Name(""))

    def facts(self, p: str) -> list[tuple]:
        return list(self.predicates.get(p, ()))

    def edge_count(self) -> int:
        n = sum(len(v) for k, v in self._children.items() if k != ROOT.id)
        return n + sum(len(v) for v in self._attrs.values())

    def element_nodes(self) -> list[Node]:
        return list(self.nodes.values())

    def axis_members(self, axis: Axis | str, x: Node) -> list[Edge]:
        if axis is Axis.CHILD:
            return list(self.children(x))
        axis = Axis(axis)
        self._check(x)
        if axis is Axis.CHILD:
            return list(self._children[x.id])
        if axis is Axis.ATTRIBUTE:
            return list(self._attrs.get(x.id, ()))
        if axis is Axis.SELF:
            return [(x, self.name_of(x))]
        if axis is Axis.PARENT:
            return [(p, self.name_of(p)) for p in self.parents(x)]
        if axis is Axis.DESCENDANT:
            return self._walk(x, self._children.__getitem__)
        if axis is Axis.DESCENDANT_OR_SELF:
            return [(x, self.name_of(x))] + self._walk(x, self._children.__getitem__)
        if axis is Axis.ANCESTOR:
            return self._walk(x, self._parent_edges)
        following = axis is Axis.FOLLOWING_SIBLING
        out: list[Edge] = []
        for p in self.parents(x):
            # x may be listed twice under p: siblings are taken after its first
            # and before its last occurrence, so adding edges never removes any
            sibs = self._children[p.id]
            at = [k for k, (v, _) in enumerate(sibs) if v == x]
            out.extend(sibs[at[0] + 1:] if following else reversed(sibs[:at[-1]]))
        return out

    def _parent_edges(self, i: int) -> list[Edge]:
        return [(p, self.name_of(p)) for p in self.parents(self._node(i))]

    def _walk(self, x: Node, edges_of) -> list[Edge]:
        # preorder: each entry, then everything reachable below it
        out: list[Edge] = []
        on_path = {x.id}
        stack: list[tuple[int, Iterator[Edge]]] = [(x.id, iter(edges_of(x.id)))]
        while stack:
            current, it = stack[-1]
            for v, n in it:
                out.append((v, n))
                if isinstance(v, Node):
                    if v.id in on_path:
                        raise CyclicDescent(v)
                    on_path.add(v.id)
                    stack.append((v.id, iter(edges_of(v.id))))
                    break
            else:
                stack.pop()
                on_path.discard(current)
        return out

    def literal_value(self, v: Value) -> Value:
        if not isinstance(v, Node) or v.id not in self._children:
            return v
        texts = [t for t, n in self._children[v.id] if n == TEXT]
        if not texts:
            return v
        if len(texts) == 1:
            return texts[0]
        return parse_literal("".join(str(t) for t in texts))

    def copy(self) -> XStructure:
        s = XStructure.__new__(XStructure)
        s._next = self._next
        s.nodes = dict(self.nodes)
        s._children = {k: list(v) for k, v in self._children.items()}
        s._attrs = {k: list(v) for k, v in self._attrs.items()}
        s._attr_keys = {k: set(v) for k, v in self._attr_keys.items()}
        s._parents = {k: set(v) for k, v in self._parents.items()}
        s._tags = dict(self._tags)
        s.predicates = {k: dict(v) for k, v in self.predicates.items()}
        s.constants = dict(self.constants)
        s.documents = dict(self.documents)
        s.id_strings = dict(self.id_strings)
        return s

    def stats(self) -> dict[str, int]:
        return {
            "nodes": len(self.nodes),
            "edges": self.edge_count(),
            "roots": len(self._children[ROOT.id]),
            "documents": len(self.documents),
            "predicate_facts": sum(len(f) for f in self.predicates.values()),
            "constants": len(self.constants),
        }


def new_structure() -> XStructure:
    return XStructure()


def alloc_node(s: XStructure, hint: str | None = None) -> Node:
    return s.alloc_node(hint)


def axis_members(s: XStructure, a: Axis | str, x: Node) -> list[Edge]:
    return s.axis_members(a, x)


def assert_predicate(s: XStructure, p: str, args: Iterable[Value]) -> XStructure:
    s.assert_predicate(p, args)
    return s


def literal_value(s: XStructure, v: Value) -> Value:
    return s.literal_value(v)
