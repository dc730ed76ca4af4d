"""Built-in function table: a small registry that callers may extend."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .xtree import Name, Node, Value, XStructure, parse_literal


@dataclass(frozen=True)
class Builtin:
    impl: Callable[..., object]
    min_args: int
    max_args: int | None
    boolean: bool = False
    uses_context: bool = False


def _num(v: object) -> int | float | None:
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, (int, float)) and not isinstance(v, Name):
        return v
    if isinstance(v, str):
        p = parse_literal(v)
        if isinstance(p, (int, float)):
            return p
    return None


def lexical(v: object) -> str:
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() else repr(v)
    return str(v)


def _concat(*args: Value) -> str:
    return "".join(lexical(a) for a in args)


def _contains(a: Value, b: Value) -> bool:
    return lexical(b) in lexical(a)


def _starts_with(a: Value, b: Value) -> bool:
    return lexical(a).startswith(lexical(b))


def _number(a: Value) -> float | int:
    n = _num(a)
    return math.nan if n is None else n


def _name(s: XStructure, context: Value, *args: Value) -> Name | None:
    target = args[0] if args else context
    return s.name_of(target) if isinstance(target, Node) else None


FUNCTIONS: dict[str, Builtin] = {
    "concat": Builtin(_concat, 1, None),
    "contains": Builtin(_contains, 2, 2, boolean=True),
    "starts-with": Builtin(_starts_with, 2, 2, boolean=True),
    "number": Builtin(_number, 1, 1),
    "string": Builtin(lambda a: lexical(a), 1, 1),
    "string-length": Builtin(lambda a: len(lexical(a)), 1, 1),
    "name": Builtin(_name, 0, 1, uses_context=True),
}


def arithmetic(op: str, a: object, b: object) -> int | float | None:
    x, y = _num(a), _num(b)
    if x is None or y is None:
        return None
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if y == 0:
        return None
    if op == "div":
        q = x / y
        return int(q) if isinstance(x, int) and isinstance(y, int) and q.is_integer() else q
    if op == "mod":
        return math.fmod(x, y) if isinstance(x, float) or isinstance(y, float) else x % y
    raise ValueError(op)


def compare(s: XStructure, op: str, a: Value, b: Value) -> bool:
    """Comparison after annotated-literal coercion of both sides."""
    a, b = s.literal_value(a), s.literal_value(b)
    if isinstance(a, Node) or isinstance(b, Node):
        if op == "=":
            return a == b
        if op == "!=":
            return a != b
        return False
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        l, r = x, y
    else:
        l, r = lexical(a), lexical(b)
    if op == "=":
        return l == r
    if op == "!=":
        return l != r
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    if op == ">=":
        return l >= r
    raise ValueError(op)


def call(s: XStructure, name: str, context: Value, args: list[Value]) -> object:
    fn = FUNCTIONS[name]
    if fn.uses_context:
        return fn.impl(s, context, *args)
    coerced = [s.literal_value(a) for a in args]
    if any(isinstance(a, Node) for a in coerced):
        return None
    return fn.impl(*coerced)
