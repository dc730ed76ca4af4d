"""Binding sets: relations over a variable schema."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .xtree import Value, show


class BindingSet:
    """A set of assignments, each total on ``schema``.

    Rows are tuples aligned with the sorted schema.  With an empty schema the
    set is either ``{true}`` (one empty row) or empty.
    """

    __slots__ = ("schema", "rows", "_cache")

    def __init__(self, schema: Iterable[str] = (), rows: Iterable[tuple] = ()) -> None:
        self.schema: tuple[str, ...] = tuple(sorted(set(schema)))
        self.rows: frozenset[tuple] = frozenset(rows)
        self._cache: dict[str, int] | None = None

    @property
    def _index(self) -> dict[str, int]:
        if self._cache is None:
            self._cache = {v: i for i, v in enumerate(self.schema)}
        return self._cache

    @classmethod
    def _raw(cls, schema: tuple[str, ...], rows: frozenset[tuple]) -> BindingSet:
        # schema already sorted and deduplicated
        out = cls.__new__(cls)
        out.schema = schema
        out.rows = rows
        out._cache = None
        return out

    @classmethod
    def true(cls) -> BindingSet:
        return _TRUE

    @classmethod
    def empty(cls, schema: Iterable[str] = ()) -> BindingSet:
        return cls(schema)

    @classmethod
    def single(cls, assignment: Mapping[str, Value]) -> BindingSet:
        schema = sorted(assignment)
        return cls(schema, [tuple(assignment[v] for v in schema)])

    @classmethod
    def from_dicts(cls, dicts: Iterable[Mapping[str, Value]], schema: Iterable[str] | None = None) -> BindingSet:
        dicts = list(dicts)
        if schema is None:
            names: set[str] = set()
            for d in dicts:
                names.update(d)
            schema = names
        out = cls(schema)
        return cls(out.schema, [tuple(d[v] for v in out.schema) for d in dicts])

    # -- container protocol -------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[dict[str, Value]]:
        for row in self.rows:
            yield dict(zip(self.schema, row))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BindingSet):
            return NotImplemented
        if not self.rows and not other.rows:
            return True
        return self.schema == other.schema and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.schema, self.rows))

    def __contains__(self, assignment: object) -> bool:
        if not isinstance(assignment, Mapping) or set(assignment) != set(self.schema):
            return False
        return tuple(assignment[v] for v in self.schema) in self.rows

    def __repr__(self) -> str:
        return f"BindingSet({self.pretty()})"

    def pretty(self) -> str:
        if not self.schema:
            return "{true}" if self.rows else "{}"
        rows = sorted(
            "{" + ", ".join(f"{v}/{show(x)}" for v, x in zip(self.schema, r)) + "}" for r in self.rows
        )
        return "{" + ", ".join(rows) + "}"

    def dicts(self) -> list[dict[str, Value]]:
        return list(self)

    def value(self, row: tuple, var: str) -> Value:
        return row[self._index[var]]

    # -- relational operators -------------------------------------------------

    def project(self, names: Iterable[str]) -> BindingSet:
        wanted = set(names)
        keep = [v for v in self.schema if v in wanted]
        if len(keep) == len(self.schema):
            return self
        idx = [self._index[v] for v in keep]
        return BindingSet(keep, (tuple(r[i] for i in idx) for r in self.rows))

    def drop(self, names: Iterable[str]) -> BindingSet:
        gone = set(names)
        return self.project(v for v in self.schema if v not in gone)

    def restrict(self, var: str, value: Value) -> BindingSet:
        i = self._index[var]
        return BindingSet._raw(self.schema, frozenset(r for r in self.rows if r[i] == value))

    def extend(self, var: str, value: Value) -> BindingSet:
        """Join with the single assignment {var/value}."""
        if not self.schema:
            return BindingSet._raw((var,), frozenset(((value,),) if self.rows else ()))
        if var in self.schema:
            return self.restrict(var, value)
        schema = tuple(sorted(self.schema + (var,)))
        pos = schema.index(var)
        return BindingSet._raw(schema, frozenset(r[:pos] + (value,) + r[pos:] for r in self.rows))

    def join(self, other: BindingSet) -> BindingSet:
        return natural_join(self, other)

    def union(self, other: BindingSet) -> BindingSet:
        if not other.rows:
            return self if self.rows or not other.schema else BindingSet(set(self.schema) | set(other.schema))
        if not self.rows:
            return other
        if self.schema != other.schema:
            raise ValueError(f"union of incompatible schemas {self.schema} / {other.schema}")
        return BindingSet(self.schema, self.rows | other.rows)

    def minus_subsumed(self, removed: BindingSet) -> BindingSet:
        return subsume_minus(self, removed)


_TRUE = BindingSet((), [()])


def union_all(sets: Iterable[BindingSet], schema: Iterable[str] = ()) -> BindingSet:
    first: BindingSet | None = None
    rows: set[tuple] = set()
    for b in sets:
        if not b.rows:
            continue
        if first is None:
            first = b
        elif b.schema != first.schema:
            raise ValueError(f"union of incompatible schemas {first.schema} / {b.schema}")
        rows.update(b.rows)
    if first is None:
        return BindingSet.empty(schema)
    return BindingSet._raw(first.schema, frozenset(rows))


def natural_join(a: BindingSet, b: BindingSet) -> BindingSet:
    """Relational natural join on the shared variables."""
    if not a.schema and a.rows:
        return b
    if not b.schema and b.rows:
        return a
    schema = sorted(set(a.schema) | set(b.schema))
    if not a.rows or not b.rows:
        return BindingSet(schema)
    shared = [v for v in a.schema if v in b._index]
    ai = [a._index[v] for v in shared]
    bi = [b._index[v] for v in shared]
    table: dict[tuple, list[tuple]] = {}
    for r in b.rows:
        table.setdefault(tuple(r[i] for i in bi), []).append(r)
    pick = [(0, a._index[v]) if v in a._index else (1, b._index[v]) for v in schema]
    rows = []
    for r in a.rows:
        for s in table.get(tuple(r[i] for i in ai), ()):
            pair = (r, s)
            rows.append(tuple(pair[side][i] for side, i in pick))
    return BindingSet(schema, rows)


def subsume_minus(base: BindingSet, removed: BindingSet) -> BindingSet:
    """Drop every row of ``base`` that is contained in some row of ``removed``."""
    if not removed.rows or not base.rows:
        return base
    if not set(base.schema) <= set(removed.schema):
        return base
    covered = removed.project(base.schema).rows
    return BindingSet(base.schema, (r for r in base.rows if r not in covered))
