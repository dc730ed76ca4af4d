"""XML text <-> X-Structure.

Loading uses the stdlib expat parser so that ATTLIST declarations of an
internal DTD subset are visible; those declarations (or a sidecar file)
decide which attributes are IDs, references or token lists.
"""

from __future__ import annotations

import re
import warnings
from pathlib import Path
from typing import Iterable, Mapping
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

from .errors import CyclicView, DanglingIdref, DocumentUnavailable, MalformedXml
from .xtree import TEXT, Node, Value, XStructure, parse_literal

AttrTypes = Mapping[tuple[str, str], str]

_REF_TYPES = {"IDREF", "IDREFS"}
_SPLIT_TYPES = {"IDREFS", "NMTOKENS", "ENTITIES"}


def read_attr_types(path: str | Path) -> dict[tuple[str, str], str]:
    """Parse a sidecar file of ``element attribute TYPE`` lines (``*`` = any element)."""
    types: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected `element attribute TYPE`")
        types[(parts[0], parts[1])] = parts[2].upper()
    return types


def mnemonic(id_string: str) -> str:
    """Display label derived from an ID value: ``cty-Brussels`` -> ``brussels``."""
    return re.sub(r"^[a-z]+-(?=.)", "", id_string.lower())


class _Loader:
    def __init__(self, s: XStructure, attr_types: AttrTypes | None) -> None:
        self.s = s
        self.types: dict[tuple[str, str], str] = dict(attr_types or {})
        self.stack: list[Node] = []
        self.text: list[str] = []
        self.pending: list[tuple[Node, str, list[str]]] = []
        self.ids: dict[str, Node] = {}
        self.root: Node | None = None

    def type_of(self, element: str, attribute: str) -> str:
        return self.types.get((element, attribute)) or self.types.get(("*", attribute), "CDATA")

    def attlist(self, element, attribute, typ, default, required) -> None:
        self.types.setdefault((element, attribute), typ.upper() if typ else "CDATA")

    def flush(self) -> None:
        if not self.text:
            return
        data = "".join(self.text)
        self.text.clear()
        if data.strip() and self.stack:
            self.s.add_child(self.stack[-1], TEXT, parse_literal(data))

    def start(self, tag: str, attrs: list[str]) -> None:
        self.flush()
        pairs = list(zip(attrs[0::2], attrs[1::2]))
        id_value = next((v for a, v in pairs if self.type_of(tag, a) == "ID"), None)
        node = self.s.alloc_node(mnemonic(id_value) if id_value else None, tag=tag)
        if id_value is not None:
            self.ids[id_value] = node
            self.s.id_strings[node.id] = id_value
        if self.stack:
            self.s.add_child(self.stack[-1], tag, node)
        else:
            self.root = node
        for a, v in pairs:
            self.pending.append((node, a, [tag, v]))
        self.stack.append(node)

    def end(self, tag: str) -> None:
        self.flush()
        self.stack.pop()

    def resolve(self) -> None:
        for node, attribute, (tag, raw) in self.pending:
            typ = self.type_of(tag, attribute)
            tokens = raw.split() if typ in _SPLIT_TYPES else [raw]
            for token in tokens:
                value: Value
                if typ in _REF_TYPES:
                    target = self.ids.get(token)
                    if target is None:
                        warnings.warn(DanglingIdref(token, tag, attribute), stacklevel=4)
                        value = token
                    else:
                        value = target
                elif typ == "ID":
                    value = token
                else:
                    value = parse_literal(token)
                self.s.add_attribute(node, attribute, value)


def load_xml(
    s: XStructure,
    text: str | bytes,
    source: str = "<string>",
    attr_types: AttrTypes | None = None,
) -> Node:
    """Add the document to ``s`` and return its root element node."""
    loader = _Loader(s, attr_types)
    parser = expat.ParserCreate()
    parser.ordered_attributes = True
    parser.AttlistDeclHandler = loader.attlist
    parser.StartElementHandler = loader.start
    parser.EndElementHandler = loader.end
    parser.CharacterDataHandler = loader.text.append
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise MalformedXml(f"{source}: {exc}") from exc
    assert loader.root is not None
    loader.resolve()
    s.add_root(loader.root, s.name_of(loader.root))
    s.documents[source] = loader.root
    return loader.root


def load_file(
    s: XStructure, path: str | Path, source: str | None = None, attr_types: AttrTypes | None = None
) -> Node:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DocumentUnavailable(str(path)) from exc
    return load_xml(s, data, source or str(path), attr_types)


def document_root(
    s: XStructure,
    source: str,
    base_dir: str | Path | None = None,
    attr_types: AttrTypes | None = None,
) -> Node:
    """Registered root for ``source``; local files are loaded on first use."""
    if source in s.documents:
        return s.documents[source]
    if "://" in source:
        raise DocumentUnavailable(f"{source}: only local files are supported")
    path = Path(base_dir or ".") / source
    if not path.is_file():
        raise DocumentUnavailable(source)
    return load_file(s, path, source, attr_types)


def _lexical(v: Value) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


class _Writer:
    def __init__(self, s: XStructure, names: Iterable[str] | None, indent: int | None) -> None:
        self.s = s
        self.names = None if names is None else {str(n) for n in names}
        self.indent = indent
        self.synth: dict[int, str] = {}
        self.out: list[str] = []

    def keep(self, name: str) -> bool:
        return self.names is None or name in self.names

    def kids(self, x: Node) -> list[tuple[Value, str]]:
        # text stays with its element; projection is over element and attribute names
        return [(v, n) for v, n in self.s.children(x) if n == TEXT or self.keep(n)]

    def ref(self, v: Node) -> str:
        if v.id in self.s.id_strings:
            return self.s.id_strings[v.id]
        if v.id not in self.synth:
            self.synth[v.id] = f"n{len(self.synth) + 1}"
        return self.synth[v.id]

    def collect(self, x: Node, path: set[int]) -> None:
        # assigns synthesized ids in document order and rejects cycles
        if x.id in path:
            raise CyclicView(f"node {x} reachable from itself")
        path.add(x.id)
        for v, n in self.s.attributes(x):
            if isinstance(v, Node) and self.keep(n):
                self.ref(v)
        for v, _ in self.kids(x):
            if isinstance(v, Node):
                self.collect(v, path)
        path.discard(x.id)

    def attrs(self, x: Node) -> str:
        grouped: dict[str, list[str]] = {}
        if x.id in self.synth:
            grouped["id"] = [self.synth[x.id]]
        for v, n in self.s.attributes(x):
            if self.keep(n):
                grouped.setdefault(n, []).append(self.ref(v) if isinstance(v, Node) else _lexical(v))
        return "".join(f" {n}={quoteattr(' '.join(vs))}" for n, vs in grouped.items())

    def inline(self, x: Node, tag: str) -> str:
        kids = self.kids(x)
        head = f"<{tag}{self.attrs(x)}"
        if not kids:
            return head + "/>"
        body = "".join(
            self.inline(v, n) if isinstance(v, Node) else escape(_lexical(v)) for v, n in kids
        )
        return f"{head}>{body}</{tag}>"

    def block(self, x: Node, tag: str, depth: int) -> None:
        kids = self.kids(x)
        pad = " " * (self.indent or 0) * depth
        if not kids or any(not isinstance(v, Node) for v, _ in kids):
            self.out.append(pad + self.inline(x, tag))
            return
        self.out.append(f"{pad}<{tag}{self.attrs(x)}>")
        for v, n in kids:
            self.block(v, n, depth + 1)
        self.out.append(f"{pad}</{tag}>")


def serialize_view(
    s: XStructure,
    root: Node,
    names: Iterable[str] | None = None,
    indent: int | None = 2,
) -> str:
    """Serialize the tree below ``root``, optionally projected to ``names``.

    ``indent=None`` yields a single line.
    """
    w = _Writer(s, names, indent)
    w.collect(root, set())
    tag = s.name_of(root) or "node"
    if indent is None:
        return w.inline(root, tag)
    w.block(root, tag, 0)
    return "\n".join(w.out) + "\n"
