"""Command-line runner and REPL.

Input is a sequence of rules, ``?-`` queries and ``@`` commands.  A command
occupies one line; everything else may span lines and ends with ``.``.
Rules are collected and run (to fixpoint) right before the next query or
command, and at end of input.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO
from xml.sax.saxutils import escape

from .atomize import atomize, render
from .bindings import BindingSet
from .checks import assemble
from .errors import XPathLogError, XPathLogSyntaxError
from .evaluate import EvalContext, answers, eval_expr, res
from .fixpoint import Limits, run_program
from .parser import parse_atom, parse_query, parse_statements
from .syntax import Query, variables
from .xmlio import AttrTypes, load_file, read_attr_types, serialize_view
from .xtree import Node, Value, XStructure, show

_LOAD = re.compile(r"@load\s+(\S+)\s+as\s+([A-Za-z_][\w.\-]*)\s*\.?\s*$")
_RUN = re.compile(r"@run\s+(\S+?)\s*\.?\s*$")
_EXPORT = re.compile(r"@export\s+(.+?)\s*\.?\s*$")
_EXPLAIN = re.compile(r"@explain\s+(.+)$", re.S)


@dataclass
class Session:
    structure: XStructure = field(default_factory=XStructure)
    limits: Limits = field(default_factory=Limits)
    output: str = "bindings"
    attr_types: AttrTypes | None = None
    trace: bool = False
    out: TextIO = field(default_factory=lambda: sys.stdout)
    err: TextIO = field(default_factory=lambda: sys.stderr)
    pending: list[object] = field(default_factory=list)

    def say(self, text: str) -> None:
        print(text, file=self.out)

    # -- program text -------------------------------------------------------

    def feed(self, text: str, base_dir: Path) -> None:
        """Parse a chunk of rules and queries and act on it in order."""
        for item in parse_statements(text):
            if isinstance(item, Query):
                self.flush(base_dir)
                self.query(list(item.body), base_dir)
            else:
                self.pending.append(item)

    def flush(self, base_dir: Path) -> None:
        if not self.pending:
            return
        items, self.pending = self.pending, []
        program = assemble(items)
        trace = (lambda line: print(line, file=self.err)) if self.trace else None
        self.structure = run_program(
            self.structure, program, self.limits,
            base_dir=base_dir, attr_types=self.attr_types, trace=trace,
        )

    def context(self, base_dir: Path) -> EvalContext:
        return EvalContext(self.structure, base_dir=base_dir, attr_types=self.attr_types)

    def query(self, literals: list[object], base_dir: Path) -> None:
        result = answers(self.context(base_dir), literals)
        shown = [v for v in variables(*literals) if not v.startswith("_")]
        if not shown:
            self.say("true" if result else "false")
            return
        if not result:
            self.say("false")
            return
        rows = {tuple(b[v] for v in shown) for b in result}
        if self.output == "xml":
            self.say(_xml_answers(self.structure, shown, rows))
            return
        lines = sorted("  ".join(f"{v}/{show(x)}" for v, x in zip(shown, row)) for row in rows)
        for line in lines:
            self.say(line)

    # -- commands -------------------------------------------------------------

    def command(self, line: str, base_dir: Path) -> None:
        self.flush(base_dir)
        if m := _LOAD.match(line):
            path = base_dir / m.group(1)
            root = load_file(self.structure, path, m.group(1), self.attr_types)
            self.structure.documents.setdefault(str(path), root)
            self.structure.constants[m.group(2)] = root
        elif m := _RUN.match(line):
            self.run_file(base_dir / m.group(1))
        elif m := _EXPORT.match(line):
            self.export(m.group(1), base_dir)
        elif m := _EXPLAIN.match(line):
            atom = parse_atom(m.group(1).strip().rstrip("."))
            self.say(render(atomize(atom)))
        elif re.match(r"@stats\s*\.?\s*$", line):
            for k, v in self.structure.stats().items():
                self.say(f"{k}={v}")
        else:
            raise XPathLogSyntaxError(f"unknown command: {line.split()[0]}", 0, 0, "command")

    def export(self, spec: str, base_dir: Path) -> None:
        words = spec.split()
        target = None
        if len(words) >= 2 and words[-2] == "to":
            target = base_dir / words[-1]
            words = words[:-2]
        if not words:
            raise XPathLogSyntaxError("@export needs a constant or a path", 0, 0, "export target")
        head, names = words[0], words[1:] or None
        if head in self.structure.constants:
            nodes = [self.structure.constants[head]]
        else:
            [expr] = parse_query(head)
            ctx = self.context(base_dir)
            found = res(eval_expr(ctx, expr, ctx.root, BindingSet.true()))
            nodes = list(dict.fromkeys(v for v in found if isinstance(v, Node)))
        text = "".join(serialize_view(self.structure, n, names) for n in nodes)
        if target is None:
            self.out.write(text)
        else:
            target.write_text(text, encoding="utf-8")

    # -- input handling ------------------------------------------------------

    def run_lines(self, lines: Iterable[str], base_dir: Path, source: str) -> None:
        buf: list[str] = []
        start = 1
        for lineno, line in enumerate(lines, 1):
            if line.lstrip().startswith("@"):
                self.chunk(buf, start, base_dir, source)
                buf = []
                self.command(line.strip(), base_dir)
                continue
            if not buf:
                start = lineno
            buf.append(line)
        self.chunk(buf, start, base_dir, source)
        self.flush(base_dir)

    def chunk(self, buf: list[str], start: int, base_dir: Path, source: str) -> None:
        text = "".join(buf)
        if not text.strip():
            return
        try:
            self.feed(text, base_dir)
        except XPathLogSyntaxError as exc:
            line = exc.line + start - 1 if exc.line else start
            raise XPathLogSyntaxError(f"{source}: {exc.message}", line, exc.col, exc.expected) from None

    def run_file(self, path: Path) -> None:
        with open(path, encoding="utf-8") as f:
            self.run_lines(f, path.parent, str(path))

    def repl(self, stream: TextIO, interactive: bool) -> None:
        base_dir = Path.cwd()
        buf: list[str] = []
        while True:
            if interactive:
                print("xpathlog> " if not buf else "     ...> ", end="", file=self.err, flush=True)
            line = stream.readline()
            if not line:
                break
            try:
                if not buf and line.lstrip().startswith("@"):
                    self.command(line.strip(), base_dir)
                    continue
                buf.append(line)
                if _complete("".join(buf)):
                    text, buf = "".join(buf), []
                    self.feed(text, base_dir)
            except XPathLogError as exc:
                buf = []
                self.pending = []
                print(f"error: {exc}", file=self.err)
            except Exception as exc:  # noqa: BLE001 - keep the session alive
                buf = []
                self.pending = []
                print(f"internal error: {type(exc).__name__}: {exc}", file=self.err)
        try:
            self.flush(base_dir)
        except XPathLogError as exc:
            print(f"error: {exc}", file=self.err)


def _complete(text: str) -> bool:
    # a statement ends with "." followed by whitespace, comments stripped
    body = re.sub(r'"(?:[^"\\]|\\.)*"', '""', text)
    body = re.sub(r"%[^\n]*", "", body).rstrip()
    return body.endswith(".") and not body.endswith("..")


def _xml_answers(s: XStructure, shown: list[str], rows: set[tuple]) -> str:
    def cell(v: Value) -> str:
        if isinstance(v, Node):
            return serialize_view(s, v, indent=None)
        return escape(str(v))

    out = ["<answers>"]
    ordered = sorted(rows, key=lambda r: [show(v) for v in r])
    for row in ordered:
        out.append("  <answer>" + "".join(f"<{v}>{cell(x)}</{v}>" for v, x in zip(shown, row)) + "</answer>")
    out.append("</answers>")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xpathlog", description="Run XPathLog programs and queries.")
    p.add_argument("files", nargs="*", type=Path, help=".xlp files to execute in order")
    p.add_argument("-i", "--interactive", action="store_true", help="enter the REPL after the files")
    p.add_argument("--max-iterations", type=int, default=Limits.max_iterations)
    p.add_argument("--max-nodes", type=int, default=Limits.max_nodes)
    p.add_argument("--output", choices=("bindings", "xml"), default="bindings")
    p.add_argument("--trace", action="store_true", help="print one line per fixpoint iteration to stderr")
    p.add_argument("--attr-types", type=Path, help="sidecar file of `element attribute TYPE` lines")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    session = Session(
        limits=Limits(args.max_iterations, args.max_nodes),
        output=args.output,
        trace=args.trace,
    )
    batch = bool(args.files) or not (args.interactive or sys.stdin.isatty())
    try:
        if args.attr_types:
            session.attr_types = read_attr_types(args.attr_types)
        for path in args.files:
            session.run_file(path)
        if not args.files and batch:
            session.run_lines(sys.stdin, Path.cwd(), "<stdin>")
    except (XPathLogError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort report
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.interactive:
        session.repl(sys.stdin, interactive=sys.stdin.isatty())
    elif not batch:
        session.repl(sys.stdin, interactive=True)
    return 0

if __name__ == "__main__":
    sys.exit(main())
