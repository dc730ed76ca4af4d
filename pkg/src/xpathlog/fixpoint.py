"""Bottom-up program evaluation with once-per-binding rule firing."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Callable, Sequence

from .bindings import BindingSet
from .errors import DivergenceError, ResourceLimitError
from .evaluate import EvalContext, answers, value_key
from .syntax import Program, Rule
from .update import Batch, apply_plan, instantiate_head
from .xmlio import AttrTypes
from .xtree import Value, XStructure

FiringKey = tuple[int, frozenset]
Trace = Callable[[str], None]


@dataclass(frozen=True)
class Limits:
    max_iterations: int = 10_000
    max_nodes: int = 10**7


@dataclass
class EngineState:
    structure: XStructure
    dic: set[FiringKey] = field(default_factory=set)
    iteration: int = 0
    limits: Limits = field(default_factory=Limits)
    base_dir: FsPath | None = None
    attr_types: AttrTypes | None = None
    # (rule index, assignment) in firing order, across the current stratum
    fired: list[tuple[int, dict[str, Value]]] = field(default_factory=list)

    def context(self) -> EvalContext:
        return EvalContext(self.structure, base_dir=self.base_dir, attr_types=self.attr_types)


def canonical(bindings: BindingSet) -> list[dict[str, Value]]:
    rows = sorted(bindings.rows, key=lambda r: [value_key(v) for v in r])
    return [dict(zip(bindings.schema, r)) for r in rows]


def firings(st: EngineState, rules: Sequence[Rule]) -> list[tuple[int, dict[str, Value]]]:
    """New (rule, assignment) pairs whose bodies hold in the current structure."""
    ctx = st.context()
    out = []
    for i, rule in enumerate(rules):
        for beta in canonical(answers(ctx, rule.body, check=False)):
            if (i, frozenset(beta.items())) not in st.dic:
                out.append((i, beta))
    return out


def tx_step(st: EngineState, rules: Sequence[Rule], trace: Trace | None = None) -> tuple[EngineState, bool]:
    """Fire every new instantiation against a frozen snapshot, as one batch."""
    todo = firings(st, rules)
    before = len(st.structure.nodes)
    successor = st.structure.copy()
    batch = Batch(successor)
    for i, beta in todo:
        apply_plan(successor, instantiate_head(rules[i].head, beta), batch)
    if len(successor.nodes) > st.limits.max_nodes:
        raise ResourceLimitError(f"node cap {st.limits.max_nodes} exceeded at iteration {st.iteration + 1}")
    st.structure = successor
    st.dic.update((i, frozenset(beta.items())) for i, beta in todo)
    st.fired.extend(todo)
    st.iteration += 1
    if trace is not None:
        trace(f"iter={st.iteration} fired={len(todo)} new_nodes={len(successor.nodes) - before}")
    return st, bool(todo)


def tx_fixpoint(st: EngineState, stratum: Sequence[Rule], trace: Trace | None = None) -> EngineState:
    """Iterate ``tx_step`` until nothing fires; DivergenceError at the iteration limit."""
    start = st.iteration
    while True:
        if st.iteration - start >= st.limits.max_iterations:
            raise DivergenceError(st.iteration - start, st)
        st, changed = tx_step(st, stratum, trace)
        if not changed:
            return st


def run_program(
    s: XStructure,
    program: Program,
    limits: Limits | None = None,
    *,
    base_dir: FsPath | None = None,
    attr_types: AttrTypes | None = None,
    trace: Trace | None = None,
) -> XStructure:
    """Run each stratum to its fixpoint, in order, with a fresh dictionary."""
    st = EngineState(s, limits=limits or Limits(), base_dir=base_dir, attr_types=attr_types)
    for stratum in program.strata:
        st.dic = set()
        st.fired = []
        st = tx_fixpoint(st, stratum, trace)
    return st.structure
