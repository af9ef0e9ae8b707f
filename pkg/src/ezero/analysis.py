"""Bundle-dimension analysis over static programs.

The dimension domain is the flat lattice over the naturals: BOTTOM
(unconstrained, only trivially-looping code), Lift(n) represented as a
plain int n (a bundle of exactly n values), and TOP (inconsistent).
Procedure out-dimensions are the minimum fixpoint of the body rules,
computed by a worklist seeded at BOTTOM; the per-expression function
is totalized to TOP wherever a rule's side conditions fail, so the
report covers every subexpression handle.

Resynthesization rebuilds a single expression out of a machine
configuration (value-stack groups become literal bundles, holed frames
are re-plugged), extending dimensions from expressions to reachable
configurations; the weak-preservation tests drive it step by step.
"""

from __future__ import annotations

from collections import deque

from . import expr as E
from .errors import AnalysisError
from .expr import (BundleHole, CallHole, CallIndirectHole, ExprBuilder,
                   ForkHole, IfHole, JoinHole, LetHole, PrimitiveHole)
from .store import Buffer


class _Extreme:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


BOTTOM = _Extreme("bot")
TOP = _Extreme("top")


def is_lift(d):
    return type(d) is int


def join(a, b):
    if a is BOTTOM:
        return b
    if b is BOTTOM:
        return a
    if a is TOP or b is TOP:
        return TOP
    return a if a == b else TOP


def meet(a, b):
    if a is TOP:
        return b
    if b is TOP:
        return a
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    return a if a == b else BOTTOM


def leq(a, b):
    if a is BOTTOM or b is TOP:
        return True
    if a is TOP or b is BOTTOM:
        return False
    return a == b


def _at_most_one(d):
    return d is BOTTOM or d == 1


def format_dimension(d):
    return str(d) if type(d) is int else d.name


class StaticProgram:
    """A snapshot of procedure bindings plus a main expression.  The
    analysis reads expression buffers from the owning state's store but
    never mutates anything."""

    def __init__(self, state, procedures, main=None):
        self.state = state
        self.procedures = list(procedures)  # (symbol, formals list, body)
        self.main = main

    @classmethod
    def from_state(cls, state, main=None, only=None):
        procedures = []
        keep = None if only is None else {id(s) for s in only}
        for sym in state.procedure_names():
            if keep is not None and id(sym) not in keep:
                continue
            formals = state.store.list_items(sym.cells[3])
            procedures.append((sym, formals, sym.cells[4]))
        return cls(state, procedures, main)


class DimensionReport:
    def __init__(self, program, assumptions, by_handle, main_dimension):
        self.program = program
        self._assumptions = assumptions  # id(symbol) -> (in_dim, out_dim)
        self.by_handle = by_handle
        self.main_dimension = main_dimension

    def procedure_dimension(self, sym):
        """(in_dim, out_dim) of a snapshot procedure."""
        entry = self._assumptions.get(id(sym))
        if entry is None:
            raise AnalysisError(f"not in the analyzed snapshot: {sym!r}")
        return entry

    @property
    def well_dimensioned(self):
        if any(d is TOP for (_n, d) in self._assumptions.values()):
            return False
        return self.main_dimension is not TOP

    def expression_dimension(self, e, record=None):
        """Dimension of an arbitrary expression under this report's
        fixpoint assumptions (used on resynthesized configurations)."""
        return _dim(e, self._assumptions, self.program.state, record, {}, set())


def _dim(e, assumptions, state, record, memo, active):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if key in active:
        raise AnalysisError("cyclic expression structure")
    active.add(key)
    try:
        d = _dim_uncached(e, assumptions, state, record, memo, active)
    finally:
        active.discard(key)
    memo[key] = d
    if record is not None:
        record[e.cells[1]] = d
    return d


def _dim_uncached(e, assumptions, state, record, memo, active):
    if not E.is_expression(e):
        raise AnalysisError(f"not an expression: {e!r}")
    cells = e.cells
    tag = cells[0]
    if tag == E.VARIABLE or tag == E.VALUE:
        return 1
    if tag == E.BUNDLE:
        items = state.store.list_items(cells[2])
        dims = [_dim(i, assumptions, state, record, memo, active) for i in items]
        if all(_at_most_one(d) for d in dims):
            return len(items)
        return TOP
    if tag == E.LET:
        n = len(state.store.list_items(cells[2]))
        d1 = _dim(cells[3], assumptions, state, record, memo, active)
        d2 = _dim(cells[4], assumptions, state, record, memo, active)
        if (d1 is BOTTOM or (type(d1) is int and d1 >= n)) and d2 is not TOP:
            return d2
        return TOP
    if tag == E.PRIMITIVE:
        items = state.store.list_items(cells[3])
        dims = [_dim(i, assumptions, state, record, memo, active) for i in items]
        sym = cells[2]
        descriptor = None
        if isinstance(sym, Buffer) and sym.cells is not None and len(sym.cells) == 9:
            descriptor = state.catalog.by_index(sym.cells[7])
        if (descriptor is not None and descriptor.in_dim == len(items)
                and all(_at_most_one(d) for d in dims)):
            return descriptor.out_dim
        return TOP
    if tag == E.CALL:
        items = state.store.list_items(cells[3])
        dims = [_dim(i, assumptions, state, record, memo, active) for i in items]
        entry = assumptions.get(id(cells[2]))
        if (entry is not None and entry[0] == len(items)
                and all(_at_most_one(d) for d in dims) and entry[1] is not TOP):
            return entry[1]
        return TOP
    if tag == E.IF_IN:
        d1 = _dim(cells[2], assumptions, state, record, memo, active)
        d2 = _dim(cells[4], assumptions, state, record, memo, active)
        d3 = _dim(cells[5], assumptions, state, record, memo, active)
        d = join(d2, d3)
        if _at_most_one(d1) and d is not TOP:
            return d
        return TOP
    if tag == E.FORK:
        # the forked procedure receives the future as its zeroth formal
        items = state.store.list_items(cells[3])
        dims = [_dim(i, assumptions, state, record, memo, active) for i in items]
        entry = assumptions.get(id(cells[2]))
        if (entry is not None and entry[0] == len(items) + 1
                and all(_at_most_one(d) for d in dims) and _at_most_one(entry[1])):
            return 1
        return TOP
    if tag == E.JOIN:
        d1 = _dim(cells[2], assumptions, state, record, memo, active)
        return 1 if _at_most_one(d1) else TOP
    if tag in (E.CALL_INDIRECT, E.LAMBDA, E.CALL_CLOSURE):
        for sub in E.subexpressions(e):
            _dim(sub, assumptions, state, record, memo, active)
        return TOP
    raise AnalysisError(f"unknown expression case {tag}")


def infer(program, seed=BOTTOM):
    """Analyze a static program.  The default BOTTOM seed computes the
    minimum fixpoint; seeding at TOP exists to let tests check that the
    shipped result is the least one."""
    state = program.state
    assumptions = {}
    bodies = {}
    for sym, formals, body in program.procedures:
        assumptions[id(sym)] = (len(formals), seed)
        bodies[id(sym)] = (sym, body)

    # dependents: who calls or forks whom, for the worklist
    dependents = {key: set() for key in bodies}

    def collect_targets(e, into):
        tag = e.cells[0]
        if tag in (E.CALL, E.FORK):
            into.add(id(e.cells[2]))
        for sub in E.subexpressions(e):
            collect_targets(sub, into)

    for key, (_sym, body) in bodies.items():
        targets = set()
        collect_targets(body, targets)
        for t in targets:
            if t in dependents:
                dependents[t].add(key)

    work = deque(bodies)
    pending = set(bodies)
    while work:
        key = work.popleft()
        pending.discard(key)
        sym, body = bodies[key]
        n, old = assumptions[key]
        new = _dim(body, assumptions, state, None, {}, set())
        if new is not old and not (type(new) is int and type(old) is int and new == old):
            assumptions[key] = (n, new)
            for dep in dependents[key]:
                if dep not in pending:
                    pending.add(dep)
                    work.append(dep)

    by_handle = {}
    for key, (_sym, body) in bodies.items():
        _dim(body, assumptions, state, by_handle, {}, set())
    main_dimension = None
    if program.main is not None:
        main_dimension = _dim(program.main, assumptions, state, by_handle, {}, set())
    return DimensionReport(program, assumptions, by_handle, main_dimension)


def well_dimensioned(program):
    return infer(program).well_dimensioned


# -- resynthesization ---------------------------------------------------------

def value_stack_to_expressions(vstack, state):
    """Translate a value stack into literal bundle expressions, one per
    value group, topmost group first; activation separators are
    skipped."""
    from .interp import ASEP, VSEP

    if not vstack or vstack[-1] is not VSEP:
        raise AnalysisError("value stack does not start with a value separator")
    b = ExprBuilder(state)
    out = []
    current = []
    for i in range(len(vstack) - 2, -1, -1):
        item = vstack[i]
        if item is ASEP:
            if current:
                raise AnalysisError("activation separator inside a value group")
        elif item is VSEP:
            out.append(b.bundle([b.value(c) for c in current]))
            current = []
        else:
            current.append(item)
    if current:
        raise AnalysisError("value stack does not end with a value separator")
    return out


def resynthesize(stack, vstack, state):
    """Reconstruct the single expression a reachable configuration is
    evaluating.  Fresh handles come from the state's normal counter."""
    b = ExprBuilder(state)
    expressions = deque(value_stack_to_expressions(vstack, state))

    def pop():
        if not expressions:
            raise AnalysisError("resynthesization ran out of expressions")
        return expressions.popleft()

    def pop_many(n):
        popped = [pop() for _ in range(n)]
        popped.reverse()
        return popped

    for item, _rho in reversed(stack):
        cls = item.__class__
        if cls is Buffer:
            expressions.appendleft(item)
        elif cls is LetHole:
            expressions.appendleft(b.let(item.variables, pop(), item.body))
        elif cls is CallHole:
            expressions.appendleft(b.call(item.name, pop_many(item.n)))
        elif cls is PrimitiveHole:
            expressions.appendleft(b.primitive(item.name, pop_many(item.n)))
        elif cls is IfHole:
            expressions.appendleft(b.if_in(pop(), item.values,
                                           item.then_branch, item.else_branch))
        elif cls is BundleHole:
            expressions.appendleft(b.bundle(pop_many(item.n)))
        elif cls is ForkHole:
            expressions.appendleft(b.fork(item.name, pop_many(item.n)))
        elif cls is JoinHole:
            expressions.appendleft(b.join(pop()))
        elif cls is CallIndirectHole:
            operands = pop_many(item.n + 1)
            expressions.appendleft(b.call_indirect(operands[0], operands[1:]))
        else:
            raise AnalysisError(f"cannot resynthesize frame {item!r}")
    if len(expressions) != 1:
        raise AnalysisError(
            f"configuration resynthesized into {len(expressions)} expressions")
    return expressions[0]


def configuration_dimension(stack, vstack, state, report):
    return report.expression_dimension(resynthesize(stack, vstack, state))
