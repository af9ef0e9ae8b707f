"""Expressions as tagged store buffers.

An expression is a buffer laid out as [case-tag, handle, case fields...]:

    0  variable       name
    1  value          content
    2  bundle         items (list of expressions)
    3  primitive      name, actuals
    4  let            bound-variables (list of symbols), bound-expression, body
    5  call           procedure-name, actuals
    6  call-indirect  procedure-expression, actuals
    7  if-in          discriminand, values (list of words), then, else
    8  fork           procedure-name, actuals
    9  join           future-expression
   10  lambda         formals, body            (extension)
   11  call-closure   closure-expression, actuals   (extension)

Lists are nil/cons chains.  Expressions live in the store so that
reflective code can build, inspect and mutate them; the interpreter
re-reads structure at every step, which keeps self-modifying programs
honest at some cost in speed.
"""

from __future__ import annotations

from .errors import AnalysisError, CheckedRuntimeError
from .store import Buffer, word_eq

VARIABLE = 0
VALUE = 1
BUNDLE = 2
PRIMITIVE = 3
LET = 4
CALL = 5
CALL_INDIRECT = 6
IF_IN = 7
FORK = 8
JOIN = 9
LAMBDA = 10
CALL_CLOSURE = 11

CASE_NAMES = ["variable", "value", "bundle", "primitive", "let", "call",
              "call-indirect", "if-in", "fork", "join", "lambda",
              "call-closure"]

# cells beyond [tag, handle] per case
_ARITY = [1, 1, 1, 2, 3, 2, 2, 4, 2, 1, 2, 2]


def is_expression(w) -> bool:
    return (isinstance(w, Buffer) and w.cells is not None
            and len(w.cells) >= 2 and isinstance(w.cells[0], int)
            and 0 <= w.cells[0] <= CALL_CLOSURE
            and len(w.cells) == 2 + _ARITY[w.cells[0]])


def case_of(e) -> int:
    if not isinstance(e, Buffer) or e.cells is None or len(e.cells) < 2:
        raise CheckedRuntimeError(f"not an expression: {e!r}")
    return e.cells[0]


def handle_of(e) -> int:
    return e.cells[1]


def explode(e):
    """Return (handle, field...) for any case."""
    return tuple(e.cells[1:])


class ExprBuilder:
    """Constructors over a global state; the starred behavior (fresh
    handle generation) is the default, pass handle= to pin one."""

    def __init__(self, state):
        self.state = state

    def _make(self, tag, fields, handle):
        if handle is None:
            handle = self.state.fresh_handle()
        b = self.state.store.buffer_make(2 + len(fields), 0)
        cells = b.cells
        cells[0] = tag
        cells[1] = handle
        for i, f in enumerate(fields):
            cells[2 + i] = f
        return b

    def _list(self, items):
        return self.state.store.list_from(items)

    def variable(self, name, handle=None):
        return self._make(VARIABLE, [name], handle)

    def value(self, content, handle=None):
        return self._make(VALUE, [content], handle)

    def bundle(self, items, handle=None):
        return self._make(BUNDLE, [self._list(items)], handle)

    def primitive(self, name, actuals, handle=None):
        return self._make(PRIMITIVE, [name, self._list(actuals)], handle)

    def let(self, bound_variables, bound_expression, body, handle=None):
        return self._make(LET, [self._list(bound_variables), bound_expression, body], handle)

    def call(self, name, actuals, handle=None):
        return self._make(CALL, [name, self._list(actuals)], handle)

    def call_indirect(self, procedure_expression, actuals, handle=None):
        return self._make(CALL_INDIRECT, [procedure_expression, self._list(actuals)], handle)

    def if_in(self, discriminand, values, then_branch, else_branch, handle=None):
        return self._make(IF_IN, [discriminand, self._list(values), then_branch, else_branch], handle)

    def fork(self, name, actuals, handle=None):
        return self._make(FORK, [name, self._list(actuals)], handle)

    def join(self, future_expression, handle=None):
        return self._make(JOIN, [future_expression], handle)

    def lambda_(self, formals, body, handle=None):
        return self._make(LAMBDA, [self._list(formals), body], handle)

    def call_closure(self, closure_expression, actuals, handle=None):
        return self._make(CALL_CLOSURE, [closure_expression, self._list(actuals)], handle)


def _list_items(w):
    items = []
    while w != 0:
        items.append(w.cells[0])
        w = w.cells[1]
    return items


def subexpressions(e):
    """Direct subexpressions, in evaluation order."""
    cells = e.cells
    tag = cells[0]
    if tag in (VARIABLE, VALUE):
        return []
    if tag == BUNDLE:
        return _list_items(cells[2])
    if tag in (PRIMITIVE, CALL, FORK):
        return _list_items(cells[3])
    if tag == LET:
        return [cells[3], cells[4]]
    if tag in (CALL_INDIRECT, CALL_CLOSURE):
        return [cells[2]] + _list_items(cells[3])
    if tag == IF_IN:
        return [cells[2], cells[4], cells[5]]
    if tag == JOIN:
        return [cells[2]]
    if tag == LAMBDA:
        return [cells[3]]
    raise AnalysisError(f"unknown expression case {tag}")


def free_variables(e, state):
    """Symbols occurring as variables not bound by an enclosing let (or
    lambda formals) within e.  Returned in first-occurrence order so
    that code generated from the result is deterministic."""
    found: dict[int, object] = {}

    def walk(e, bound):
        cells = e.cells
        tag = cells[0]
        if tag == VARIABLE:
            sym = cells[2]
            if id(sym) not in bound and id(sym) not in found:
                found[id(sym)] = sym
        elif tag == VALUE:
            pass
        elif tag == LET:
            walk(cells[3], bound)
            inner = bound | {id(s) for s in _list_items(cells[2])}
            walk(cells[4], inner)
        elif tag == LAMBDA:
            inner = bound | {id(s) for s in _list_items(cells[2])}
            walk(cells[3], inner)
        elif tag == BUNDLE:
            for item in _list_items(cells[2]):
                walk(item, bound)
        elif tag in (PRIMITIVE, CALL, FORK):
            for item in _list_items(cells[3]):
                walk(item, bound)
        elif tag in (CALL_INDIRECT, CALL_CLOSURE):
            walk(cells[2], bound)
            for item in _list_items(cells[3]):
                walk(item, bound)
        elif tag == IF_IN:
            walk(cells[2], bound)
            walk(cells[4], bound)
            walk(cells[5], bound)
        elif tag == JOIN:
            walk(cells[2], bound)
        else:
            raise AnalysisError(f"unknown expression case {tag}")

    walk(e, frozenset())
    return list(found.values())


def equal_up_to_handles(a, b) -> bool:
    """Structural equality ignoring handles.  Symbols and other buffers
    appearing as leaves compare by identity; unboxed words numerically."""
    if not is_expression(a) or not is_expression(b):
        return word_eq(a, b)
    ca, cb = a.cells, b.cells
    if ca[0] != cb[0]:
        return False
    tag = ca[0]
    if tag == VARIABLE:
        return ca[2] is cb[2]
    if tag == VALUE:
        return word_eq(ca[2], cb[2]) or equal_up_to_handles(ca[2], cb[2])
    if tag == BUNDLE:
        return _lists_equal(ca[2], cb[2])
    if tag in (PRIMITIVE, CALL, FORK):
        return ca[2] is cb[2] and _lists_equal(ca[3], cb[3])
    if tag == LET:
        xa, xb = _list_items(ca[2]), _list_items(cb[2])
        return (len(xa) == len(xb) and all(p is q for p, q in zip(xa, xb))
                and equal_up_to_handles(ca[3], cb[3])
                and equal_up_to_handles(ca[4], cb[4]))
    if tag in (CALL_INDIRECT, CALL_CLOSURE):
        return equal_up_to_handles(ca[2], cb[2]) and _lists_equal(ca[3], cb[3])
    if tag == IF_IN:
        va, vb = _list_items(ca[3]), _list_items(cb[3])
        return (equal_up_to_handles(ca[2], cb[2])
                and len(va) == len(vb)
                and all(word_eq(p, q) for p, q in zip(va, vb))
                and equal_up_to_handles(ca[4], cb[4])
                and equal_up_to_handles(ca[5], cb[5]))
    if tag == JOIN:
        return equal_up_to_handles(ca[2], cb[2])
    if tag == LAMBDA:
        xa, xb = _list_items(ca[2]), _list_items(cb[2])
        return (len(xa) == len(xb) and all(p is q for p, q in zip(xa, xb))
                and equal_up_to_handles(ca[3], cb[3]))
    return False


def _lists_equal(a, b):
    xa, xb = _list_items(a), _list_items(b)
    return len(xa) == len(xb) and all(equal_up_to_handles(p, q) for p, q in zip(xa, xb))


_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def to_text(e, state, handles=True):
    """Debug rendering, bracketed with subscript handles."""

    def sub(h):
        return str(h).translate(_SUBSCRIPTS) if handles else ""

    def word(w):
        if isinstance(w, Buffer):
            if w.cells is not None and len(w.cells) == 9 and w.cells[0] != 0:
                try:
                    return state.symbol_name(w)
                except Exception:
                    pass
            return f"0x{w.serial:x}"
        return str(w)

    def go(e):
        if not is_expression(e):
            return word(e)
        cells = e.cells
        tag, h = cells[0], cells[1]
        if tag == VARIABLE:
            return state.symbol_name(cells[2]) + sub(h)
        if tag == VALUE:
            return word(cells[2]) + sub(h)
        if tag == BUNDLE:
            return f"[bundle {' '.join(go(i) for i in _list_items(cells[2]))}]{sub(h)}"
        if tag == PRIMITIVE:
            parts = " ".join(go(i) for i in _list_items(cells[3]))
            return f"[primitive {state.symbol_name(cells[2])} {parts}]{sub(h)}"
        if tag == LET:
            names = " ".join(state.symbol_name(s) for s in _list_items(cells[2]))
            return f"[let [{names}] be {go(cells[3])} in {go(cells[4])}]{sub(h)}"
        if tag == CALL:
            parts = " ".join(go(i) for i in _list_items(cells[3]))
            return f"[call {state.symbol_name(cells[2])} {parts}]".replace(" ]", "]") + sub(h)
        if tag == CALL_INDIRECT:
            parts = " ".join(go(i) for i in [cells[2]] + _list_items(cells[3]))
            return f"[call-indirect {parts}]{sub(h)}"
        if tag == IF_IN:
            vals = " ".join(word(v) for v in _list_items(cells[3]))
            return (f"[if {go(cells[2])} ∈ {{{vals}}} then {go(cells[4])} "
                    f"else {go(cells[5])}]{sub(h)}")
        if tag == FORK:
            parts = " ".join(go(i) for i in _list_items(cells[3]))
            return f"[fork {state.symbol_name(cells[2])} {parts}]".replace(" ]", "]") + sub(h)
        if tag == JOIN:
            return f"[join {go(cells[2])}]{sub(h)}"
        if tag == LAMBDA:
            names = " ".join(state.symbol_name(s) for s in _list_items(cells[2]))
            return f"[lambda [{names}] {go(cells[3])}]{sub(h)}"
        if tag == CALL_CLOSURE:
            parts = " ".join(go(i) for i in [cells[2]] + _list_items(cells[3]))
            return f"[call-closure {parts}]{sub(h)}"
        return f"[? {tag}]"

    return go(e)


# -- holed expressions (machine frames) --------------------------------
#
# Holes never nest and never enter the store: each is a host object
# recording the still-pending parts of the expression it came from,
# plus the original subexpression count, which resynthesization needs.

class LetHole:
    __slots__ = ("handle", "variables", "body")

    def __init__(self, handle, variables, body):
        self.handle = handle
        self.variables = variables  # Python list of symbols
        self.body = body


class CallHole:
    __slots__ = ("handle", "name", "n")

    def __init__(self, handle, name, n):
        self.handle = handle
        self.name = name
        self.n = n


class PrimitiveHole:
    __slots__ = ("handle", "name", "n")

    def __init__(self, handle, name, n):
        self.handle = handle
        self.name = name
        self.n = n


class IfHole:
    __slots__ = ("handle", "values", "then_branch", "else_branch")

    def __init__(self, handle, values, then_branch, else_branch):
        self.handle = handle
        self.values = values  # Python list of words
        self.then_branch = then_branch
        self.else_branch = else_branch


class BundleHole:
    __slots__ = ("handle", "n")

    def __init__(self, handle, n):
        self.handle = handle
        self.n = n


class ForkHole:
    __slots__ = ("handle", "name", "n")

    def __init__(self, handle, name, n):
        self.handle = handle
        self.name = name
        self.n = n


class JoinHole:
    __slots__ = ("handle",)

    def __init__(self, handle):
        self.handle = handle


class CallIndirectHole:
    # operator evaluated first, then the n operands
    __slots__ = ("handle", "n")

    def __init__(self, handle, n):
        self.handle = handle
        self.n = n


class CallClosureHole:
    # extended-interpreter counterpart of CallIndirectHole
    __slots__ = ("handle", "n")

    def __init__(self, handle, n):
        self.handle = handle
        self.n = n
