"""The fixed primitive catalog.

Every primitive is total-or-failing: given the right number of
arguments it either returns exactly out_dim results or raises
PrimitiveFailure; it never diverges and never touches control.
Arity itself is enforced by the machine's contraction rule.
"""

from __future__ import annotations

from .errors import CheckedRuntimeError, PrimitiveFailure
from .store import Buffer, Future, wrap_word


class PrimitiveDescriptor:
    __slots__ = ("name", "in_dim", "out_dim", "fn")

    def __init__(self, name, in_dim, out_dim, fn):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.fn = fn


class Catalog:
    """Immutable name -> descriptor mapping with stable 1-based indices
    (symbol cell 7 caches the index of its primitive, 0 meaning none)."""

    def __init__(self, descriptors):
        self._by_index = [None] + list(descriptors)
        self._by_name = {d.name: i for i, d in enumerate(self._by_index) if d}

    def index_of(self, name: str) -> int:
        return self._by_name.get(name, 0)

    def by_index(self, idx: int):
        if not isinstance(idx, int) or idx <= 0 or idx >= len(self._by_index):
            return None
        return self._by_index[idx]

    def get(self, name: str):
        idx = self._by_name.get(name)
        return self._by_index[idx] if idx else None

    def names(self):
        return list(self._by_name)

    def __len__(self):
        return len(self._by_index) - 1


def _fixnum(w, who):
    if type(w) is not int:
        raise PrimitiveFailure("NonFixnumArgument", f"{who}: {w!r} is not a fixnum")
    return w


def _buffer(w, who):
    if not isinstance(w, Buffer):
        raise PrimitiveFailure("NonBufferArgument", f"{who}: {w!r} is not a buffer")
    return w


def _eq(args, state):
    a, b = args
    if type(a) is int:
        return [1 if (type(b) is int and a == b) else 0]
    if a is b:
        return [1]
    if type(a) is Future and type(b) is Future and a.thread == b.thread:
        return [1]
    return [0]


def _zero(args, state):
    a = args[0]
    return [1 if a == 0 and type(a) is int else 0]


def _add(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:+") + _fixnum(args[1], "fixnum:+"))]


def _sub(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:-") - _fixnum(args[1], "fixnum:-"))]


def _mul(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:*") * _fixnum(args[1], "fixnum:*"))]


def _trunc_quotient_remainder(a, b, who):
    # truncated division; remainder carries the dividend's sign
    if b == 0:
        raise PrimitiveFailure("DivideByZero", f"{who}: division by zero")
    q = a // b
    if q < 0 and q * b != a:
        q += 1
    return q, a - b * q


def _div(args, state):
    a, b = _fixnum(args[0], "fixnum:/"), _fixnum(args[1], "fixnum:/")
    return [wrap_word(_trunc_quotient_remainder(a, b, "fixnum:/")[0])]


def _mod(args, state):
    a, b = _fixnum(args[0], "fixnum:%"), _fixnum(args[1], "fixnum:%")
    return [wrap_word(_trunc_quotient_remainder(a, b, "fixnum:%")[1])]


def _quotient_remainder(args, state):
    a = _fixnum(args[0], "quotient-remainder")
    b = _fixnum(args[1], "quotient-remainder")
    q, r = _trunc_quotient_remainder(a, b, "quotient-remainder")
    return [wrap_word(q), wrap_word(r)]


def _incr(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:1+") + 1)]


def _decr(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:1-") - 1)]


def _lt(args, state):
    return [1 if _fixnum(args[0], "fixnum:<") < _fixnum(args[1], "fixnum:<") else 0]


def _le(args, state):
    return [1 if _fixnum(args[0], "fixnum:<=") <= _fixnum(args[1], "fixnum:<=") else 0]


def _num_eq(args, state):
    return [1 if _fixnum(args[0], "fixnum:=") == _fixnum(args[1], "fixnum:=") else 0]


def _band(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:bitwise-and") & _fixnum(args[1], "fixnum:bitwise-and"))]


def _bor(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:bitwise-or") | _fixnum(args[1], "fixnum:bitwise-or"))]


def _bxor(args, state):
    return [wrap_word(_fixnum(args[0], "fixnum:bitwise-xor") ^ _fixnum(args[1], "fixnum:bitwise-xor"))]


def _shift(args, state):
    # left for non-negative counts, arithmetic right for negative
    a = _fixnum(args[0], "fixnum:shift")
    n = _fixnum(args[1], "fixnum:shift")
    if n >= 0:
        if n > 256:
            n = 256
        return [wrap_word(a << n)]
    return [wrap_word(a >> min(-n, 256))]


def _checked(fn, *args):
    try:
        return fn(*args)
    except CheckedRuntimeError as e:
        msg = str(e)
        code = "IndexOutOfBounds" if "out of bounds" in msg else "NonBufferArgument"
        raise PrimitiveFailure(code, msg) from None


# allocation requests beyond this many words report a resource failure
MAX_BUFFER_WORDS = 1 << 24


def _alloc_size(w, who):
    size = _fixnum(w, who)
    if size < 0:
        raise PrimitiveFailure("IndexOutOfBounds", f"{who}: negative size {size}")
    if size > MAX_BUFFER_WORDS:
        raise PrimitiveFailure("AllocationFailure", f"{who}: size {size} exceeds the memory resource limit")
    return size


def _buffer_make(args, state):
    return [state.store.buffer_make(_alloc_size(args[0], "buffer:make"), args[1])]


def _buffer_make_uninitialized(args, state):
    return [state.store.buffer_make_uninitialized(_alloc_size(args[0], "buffer:make-uninitialized"))]


def _buffer_get(args, state):
    b = _buffer(args[0], "buffer:get")
    i = _fixnum(args[1], "buffer:get")
    return [_checked(state.store.buffer_get, b, i)]


def _buffer_set(args, state):
    b = _buffer(args[0], "buffer:set!")
    i = _fixnum(args[1], "buffer:set!")
    _checked(state.store.buffer_set, b, i, args[2])
    return []


def _buffer_destroy(args, state):
    _checked(state.store.buffer_destroy, _buffer(args[0], "buffer:destroy"))
    return []


def _buffer_p(args, state):
    return [1 if isinstance(args[0], Buffer) else 0]


def _buffer_length(args, state):
    return [_checked(state.store.buffer_length, _buffer(args[0], "buffer:length"))]


def _write_character(args, state):
    c = _fixnum(args[0], "io:write-character")
    if c < 0 or c > 0x10FFFF:
        raise PrimitiveFailure("IndexOutOfBounds", f"io:write-character: bad code point {c}")
    if state.output is not None:
        state.output.write(chr(c))
    return []


def _read_character(args, state):
    if state.input is None:
        return [-1]
    ch = state.input.read(1)
    return [ord(ch) if ch else -1]


def _read_sexpression(args, state):
    from . import sexpr

    _fixnum(args[0], "io:read-sexpression")
    if state.input is None:
        raise PrimitiveFailure("Eof", "io:read-sexpression: no input stream")
    reader = sexpr.Reader(state, state.input)
    s = reader.read()
    if s is sexpr.END_OF_INPUT:
        raise PrimitiveFailure("Eof", "io:read-sexpression: end of input")
    return [s]


def _fast_eval(args, state):
    from . import errors
    from . import expr as E
    from . import interp

    e, local_alist = args
    if not E.is_expression(e):
        raise PrimitiveFailure("NotAnExpression", f"e0:fast-eval: {e!r}")
    rho = {}
    try:
        for pair in state.store.list_items(local_alist):
            rho[state.store.car(pair)] = state.store.cdr(pair)
    except CheckedRuntimeError as err:
        raise PrimitiveFailure("NonBufferArgument", f"e0:fast-eval: bad environment: {err}") from None
    try:
        results = interp.eval_expression(e, state, env=rho)
    except errors.EvalFailure as err:
        raise PrimitiveFailure("NestedEvalFailure", f"e0:fast-eval: {err.kind}: {err}") from None
    except (errors.FuelExhausted, errors.ResourceOverflow) as err:
        raise PrimitiveFailure("NestedEvalResource", f"e0:fast-eval: {err}") from None
    return [state.store.list_from(results)]


def _error(args, state):
    w = args[0]
    if isinstance(w, Buffer):
        try:
            message = state.store.string_value(w)
        except CheckedRuntimeError:
            message = repr(w)
    else:
        message = str(w)
    raise PrimitiveFailure("UserError", message)


def _update_globals_and_procedures(args, state):
    store = state.store
    globals_list, procedures_list = args
    try:
        global_bindings = []
        for pair in store.list_items(globals_list):
            global_bindings.append((_buffer(store.car(pair), "state:update-globals-and-procedures!"),
                                    store.cdr(pair)))
        procedure_bindings = []
        for triple in store.list_items(procedures_list):
            name, formals, body = store.list_items(triple)
            procedure_bindings.append((_buffer(name, "state:update-globals-and-procedures!"),
                                       formals, body))
    except (CheckedRuntimeError, ValueError) as err:
        raise PrimitiveFailure("NonBufferArgument",
                               f"state:update-globals-and-procedures!: malformed bindings: {err}") from None
    state.update_globals_and_procedures(global_bindings, procedure_bindings)
    return []


CATALOG = Catalog([
    PrimitiveDescriptor("whatever:eq?", 2, 1, _eq),
    PrimitiveDescriptor("whatever:zero?", 1, 1, _zero),
    PrimitiveDescriptor("whatever:buffer?", 1, 1, _buffer_p),
    PrimitiveDescriptor("fixnum:+", 2, 1, _add),
    PrimitiveDescriptor("fixnum:-", 2, 1, _sub),
    PrimitiveDescriptor("fixnum:*", 2, 1, _mul),
    PrimitiveDescriptor("fixnum:/", 2, 1, _div),
    PrimitiveDescriptor("fixnum:%", 2, 1, _mod),
    PrimitiveDescriptor("quotient-remainder", 2, 2, _quotient_remainder),
    PrimitiveDescriptor("fixnum:1+", 1, 1, _incr),
    PrimitiveDescriptor("fixnum:1-", 1, 1, _decr),
    PrimitiveDescriptor("fixnum:<", 2, 1, _lt),
    PrimitiveDescriptor("fixnum:<=", 2, 1, _le),
    PrimitiveDescriptor("fixnum:=", 2, 1, _num_eq),
    PrimitiveDescriptor("fixnum:bitwise-and", 2, 1, _band),
    PrimitiveDescriptor("fixnum:bitwise-or", 2, 1, _bor),
    PrimitiveDescriptor("fixnum:bitwise-xor", 2, 1, _bxor),
    PrimitiveDescriptor("fixnum:shift", 2, 1, _shift),
    PrimitiveDescriptor("buffer:make", 2, 1, _buffer_make),
    PrimitiveDescriptor("buffer:make-uninitialized", 1, 1, _buffer_make_uninitialized),
    PrimitiveDescriptor("buffer:get", 2, 1, _buffer_get),
    PrimitiveDescriptor("buffer:set!", 3, 0, _buffer_set),
    PrimitiveDescriptor("buffer:destroy", 1, 0, _buffer_destroy),
    PrimitiveDescriptor("buffer:length", 1, 1, _buffer_length),
    PrimitiveDescriptor("io:write-character", 1, 0, _write_character),
    PrimitiveDescriptor("io:read-character", 0, 1, _read_character),
    PrimitiveDescriptor("io:read-sexpression", 1, 1, _read_sexpression),
    PrimitiveDescriptor("e0:fast-eval", 2, 1, _fast_eval),
    PrimitiveDescriptor("e1:error", 1, 0, _error),
    PrimitiveDescriptor("state:update-globals-and-procedures!", 2, 0, _update_globals_and_procedures),
])


def invoke(name_or_descriptor, args, state):
    """Apply a primitive to already-evaluated arguments.  Raises
    PrimitiveFailure on any failing case."""
    d = name_or_descriptor
    if not isinstance(d, PrimitiveDescriptor):
        d = state.catalog.get(d)
        if d is None:
            raise PrimitiveFailure("UnknownPrimitive", f"no primitive named {name_or_descriptor!r}")
    if len(args) != d.in_dim:
        raise PrimitiveFailure("ArityMismatch",
                               f"{d.name}: got {len(args)} arguments, wants {d.in_dim}")
    return d.fn(args, state)
