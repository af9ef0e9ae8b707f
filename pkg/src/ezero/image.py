"""Textual memory dumps, binary marshalling, and unexec/exec.

The binary dump is a sequence of 32-bit big-endian words:

    buffer-count
    per buffer, in first-encounter order of a depth-first
    left-to-right traversal from the main object:
        element-count, then per element: tag word (0 unboxed / 1 boxed)
        and payload word (two's-complement value, or 0-based buffer
        index in definition order)
    finally the main object's tag and payload

A program image is the dump of a two-cell pair: cell 0 the list of all
interned symbol objects in interning order, cell 1 the main
expression.  Loading re-interns every symbol by name, which is what
restores identity-based interning; futures never enter images.
"""

from __future__ import annotations

import struct

from .errors import ExecError, ImageError
from .state import (HANDLE_BOX_NAME, SYMBOL_CELLS, TYPE_TABLE_NAME,
                    GlobalState, TypeDescriptor)
from .store import Buffer, Future

U32_MIN = -(1 << 31)
U32_MAX = (1 << 31) - 1

_GREEN = "\x1b[32m"
_RED = "\x1b[31m"
_YELLOW = "\x1b[33m"
_RESET = "\x1b[0m"


def dump_text(w, color=False) -> str:
    """The linearized textual format: unboxed words in decimal, buffers
    as 0x<id>[elements...] on first occurrence and bare 0x<id> after."""

    def paint(text, code):
        return f"{code}{text}{_RESET}" if color else text

    out = []
    seen = set()
    work = [w]
    while work:
        item = work.pop()
        if type(item) is str:
            out.append(item)
            continue
        if isinstance(item, Buffer):
            label = f"0x{item.serial:x}"
            if id(item) in seen:
                out.append(paint(label, _YELLOW))
                continue
            seen.add(id(item))
            if item.cells is None:
                out.append(paint(label, _RED) + "[<dead>]")
                continue
            out.append(paint(label, _RED) + "[")
            work.append("]")
            for i in range(len(item.cells) - 1, -1, -1):
                work.append(item.cells[i])
                if i:
                    work.append(" ")
        elif isinstance(item, Future):
            out.append(f"#<future {item.thread}>")
        else:
            out.append(paint(str(item), _GREEN))
    return "".join(out)


def _trace_buffers(w):
    """Buffers reachable from w in depth-first left-to-right
    first-encounter order."""
    order = []
    index = {}
    work = [w]
    while work:
        item = work.pop()
        if isinstance(item, Future):
            raise ImageError(f"futures cannot be marshalled: {item!r}")
        if not isinstance(item, Buffer) or id(item) in index:
            continue
        if item.cells is None:
            raise ImageError(f"dead buffer in the marshalled graph: {item!r}")
        index[id(item)] = len(order)
        order.append(item)
        for i in range(len(item.cells) - 1, -1, -1):
            work.append(item.cells[i])
    return order, index


def marshal(w, store=None) -> bytes:
    """Serialize the graph of w.  Raises ImageError on futures, dead
    buffers and unboxed values outside the 32-bit payload range."""
    order, index = _trace_buffers(w)
    words = [len(order)]

    def element(x):
        if isinstance(x, Buffer):
            words.append(1)
            words.append(index[id(x)])
        elif type(x) is int:
            if x < U32_MIN or x > U32_MAX:
                raise ImageError(f"unboxed value {x} does not fit a dump word payload")
            words.append(0)
            words.append(x & 0xFFFFFFFF)
        elif isinstance(x, Future):
            raise ImageError(f"futures cannot be marshalled: {x!r}")
        else:
            raise ImageError(f"not a word: {x!r}")

    for b in order:
        words.append(len(b.cells))
        for cell in b.cells:
            element(cell)
    element(w)
    return struct.pack(f">{len(words)}I", *words)


def unmarshal(data: bytes, store):
    """Rebuild an isomorphic graph in the given store; returns the main
    word.  All buffers are allocated first, indices resolved second."""
    if len(data) % 4 != 0:
        raise ImageError("dump length is not a whole number of 32-bit words")
    words = struct.unpack(f">{len(data) // 4}I", data)
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(words):
            raise ImageError("truncated dump")
        out = words[pos]
        pos += 1
        return out

    buffer_count = take()
    raw = []
    for _ in range(buffer_count):
        element_count = take()
        raw.append([(take(), take()) for _ in range(element_count)])
    main = (take(), take())
    if pos != len(words):
        raise ImageError("overlong dump: trailing words after the main object")

    buffers = [store.buffer_make(len(elements)) for elements in raw]

    def resolve(tag, payload):
        if tag == 0:
            return payload - (1 << 32) if payload > U32_MAX else payload
        if tag == 1:
            if payload >= buffer_count:
                raise ImageError(f"boxed payload {payload} out of range "
                                 f"(only {buffer_count} buffers)")
            return buffers[payload]
        raise ImageError(f"bad boxedness tag {tag}")

    for b, elements in zip(buffers, raw):
        for i, (tag, payload) in enumerate(elements):
            b.cells[i] = resolve(tag, payload)
    return resolve(*main)


# -- whole-program images -------------------------------------------------

def _sync_mirrors(state):
    store = state.store
    box = state.global_get(state.intern(HANDLE_BOX_NAME))
    store.box_set(box, state.handle_counter)
    rows = []
    for tag, descriptor in state.type_table.items():
        rows.append(store.list_from([tag, descriptor.expander,
                                     descriptor.printer, descriptor.alist]))
    state.global_set(state.intern(TYPE_TABLE_NAME), store.list_from(rows))


def unexec(state, main, path=None) -> bytes:
    """Dump the whole state (as its interned-symbol list) plus a main
    expression.  Background threads are discarded by construction: they
    are never reachable from symbols, and any future value stored in
    reachable data is a marshalling error."""
    _sync_mirrors(state)
    store = state.store
    symbol_list = store.list_from(list(state.symbols.values()))
    pair = store.buffer_make(2)
    pair.cells[0] = symbol_list
    pair.cells[1] = main
    data = marshal(pair, store)
    if path is not None:
        with open(path, "wb") as f:
            f.write(data)
    return data


def exec_image(source):
    """Load an image into a fresh state.  Returns (state, main).

    source is a path or raw bytes.  Symbols are re-interned by name;
    collisions inside the image are an error.  The primitive indices,
    host procedures, type table and handle counter are re-established
    afterwards, so the result evaluates like the state that was dumped.
    """
    from . import expand

    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        with open(source, "rb") as f:
            data = f.read()
    state = GlobalState(install_reserved=False)
    pair = unmarshal(data, state.store)
    if not isinstance(pair, Buffer) or pair.cells is None or len(pair.cells) != 2:
        raise ExecError("image main object is not a two-cell pair")
    symbol_list, main = pair.cells
    for sym in state.store.list_items(symbol_list):
        if (not isinstance(sym, Buffer) or sym.cells is None
                or len(sym.cells) != SYMBOL_CELLS):
            raise ExecError(f"image symbol list holds a non-symbol: {sym!r}")
        name_string = sym.cells[0]
        if name_string == 0:
            raise ExecError("uninterned symbol in the image symbol list")
        name = state.store.string_value(name_string)
        if name in state.symbols:
            raise ExecError(f"symbol name collision while loading: {name}")
        state.symbols[name] = sym
        sym.cells[7] = state.catalog.index_of(name)
    for name, n, fn in expand.HOST_PROCEDURES:
        state.register_host_procedure(name, n, fn)
    _restore_type_table(state)
    _restore_counters(state)
    return state, main


def _restore_type_table(state):
    mirror_sym = state.symbols.get(TYPE_TABLE_NAME)
    if mirror_sym is None or mirror_sym.cells[1] == 0:
        from . import expand
        expand.install_defaults(state)
        return
    for row in state.store.list_items(mirror_sym.cells[2]):
        tag, expander, printer, alist = state.store.list_items(row)
        state.type_table[tag] = TypeDescriptor(tag, expander, printer, alist)


def _restore_counters(state):
    box_sym = state.symbols.get(HANDLE_BOX_NAME)
    if box_sym is not None and box_sym.cells[1] != 0:
        value = state.store.box_get(box_sym.cells[2])
        if isinstance(value, int) and value >= 0:
            state.handle_counter = value
    highest = 0
    for name in state.symbols:
        if name.startswith("_") and name[1:].isdigit():
            highest = max(highest, int(name[1:]))
    state.fresh_name_counter = highest
