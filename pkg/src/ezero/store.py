"""The word-addressed heap and the runtime layout conventions.

A word is one of:

* an unboxed value: a plain Python int, interpreted as a fixed-width
  two's-complement integer (wrapped at WORD_BITS by the arithmetic
  primitives, serialized at 32 bits by the image module);
* a buffer reference: a `Buffer` instance, compared by identity;
* a future: a `Future` instance naming a background thread.

Every compound runtime datum (cons, vector, string, box, symbol,
s-expression, expression) is a layout convention over buffers:

* cons: 2 cells, [car, cdr]; the empty list is the unboxed 0
* vector: cell 0 holds the payload length n, followed by n cells
* string: a vector of character code points
* box: 1 cell
* boolean: unboxed 0 is false, anything else is true, 1 is canonical

This is the tagged, checked runtime: every access validates its
operands and raises CheckedRuntimeError instead of misbehaving.
"""

from __future__ import annotations

from .errors import CheckedRuntimeError

WORD_BITS = 64
WORD_MIN = -(1 << (WORD_BITS - 1))
WORD_MAX = (1 << (WORD_BITS - 1)) - 1


def wrap_word(n: int) -> int:
    """Wrap an integer to two's complement at the native word width."""
    return ((n - WORD_MIN) & ((1 << WORD_BITS) - 1)) + WORD_MIN


class Buffer:
    """A finite mutable sequence of words.  Identity is object identity;
    `serial` is a stable allocation number used by textual dumps."""

    __slots__ = ("cells", "serial")

    def __init__(self, cells, serial):
        self.cells = cells
        self.serial = serial

    @property
    def live(self):
        return self.cells is not None

    def __repr__(self):
        if self.cells is None:
            return f"<buffer 0x{self.serial:x} dead>"
        return f"<buffer 0x{self.serial:x} len={len(self.cells)}>"


class Future:
    """A future word naming a thread.  One instance exists per thread
    identifier in a given state, so identity comparison works."""

    __slots__ = ("thread",)

    def __init__(self, thread):
        self.thread = thread

    def __repr__(self):
        return f"<future {self.thread}>"


class Store:
    """Allocates buffers and performs checked cell access.

    All mutation of a store happens through the single interpreter
    driving it; the store itself is not thread-safe.
    """

    def __init__(self):
        self._next_serial = 0xA

    # -- primitive operations ------------------------------------------

    def buffer_make(self, size, fill=0):
        if not isinstance(size, int) or size < 0:
            raise CheckedRuntimeError(f"buffer_make: bad size {size!r}")
        serial = self._next_serial
        self._next_serial += 1
        return Buffer([fill] * size, serial)

    def buffer_make_uninitialized(self, size):
        # Uninitializedness is not observable: cells start at 0.
        return self.buffer_make(size, 0)

    def buffer_get(self, b, i):
        if not isinstance(b, Buffer):
            raise CheckedRuntimeError(f"buffer_get: not a buffer: {b!r}")
        cells = b.cells
        if cells is None:
            raise CheckedRuntimeError("buffer_get: dead buffer")
        if not isinstance(i, int) or i < 0 or i >= len(cells):
            raise CheckedRuntimeError(f"buffer_get: index {i!r} out of bounds for length {len(cells)}")
        return cells[i]

    def buffer_set(self, b, i, w):
        if not isinstance(b, Buffer):
            raise CheckedRuntimeError(f"buffer_set: not a buffer: {b!r}")
        cells = b.cells
        if cells is None:
            raise CheckedRuntimeError("buffer_set: dead buffer")
        if not isinstance(i, int) or i < 0 or i >= len(cells):
            raise CheckedRuntimeError(f"buffer_set: index {i!r} out of bounds for length {len(cells)}")
        cells[i] = w

    def buffer_destroy(self, b):
        if not isinstance(b, Buffer):
            raise CheckedRuntimeError(f"buffer_destroy: not a buffer: {b!r}")
        if b.cells is None:
            raise CheckedRuntimeError("buffer_destroy: already destroyed")
        b.cells = None

    def buffer_length(self, b):
        if not isinstance(b, Buffer):
            raise CheckedRuntimeError(f"buffer_length: not a buffer: {b!r}")
        if b.cells is None:
            raise CheckedRuntimeError("buffer_length: dead buffer")
        return len(b.cells)

    # -- layout helpers ------------------------------------------------

    NIL = 0
    FALSE = 0
    TRUE = 1

    def cons(self, car, cdr):
        b = self.buffer_make(2)
        b.cells[0] = car
        b.cells[1] = cdr
        return b

    def car(self, b):
        return self.buffer_get(b, 0)

    def cdr(self, b):
        return self.buffer_get(b, 1)

    def list_from(self, items):
        """Build a nil/cons chain from a Python iterable, left to right."""
        out = 0
        for item in reversed(list(items)):
            out = self.cons(item, out)
        return out

    def list_items(self, w):
        """Decode a nil/cons chain into a Python list."""
        items = []
        while w != 0:
            if not isinstance(w, Buffer) or w.cells is None or len(w.cells) != 2:
                raise CheckedRuntimeError(f"list_items: not a list: {w!r}")
            items.append(w.cells[0])
            w = w.cells[1]
        return items

    def vector_make(self, n, fill=0):
        b = self.buffer_make(n + 1, fill)
        b.cells[0] = n
        return b

    def vector_length(self, v):
        return self.buffer_get(v, 0)

    def vector_get(self, v, i):
        n = self.buffer_get(v, 0)
        if not isinstance(i, int) or i < 0 or i >= n:
            raise CheckedRuntimeError(f"vector_get: index {i!r} out of bounds for length {n}")
        return self.buffer_get(v, i + 1)

    def vector_set(self, v, i, w):
        n = self.buffer_get(v, 0)
        if not isinstance(i, int) or i < 0 or i >= n:
            raise CheckedRuntimeError(f"vector_set: index {i!r} out of bounds for length {n}")
        self.buffer_set(v, i + 1, w)

    def string_make(self, text: str):
        b = self.buffer_make(len(text) + 1)
        cells = b.cells
        cells[0] = len(text)
        for i, ch in enumerate(text):
            cells[i + 1] = ord(ch)
        return b

    def string_value(self, v) -> str:
        if not isinstance(v, Buffer) or v.cells is None or len(v.cells) < 1:
            raise CheckedRuntimeError(f"string_value: not a string: {v!r}")
        n = v.cells[0]
        if not isinstance(n, int) or n < 0 or n + 1 > len(v.cells):
            raise CheckedRuntimeError("string_value: malformed string header")
        chars = []
        for c in v.cells[1:n + 1]:
            if not isinstance(c, int) or c < 0 or c > 0x10FFFF:
                raise CheckedRuntimeError("string_value: cell is not a code point")
            chars.append(chr(c))
        return "".join(chars)

    def box_make(self, w=0):
        b = self.buffer_make(1)
        b.cells[0] = w
        return b

    def box_get(self, b):
        return self.buffer_get(b, 0)

    def box_set(self, b, w):
        self.buffer_set(b, 0, w)


def word_eq(a, b) -> bool:
    """Equality by identity: unboxed values compare numerically, buffer
    references by identity, futures by thread."""
    if type(a) is int:
        return type(b) is int and a == b
    if a is b:
        return True
    if type(a) is Future and type(b) is Future:
        return a.thread == b.thread
    return False


def is_true(w) -> bool:
    """Generalized booleans: 0 is false, everything else is true."""
    return w != 0 if type(w) is int else True
