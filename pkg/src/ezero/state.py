"""The global state: symbol interning, the symbol-object layout that
backs globals/procedures/macros, the extensible type table, transform
registries, and the futures table.

A symbol is a 9-cell buffer:

    0  name (string buffer, or 0 if uninterned)
    1  bound-as-global flag
    2  global value (127 while unbound, kept for dump fidelity)
    3  procedure formals (list of symbols)
    4  procedure body (expression, or 0)
    5  macro body (s-expression, or 0)
    6  cached macro-procedure name (symbol, or 0)
    7  primitive-catalog index (0 = none; indices are 1-based)
    8  user alist

Globals and procedures live in the symbol objects themselves rather
than in separate tables, so the same name can simultaneously be a
global and a procedure, and reflective code can update either with
plain buffer writes.
"""

from __future__ import annotations

from .errors import CheckedRuntimeError
from .store import Buffer, Future, Store

SYMBOL_CELLS = 9
UNBOUND_GLOBAL_MARKER = 127

# Fixed s-expression tags; further tags are allocated via the type table.
TAG_EMPTY_LIST = 0
TAG_BOOLEAN = 1
TAG_FIXNUM = 2
TAG_SYMBOL = 3
TAG_CONS = 4
TAG_STRING = 5
TAG_EXPRESSION = 6

# Reserved global names mirroring host-side structures into images.
EXPRESSION_TRANSFORMS_NAME = "transform:expression-transforms"
PROCEDURE_TRANSFORMS_NAME = "transform:procedure-transforms"
GLOBAL_TRANSFORMS_NAME = "transform:global-transforms"
HANDLE_BOX_NAME = "e0:handle-generator-box"
TYPE_TABLE_NAME = "sexpression:type-table"

FRESH_NAME_PREFIX = "_"


class TypeDescriptor:
    """One type-table row: how to expression-expand and print objects
    carrying this tag."""

    __slots__ = ("tag", "expander", "printer", "alist")

    def __init__(self, tag, expander, printer, alist=0):
        self.tag = tag
        self.expander = expander  # Symbol naming the expander procedure
        self.printer = printer    # Symbol naming the printer procedure, or 0
        self.alist = alist


class ThreadState:
    """A background thread: its two stacks while running, then its
    outcome.  Finished results persist so join can read them."""

    __slots__ = ("thread", "stack", "vstack", "status", "results",
                 "failure", "blocked_on")

    RUNNING = "running"
    FINISHED = "finished"
    FAILED = "failed"

    def __init__(self, thread, stack, vstack):
        self.thread = thread
        self.stack = stack
        self.vstack = vstack
        self.status = ThreadState.RUNNING
        self.results = None
        self.failure = None
        self.blocked_on = None


class GlobalState:
    """Everything an execution can read or mutate besides the two
    foreground stacks."""

    def __init__(self, catalog=None, install_reserved=True):
        from . import primitives

        self.store = Store()
        self.symbols: dict[str, Buffer] = {}
        self.handle_counter = 0
        self.fresh_name_counter = 0
        self.futures: dict[int, ThreadState] = {}
        self.future_words: dict[int, Future] = {}
        self.next_thread_id = 1
        self.type_table: dict[int, TypeDescriptor] = {}
        self.catalog = primitives.CATALOG if catalog is None else catalog
        # Host-implemented procedures, callable by name like any other
        # procedure; an e0-level body on the same symbol takes precedence.
        self.host_procedures: dict[int, object] = {}
        self.input = None    # character stream for io primitives
        self.output = None
        self.fuel = None     # shared step budget, managed by the machine

        if install_reserved:
            self._install_reserved()

    # -- handles and fresh names ---------------------------------------

    def fresh_handle(self):
        h = self.handle_counter
        self.handle_counter += 1
        return h

    def fresh_symbol(self):
        while True:
            self.fresh_name_counter += 1
            name = f"{FRESH_NAME_PREFIX}{self.fresh_name_counter}"
            if name not in self.symbols:
                return self.intern(name)

    # -- interning ------------------------------------------------------

    def intern(self, name: str) -> Buffer:
        sym = self.symbols.get(name)
        if sym is None:
            sym = self._make_symbol_object(self.store.string_make(name))
            self.symbols[name] = sym
            idx = self.catalog.index_of(name)
            if idx:
                sym.cells[7] = idx
        return sym

    def _make_symbol_object(self, name_string):
        b = self.store.buffer_make(SYMBOL_CELLS, 0)
        b.cells[0] = name_string
        b.cells[2] = UNBOUND_GLOBAL_MARKER
        return b

    def make_uninterned_symbol(self) -> Buffer:
        return self._make_symbol_object(0)

    def symbol_name(self, sym) -> str:
        if not isinstance(sym, Buffer) or sym.cells is None or len(sym.cells) != SYMBOL_CELLS:
            raise CheckedRuntimeError(f"symbol_name: not a symbol: {sym!r}")
        name = sym.cells[0]
        if name == 0:
            return f"<uninterned:0x{sym.serial:x}>"
        return self.store.string_value(name)

    # -- globals and procedures (views over symbol cells) ---------------

    def global_is_bound(self, sym) -> bool:
        return sym.cells[1] != 0

    def global_set(self, sym, value):
        sym.cells[1] = 1
        sym.cells[2] = value

    def global_get(self, sym):
        if sym.cells[1] == 0:
            raise CheckedRuntimeError(f"unbound global: {self.symbol_name(sym)}")
        return sym.cells[2]

    def procedure_is_defined(self, sym) -> bool:
        return sym.cells[4] != 0

    def procedure_set(self, sym, formals, body):
        names = [self.symbol_name(f) for f in formals]
        if len(set(names)) != len(names):
            raise CheckedRuntimeError(f"procedure_set: duplicate formals {names}")
        sym.cells[3] = self.store.list_from(formals)
        sym.cells[4] = body

    def procedure_get(self, sym):
        if sym.cells[4] == 0:
            raise CheckedRuntimeError(f"undefined procedure: {self.symbol_name(sym)}")
        return self.store.list_items(sym.cells[3]), sym.cells[4]

    def global_names(self):
        return [s for s in self.symbols.values() if s.cells[1] != 0]

    def procedure_names(self):
        return [s for s in self.symbols.values() if s.cells[4] != 0]

    def update_globals_and_procedures(self, global_bindings, procedure_bindings):
        """Install all given bindings with no interleaved interpretation
        step.  global_bindings: iterable of (symbol, value);
        procedure_bindings: iterable of (symbol, formals-list-word, body)."""
        for sym, value in global_bindings:
            sym.cells[1] = 1
            sym.cells[2] = value
        for sym, formals, body in procedure_bindings:
            sym.cells[3] = formals
            sym.cells[4] = body

    # -- macros ----------------------------------------------------------

    def macro_is_defined(self, sym) -> bool:
        return sym.cells[5] != 0

    def macro_set(self, sym, body_sexpr):
        if sym.cells[5] != 0:
            sym.cells[6] = 0
        sym.cells[5] = body_sexpr

    def macro_get_body(self, sym):
        if sym.cells[5] == 0:
            raise CheckedRuntimeError(f"undefined macro: {self.symbol_name(sym)}")
        return sym.cells[5]

    def invalidate_all_macro_caches(self):
        # Procedure-transform changes make every cached macro procedure stale.
        for sym in self.symbols.values():
            sym.cells[6] = 0

    # -- futures ----------------------------------------------------------

    def future_word(self, thread: int) -> Future:
        w = self.future_words.get(thread)
        if w is None:
            w = Future(thread)
            self.future_words[thread] = w
        return w

    def spawn_thread(self, stack, vstack) -> int:
        t = self.next_thread_id
        self.next_thread_id += 1
        self.futures[t] = ThreadState(t, stack, vstack)
        return t

    # -- type table --------------------------------------------------------

    def type_table_register(self, tag, expander, printer=0):
        self.type_table[tag] = TypeDescriptor(tag, expander, printer)

    def allocate_tag(self):
        return max(self.type_table) + 1 if self.type_table else 7

    # -- host procedures -----------------------------------------------------

    def register_host_procedure(self, name: str, n_formals: int, fn):
        sym = self.intern(name)
        self.host_procedures[id(sym)] = (n_formals, fn, name)
        return sym

    def host_procedure(self, sym):
        return self.host_procedures.get(id(sym))

    # -- transform registries (stored as reserved global boxes) ---------------

    def _install_reserved(self):
        store = self.store
        for name in (EXPRESSION_TRANSFORMS_NAME, PROCEDURE_TRANSFORMS_NAME,
                     GLOBAL_TRANSFORMS_NAME):
            sym = self.intern(name)
            self.global_set(sym, store.box_make(0))
        self.global_set(self.intern(HANDLE_BOX_NAME), store.box_make(0))

    def _registry_box(self, name):
        return self.global_get(self.intern(name))

    def get_transforms(self, kind: str):
        """Return the registry (list of procedure symbols) in application
        order. kind is 'expression', 'procedure' or 'global'."""
        name = {"expression": EXPRESSION_TRANSFORMS_NAME,
                "procedure": PROCEDURE_TRANSFORMS_NAME,
                "global": GLOBAL_TRANSFORMS_NAME}[kind]
        return self.store.list_items(self.store.box_get(self._registry_box(name)))

    def add_transform(self, kind: str, proc_sym, position: str):
        name = {"expression": EXPRESSION_TRANSFORMS_NAME,
                "procedure": PROCEDURE_TRANSFORMS_NAME,
                "global": GLOBAL_TRANSFORMS_NAME}[kind]
        box = self._registry_box(name)
        current = self.store.box_get(box)
        if position == "prepend":
            self.store.box_set(box, self.store.cons(proc_sym, current))
        elif position == "append":
            items = self.store.list_items(current)
            items.append(proc_sym)
            self.store.box_set(box, self.store.list_from(items))
        else:
            raise ValueError(f"bad position {position!r}")
        if kind == "procedure":
            self.invalidate_all_macro_caches()
