import pytest

from ezero import interp
from ezero.errors import CheckedRuntimeError
from ezero.expr import ExprBuilder
from ezero.state import UNBOUND_GLOBAL_MARKER


def test_interning_idempotent(state):
    assert state.intern("a") is state.intern("a")
    assert state.intern("a") is not state.intern("b")


def test_fresh_symbols_are_interned_with_prefix(state):
    s = state.fresh_symbol()
    name = state.symbol_name(s)
    assert name.startswith("_")
    assert state.symbols[name] is s


def test_symbol_layout(state):
    s = state.intern("thing")
    assert len(s.cells) == 9
    assert state.store.string_value(s.cells[0]) == "thing"
    assert s.cells[1] == 0
    assert s.cells[2] == UNBOUND_GLOBAL_MARKER


def test_primitive_descriptor_index(state):
    plus = state.intern("fixnum:+")
    assert state.catalog.by_index(plus.cells[7]).name == "fixnum:+"
    assert state.intern("no-such-primitive").cells[7] == 0


def test_global_set_get(state):
    x = state.intern("x")
    with pytest.raises(CheckedRuntimeError):
        state.global_get(x)
    state.global_set(x, 42)
    assert state.global_get(x) == 42
    assert x.cells[1] == 1 and x.cells[2] == 42


def test_lisp2_global_and_procedure_coexist(state):
    b = ExprBuilder(state)
    f = state.intern("f")
    state.global_set(f, 10)
    state.procedure_set(f, [state.intern("n")], b.value(1))
    assert state.global_get(f) == 10
    formals, body = state.procedure_get(f)
    assert len(formals) == 1


def test_shadowing_local_over_global(state):
    b = ExprBuilder(state)
    x = state.intern("x")
    state.global_set(x, 42)
    assert interp.eval_expression(b.variable(x), state) == [42]
    assert interp.eval_expression(b.variable(x), state, env={x: 10}) == [10]


def test_procedure_definition_and_call(state):
    b = ExprBuilder(state)
    f = state.intern("f")
    n = state.intern("n")
    state.procedure_set(f, [n], b.variable(n))
    assert interp.eval_expression(b.call(f, [b.value(42)]), state) == [42]


def test_procedure_redefinition_changes_later_calls(state):
    b = ExprBuilder(state)
    f = state.intern("f")
    n = state.intern("n")
    m = state.intern("m")
    state.procedure_set(f, [n], b.variable(n))
    assert interp.eval_expression(b.call(f, [b.value(1)]), state) == [1]
    state.procedure_set(f, [n, m], b.variable(m))
    assert interp.eval_expression(b.call(f, [b.value(1), b.value(2)]), state) == [2]


def test_duplicate_formals_rejected(state):
    b = ExprBuilder(state)
    f = state.intern("f")
    n = state.intern("n")
    with pytest.raises(CheckedRuntimeError):
        state.procedure_set(f, [n, n], b.variable(n))


def test_procedure_names_lists_defined_only(state):
    b = ExprBuilder(state)
    f = state.intern("procf")
    state.procedure_set(f, [], b.value(1))
    names = state.procedure_names()
    assert f in names
    assert state.intern("undefined-proc") not in names


def test_update_globals_and_procedures_atomic_swap(state):
    b = ExprBuilder(state)
    f, g = state.intern("f"), state.intern("g")
    n = state.intern("n")
    state.procedure_set(f, [n], b.value(1))
    state.procedure_set(g, [n], b.value(2))
    # swap the two bodies in one call
    state.update_globals_and_procedures(
        [], [(f, g.cells[3], g.cells[4]), (g, f.cells[3], f.cells[4])])
    assert interp.eval_expression(b.call(f, [b.value(0)]), state) == [2]
    assert interp.eval_expression(b.call(g, [b.value(0)]), state) == [1]


def test_update_globals_and_procedures_empty_noop(state):
    state.update_globals_and_procedures([], [])


def test_macro_cells_and_cache_invalidation(state):
    from ezero import sexpr

    m = state.intern("m")
    body = sexpr.inject_fixnum(state, 1)
    state.macro_set(m, body)
    assert state.macro_is_defined(m)
    m.cells[6] = state.intern("cached")
    state.macro_set(m, sexpr.inject_fixnum(state, 2))
    assert m.cells[6] == 0


def test_reflective_closure_covers_user_definitions(state):
    b = ExprBuilder(state)
    g = state.intern("some-global")
    state.global_set(g, 5)
    f = state.intern("some-proc")
    state.procedure_set(f, [], b.value(1))
    reachable = set(map(id, state.global_names())) | set(map(id, state.procedure_names()))
    assert id(g) in reachable and id(f) in reachable


def test_type_table_register_and_allocate(state):
    tag = state.allocate_tag()
    assert tag >= 7
    expander = state.intern("my-expander")
    state.type_table_register(tag, expander)
    assert state.type_table[tag].expander is expander
