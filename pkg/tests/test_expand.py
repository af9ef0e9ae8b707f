import io
import random

import pytest

from ezero import expand, interp, sexpr
from ezero import expr as E
from ezero.errors import EvalFailure, ExpansionError
from ezero.expr import ExprBuilder
from ezero.session import Session
from ezero.state import TAG_CONS
from generators import ExtendedProgramGenerator


def fresh_session():
    return Session(output=io.StringIO(), input=io.StringIO())


# -- a standalone non-macro expander, written directly from the core-form
# shapes, used as a differential oracle against macroexpand ---------------

CORE_HEADS = {"e0:variable", "e0:value", "e0:let", "e0:call", "e0:call-indirect",
              "e0:primitive", "e0:if-in", "e0:fork", "e0:join", "e0:bundle"}


def nme(state, s):
    """Non-macro expansion into host tuples."""
    tag = sexpr.tag_of(s)
    if tag in (0, 1, 2, 5):
        return ("value", sexpr.content_of(s))
    if tag == 3:
        return ("variable", sexpr.content_of(s))
    if tag == 6:
        return ("expression", sexpr.content_of(s))
    assert tag == 4
    head = sexpr.s_car(s)
    args = sexpr.s_cdr(s)
    name = state.symbol_name(sexpr.eject_symbol(head))
    items = sexpr.list_to_python(args)
    if name == "e0:variable":
        return ("variable", sexpr.eject_symbol(items[0]))
    if name == "e0:value":
        return ("value", sexpr.content_of(items[0]))
    if name == "e0:let":
        return ("let", tuple(sexpr.eject_symbol(x) for x in sexpr.list_to_python(items[0])),
                nme(state, items[1]), nme(state, items[2]))
    if name == "e0:call":
        return ("call", sexpr.eject_symbol(items[0]),
                tuple(nme(state, x) for x in items[1:]))
    if name == "e0:call-indirect":
        return ("call-indirect", nme(state, items[0]),
                tuple(nme(state, x) for x in items[1:]))
    if name == "e0:primitive":
        return ("primitive", sexpr.eject_symbol(items[0]),
                tuple(nme(state, x) for x in items[1:]))
    if name == "e0:if-in":
        return ("if-in", nme(state, items[0]),
                tuple(sexpr.content_of(v) for v in sexpr.list_to_python(items[1])),
                nme(state, items[2]), nme(state, items[3]))
    if name == "e0:fork":
        return ("fork", sexpr.eject_symbol(items[0]),
                tuple(nme(state, x) for x in items[1:]))
    if name == "e0:join":
        return ("join", nme(state, items[0]))
    if name == "e0:bundle":
        return ("bundle", tuple(nme(state, x) for x in items))
    # default: a procedure call
    return ("call", sexpr.eject_symbol(head), tuple(nme(state, x) for x in items))


def expr_tree(state, e):
    tag = E.case_of(e)
    c = e.cells
    li = state.store.list_items
    if tag == E.VARIABLE:
        return ("variable", c[2])
    if tag == E.VALUE:
        return ("value", c[2])
    if tag == E.BUNDLE:
        return ("bundle", tuple(expr_tree(state, x) for x in li(c[2])))
    if tag == E.PRIMITIVE:
        return ("primitive", c[2], tuple(expr_tree(state, x) for x in li(c[3])))
    if tag == E.LET:
        return ("let", tuple(li(c[2])), expr_tree(state, c[3]), expr_tree(state, c[4]))
    if tag == E.CALL:
        return ("call", c[2], tuple(expr_tree(state, x) for x in li(c[3])))
    if tag == E.CALL_INDIRECT:
        return ("call-indirect", expr_tree(state, c[2]),
                tuple(expr_tree(state, x) for x in li(c[3])))
    if tag == E.IF_IN:
        return ("if-in", expr_tree(state, c[2]), tuple(li(c[3])),
                expr_tree(state, c[4]), expr_tree(state, c[5]))
    if tag == E.FORK:
        return ("fork", c[2], tuple(expr_tree(state, x) for x in li(c[3])))
    if tag == E.JOIN:
        return ("join", expr_tree(state, c[2]))
    raise AssertionError(tag)


CORE_FORM_SAMPLES = [
    "57",
    "#t",
    "()",
    '"hi"',
    "some-variable",
    "(e0:value 9)",
    "(e0:value x)",
    "(e0:variable y)",
    "(e0:bundle)",
    "(e0:bundle 1 2 3)",
    "(e0:let (a b) (e0:bundle 1 2) (e0:variable a))",
    "(e0:let () 5 6)",
    "(e0:call f 1 2)",
    "(e0:call f)",
    "(e0:call-indirect (e0:value f) 1)",
    "(e0:primitive fixnum:+ (e0:value 1) (e0:value 2))",
    "(e0:primitive fixnum:+ 1 2)",
    "(e0:if-in 1 (0 1) 10 20)",
    "(e0:if-in x (#f) (e0:bundle) (e0:call g))",
    "(e0:fork f 1 2)",
    "(e0:join (e0:value 5))",
    "(undefined-proc 1 (e0:call g 2))",
]


def test_macroexpand_matches_standalone_nonmacro_expansion(state):
    for text in CORE_FORM_SAMPLES:
        s = sexpr.read_one(state, text)
        expected = nme(state, s)
        got = expr_tree(state, expand.macroexpand(s, state))
        assert got == expected, text


def test_nonmacro_example_evaluates(state):
    s = sexpr.read_one(state, "(e0:primitive fixnum:+ (e0:value 1) (e0:value 2))")
    e = expand.macroexpand(s, state)
    assert interp.eval_expression(e, state) == [3]


def test_expansion_errors(state):
    with pytest.raises(ExpansionError):
        expand.macroexpand(sexpr.read_one(state, "(5 6)"), state)
    with pytest.raises(ExpansionError):
        expand.macroexpand(sexpr.read_one(state, ",x"), state)
    with pytest.raises(ExpansionError):
        expand.macroexpand(sexpr.read_one(state, ",@x"), state)
    with pytest.raises(ExpansionError):
        expand.macroexpand(sexpr.read_one(state, "(e0:let (5) 1 2)"), state)
    with pytest.raises(ExpansionError):
        expand.macroexpand(sexpr.read_one(state, "(e1:define 5 5)"), state)
    with pytest.raises(ExpansionError):
        expand.macroexpand(sexpr.read_one(state, "(e0:let (a a) 1 2)"), state)


def test_injected_expression_expands_to_itself(state):
    b = ExprBuilder(state)
    e = b.value(9)
    s = sexpr.inject_expression(state, e)
    assert expand.macroexpand(s, state) is e


# -- macros ------------------------------------------------------------------

SILLY_SQUARE = """
(e1:trivial-define-macro silly-square
  (sexpression:list3 (sexpression:inject-symbol (e0:value fixnum:*))
                     (sexpression:car arguments)
                     (sexpression:car arguments)))
"""


def test_silly_square_expansion_up_to_handles():
    s = fresh_session()
    state = s.state
    s.eval_source(SILLY_SQUARE)
    got = expand.macroexpand(sexpr.read_one(state, "(silly-square 4 5 6)"), state)
    b = ExprBuilder(state)
    want = b.call(state.intern("fixnum:*"), [b.value(4), b.value(4)])
    assert E.equal_up_to_handles(got, want)
    assert s.eval_source("(silly-square 4 5 6)") == [16]


COUNTER_PROBE = """
(e1:define probe-counter (box:make 0))
(e1:trivial-define-macro bump-probe
  (e1:begin
    (box:bump-and-get! probe-counter)
    '(e0:value 0)))
(e1:trivial-define-macro outer-probe
  (e1:begin
    (bump-probe)
    '(e0:value 7)))
"""


def test_macro_procedure_caching_observable_once():
    s = fresh_session()
    state = s.state
    s.eval_source(COUNTER_PROBE)

    def counter():
        return state.store.box_get(state.global_get(state.intern("probe-counter")))

    assert counter() == 0
    assert s.eval_source("(outer-probe)") == [7]
    assert counter() == 1
    # second use hits the cache: the probe does not run again
    assert s.eval_source("(outer-probe)") == [7]
    assert s.eval_source("(outer-probe)") == [7]
    assert counter() == 1


def test_macro_redefinition_regenerates():
    s = fresh_session()
    state = s.state
    s.eval_source(COUNTER_PROBE)
    s.eval_source("(outer-probe)")

    def counter():
        return state.store.box_get(state.global_get(state.intern("probe-counter")))

    assert counter() == 1
    # redefine with the same body: cache invalidated, next use regenerates
    s.eval_source("""
(e1:trivial-define-macro outer-probe
  (e1:begin
    (bump-probe)
    '(e0:value 8)))
""")
    assert s.eval_source("(outer-probe)") == [8]
    assert counter() == 2
    assert s.eval_source("(outer-probe)") == [8]
    assert counter() == 2


def test_appending_procedure_transform_forces_regeneration():
    s = fresh_session()
    state = s.state
    s.eval_source(COUNTER_PROBE)
    s.eval_source("(outer-probe)")

    def counter():
        return state.store.box_get(state.global_get(state.intern("probe-counter")))

    assert counter() == 1
    s.eval_source("""
(e1:define (identity-procedure-transform name formals body)
  (e0:bundle name formals body))
""")
    expand.register_transform(state, "procedure",
                              state.intern("identity-procedure-transform"), "append")
    assert s.eval_source("(outer-probe)") == [7]
    assert counter() == 2


# -- quoting -------------------------------------------------------------------

def test_quote_yields_structure_not_value():
    s = fresh_session()
    (r,) = s.eval_source("'(+ 1 2)")
    assert sexpr.to_text(s.state, r) == "(+ 1 2)"


def test_quote_builds_fresh_structure_each_evaluation():
    s = fresh_session()
    s.eval_source("(e1:define (quoted-pair) '(1 2))")
    (a,) = s.eval_source("(quoted-pair)")
    (b,) = s.eval_source("(quoted-pair)")
    assert a is not b
    assert sexpr.structurally_equal(a, b)


def test_quoted_symbols_stay_interned():
    s = fresh_session()
    (r,) = s.eval_source("'abc")
    assert sexpr.eject_symbol(r) is s.state.intern("abc")


def test_quasiquote_depth_laws():
    s = fresh_session()
    s.eval_source("(e1:define qx 5)")
    (r,) = s.eval_source("`(,qx)")
    items = sexpr.list_to_python(r)
    assert items == [5]  # a 1-list of x's raw value
    # nested quasiquote: the inner unquote survives, (f) is not called
    s.eval_source("(e1:define f-called (box:make 0))")
    s.eval_source("(e1:define (f) (box:bump-and-get! f-called))")
    (r,) = s.eval_source("``(,(f))")
    assert "unquote" in sexpr.to_text(s.state, r)
    assert s.state.store.box_get(s.state.global_get(s.state.intern("f-called"))) == 0


def test_quasiquote_example_with_computation():
    s = fresh_session()
    (r,) = s.eval_source("`(a ,(fixnum:+ 1 1) c)")
    items = sexpr.list_to_python(r)
    assert s.state.symbol_name(sexpr.eject_symbol(items[0])) == "a"
    assert items[1] == 2
    assert s.state.symbol_name(sexpr.eject_symbol(items[2])) == "c"


def test_unquote_splicing_spliced_element_by_element():
    s = fresh_session()
    (r,) = s.eval_source("`(a ,@(sexpression:list2 'b 'c) d)")
    assert sexpr.to_text(s.state, r) == "(a b c d)"


# -- transforms -----------------------------------------------------------------

def test_empty_registry_is_identity(state):
    b = ExprBuilder(state)
    e = b.value(1)
    assert expand.transform_expression(e, state) is e


def test_identity_transform_returns_expression_unchanged():
    s = fresh_session()
    state = s.state
    s.eval_source("(e1:define (identity-expression-transform e) e)")
    expand.register_transform(state, "expression",
                              state.intern("identity-expression-transform"), "append")
    b = ExprBuilder(state)
    e = b.primitive(state.intern("fixnum:+"), [b.value(1), b.value(2)])
    out = expand.transform_expression(e, state)
    assert E.equal_up_to_handles(out, e)
    assert s.eval_source("(fixnum:+ 3 4)") == [7]


def _install_rename_transform(state, mapping):
    b = ExprBuilder(state)

    def rename_calls(e):
        tag = E.case_of(e)
        c = e.cells
        li = state.store.list_items
        if tag == E.VARIABLE:
            return b.variable(c[2])
        if tag == E.VALUE:
            return b.value(c[2])
        if tag == E.BUNDLE:
            return b.bundle([rename_calls(x) for x in li(c[2])])
        if tag == E.PRIMITIVE:
            return b.primitive(c[2], [rename_calls(x) for x in li(c[3])])
        if tag == E.LET:
            return b.let(li(c[2]), rename_calls(c[3]), rename_calls(c[4]))
        if tag == E.CALL:
            return b.call(mapping.get(id(c[2]), c[2]),
                          [rename_calls(x) for x in li(c[3])])
        if tag == E.IF_IN:
            return b.if_in(rename_calls(c[2]), li(c[3]),
                           rename_calls(c[4]), rename_calls(c[5]))
        if tag == E.FORK:
            return b.fork(mapping.get(id(c[2]), c[2]),
                          [rename_calls(x) for x in li(c[3])])
        if tag == E.JOIN:
            return b.join(rename_calls(c[2]))
        if tag == E.CALL_INDIRECT:
            return b.call_indirect(rename_calls(c[2]),
                                   [rename_calls(x) for x in li(c[3])])
        raise AssertionError(tag)

    def transform(args, st):
        name, formals, body = args
        return [mapping.get(id(name), name), formals, rename_calls(body)]

    return state.register_host_procedure("test:rename-transform", 3, transform)


def test_retroactive_rename_over_mutually_recursive_procedures():
    s = fresh_session()
    state = s.state
    s.eval_source("""
(e1:define (ev? n) (e0:if-in n (0) 1 (od? (fixnum:1- n))))
(e1:define (od? n) (e0:if-in n (0) 0 (ev? (fixnum:1- n))))
(e1:define (parity n) (e0:if-in (ev? n) (#f) 1 0))
""")
    before = s.eval_source("(parity 9)")
    names = [state.intern(n) for n in ("ev?", "od?", "parity")]
    mapping = {id(sym): state.intern(state.symbol_name(sym) + ":renamed")
               for sym in names}
    t = _install_rename_transform(state, mapping)
    keep = [sym for sym in state.procedure_names() if sym not in names]
    expand.transform_retroactively(state, skip_procedures=keep,
                                  procedure_transforms=[t])
    after = s.eval_source("(parity:renamed 9)")
    assert after == before == [1]
    # the old names still hold their (now stale) bodies; the renamed
    # world is closed: renamed procedures only call renamed procedures
    body = state.intern("parity:renamed").cells[4]

    def calls_of(e, into):
        if E.case_of(e) in (E.CALL, E.FORK):
            into.append(e.cells[2])
        for sub in E.subexpressions(e):
            calls_of(sub, into)

    called = []
    calls_of(body, called)
    assert all(state.symbol_name(c).endswith(":renamed") for c in called
               if id(c) in {id(v) for v in mapping.values()} or True)


def test_retroactive_identity_leaves_state_unchanged_up_to_handles():
    s = fresh_session()
    state = s.state
    s.eval_source("(e1:define (rq n) (fixnum:* n n))")
    rq = state.intern("rq")
    old_body = rq.cells[4]

    def ident(args, st):
        return list(args)

    t = state.register_host_procedure("test:identity-transform", 3, ident)
    expand.transform_retroactively(state, procedure_transforms=[t])
    assert rq.cells[4] is old_body
    assert s.eval_source("(rq 6)") == [36]


def test_retroactive_skip_set_honored():
    s = fresh_session()
    state = s.state
    s.eval_source("(e1:define (sx n) n)")
    sx = state.intern("sx")
    bumped = []

    def mark(args, st):
        bumped.append(state.symbol_name(args[0]))
        return list(args)

    t = state.register_host_procedure("test:marking-transform", 3, mark)
    expand.transform_retroactively(state, skip_procedures=[sx],
                                  procedure_transforms=[t])
    assert "sx" not in bumped and bumped


def test_transform_registry_order_prepend_append():
    s = fresh_session()
    state = s.state
    order = []

    def first(args, st):
        order.append("first")
        return list(args)

    def second(args, st):
        order.append("second")
        return list(args)

    t1 = state.register_host_procedure("test:t-one", 1, first)
    t2 = state.register_host_procedure("test:t-two", 1, second)
    expand.register_transform(state, "expression", t2, "append")
    expand.register_transform(state, "expression", t1, "prepend")
    b = ExprBuilder(state)
    expand.transform_expression(b.value(1), state)
    # closure conversion is prepended at session setup and runs first
    assert order == ["first", "second"]


# -- the type table -----------------------------------------------------------

def test_overriding_the_cons_expander_changes_call_syntax_globally():
    s = fresh_session()
    state = s.state
    b = ExprBuilder(state)
    weird = state.intern("test:weird-cons-expander")
    # an interpreted expander: returns a constant expression whatever the call
    state.procedure_set(weird, [state.intern("c")], b.value(b.value(99)))
    state.type_table_register(TAG_CONS, weird)
    assert s.eval_source("(fixnum:+ 1 2)") == [99]


def test_interpreted_shadow_of_a_default_expander():
    s = fresh_session()
    state = s.state
    b = ExprBuilder(state)
    lit = state.intern(expand.LITERAL_EXPANDER)
    # shadowing the host default with an interpreted body changes dispatch
    state.procedure_set(lit, [state.intern("c")], b.value(b.value(1234)))
    assert s.eval_source("57") == [1234]


# -- e1 definition forms ---------------------------------------------------------

def test_define_global_evaluates_body_once():
    s = fresh_session()
    s.eval_source("(e1:define eff-count (box:make 0))")
    s.eval_source("(e1:define gx (box:bump-and-get! eff-count))")
    assert s.eval_source("gx") == [1]
    assert s.eval_source("(box:get eff-count)") == [1]


def test_define_procedure_does_not_evaluate_body():
    s = fresh_session()
    s.eval_source('(e1:define (boomer) (e1:error "nope"))')
    with pytest.raises(EvalFailure):
        s.eval_source("(boomer)")


def test_define_forms_return_no_results():
    s = fresh_session()
    assert s.eval_source("(e1:define dx 1)") == []
    assert s.eval_source("(e1:define (dfn n) n)") == []


def test_lambda_implicit_body_sequence():
    s = fresh_session()
    s.eval_source("""
(e1:define seq-box (box:make 0))
(e1:define seq-cl (e1:lambda (n) (box:set! seq-box n) (box:get seq-box)))
""")
    assert s.eval_source("(e1:call-closure seq-cl 5)") == [5]


def test_future_failing_background_does_not_disturb_foreground():
    s = fresh_session()
    r = s.eval_source("""
(e1:let* ((ignored (e1:future (fixnum:/ 1 0))))
  (fixnum:+ 40 2))
""")
    assert r == [42]


# -- closure conversion ----------------------------------------------------------

def test_paper_closure_transcript():
    s = fresh_session()
    r = s.eval_source("""
(e1:define q (e1:let* ((a 1) (b 2) (c 3))
  (e1:lambda (x) (fixnum:+ a (fixnum:+ b (fixnum:+ c x))))))
(e1:call-closure q 4)
""")
    assert r == [10]


def test_two_cell_closure_for_single_capture():
    s = fresh_session()
    state = s.state
    e = expand.macroexpand(sexpr.read_one(state, "(e0:let (a) 57 (e1:lambda (x) a))"),
                           state)
    converted = expand.transform_expression(e, state)
    (closure,) = interp.eval_expression(converted, state)
    assert len(closure.cells) == 2
    assert closure.cells[1] == 57
    procedure = closure.cells[0]
    assert state.procedure_is_defined(procedure)
    assert len(state.store.list_items(procedure.cells[3])) == 2


def test_uncaptured_lambda_gives_one_cell_closure():
    s = fresh_session()
    state = s.state
    e = expand.macroexpand(sexpr.read_one(state, "(e1:lambda (x) x)"), state)
    converted = expand.transform_expression(e, state)
    (closure,) = interp.eval_expression(converted, state)
    assert len(closure.cells) == 1


def _walk_no_extension_cases(state, e, seen):
    if id(e) in seen:
        return
    seen.add(id(e))
    assert E.case_of(e) not in (E.LAMBDA, E.CALL_CLOSURE)
    for sub in E.subexpressions(e):
        _walk_no_extension_cases(state, sub, seen)


def test_conversion_output_contains_no_extension_cases():
    s = fresh_session()
    state = s.state
    rng = random.Random(17)
    gen = ExtendedProgramGenerator(state, rng, depth=3)
    for _ in range(25):
        before = set(map(id, state.procedure_names()))
        e = gen.program()
        converted = expand.closure_convert(e, [], state)
        seen = set()
        _walk_no_extension_cases(state, converted, seen)
        for sym in state.procedure_names():
            if id(sym) not in before:
                _walk_no_extension_cases(state, sym.cells[4], seen)


def test_conversion_of_lambda_free_code_is_identity_up_to_handles(state):
    from generators import StaticProgramGenerator

    rng = random.Random(23)
    gen = StaticProgramGenerator(state, rng, n_procedures=3, depth=3)
    for _ in range(20):
        e = gen.main_expression()
        assert E.equal_up_to_handles(expand.closure_convert(e, [], state), e)


def test_closure_conversion_against_extended_interpreter_oracle():
    s = fresh_session()
    state = s.state
    rng = random.Random(314)
    gen = ExtendedProgramGenerator(state, rng, depth=3)
    checked = 0
    for _ in range(60):
        e = gen.program()
        try:
            expected = interp.eval_expression(e, state, extended=True)
            expected_err = None
        except EvalFailure as err:
            expected, expected_err = None, err.kind
        converted = expand.closure_convert(e, [], state)
        try:
            got = interp.eval_expression(converted, state)
            got_err = None
        except EvalFailure as err:
            got, got_err = None, err.kind
        assert got_err == expected_err
        assert got == expected
        checked += 1
    assert checked == 60
