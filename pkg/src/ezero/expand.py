"""Macroexpansion, quasiquotation, transforms, closure conversion.

Expansion turns an s-expression into an expression by dispatching on
its type tag through the type table.  The default expanders are
host-native but registered under ordinary procedure names, so user
code can replace any of them (or shadow one with an interpreted
procedure of the same name) and change concrete syntax globally.

The cons expander recognizes, in order: the core-form keywords and the
predefined e1 forms, then macro names, and otherwise emits a procedure
call.  Macro bodies are expanded lazily into cached macro procedures
(one implicit formal, `arguments`, bound to the s-cdr of the call);
registering a procedure transform invalidates every cache.
"""

from __future__ import annotations

from . import expr as E
from . import interp, sexpr
from .errors import (CheckedRuntimeError, EvalFailure, ExpansionError,
                     PrimitiveFailure)
from .expr import ExprBuilder
from .state import (TAG_BOOLEAN, TAG_CONS, TAG_EMPTY_LIST, TAG_EXPRESSION,
                    TAG_FIXNUM, TAG_STRING, TAG_SYMBOL)

LITERAL_EXPANDER = "sexpression:literal-expression-expander"
VARIABLE_EXPANDER = "sexpression:variable-expression-expander"
EXPRESSION_EXPANDER = "sexpression:expression-expression-expander"
CONS_EXPANDER = "sexpression:cons-expression-expander"

MACRO_ARGUMENTS_NAME = "arguments"


def _malformed(what):
    raise PrimitiveFailure("MalformedSyntax", what)


def _symbols_of(state, s):
    try:
        return [sexpr.eject_symbol(x) for x in sexpr.list_to_python(s)]
    except CheckedRuntimeError:
        _malformed("expected a list of symbols")


def _sub(state, s, index, what):
    for _ in range(index):
        s = sexpr.s_cdr(s)
    if not sexpr.is_cons(s):
        _malformed(what)
    return sexpr.s_car(s)


# -- the expansion driver ------------------------------------------------

def macroexpand(s, state):
    """Expand one s-expression into an expression."""
    try:
        return _dispatch(s, state)
    except (EvalFailure, PrimitiveFailure, CheckedRuntimeError) as err:
        raise ExpansionError(str(err)) from err


def _dispatch(s, state):
    while True:
        tag = sexpr.tag_of(s)
        descriptor = state.type_table.get(tag)
        if descriptor is None:
            _malformed(f"no expander registered for tag {tag}")
        content = s.cells[1]
        name = descriptor.expander
        # interpreted definitions shadow the host defaults, like any call
        if name.cells[4] == 0 and state.host_procedure(name) is not None:
            handler_name = state.symbol_name(name)
            if handler_name == CONS_EXPANDER:
                out = _expand_cons(content, state)
                if isinstance(out, _Again):
                    s = out.sexpr
                    continue
                return out
            if handler_name == LITERAL_EXPANDER:
                return ExprBuilder(state).value(content)
            if handler_name == VARIABLE_EXPANDER:
                return ExprBuilder(state).variable(content)
            if handler_name == EXPRESSION_EXPANDER:
                return content
        results = interp.apply_procedure(name, [content], state)
        if len(results) != 1 or not E.is_expression(results[0]):
            _malformed(f"expander {state.symbol_name(name)} did not return one expression")
        return results[0]


class _Again:
    """A macro call expanded one step; the driver loops on the result
    instead of recursing, so macro chains cost no host stack."""

    __slots__ = ("sexpr",)

    def __init__(self, s):
        self.sexpr = s


def _expand_cons(content, state):
    car_s = content.cells[0]
    args = content.cells[1]
    if not sexpr.is_symbol(car_s):
        _malformed("the car is not a symbol")
    head = sexpr.eject_symbol(car_s)
    handler = _KEYWORDS.get(state.symbol_name(head))
    if handler is not None:
        return handler(args, state)
    if state.macro_is_defined(head):
        proc = macro_procedure_of(head, state)
        results = interp.apply_procedure(proc, [args], state)
        if len(results) != 1:
            _malformed(f"macro {state.symbol_name(head)} returned {len(results)} results")
        out = results[0]
        sexpr.tag_of(out)  # validates shape
        return _Again(out)
    return ExprBuilder(state).call(head, _expand_all(args, state))


def _expand_all(args, state):
    out = []
    while True:
        if sexpr.is_nil(args):
            return out
        if not sexpr.is_cons(args):
            _malformed("actuals do not form a proper list")
        out.append(_dispatch(sexpr.s_car(args), state))
        args = sexpr.s_cdr(args)


# -- macro definitions and cached macro procedures -----------------------

def macro_define(name, body_sexpr, state):
    state.macro_set(name, body_sexpr)


def macro_procedure_of(name, state):
    """The cached macro procedure for a macro name, generating (and
    transforming) it on first use."""
    cached = name.cells[6]
    if cached != 0:
        return cached
    body_sexpr = state.macro_get_body(name)
    arguments = state.intern(MACRO_ARGUMENTS_NAME)
    untransformed = state.fresh_symbol()
    body_expr = _dispatch(body_sexpr, state)
    state.procedure_set(untransformed, [arguments], body_expr)
    formals_word = untransformed.cells[3]
    tname, tformals, tbody = transform_procedure_binding(
        untransformed, formals_word, body_expr, state)
    tname.cells[3] = tformals
    tname.cells[4] = tbody
    name.cells[6] = tname
    return tname


# -- quoting --------------------------------------------------------------

def _code_sym(state, name):
    return sexpr.inject_symbol(state, state.intern(name))


def _code_call(state, name, *arg_codes):
    return sexpr.list_from_python(state, [_code_sym(state, name), *arg_codes])


def _code_expr(state, e):
    return sexpr.inject_expression(state, e)


def quote_code(s, state):
    """Code (an s-expression) that rebuilds s when evaluated."""
    tag = sexpr.tag_of(s)
    if tag == TAG_FIXNUM:
        return _code_call(state, "sexpression:inject-fixnum", s)
    if tag == TAG_BOOLEAN:
        return _code_call(state, "sexpression:inject-boolean", s)
    if tag == TAG_EMPTY_LIST:
        return _code_sym(state, "sexpression:nil")
    if tag == TAG_SYMBOL:
        content = ExprBuilder(state).value(s.cells[1])
        return _code_call(state, "sexpression:inject-symbol", _code_expr(state, content))
    if tag == TAG_STRING:
        content = ExprBuilder(state).value(s.cells[1])
        return _code_call(state, "sexpression:inject-string",
                          _code_call(state, "vector:copy", _code_expr(state, content)))
    if tag == TAG_EXPRESSION:
        content = ExprBuilder(state).value(s.cells[1])
        return _code_call(state, "sexpression:inject-expression", _code_expr(state, content))
    if tag == TAG_CONS:
        return _code_call(state, "sexpression:cons",
                          quote_code(sexpr.s_car(s), state),
                          quote_code(sexpr.s_cdr(s), state))
    _malformed(f"cannot quote an s-expression of tag {tag}")


def _prefix_shape(state, s, name):
    """If s is (name x), return x, else None."""
    if not sexpr.is_cons(s):
        return None
    car_s = sexpr.s_car(s)
    if not sexpr.is_symbol(car_s):
        return None
    if sexpr.eject_symbol(car_s) is not state.intern(name):
        return None
    rest = sexpr.s_cdr(s)
    if not sexpr.is_cons(rest) or not sexpr.is_nil(sexpr.s_cdr(rest)):
        _malformed(f"malformed {name} form")
    return sexpr.s_car(rest)


def quasiquote_code(s, state, depth=1):
    """Bawden-style quasiquotation: unquotes at matching depth are code,
    nested quasiquotes increase depth, splicing is legal only in list
    element position."""
    inner = _prefix_shape(state, s, "unquote")
    if inner is not None:
        if depth == 1:
            return inner
        return _code_call(state, "sexpression:cons",
                          quote_code(_code_sym(state, "unquote"), state),
                          _code_call(state, "sexpression:cons",
                                     quasiquote_code(inner, state, depth - 1),
                                     _code_sym(state, "sexpression:nil")))
    inner = _prefix_shape(state, s, "quasiquote")
    if inner is not None:
        return _code_call(state, "sexpression:cons",
                          quote_code(_code_sym(state, "quasiquote"), state),
                          _code_call(state, "sexpression:cons",
                                     quasiquote_code(inner, state, depth + 1),
                                     _code_sym(state, "sexpression:nil")))
    if _prefix_shape(state, s, "unquote-splicing") is not None:
        _malformed("unquote-splicing outside list element position")
    if sexpr.is_cons(s):
        head = sexpr.s_car(s)
        tail = sexpr.s_cdr(s)
        spliced = _prefix_shape(state, head, "unquote-splicing")
        if spliced is not None:
            if depth == 1:
                return _code_call(state, "sexpression:append2",
                                  spliced, quasiquote_code(tail, state, depth))
            rebuilt = _code_call(state, "sexpression:cons",
                                 quote_code(_code_sym(state, "unquote-splicing"), state),
                                 _code_call(state, "sexpression:cons",
                                            quasiquote_code(spliced, state, depth - 1),
                                            _code_sym(state, "sexpression:nil")))
            return _code_call(state, "sexpression:cons", rebuilt,
                              quasiquote_code(tail, state, depth))
        return _code_call(state, "sexpression:cons",
                          quasiquote_code(head, state, depth),
                          quasiquote_code(tail, state, depth))
    return quote_code(s, state)


# -- keyword forms ---------------------------------------------------------

def _kw_value(args, state):
    return ExprBuilder(state).value(sexpr.content_of(_sub(state, args, 0, "e0:value needs one subform")))


def _kw_variable(args, state):
    name = _sub(state, args, 0, "e0:variable needs one subform")
    if not sexpr.is_symbol(name):
        _malformed("e0:variable: not a symbol")
    return ExprBuilder(state).variable(sexpr.eject_symbol(name))


def _kw_let(args, state):
    variables = _symbols_of(state, _sub(state, args, 0, "e0:let needs bound variables"))
    if len({id(v) for v in variables}) != len(variables):
        _malformed("e0:let: bound variables are not pairwise distinct")
    bound = _dispatch(_sub(state, args, 1, "e0:let needs a bound expression"), state)
    body = _dispatch(_sub(state, args, 2, "e0:let needs a body"), state)
    return ExprBuilder(state).let(variables, bound, body)


def _kw_call(args, state):
    head = _sub(state, args, 0, "e0:call needs a procedure name")
    if not sexpr.is_symbol(head):
        _malformed("e0:call: procedure name is not a symbol")
    return ExprBuilder(state).call(sexpr.eject_symbol(head),
                                   _expand_all(sexpr.s_cdr(args), state))


def _kw_call_indirect(args, state):
    op = _dispatch(_sub(state, args, 0, "e0:call-indirect needs an operator"), state)
    return ExprBuilder(state).call_indirect(op, _expand_all(sexpr.s_cdr(args), state))


def _kw_primitive(args, state):
    head = _sub(state, args, 0, "e0:primitive needs a primitive name")
    if not sexpr.is_symbol(head):
        _malformed("e0:primitive: primitive name is not a symbol")
    return ExprBuilder(state).primitive(sexpr.eject_symbol(head),
                                        _expand_all(sexpr.s_cdr(args), state))


def _kw_if_in(args, state):
    d = _dispatch(_sub(state, args, 0, "e0:if-in needs a discriminand"), state)
    values_s = _sub(state, args, 1, "e0:if-in needs a value list")
    try:
        values = [sexpr.content_of(v) for v in sexpr.list_to_python(values_s)]
    except CheckedRuntimeError:
        _malformed("e0:if-in: conditional cases do not form a list")
    then_branch = _dispatch(_sub(state, args, 2, "e0:if-in needs a then branch"), state)
    else_branch = _dispatch(_sub(state, args, 3, "e0:if-in needs an else branch"), state)
    return ExprBuilder(state).if_in(d, values, then_branch, else_branch)


def _kw_fork(args, state):
    head = _sub(state, args, 0, "e0:fork needs a procedure name")
    if not sexpr.is_symbol(head):
        _malformed("e0:fork: procedure name is not a symbol")
    return ExprBuilder(state).fork(sexpr.eject_symbol(head),
                                   _expand_all(sexpr.s_cdr(args), state))


def _kw_join(args, state):
    return ExprBuilder(state).join(_dispatch(_sub(state, args, 0, "e0:join needs one subform"), state))


def _kw_bundle(args, state):
    return ExprBuilder(state).bundle(_expand_all(args, state))


def _sequence_expr(exprs, state):
    """An implicit body sequence as nested zero-binding blocks."""
    b = ExprBuilder(state)
    if not exprs:
        return b.bundle([])
    out = exprs[-1]
    for e in reversed(exprs[:-1]):
        out = b.let([], e, out)
    return out


def _kw_define(args, state):
    binder = _sub(state, args, 0, "e1:define needs a binder")
    b = ExprBuilder(state)
    bufset = state.intern("buffer:set!")
    if sexpr.is_symbol(binder):
        name = sexpr.eject_symbol(binder)
        body = _sequence_expr(_expand_all(sexpr.s_cdr(args), state), state)
        tmp = state.fresh_symbol()
        return b.let([tmp], body,
                     b.let([], b.primitive(bufset, [b.value(name), b.value(1), b.value(1)]),
                           b.primitive(bufset, [b.value(name), b.value(2), b.variable(tmp)])))
    if sexpr.is_cons(binder):
        names = _symbols_of(state, binder)
        name, formals = names[0], names[1:]
        if len({id(f) for f in formals}) != len(formals):
            _malformed("e1:define: formals are not pairwise distinct")
        body = _sequence_expr(_expand_all(sexpr.s_cdr(args), state), state)
        formals_word = state.store.list_from(formals)
        tname, tformals, tbody = transform_procedure_binding(name, formals_word, body, state)
        return b.let([], b.primitive(bufset, [b.value(tname), b.value(3), b.value(tformals)]),
                     b.primitive(bufset, [b.value(tname), b.value(4), b.value(tbody)]))
    _malformed("e1:define: binder is neither a symbol nor a list of symbols")


def _kw_trivial_define_macro(args, state):
    name = _sub(state, args, 0, "e1:trivial-define-macro needs a name")
    if not sexpr.is_symbol(name):
        _malformed("e1:trivial-define-macro: name is not a symbol")
    body = _sub(state, args, 1, "e1:trivial-define-macro needs a body")
    b = ExprBuilder(state)
    bufset = state.intern("buffer:set!")
    sym = sexpr.eject_symbol(name)
    return b.let([], b.primitive(bufset, [b.value(sym), b.value(5), b.value(body)]),
                 b.primitive(bufset, [b.value(sym), b.value(6), b.value(0)]))


def _kw_lambda(args, state):
    formals = _symbols_of(state, _sub(state, args, 0, "e1:lambda needs a formals list"))
    if len({id(f) for f in formals}) != len(formals):
        _malformed("e1:lambda: formals are not pairwise distinct")
    body = _sequence_expr(_expand_all(sexpr.s_cdr(args), state), state)
    return ExprBuilder(state).lambda_(formals, body)


def _kw_call_closure(args, state):
    op = _dispatch(_sub(state, args, 0, "e1:call-closure needs a closure"), state)
    return ExprBuilder(state).call_closure(op, _expand_all(sexpr.s_cdr(args), state))


def _kw_future(args, state):
    lam = sexpr.list_from_python(state,
                                 [sexpr.inject_symbol(state, state.intern("e1:lambda")),
                                  sexpr.nil(state)],
                                 tail=args)
    call = sexpr.list_from_python(
        state,
        [sexpr.inject_symbol(state, state.intern("future:asynchronously-call-closure")), lam])
    return _dispatch(call, state)


def _kw_quote(args, state):
    s = _sub(state, args, 0, "quote needs one subform")
    return _dispatch(quote_code(s, state), state)


def _kw_quasiquote(args, state):
    s = _sub(state, args, 0, "quasiquote needs one subform")
    return _dispatch(quasiquote_code(s, state, 1), state)


def _kw_unquote(args, state):
    _malformed("unquote outside quasiquote")


def _kw_unquote_splicing(args, state):
    _malformed("unquote-splicing outside quasiquote")


_KEYWORDS = {
    "e0:variable": _kw_variable,
    "e0:value": _kw_value,
    "e0:let": _kw_let,
    "e0:call": _kw_call,
    "e0:call-indirect": _kw_call_indirect,
    "e0:primitive": _kw_primitive,
    "e0:if-in": _kw_if_in,
    "e0:fork": _kw_fork,
    "e0:join": _kw_join,
    "e0:bundle": _kw_bundle,
    "e1:define": _kw_define,
    "e1:trivial-define-macro": _kw_trivial_define_macro,
    "e1:lambda": _kw_lambda,
    "e1:call-closure": _kw_call_closure,
    "e1:future": _kw_future,
    "quote": _kw_quote,
    "quasiquote": _kw_quasiquote,
    "unquote": _kw_unquote,
    "unquote-splicing": _kw_unquote_splicing,
}


# -- transforms -------------------------------------------------------------

def register_transform(state, kind, procedure, position="append"):
    state.add_transform(kind, procedure, position)


def transform_expression(e, state):
    """Fold the expression transform chain over e, in registry order."""
    for t in state.get_transforms("expression"):
        try:
            results = interp.apply_procedure(t, [e], state)
        except (EvalFailure, PrimitiveFailure) as err:
            raise ExpansionError(f"expression transform {state.symbol_name(t)} failed: {err}") from err
        if len(results) != 1 or not E.is_expression(results[0]):
            raise ExpansionError(
                f"expression transform {state.symbol_name(t)} did not return one expression")
        e = results[0]
    return e


def transform_procedure_binding(name, formals_word, body, state, chain=None):
    symbols = state.get_transforms("procedure") if chain is None else chain
    for t in symbols:
        try:
            results = interp.apply_procedure(t, [name, formals_word, body], state)
        except (EvalFailure, PrimitiveFailure) as err:
            raise ExpansionError(f"procedure transform {state.symbol_name(t)} failed: {err}") from err
        if len(results) != 3:
            raise ExpansionError(
                f"procedure transform {state.symbol_name(t)} did not return three results")
        name, formals_word, body = results
    return name, formals_word, body


def transform_global_binding(name, value, state, chain=None):
    symbols = state.get_transforms("global") if chain is None else chain
    for t in symbols:
        try:
            results = interp.apply_procedure(t, [name, value], state)
        except (EvalFailure, PrimitiveFailure) as err:
            raise ExpansionError(f"global transform {state.symbol_name(t)} failed: {err}") from err
        if len(results) != 2:
            raise ExpansionError(
                f"global transform {state.symbol_name(t)} did not return two results")
        name, value = results
    return name, value


def transform_retroactively(state, skip_globals=(), global_transforms=(),
                            skip_procedures=(), procedure_transforms=()):
    """Transform every current global and procedure binding (minus the
    skipped names) with the given transform procedures, computing all
    new bindings before installing any of them."""
    skip_g = {id(s) for s in skip_globals}
    skip_p = {id(s) for s in skip_procedures}
    new_globals = []
    for sym in state.global_names():
        if id(sym) in skip_g:
            continue
        name, value = transform_global_binding(sym, sym.cells[2], state,
                                               chain=list(global_transforms))
        new_globals.append((name, value))
    new_procedures = []
    for sym in state.procedure_names():
        if id(sym) in skip_p:
            continue
        name, formals, body = transform_procedure_binding(
            sym, sym.cells[3], sym.cells[4], state, chain=list(procedure_transforms))
        new_procedures.append((name, formals, body))
    state.update_globals_and_procedures(new_globals, new_procedures)


# -- closure conversion -------------------------------------------------------

def closure_convert(e, bounds, state):
    """Rewrite extended expressions (lambda, call-closure) into core
    forms.  Closures are flat and minimal: a buffer holding a generated
    procedure name followed by the values of the used nonlocals; the
    generated procedure receives the closure itself as an extra first
    parameter and rebinds the nonlocals from its cells."""
    b = ExprBuilder(state)
    bufget = state.intern("buffer:get")
    bufset = state.intern("buffer:set!")
    bufmake = state.intern("buffer:make-uninitialized")

    def convert(e, bounds):
        tag = E.case_of(e)
        cells = e.cells
        if tag == E.VARIABLE:
            return b.variable(cells[2])
        if tag == E.VALUE:
            return b.value(cells[2])
        if tag == E.BUNDLE:
            return b.bundle([convert(i, bounds) for i in state.store.list_items(cells[2])])
        if tag == E.PRIMITIVE:
            return b.primitive(cells[2], [convert(i, bounds) for i in state.store.list_items(cells[3])])
        if tag == E.CALL:
            return b.call(cells[2], [convert(i, bounds) for i in state.store.list_items(cells[3])])
        if tag == E.CALL_INDIRECT:
            return b.call_indirect(convert(cells[2], bounds),
                                   [convert(i, bounds) for i in state.store.list_items(cells[3])])
        if tag == E.LET:
            variables = state.store.list_items(cells[2])
            bound = convert(cells[3], bounds)
            body = convert(cells[4], _extend(bounds, variables))
            return b.let(variables, bound, body)
        if tag == E.IF_IN:
            return b.if_in(convert(cells[2], bounds),
                           state.store.list_items(cells[3]),
                           convert(cells[4], bounds),
                           convert(cells[5], bounds))
        if tag == E.FORK:
            return b.fork(cells[2], [convert(i, bounds) for i in state.store.list_items(cells[3])])
        if tag == E.JOIN:
            return b.join(convert(cells[2], bounds))
        if tag == E.LAMBDA:
            formals = state.store.list_items(cells[2])
            formal_ids = {id(f) for f in formals}
            nonlocals = [s for s in bounds if id(s) not in formal_ids]
            new_body = convert(cells[3], _extend(bounds, formals))
            free_ids = {id(s) for s in E.free_variables(new_body, state)}
            used = [s for s in nonlocals if id(s) in free_ids]
            procedure = state.fresh_symbol()
            closure_param = state.fresh_symbol()
            inner = new_body
            for i in range(len(used) - 1, -1, -1):
                inner = b.let([used[i]],
                              b.primitive(bufget, [b.variable(closure_param), b.value(i + 1)]),
                              inner)
            state.procedure_set(procedure, [closure_param] + formals, inner)
            tmp = state.fresh_symbol()
            build = b.variable(tmp)
            for i in range(len(used) - 1, -1, -1):
                build = b.let([], b.primitive(bufset, [b.variable(tmp), b.value(i + 1),
                                                       b.variable(used[i])]),
                              build)
            build = b.let([], b.primitive(bufset, [b.variable(tmp), b.value(0),
                                                   b.value(procedure)]),
                          build)
            return b.let([tmp], b.primitive(bufmake, [b.value(len(used) + 1)]), build)
        if tag == E.CALL_CLOSURE:
            closure_expr = convert(cells[2], bounds)
            actuals = [convert(i, bounds) for i in state.store.list_items(cells[3])]
            tmp = state.fresh_symbol()
            return b.let([tmp], closure_expr,
                         b.call_indirect(
                             b.primitive(bufget, [b.variable(tmp), b.value(0)]),
                             [b.variable(tmp)] + actuals))
        raise ExpansionError(f"unknown extended or invalid expression (tag {tag})")

    return convert(e, list(bounds))


def _extend(bounds, symbols):
    known = {id(s) for s in bounds}
    out = list(bounds)
    for s in symbols:
        if id(s) not in known:
            known.add(id(s))
            out.append(s)
    return out


# -- host procedure registration ----------------------------------------------

def _host_literal(args, state):
    return [ExprBuilder(state).value(args[0])]


def _host_variable(args, state):
    return [ExprBuilder(state).variable(args[0])]


def _host_expression(args, state):
    return [args[0]]


def _host_cons(args, state):
    out = _expand_cons(args[0], state)
    if isinstance(out, _Again):
        return [_dispatch(out.sexpr, state)]
    return [out]


def _host_closure_convert_expression(args, state):
    return [closure_convert(args[0], [], state)]


def _host_closure_convert_procedure(args, state):
    name, formals_word, body = args
    formals = state.store.list_items(formals_word)
    return [name, formals_word, closure_convert(body, formals, state)]


def _host_apply(args, state):
    name, arg_list = args
    return [state.store.list_from(
        interp.apply_procedure(name, state.store.list_items(arg_list), state))]


def _host_apply_primitive(args, state):
    name, arg_list = args
    return [state.store.list_from(
        interp.apply_primitive(name, state.store.list_items(arg_list), state))]


HOST_PROCEDURES = [
    (LITERAL_EXPANDER, 1, _host_literal),
    (VARIABLE_EXPANDER, 1, _host_variable),
    (EXPRESSION_EXPANDER, 1, _host_expression),
    (CONS_EXPANDER, 1, _host_cons),
    ("closure:closure-convert-expression-transform", 1, _host_closure_convert_expression),
    ("closure:closure-convert-procedure-transform", 3, _host_closure_convert_procedure),
    ("state:apply", 2, _host_apply),
    ("state:apply-primitive", 2, _host_apply_primitive),
]


def install_defaults(state):
    """Register the host procedures and the default type table rows."""
    for name, n, fn in HOST_PROCEDURES:
        state.register_host_procedure(name, n, fn)
    literal = state.intern(LITERAL_EXPANDER)
    variable = state.intern(VARIABLE_EXPANDER)
    expression = state.intern(EXPRESSION_EXPANDER)
    cons_expander = state.intern(CONS_EXPANDER)
    for tag in (TAG_EMPTY_LIST, TAG_BOOLEAN, TAG_FIXNUM, TAG_STRING):
        state.type_table_register(tag, literal)
    state.type_table_register(TAG_SYMBOL, variable)
    state.type_table_register(TAG_CONS, cons_expander)
    state.type_table_register(TAG_EXPRESSION, expression)


def install_closure_transforms(state):
    """Prepend the closure-conversion transforms so lambdas work in
    toplevel expressions, procedure definitions and macro procedures."""
    state.add_transform("expression",
                        state.intern("closure:closure-convert-expression-transform"),
                        "prepend")
    state.add_transform("procedure",
                        state.intern("closure:closure-convert-procedure-transform"),
                        "prepend")
