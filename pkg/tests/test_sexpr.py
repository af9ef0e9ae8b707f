import pytest
from hypothesis import given, settings, strategies as st

from ezero import sexpr
from ezero.errors import CheckedRuntimeError, ParseError


def read1(state, text):
    return sexpr.read_one(state, text)


def test_compact_and_dotted_agree(state):
    a = read1(state, "(a . (b . (c . ())))")
    b = read1(state, "(a b c)")
    assert sexpr.structurally_equal(a, b)


def test_quote_prefix_desugars(state):
    assert sexpr.structurally_equal(read1(state, "'a"), read1(state, "(quote a)"))
    assert sexpr.structurally_equal(read1(state, "`x"), read1(state, "(quasiquote x)"))
    assert sexpr.structurally_equal(read1(state, ",x"), read1(state, "(unquote x)"))
    assert sexpr.structurally_equal(read1(state, ",@x"),
                                    read1(state, "(unquote-splicing x)"))


def test_sign_and_symbol_tokens(state):
    assert sexpr.eject_fixnum(read1(state, "-42")) == -42
    assert sexpr.eject_fixnum(read1(state, "+12")) == 12
    one_minus = read1(state, "1-")
    assert sexpr.is_symbol(one_minus)
    assert state.symbol_name(sexpr.eject_symbol(one_minus)) == "1-"
    # not a fixnum, so a symbol
    assert sexpr.is_symbol(read1(state, "12a"))


def test_interning_makes_symbols_identical(state):
    a1 = sexpr.eject_symbol(read1(state, "abc"))
    a2 = sexpr.eject_symbol(read1(state, "abc"))
    assert a1 is a2


def test_empty_list_with_comments(state):
    assert sexpr.is_nil(read1(state, "(  ; nothing here\n )"))


def test_booleans_and_strings(state):
    assert sexpr.eject_boolean(read1(state, "#t")) == 1
    assert sexpr.eject_boolean(read1(state, "#f")) == 0
    s = read1(state, '"a\\"b\\\\c"')
    assert state.store.string_value(sexpr.eject_string(s)) == 'a"b\\c'


def test_print_examples(state):
    assert sexpr.to_text(state, read1(state, "()")) == "()"
    assert sexpr.to_text(state, read1(state, "(1 . 2)")) == "(1 . 2)"
    assert sexpr.to_text(state, read1(state, "(a (1 . 2))")) == "(a (1 . 2))"
    assert sexpr.to_text(state, read1(state, "'a")) == "(quote a)"


def test_parse_errors_have_location(state):
    with pytest.raises(ParseError) as err:
        sexpr.read_string(state, "(a\n(b")
    assert err.value.line == 2
    for bad in [")", "(. s)", "(a . b c)", "(a .", "."]:
        with pytest.raises(ParseError):
            sexpr.read_string(state, bad)


def test_selector_family(state):
    s = read1(state, "(a . (b . (c . (d . e))))")
    assert state.symbol_name(sexpr.eject_symbol(sexpr.s_caddr(s))) == "c"
    assert state.symbol_name(sexpr.eject_symbol(sexpr.s_path(s, "addd"))) == "d"
    pair = read1(state, "(1 . 2)")
    assert sexpr.eject_fixnum(sexpr.s_car(pair)) == 1
    with pytest.raises(CheckedRuntimeError):
        sexpr.s_cdr(read1(state, "()"))


def test_inject_eject_laws(state):
    assert sexpr.eject_fixnum(sexpr.inject_fixnum(state, 7)) == 7
    sym = state.intern("a")
    assert sexpr.eject_symbol(sexpr.inject_symbol(state, sym)) is sym
    with pytest.raises(CheckedRuntimeError):
        sexpr.eject_fixnum(sexpr.inject_symbol(state, sym))
    # untyped ejection returns raw content
    assert sexpr.content_of(sexpr.inject_fixnum(state, 9)) == 9


def test_multiple_forms_and_comments(state):
    forms = sexpr.read_string(state, "1 ;; one\n(2 3) x")
    assert len(forms) == 3


_token_alphabet = st.text(
    alphabet=st.sampled_from("abcdefgxyz*+-<=>?!/:%_$&^~0123456789"), min_size=1, max_size=8)


def _sexpr_texts(depth):
    # readable atom tokens only; the printer round-trip closes the loop
    atom = st.one_of(
        st.integers(-999, 999).map(str),
        _token_alphabet,
        st.sampled_from(["#t", "#f", "()", '"str"', '"a b"']),
    )
    if depth == 0:
        return atom
    sub = _sexpr_texts(depth - 1)
    return st.one_of(
        atom,
        st.lists(sub, max_size=4).map(lambda xs: "(" + " ".join(xs) + ")"),
        st.tuples(sub, sub).map(lambda p: f"({p[0]} . {p[1]})"),
    )


@settings(max_examples=120, deadline=None)
@given(_sexpr_texts(3))
def test_read_print_roundtrip(text):
    from ezero.session import build_state

    state = build_state(closure_transforms=False)
    s = sexpr.read_one(state, text)
    printed = sexpr.to_text(state, s)
    again = sexpr.read_one(state, printed)
    assert sexpr.structurally_equal(s, again)
    assert sexpr.to_text(state, again) == printed
