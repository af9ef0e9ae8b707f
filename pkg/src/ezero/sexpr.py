"""S-expressions: reader, printer, selectors, injections.

An s-expression is a 2-cell buffer [type-tag, content].  The fixed
tags and their content words:

    0  empty list   0
    1  boolean      0 or 1
    2  fixnum       an unboxed integer
    3  symbol       a symbol buffer
    4  cons         a 2-cell buffer of two s-expression references
    5  string       a string buffer
    6  expression   an expression buffer (injected, prints unreadably)

The written syntax: `;` comments to end of line; fixnums are an
optional sign followed by decimal digits; `()` is the empty list
(whitespace and comments allowed inside); dotted pairs `(a . b)` and
the compact list notation; `#t`/`#f`; `"..."` strings with `\\"` and
`\\\\` escapes; the prefixes `'` `` ` `` `,` `,@` standing for quote,
quasiquote, unquote and unquote-splicing; any other token free of
spaces, dots, semicolons, quotes, backquotes, commas and parentheses
is a symbol.  The grammar is LL(1): the reader never backtracks more
than one character.
"""

from __future__ import annotations

from .errors import CheckedRuntimeError, ParseError
from .state import (TAG_BOOLEAN, TAG_CONS, TAG_EMPTY_LIST, TAG_EXPRESSION,
                    TAG_FIXNUM, TAG_STRING, TAG_SYMBOL)
from .store import Buffer, wrap_word

END_OF_INPUT = object()

_DELIMITERS = set(" \t\r\n.;'`,()\"")


def make(state, tag, content):
    return state.store.cons(tag, content)


def tag_of(s):
    if not isinstance(s, Buffer) or s.cells is None or len(s.cells) != 2:
        raise CheckedRuntimeError(f"not an s-expression: {s!r}")
    return s.cells[0]


def content_of(s):
    """Untyped ejection."""
    if not isinstance(s, Buffer) or s.cells is None or len(s.cells) != 2:
        raise CheckedRuntimeError(f"not an s-expression: {s!r}")
    return s.cells[1]


# -- injections and typed ejections ------------------------------------

def nil(state):
    return make(state, TAG_EMPTY_LIST, 0)


def inject_fixnum(state, n):
    return make(state, TAG_FIXNUM, wrap_word(n))


def inject_boolean(state, b):
    return make(state, TAG_BOOLEAN, 1 if b else 0)


def inject_symbol(state, sym):
    return make(state, TAG_SYMBOL, sym)


def inject_string(state, buf):
    return make(state, TAG_STRING, buf)


def inject_expression(state, e):
    return make(state, TAG_EXPRESSION, e)


def cons(state, car, cdr):
    return make(state, TAG_CONS, state.store.cons(car, cdr))


def _typed_eject(s, tag, what):
    if tag_of(s) != tag:
        raise CheckedRuntimeError(f"eject: not a {what}")
    return s.cells[1]


def eject_fixnum(s):
    return _typed_eject(s, TAG_FIXNUM, "fixnum")


def eject_boolean(s):
    return _typed_eject(s, TAG_BOOLEAN, "boolean")


def eject_symbol(s):
    return _typed_eject(s, TAG_SYMBOL, "symbol")


def eject_string(s):
    return _typed_eject(s, TAG_STRING, "string")


def eject_expression(s):
    return _typed_eject(s, TAG_EXPRESSION, "expression")


# -- predicates and selectors ------------------------------------------

def is_tag(s, tag):
    return (isinstance(s, Buffer) and s.cells is not None
            and len(s.cells) == 2 and s.cells[0] == tag)


def is_nil(s):
    return is_tag(s, TAG_EMPTY_LIST)


def is_cons(s):
    return is_tag(s, TAG_CONS)


def is_symbol(s):
    return is_tag(s, TAG_SYMBOL)


def is_fixnum(s):
    return is_tag(s, TAG_FIXNUM)


def s_car(s):
    pair = _typed_eject(s, TAG_CONS, "cons")
    return pair.cells[0]


def s_cdr(s):
    pair = _typed_eject(s, TAG_CONS, "cons")
    return pair.cells[1]


def s_path(s, path: str):
    """Composed selector: s_path(s, "add") is the s-ca-d-dr, reading the
    a/d letters right to left as Lisp does."""
    for letter in reversed(path):
        s = s_car(s) if letter == "a" else s_cdr(s)
    return s


def s_cadr(s):
    return s_car(s_cdr(s))


def s_caddr(s):
    return s_car(s_cdr(s_cdr(s)))


def s_cadddr(s):
    return s_car(s_cdr(s_cdr(s_cdr(s))))


def list_to_python(s):
    """Elements of an s-list as a Python list; raises on improper lists."""
    items = []
    while not is_nil(s):
        items.append(s_car(s))
        s = s_cdr(s)
    return items


def list_from_python(state, items, tail=None):
    out = nil(state) if tail is None else tail
    for item in reversed(list(items)):
        out = cons(state, item, out)
    return out


def is_s_list(s):
    while is_cons(s):
        s = s_cdr(s)
    return is_nil(s)


# -- reader --------------------------------------------------------------

class Reader:
    """Reads s-expressions off a character stream (anything with a
    read(1) method) or a string, interning symbols through the state."""

    def __init__(self, state, source):
        self.state = state
        if isinstance(source, str):
            self._text = source
            self._stream = None
        else:
            self._text = None
            self._stream = source
        self._pos = 0
        self._line = 1
        self._column = 0
        self._pushback = None

    # one-character pushback keeps the grammar LL(1)

    def _next_char(self):
        if self._pushback is not None:
            # already counted when first read
            ch = self._pushback
            self._pushback = None
            return ch
        if self._text is not None:
            if self._pos >= len(self._text):
                return ""
            ch = self._text[self._pos]
            self._pos += 1
        else:
            ch = self._stream.read(1)
        if ch == "\n":
            self._line += 1
            self._column = 0
        elif ch:
            self._column += 1
        return ch

    def _unread(self, ch):
        if ch:
            self._pushback = ch

    def _error(self, message):
        raise ParseError(message, self._line, self._column)

    def _skip_blank(self):
        while True:
            ch = self._next_char()
            if ch == ";":
                while ch and ch != "\n":
                    ch = self._next_char()
            elif ch and ch.isspace():
                continue
            else:
                return ch

    def read(self):
        """Read one s-expression; END_OF_INPUT at the end of the stream."""
        ch = self._skip_blank()
        if not ch:
            return END_OF_INPUT
        return self._read_after(ch)

    def _read_after(self, ch):
        if ch == "(":
            return self._read_rest()
        if ch == ")":
            self._error("unexpected ')'")
        if ch == "'":
            return self._prefixed("quote")
        if ch == "`":
            return self._prefixed("quasiquote")
        if ch == ",":
            nxt = self._next_char()
            if nxt == "@":
                return self._prefixed("unquote-splicing")
            self._unread(nxt)
            return self._prefixed("unquote")
        if ch == '"':
            return self._read_string()
        if ch == ".":
            self._error("unexpected '.'")
        return self._read_token(ch)

    def _prefixed(self, name):
        ch = self._skip_blank()
        if not ch:
            self._error(f"end of input after {name} prefix")
        s = self._read_after(ch)
        state = self.state
        return cons(state, inject_symbol(state, state.intern(name)),
                    cons(state, s, nil(state)))

    def _read_rest(self):
        state = self.state
        items = []
        while True:
            ch = self._skip_blank()
            if not ch:
                self._error("unterminated list")
            if ch == ")":
                return list_from_python(state, items)
            if ch == ".":
                if not items:
                    self._error("dot at the head of a list")
                tail = self.read()
                if tail is END_OF_INPUT:
                    self._error("end of input after dot")
                ch = self._skip_blank()
                if ch != ")":
                    self._error("more than one s-expression after dot")
                return list_from_python(state, items, tail=tail)
            items.append(self._read_after(ch))

    def _read_string(self):
        chars = []
        while True:
            ch = self._next_char()
            if not ch:
                self._error("unterminated string literal")
            if ch == '"':
                break
            if ch == "\\":
                nxt = self._next_char()
                if nxt in ('"', "\\"):
                    chars.append(nxt)
                else:
                    self._error(f"unsupported string escape \\{nxt or '<eof>'}")
            else:
                chars.append(ch)
        return inject_string(self.state, self.state.store.string_make("".join(chars)))

    def _read_token(self, ch):
        chars = [ch]
        while True:
            ch = self._next_char()
            if not ch:
                break
            if ch in _DELIMITERS:
                self._unread(ch)
                break
            chars.append(ch)
        token = "".join(chars)
        state = self.state
        if token == "#t":
            return inject_boolean(state, True)
        if token == "#f":
            return inject_boolean(state, False)
        body = token[1:] if token[0] in "+-" else token
        if body and body.isdigit() and body.isascii():
            return inject_fixnum(state, int(token))
        return inject_symbol(state, state.intern(token))

    def read_all(self):
        out = []
        while True:
            s = self.read()
            if s is END_OF_INPUT:
                return out
            out.append(s)


def read_string(state, text):
    """All s-expressions in the given text."""
    return Reader(state, text).read_all()


def read_one(state, text):
    s = Reader(state, text).read()
    if s is END_OF_INPUT:
        raise ParseError("no s-expression in input")
    return s


# -- printer --------------------------------------------------------------

def to_text(state, s) -> str:
    """Canonical text: compact list notation whenever legal, dotted
    otherwise, no prefix sugar.  Injected expressions print unreadably."""
    tag = tag_of(s)
    if tag == TAG_EMPTY_LIST:
        return "()"
    if tag == TAG_BOOLEAN:
        return "#t" if s.cells[1] != 0 else "#f"
    if tag == TAG_FIXNUM:
        return str(s.cells[1])
    if tag == TAG_SYMBOL:
        return state.symbol_name(s.cells[1])
    if tag == TAG_STRING:
        text = state.store.string_value(s.cells[1])
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if tag == TAG_EXPRESSION:
        handle = s.cells[1].cells[1] if isinstance(s.cells[1], Buffer) else "?"
        return f"#<expression {handle}>"
    if tag == TAG_CONS:
        parts = []
        while True:
            parts.append(to_text(state, s_car(s)))
            s = s_cdr(s)
            if is_nil(s):
                return "(" + " ".join(parts) + ")"
            if not is_cons(s):
                return "(" + " ".join(parts) + " . " + to_text(state, s) + ")"
    descriptor = state.type_table.get(tag)
    if descriptor is not None:
        return f"#<{state.symbol_name(descriptor.expander)} {tag}>"
    return f"#<unknown-tag {tag}>"


def structurally_equal(a, b) -> bool:
    """Structural equality; symbols compare by identity (interning makes
    that name equality), strings by content."""
    ta, tb = tag_of(a), tag_of(b)
    if ta != tb:
        return False
    if ta == TAG_CONS:
        return (structurally_equal(s_car(a), s_car(b))
                and structurally_equal(s_cdr(a), s_cdr(b)))
    if ta == TAG_STRING:
        ca, cb = a.cells[1], b.cells[1]
        return ca.cells[:] == cb.cells[:] if isinstance(ca, Buffer) and isinstance(cb, Buffer) else False
    if ta in (TAG_SYMBOL, TAG_EXPRESSION):
        return a.cells[1] is b.cells[1]
    return a.cells[1] == b.cells[1]
