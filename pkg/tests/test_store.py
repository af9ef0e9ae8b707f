import pytest
from hypothesis import given, strategies as st

from ezero.errors import CheckedRuntimeError
from ezero.store import Store, word_eq, wrap_word


@pytest.fixture
def store():
    return Store()


def test_make_zero_length(store):
    b = store.buffer_make(0, 0)
    assert b.live
    assert len(b.cells) == 0


def test_make_cons_by_hand(store):
    b = store.buffer_make(2, 0)
    store.buffer_set(b, 0, 10)
    store.buffer_set(b, 1, 0)
    assert store.buffer_get(b, 0) == 10
    assert store.buffer_get(b, 1) == 0


def test_fresh_identity(store):
    b1 = store.buffer_make(1, 7)
    b2 = store.buffer_make(1, 7)
    assert b1 is not b2
    assert not word_eq(b1, b2)
    assert word_eq(b1, b1)


def test_get_out_of_bounds(store):
    b = store.buffer_make(1, 42)
    assert store.buffer_get(b, 0) == 42
    with pytest.raises(CheckedRuntimeError):
        store.buffer_get(b, 1)
    with pytest.raises(CheckedRuntimeError):
        store.buffer_get(b, -1)


def test_set_then_get(store):
    b = store.buffer_make(3, 0)
    store.buffer_set(b, 1, -9)
    assert store.buffer_get(b, 1) == -9
    assert store.buffer_get(b, 0) == 0


def test_destroy_semantics(store):
    b = store.buffer_make(2, 0)
    other = store.buffer_make(2, 5)
    store.buffer_destroy(b)
    with pytest.raises(CheckedRuntimeError):
        store.buffer_get(b, 0)
    with pytest.raises(CheckedRuntimeError):
        store.buffer_set(b, 0, 1)
    with pytest.raises(CheckedRuntimeError):
        store.buffer_destroy(b)
    # unrelated buffers are untouched
    assert store.buffer_get(other, 1) == 5


def test_negative_size_rejected(store):
    with pytest.raises(CheckedRuntimeError):
        store.buffer_make(-1, 0)


def test_isolation(store):
    a = store.buffer_make(2, 1)
    b = store.buffer_make(2, 2)
    store.buffer_set(a, 0, 99)
    assert store.buffer_get(b, 0) == 2


@given(st.lists(st.integers(-2 ** 40, 2 ** 40), max_size=8))
def test_vector_roundtrip(contents):
    store = Store()
    v = store.vector_make(len(contents))
    for i, x in enumerate(contents):
        store.vector_set(v, i, x)
    assert store.vector_length(v) == len(contents)
    assert [store.vector_get(v, i) for i in range(len(contents))] == contents


@given(st.integers(-2 ** 40, 2 ** 40), st.integers(-2 ** 40, 2 ** 40))
def test_cons_roundtrip(a, b):
    store = Store()
    c = store.cons(a, b)
    assert store.car(c) == a
    assert store.cdr(c) == b


@given(st.text(max_size=30))
def test_string_roundtrip(text):
    store = Store()
    assert store.string_value(store.string_make(text)) == text


@given(st.integers(-2 ** 40, 2 ** 40))
def test_box_identity_law(x):
    store = Store()
    b = store.box_make(x)
    assert store.box_get(b) == x
    store.box_set(b, x + 1)
    assert store.box_get(b) == x + 1


@given(st.lists(st.integers(-2 ** 40, 2 ** 40), max_size=6))
def test_list_roundtrip(items):
    store = Store()
    assert store.list_items(store.list_from(items)) == items


def test_wrap_word():
    assert wrap_word(2 ** 63) == -(2 ** 63)
    assert wrap_word(-(2 ** 63) - 1) == 2 ** 63 - 1
    assert wrap_word(17) == 17
