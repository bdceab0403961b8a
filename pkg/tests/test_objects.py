import pytest
from hypothesis import given, strategies as st

from ccobj.objects import (
    DomainError, Invocation, UnknownOperation, UnknownSpec, apply, bstack, catalog_names, counter,
    encode_state, is_legal, queue, register, replay, same_value, set_spec, spec_from_name, stack,
)
from ccobj.history import History
from ccobj.values import BOTTOM, DONE, TOP, decode_value, encode_value


def inv(op, *args, obj="X"):
    return Invocation(obj, op, args)


def test_stack_lifo_and_empty_pop():
    s = stack()
    assert replay(s, [inv("pop"), inv("push", "a"), inv("push", "b"), inv("pop"), inv("pop"), inv("pop")]) == [
        BOTTOM, DONE, DONE, "b", "a", BOTTOM,
    ]


def test_bounded_stack_full_push_leaves_state_alone():
    s = bstack(1)
    ret, st1 = apply(s, s.initial_state, inv("push", 1))
    assert ret is DONE
    ret, st2 = apply(s, st1, inv("push", 2))
    assert ret is TOP and st2 == st1
    assert replay(s, [inv("pop"), inv("push", 1), inv("pop")]) == [BOTTOM, DONE, 1]


def test_queue_fifo():
    assert replay(queue(), [inv("enq", 1), inv("enq", 2), inv("deq"), inv("deq"), inv("deq")]) == [
        DONE, DONE, 1, 2, BOTTOM,
    ]


def test_counter_and_set():
    assert replay(counter(), [inv("inc"), inv("inc"), inv("dec"), inv("read")])[-1] == 1
    rets = replay(set_spec(), [inv("add", 3), inv("contains", 3), inv("remove", 3), inv("contains", 3)])
    assert rets == [DONE, True, DONE, False]


def test_register_initial_value():
    assert replay(register(), [inv("read")]) == [0]
    assert replay(register(7), [inv("read"), inv("write", 1), inv("read")]) == [7, DONE, 1]


def test_bad_invocations():
    with pytest.raises(UnknownOperation):
        apply(stack(), (), inv("peek"))
    with pytest.raises(DomainError):
        apply(stack(), (), inv("push"))
    with pytest.raises(DomainError):
        apply(register(), 0, inv("write", [1, 2]))
    with pytest.raises(DomainError):
        bstack(-1)


def test_catalog():
    assert {"stack", "bstack", "queue", "register", "counter", "set"} <= set(catalog_names())
    assert spec_from_name("bstack(2)").name == "bstack(2)"
    assert spec_from_name(" stack ").name == "stack"
    for bad in ("heap", "stack(", "bstack(x)", ""):
        with pytest.raises((UnknownSpec, DomainError)):
            spec_from_name(bad)


def test_same_value_is_type_strict():
    assert not same_value(True, 1)
    assert not same_value(0, False)
    assert same_value("a", "a")
    assert same_value(BOTTOM, BOTTOM)


def test_is_legal_treats_none_as_pending():
    h = History.from_lists({"S": stack()}, [("S", "push", ["a"], DONE), ("S", "pop", [], None)])
    assert is_legal(stack(), h.ops)
    h2 = h.with_returns({"p1.1": "z"})
    assert not is_legal(stack(), h2.ops)


values = st.one_of(st.integers(-5, 5), st.booleans(), st.text("abc", max_size=3))
stack_ops = st.lists(st.one_of(st.tuples(st.just("push"), values), st.just(("pop",))), max_size=30)


@given(stack_ops)
def test_stack_matches_list_model(ops):
    model, expect = [], []
    for o in ops:
        if o[0] == "push":
            model.append(o[1])
            expect.append(DONE)
        else:
            expect.append(model.pop() if model else BOTTOM)
    got = replay(stack(), [inv(*o) for o in ops])
    assert all(same_value(a, b) for a, b in zip(got, expect)) and len(got) == len(expect)


@given(st.lists(st.one_of(st.tuples(st.just("write"), values), st.just(("read",))), max_size=30))
def test_register_reads_last_write(ops):
    last, got = 0, replay(register(), [inv(*o) for o in ops])
    for o, r in zip(ops, got):
        if o[0] == "write":
            last = o[1]
        else:
            assert same_value(r, last)


@given(stack_ops)
def test_delta_is_pure_and_deterministic(ops):
    s = stack()
    invs = [inv(*o) for o in ops]
    assert replay(s, invs) == replay(s, invs)
    state = s.initial_state
    for i in invs:
        before = encode_state(state)
        r1, n1 = apply(s, state, i)
        assert encode_state(state) == before
        r2, n2 = apply(s, state, i)
        assert same_value(r1, r2) and encode_state(n1) == encode_state(n2)
        state = n1


@given(values | st.sampled_from([BOTTOM, DONE, TOP]))
def test_value_codec_round_trip(v):
    assert same_value(decode_value(encode_value(v)), v)


def test_encode_state_is_canonical():
    a = apply(set_spec(), frozenset({3, 1}), inv("add", 2))[1]
    b = apply(set_spec(), frozenset({2, 3}), inv("add", 1))[1]
    assert encode_state(a) == encode_state(b)
