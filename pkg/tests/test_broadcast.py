import pytest
from hypothesis import given, settings, strategies as st

from ccobj.broadcast import BMessage, CausalNode, DuplicateMessage, TotalOrderNode


class Net:
    """Collects sent messages so tests can choose the arrival order."""

    def __init__(self, n, cls):
        self.wire = []
        self.got = {p: [] for p in range(1, n + 1)}
        self.nodes = {
            p: cls(p, n, send=lambda d, m, p=p: self.wire.append((d, m)), deliver=lambda m, p=p: self.got[p].append(m.payload))
            for p in range(1, n + 1)
        }

    def take(self, dest, payload):
        for k, (d, m) in enumerate(self.wire):
            if d == dest and m.payload == payload:
                return self.wire.pop(k)[1]
        raise LookupError(payload)


def test_vector_clocks():
    net = Net(3, CausalNode)
    m1 = net.nodes[1].broadcast("x")
    assert m1.vclock == (1, 0, 0)
    net.nodes[2].receive(net.take(2, "x"))
    m2 = net.nodes[2].broadcast("y")
    assert m2.vclock == (1, 1, 0)


def test_causal_buffering():
    net = Net(3, CausalNode)
    net.nodes[1].broadcast("x")
    net.nodes[2].receive(net.take(2, "x"))
    net.nodes[2].broadcast("y")
    # y overtakes x on the way to p3
    assert net.nodes[3].receive(net.take(3, "y")) == []
    assert net.nodes[3].receive(net.take(3, "x")) == ["x", "y"]
    assert net.got[3] == ["x", "y"]


def test_self_delivery_is_immediate():
    net = Net(2, CausalNode)
    net.nodes[1].broadcast("x")
    assert net.got[1] == ["x"]


def test_duplicates_rejected():
    net = Net(2, CausalNode)
    m = net.nodes[1].broadcast("x")
    net.nodes[2].receive(m)
    with pytest.raises(DuplicateMessage):
        net.nodes[2].receive(m)


def test_total_order_gap_buffering():
    net = Net(3, TotalOrderNode)
    net.nodes[1].broadcast("a")
    net.nodes[2].broadcast("b")
    net.nodes[1].receive(net.take(1, "b"))
    assert net.got[1] == ["a", "b"]
    second = net.take(3, "b")
    assert second.global_seq == 2
    assert net.nodes[3].receive(second) == []
    assert net.nodes[3].receive(net.take(3, "a")) == ["a", "b"]
    with pytest.raises(DuplicateMessage):
        net.nodes[3].receive(second)


def test_only_sequencer_takes_requests():
    node = TotalOrderNode(2, 3)
    with pytest.raises(ValueError):
        node.receive(BMessage(3, 1, "z"))


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_random_arrival_orders_respect_causality(data):
    n = 3
    net = Net(n, CausalNode)
    sent = []  # (payload, set of payloads delivered at sender before sending)
    for k in range(data.draw(st.integers(1, 8))):
        p = data.draw(st.integers(1, n))
        # let the sender catch up on some of its mail first
        while True:
            mine = [i for i, (d, _) in enumerate(net.wire) if d == p]
            if not mine or not data.draw(st.booleans()):
                break
            d, m = net.wire.pop(data.draw(st.sampled_from(mine)))
            net.nodes[p].receive(m)
        sent.append((k, set(net.got[p])))
        net.nodes[p].broadcast(k)
    while net.wire:
        d, m = net.wire.pop(data.draw(st.integers(0, len(net.wire) - 1)))
        net.nodes[d].receive(m)
    for p in range(1, n + 1):
        seq = net.got[p]
        assert sorted(seq) == list(range(len(sent)))
        pos = {x: i for i, x in enumerate(seq)}
        for k, deps in sent:
            assert all(pos[d] < pos[k] for d in deps)
