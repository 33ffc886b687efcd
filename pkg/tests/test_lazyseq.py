import threading

import pytest

from rotortree.lazyseq import (LazySeq, NonProductiveError, add, explode, fixed_point, majorizes,
                               prefix_iterates, scale, shift)


def test_basic_combinators():
    a = LazySeq.from_list([1, 2, 3])
    assert a.take(5) == [1, 2, 3, 0, 0]
    assert shift(a).take(4) == [0, 1, 2, 3]
    assert add(a, LazySeq.constant(1)).take(4) == [2, 3, 4, 1]
    assert (a + a).take(3) == [2, 4, 6]
    assert (3 * a).take(2) == [3, 6]
    assert scale(0, a).take(2) == [0, 0]
    assert a.partial_sums(4) == [1, 3, 6, 6]
    with pytest.raises(IndexError):
        a[0]
    with pytest.raises(ValueError):
        scale(-1, a)


def test_explode():
    a = LazySeq.from_list([2, 0, 1])
    assert explode(a).take(7) == [1, 1, 0, 0, 1, 0, 0]
    assert explode(a).binary


def test_explode_rejects_negative():
    with pytest.raises(ValueError):
        explode(LazySeq.from_list([-1])).take(1)


def test_fixed_point_ones():
    # e = ex(2e) on a path-like equation: the binary tree with rotors down
    e = fixed_point(lambda x: explode(scale(2, x)), seed=[1])
    assert e.take(8) == [1, 1, 0, 1, 1, 0, 0, 1]


def test_fixed_point_seed_checked():
    # the true sequence starts 1, 1
    e = fixed_point(lambda x: explode(scale(2, x)), seed=[1, 0])
    with pytest.raises(ValueError):
        e.take(3)


def test_non_productive_detected():
    # the first output term needs x_1 itself
    e = fixed_point(lambda x: LazySeq(lambda: iter(x)))
    with pytest.raises(NonProductiveError):
        e.take(1)


def test_memoized_threadsafe():
    calls = []

    def gen():
        for i in range(10 ** 6):
            calls.append(i)
            yield i

    s = LazySeq(gen)
    threads = [threading.Thread(target=lambda: s.take(2000)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert s.take(2000) == list(range(2000))
    assert len(calls) == 2000


def test_prefix_iterates_extend():
    def step(x):
        out = []
        for t in range(len(x)):
            out.extend([1] * (2 * x[t]))
            out.append(0)
        return out
    its = prefix_iterates(step, [1], 30)
    for a, b in zip(its, its[1:]):
        assert b[:len(a)] == a
    assert len(its[-1]) == 30


def test_majorizes():
    assert majorizes([1, 0, 1], [1, 0, 1], 3) == "equal"
    assert majorizes([1, 1, 0], [1, 0, 1], 3) == "a>=b"
    assert majorizes([0, 1, 1], [1, 0, 1], 3) == "b>=a"
    assert majorizes([0, 1, 1], [1, 0, 0], 3) == "incomparable"
    with pytest.raises(ValueError):
        majorizes([1], [1], 2)
    with pytest.raises(ValueError):
        majorizes([1], [1], 0)
