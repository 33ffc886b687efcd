from fractions import Fraction

import pytest

from rotortree.rules import (IID, Constant, Down, Full, IIDRotorLaw, child_key, mix64, parse_law,
                             parse_rule, path_key, ROOT_KEY)


def test_law_validation():
    with pytest.raises(ValueError):
        IIDRotorLaw((Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        IIDRotorLaw((Fraction(-1), Fraction(2)))
    law = IIDRotorLaw.uniform([0, 1, 2])
    assert law.mean == 1 and law.support == (0, 1, 2)
    assert not law.is_deterministic
    assert IIDRotorLaw.from_mapping({1: 1}).is_deterministic


def test_float_weights_read_as_decimals():
    law = IIDRotorLaw.from_mapping({0: 0.25, 2: 0.75})
    assert law.weights == (Fraction(1, 4), Fraction(0), Fraction(3, 4))


def test_sampling_frequencies():
    law = IIDRotorLaw.from_mapping({0: Fraction(1, 4), 1: Fraction(3, 4)})
    draws = [law.sample(mix64(i)) for i in range(20000)]
    assert abs(draws.count(0) / len(draws) - 0.25) < 0.02
    assert law.sample(0) == 0 and law.sample(2 ** 64 - 1) == 1


def test_parse_law_and_rule():
    assert parse_law("uniform:0,1") == IIDRotorLaw.uniform([0, 1])
    assert parse_law("0=1/3,2=2/3").mean == Fraction(4, 3)
    assert isinstance(parse_rule("down"), Down)
    assert isinstance(parse_rule("full"), Full)
    assert parse_rule("const:2") == Constant(2)
    r = parse_rule("iid:uniform:0,1,2", seed=3)
    assert isinstance(r, IID) and r.seed == 3
    with pytest.raises(ValueError):
        parse_rule("sideways")


def test_keys_are_positional():
    assert path_key((1, 2)) == child_key(child_key(ROOT_KEY, 1), 2)
    assert path_key((1, 2)) != path_key((2, 1))


def test_iid_rule_reproducible():
    law = IIDRotorLaw.uniform([0, 1, 2])
    a = [IID(law, 5).value(2, k, lambda: "") for k in range(100)]
    b = [IID(law, 5).value(2, k, lambda: "") for k in range(100)]
    c = [IID(law, 6).value(2, k, lambda: "") for k in range(100)]
    assert a == b and a != c


def test_constant_clamp():
    assert Constant(3, clamp=True).value(2, 0, lambda: "") == 2
    with pytest.raises(ValueError):
        Constant(-1)
