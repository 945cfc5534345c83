"""Double mapping cone harness: hypothesis detection and the criterion on
randomized positive and negative instances."""

import random
from fractions import Fraction

import pytest

from cubekh.linalg import MatF2
from cubekh.rgraded import (
    Interval,
    RGradedComplex,
    RGradedMap,
    check_double_mapping_cone,
    random_lemma_instance,
    random_violating_instance,
)


def test_interval_membership():
    i = Interval(Fraction(0), Fraction(1))
    assert i.contains(Fraction(0)) and i.contains(Fraction(1, 2))
    assert not i.contains(Fraction(1))
    tail = Interval(Fraction(2), None)
    assert tail.contains(Fraction(2)) and tail.contains(Fraction(100))
    assert not tail.contains(Fraction(3, 2))


def test_gap_and_order_queries():
    c = RGradedComplex({0: [0, 2], 1: [2]}, {0: MatF2.from_lists([[1, 0]])})
    assert c.differential_shifts() == {Fraction(2)}
    assert c.has_gap(Interval(Fraction(3), Fraction(5)))
    assert not c.has_gap(Interval(Fraction(1), Fraction(3)))


def test_identity_with_zero_e2():
    grades = {0: [0], 1: [Fraction(2)]}
    d = {0: MatF2.identity(1)}
    e0 = RGradedComplex(grades, d)
    e1 = RGradedComplex(grades, d)
    e2 = RGradedComplex({}, {})
    f = RGradedMap(e0, e1, {k: MatF2.identity(1) for k in (0, 1)})
    g = RGradedMap(e1, e2, {})
    h = RGradedMap(e0, e2, {}, hdeg=-1)
    v = check_double_mapping_cone(e0, e1, e2, f, g, h, 1)
    assert v.failed_hypothesis is None
    assert v.quasi_isomorphism is True


def test_violating_differential_order_detected():
    # differential shift below 2*eps trips hypothesis (1)
    e0 = RGradedComplex({0: [0], 1: [1]}, {0: MatF2.identity(1)})
    e2 = RGradedComplex({}, {})
    f = RGradedMap(e0, e0, {k: MatF2.identity(1) for k in (0, 1)})
    g = RGradedMap(e0, e2, {})
    h = RGradedMap(e0, e2, {}, hdeg=-1)
    v = check_double_mapping_cone(e0, e0, e2, f, g, h, 1)
    assert v.failed_hypothesis == "(1) differential order"
    assert v.quasi_isomorphism is None


def test_order_decomposition_violation_detected():
    # a map entry with shift in [eps, 2*eps) cannot be split as required
    e0 = RGradedComplex({0: [0]}, {})
    e1 = RGradedComplex({0: [Fraction(3, 2)]}, {})
    e2 = RGradedComplex({}, {})
    f = RGradedMap(e0, e1, {0: MatF2.identity(1)})
    g = RGradedMap(e1, e2, {})
    h = RGradedMap(e0, e2, {}, hdeg=-1)
    v = check_double_mapping_cone(e0, e1, e2, f, g, h, 1)
    assert v.failed_hypothesis == "(2) order decomposition"


def test_random_positive_instances():
    rng = random.Random(2024)
    for _ in range(200):
        e0, e1, e2, f, g, h = random_lemma_instance(rng, 1)
        v = check_double_mapping_cone(e0, e1, e2, f, g, h, 1)
        assert v.failed_hypothesis is None
        assert v.quasi_isomorphism is True


def test_random_negative_controls():
    rng = random.Random(2025)
    for _ in range(50):
        e0, e1, e2, f, g, h = random_violating_instance(rng, 1)
        v = check_double_mapping_cone(e0, e1, e2, f, g, h, 1)
        assert v.failed_hypothesis is not None
        assert v.failed_hypothesis.startswith("(3)")
        assert v.quasi_isomorphism is None


def test_rational_epsilon():
    rng = random.Random(7)
    eps = Fraction(1, 3)
    e0, e1, e2, f, g, h = random_lemma_instance(rng, eps)
    v = check_double_mapping_cone(e0, e1, e2, f, g, h, eps)
    assert v.failed_hypothesis is None and v.quasi_isomorphism is True
