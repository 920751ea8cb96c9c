import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuntz_lab.abelian import grothendieck_group
from cuntz_lab.common import Decision
from cuntz_lab.cu_core import (
    INF,
    WEDGE_ZERO,
    Chain,
    ChainClass,
    DirectSum,
    Ek,
    ExtendedIntegers,
    FiniteCu,
    FiniteMonoid,
    PresentedMonoid,
    Wedge,
    check_axioms,
    compacts,
    completion_comparison,
    cu_completion,
    cu_from_json,
    cu_to_json,
    find_isomorphism,
    ideal_generated,
    ideal_lattice,
    infinity_times,
    is_algebraic,
    leq,
    positively_directed,
    sup_chain,
    way_below,
    weak_cancellation,
)
from cuntz_lab.errors import NotIncreasing
from cuntz_lab.fixtures import algebraic_fixtures, random_finite_cu, random_pom, z_infty

seeds = st.integers(0, 10**6)


def naturals():
    return PresentedMonoid(["1"], order=lambda a, b: a[0] <= b[0])


def integers():
    return PresentedMonoid(["+1", "-1"], [((1, 1), (0, 0))],
                           order=lambda a, b: a[0] - a[1] <= b[0] - b[1])


def test_leq_examples():
    assert leq(Ek(2), 1, INF) is Decision.TRUE
    assert leq(z_infty(), -3, 0) is Decision.TRUE
    C = cu_completion(naturals())
    chain = C.element(Chain.generated(lambda n: (n + 1,)))
    assert isinstance(chain, ChainClass)
    assert C.leq((5,), chain, depth=5) is Decision.TRUE
    assert C.leq((5,), chain, depth=3) is Decision.UNDECIDED


def test_sup_chain_examples():
    assert sup_chain(Ek(3), Chain.of([1, 2, 2])) == 2
    assert sup_chain(z_infty(), Chain.generated(lambda n: n + 1)) is INF
    C = cu_completion(naturals())
    s = sup_chain(C, Chain.generated(lambda n: (n + 1,)))
    assert isinstance(s, ChainClass) and C.is_compact(s) is Decision.FALSE
    with pytest.raises(NotIncreasing):
        sup_chain(Ek(3), Chain.of([2, 1]))


def test_way_below_examples():
    for k in range(1, 6):
        assert way_below(Ek(k), INF, INF) is Decision.TRUE
    assert way_below(z_infty(), INF, INF) is Decision.FALSE
    for S in algebraic_fixtures():
        assert way_below(S, S.zero, S.zero) is Decision.TRUE


def test_compacts_examples():
    for k in range(1, 6):
        assert len(compacts(Ek(k))) == len(Ek(k).all_elements())
    G, rho = grothendieck_group(compacts(z_infty()))
    assert G.normal_form() == (1, ())
    assert z_infty().is_compact(INF) is Decision.FALSE
    assert all(z_infty().is_compact(n) is Decision.TRUE for n in range(-5, 6))
    C = cu_completion(naturals())
    assert compacts(C) is C.monoid


def test_completion_examples():
    C = cu_completion(integers())
    assert grothendieck_group(compacts(C))[0].normal_form() == (1, ())
    assert is_algebraic(C) is Decision.TRUE
    E = cu_completion(compacts(Ek(3)))
    assert len(E.all_elements()) == 5
    assert completion_comparison(Ek(3))


def test_check_axioms_examples():
    for k in range(1, 6):
        assert check_axioms(Ek(k))
    assert check_axioms(z_infty())


def test_check_axioms_rejects_non_monotone_addition():
    table = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 1): 1, (1, 2): 1, (2, 2): 2}
    M = FiniteMonoid.from_functions([0, 1, 2], lambda a, b: table[min(a, b), max(a, b)],
                                    lambda a, b: a <= b, 0)
    report = check_axioms(FiniteCu(M))
    assert not report
    assert report.failed_at == "O3"
    a, b, c, d = report.witness
    assert M.leq(M.add(a, c), M.add(b, d)) is False


def test_positively_directed_examples():
    assert positively_directed(z_infty())
    assert positively_directed(Ek(3))
    M = FiniteMonoid.from_functions([0, "a"], lambda a, b: "a" if "a" in (a, b) else 0,
                                    lambda a, b: a == b, 0)
    report = positively_directed(FiniteCu(M))
    assert report.status is Decision.FALSE
    assert report.witness == ("a",)


def _wc_counterexamples(k):
    """Triples in E_k violating weak cancellation, computed on integers with a cap."""
    vals = list(range(k + 1)) + [None]

    def add(a, b):
        return None if a is None or b is None or a + b > k else a + b

    def le(a, b):
        return b is None or (a is not None and a <= b)

    return {(x, y, z) for x in vals for y in vals for z in vals
            if le(add(x, z), add(y, z)) and not le(x, y)}


@pytest.mark.parametrize("k", range(1, 6))
def test_weak_cancellation_fails_on_ek(k):
    report = weak_cancellation(Ek(k))
    assert report.status is Decision.FALSE
    x, y, z = (None if v is INF else v for v in report.witness)
    assert (x, y, z) in _wc_counterexamples(k)


def test_weak_cancellation_examples():
    assert weak_cancellation(Ek(2)).witness == (2, 1, 2)
    assert weak_cancellation(ExtendedIntegers(nonnegative=True))


def test_ideal_examples():
    E = Ek(3)
    assert infinity_times(E, 1) is INF
    assert set(ideal_generated(E, 1).elements()) == set(E.all_elements())
    for S in (Ek(2), Wedge([Ek(1), Ek(2)])):
        I = ideal_generated(S, S.zero)
        assert I.elements() == [y for y in S.all_elements() if S.leq(y, S.zero)]
    W = Wedge([Ek(1), Ek(1)])
    assert set(ideal_generated(W, (0, 1)).elements()) == {WEDGE_ZERO, (0, 1), (0, INF)}


def test_ideal_lattice_examples():
    L = ideal_lattice(Ek(4))
    assert len(L) == 2 and L.covers() == [(0, 1)]
    L = ideal_lattice(DirectSum([Ek(1), Ek(1)]))
    assert len(L) == 4 and L.is_boolean()
    trivial = FiniteCu(FiniteMonoid([0], [[0]], [[1]], 0))
    assert len(ideal_lattice(trivial)) == 1


def test_is_algebraic_examples():
    assert is_algebraic(Ek(3)) is Decision.TRUE
    assert is_algebraic(z_infty()) is Decision.TRUE


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_random_finite_objects_satisfy_axioms(seed):
    S = random_finite_cu(random.Random(seed))
    assert check_axioms(S)
    E = S.all_elements()
    for a in E:
        for b in E:
            assert S.way_below(a, b) == S.leq(a, b)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_weak_cancellation_against_enumeration(seed):
    S = random_finite_cu(random.Random(seed))
    E = S.all_elements()
    bad = [(x, y, z) for x in E for y in E for z in E
           if S.leq(S.add(x, z), S.add(y, z)) is Decision.TRUE
           and S.leq(x, y) is Decision.FALSE]
    report = weak_cancellation(S)
    assert (report.status is Decision.FALSE) == bool(bad)
    if bad:
        assert report.witness in bad


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_completion_of_finite_pom_recovers_it(seed):
    M = random_pom(random.Random(seed))
    C = cu_completion(M)
    comp = [x for x in C.all_elements() if C.is_compact(x) is Decision.TRUE]
    assert find_isomorphism(comp, C.add, lambda a, b: C.leq(a, b) is Decision.TRUE, C.zero,
                            M.all_elements(), M.add, M.leq, M.zero) is not None


@pytest.mark.parametrize("S", algebraic_fixtures(), ids=repr)
def test_completion_comparison_on_algebraic_fixtures(S):
    assert completion_comparison(S)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_json_round_trip(seed):
    S = random_finite_cu(random.Random(seed))
    T = cu_from_json(cu_to_json(S))
    assert cu_to_json(T) == cu_to_json(S)
    assert T.all_elements() == S.all_elements()
