import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuntz_lab.common import Decision
from cuntz_lab.cu_core import (
    INF,
    Chain,
    CuMap,
    Ek,
    PresentedMonoid,
    cu_completion,
    find_isomorphism,
)
from cuntz_lab.cu_limits import (
    Diagram,
    EvSeq,
    LimitObject,
    check_factorisation,
    check_uniqueness,
    coordinate_diagram,
    embed_stage,
    frozen_target,
    increasing_sequences_reaching,
    is_eventually_increasing,
    rapidize,
    seq_equiv,
    seq_leq,
    sup_of_classes,
    universal_map,
    unreachable_from_earlier_stages,
)
from cuntz_lab.errors import IncompatibleCone, StageMismatch
from cuntz_lab.fixtures import random_cone, random_diagram, z_infty


def identity_diagram(S, n=2):
    return Diagram([S] * n, [CuMap.identity(S)] * (n - 1))


def completion_of_naturals():
    return cu_completion(PresentedMonoid(["1"], order=lambda a, b: a[0] <= b[0]))


def test_eventually_increasing_examples():
    D = identity_diagram(Ek(2), 3)
    assert is_eventually_increasing(EvSeq(D, 2, [1]))
    bad = is_eventually_increasing(EvSeq(D, 1, [2, 1]))
    assert bad.status is Decision.FALSE and bad.witness == (1, 2)
    C = coordinate_diagram(6)
    for j in range(2, 7):
        assert is_eventually_increasing(EvSeq(C, j, [frozen_target(j)]))


def test_seq_leq_examples():
    D = identity_diagram(Ek(2))
    one, two = embed_stage(D, 1, 1), embed_stage(D, 1, 2)
    assert seq_leq(one, one) is Decision.TRUE
    assert seq_leq(one, two) is Decision.TRUE
    assert seq_leq(two, one) is Decision.FALSE
    C = coordinate_diagram(5)
    for j in range(2, 6):
        s = embed_stage(C, j, frozen_target(j))
        for i in range(1, j):
            e = embed_stage(C, i, (1,) + (0,) * (i - 1))
            assert seq_leq(e, s) is Decision.FALSE
            assert seq_leq(s, e) is Decision.FALSE


def test_embed_examples():
    C = coordinate_diagram(3)
    a, b = embed_stage(C, 1, (1,)), embed_stage(C, 2, (1, 1))
    assert seq_leq(a, b) is Decision.FALSE and seq_leq(b, a) is Decision.FALSE
    assert seq_equiv(embed_stage(C, 1, (2,)), embed_stage(C, 2, (2, 0))) is Decision.TRUE
    L = LimitObject(C)
    for i in (1, 2, 3):
        assert L.equal(embed_stage(C, i, C.stage(i).zero), L.zero) is Decision.TRUE
    with pytest.raises(StageMismatch):
        embed_stage(C, 2, (1,))


def test_rapidize_examples():
    D = identity_diagram(Ek(3))
    f = EvSeq(D, 1, [1, 2])
    g = rapidize(f)
    assert [g.term(i) for i in range(1, 5)] == [f.term(i) for i in range(1, 5)]
    C = completion_of_naturals()
    N = Diagram([C], [])
    top = C.element(Chain.generated(lambda n: (n + 1,)))
    g = rapidize(EvSeq(N, 1, [top]))
    assert [g.term(i) for i in range(1, 6)] == [(i,) for i in range(1, 6)]


def test_sup_of_classes_examples():
    D = identity_diagram(Ek(3))
    one = embed_stage(D, 1, 1)
    assert sup_of_classes([one]) is one
    s = sup_of_classes([one, embed_stage(D, 1, 2)])
    assert seq_equiv(s, embed_stage(D, 1, 2)) is Decision.TRUE
    C = completion_of_naturals()
    N = Diagram([C], [])
    s = sup_of_classes(Chain.generated(lambda n: embed_stage(N, 1, (n + 1,))))
    terms = [s.term(j) for j in range(1, 8)]
    assert all(C.leq(a, b) is Decision.TRUE for a, b in zip(terms, terms[1:]))
    assert terms[-1] != terms[0]


def _limit_iso(L, S):
    classes = L.classes()
    return find_isomorphism(
        classes, lambda a, b: next(c for c in classes if L.equal(c, L.add(a, b))),
        lambda a, b: L.leq(a, b) is Decision.TRUE, classes[0],
        S.all_elements(), S.add, lambda a, b: S.leq(a, b) is Decision.TRUE, S.zero)


def test_limit_of_identity_diagram():
    L = LimitObject(identity_diagram(Ek(2), 3))
    assert len(L.classes()) == 4
    assert _limit_iso(L, Ek(2)) is not None


def test_limit_of_truncated_coordinate_diagram():
    D = coordinate_diagram(4, box=1)
    L = LimitObject(D)
    S4 = D.stage(4)
    elems = S4.all_elements()
    assert len(L.classes()) == len(elems)
    for a in elems:
        for b in elems:
            assert L.leq(embed_stage(D, 4, a), embed_stage(D, 4, b)) == S4.leq(a, b)


def test_limit_of_constant_extended_integers():
    Z = z_infty()
    D = Diagram([Z], [])
    L = LimitObject(D)
    sample = Z.sample(12)
    for a in sample:
        for b in sample:
            assert L.leq(embed_stage(D, 1, a), embed_stage(D, 1, b)) == Z.leq(a, b)


def test_universal_map_examples():
    S = Ek(2)
    D = identity_diagram(S, 3)
    psi = lambda i: CuMap.identity(S)
    omega = universal_map(D, S, psi)
    for i in (1, 2, 3):
        for x in S.all_elements():
            assert omega(embed_stage(D, i, x)) == x
    C = coordinate_diagram(3, box=1)
    T = C.stage(3)
    psi = lambda i: C.composite(min(i, 3), 3)
    omega = universal_map(C, T, psi)
    assert check_factorisation(C, omega, psi)
    assert check_uniqueness(C, T, psi, omega)
    L = LimitObject(C)
    for c in L.classes():
        assert omega(c) == c.term(3)


def test_incompatible_cone_rejected():
    S = Ek(2)
    D = Diagram([S, S], [CuMap(S, S, lambda x: 0 if x == 0 else INF)])
    psi = lambda i: CuMap.identity(S)
    with pytest.raises(IncompatibleCone):
        universal_map(D, S, psi)


def test_frozen_targets_are_unreachable():
    D = coordinate_diagram(6)
    for j in range(2, 7):
        s = frozen_target(j)
        assert unreachable_from_earlier_stages(D, j, s)
        assert increasing_sequences_reaching(D, j, s) == []


def brute_force_candidate(D, T, psi, L):
    """For each class, psi_i(x) for the first stage element found in it."""
    table = []
    for c in L.classes():
        for i in range(1, D.N + 1):
            hit = next((x for x in D.stage(i).all_elements()
                        if seq_equiv(embed_stage(D, i, x), c) is Decision.TRUE), None)
            if hit is not None:
                table.append((c, psi(i)(hit)))
                break

    def value(c):
        return next(v for k, v in table if L.equal(k, c) is Decision.TRUE)

    return value


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_universal_property_on_random_diagrams(seed):
    rng = random.Random(seed)
    D = random_diagram(rng)
    T, psi = random_cone(D, rng)
    omega = universal_map(D, T, psi)
    assert check_factorisation(D, omega, psi)
    L = LimitObject(D)
    cand = brute_force_candidate(D, T, psi, L)
    assert check_uniqueness(D, T, psi, omega, candidate=cand)
